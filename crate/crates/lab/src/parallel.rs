//! Deterministic parallel map over seeds.

use rayon::prelude::*;

use crossover_core::rng::derive_seed;

/// Seed of task `index` of a run: adding tasks never perturbs existing ones.
pub fn task_seed(master_seed: u64, index: u64) -> u64 {
    derive_seed(master_seed, index)
}

/// Applies `f` to every item on `workers` threads (0 = all cores) and returns
/// the results in input order, whatever the completion order.
pub fn map_ordered<I, T, F>(workers: usize, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    pool.install(|| items.par_iter().map(f).collect())
}

/// [`map_ordered`] over task indices `start..start + count` of a master seed.
pub fn map_seeds<T, F>(workers: usize, master_seed: u64, start: u64, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    let indices: Vec<u64> = (start..start + count).collect();
    map_ordered(workers, &indices, |&i| f(i, task_seed(master_seed, i)))
}
