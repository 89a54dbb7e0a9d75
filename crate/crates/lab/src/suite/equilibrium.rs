//! Relaxation of the phase law towards the invariant density from two
//! starting phases driven by common noise.

use std::f64::consts::PI;

use crossover_core::closed_form::InvariantTable;
use crossover_core::flow::{evolve_final, FlowParams, PhaseState, Scheme};
use crossover_core::noise::NoisePath;
use crossover_core::Scale;
use serde::Serialize;

use crate::cache;
use crate::parallel::map_ordered;
use crate::report::{SeedSpan, TestReport};
use crate::stats;
use crate::LabError;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumConfig {
    pub lambda: f64,
    pub scale: f64,
    pub paths: u64,
    pub bins: usize,
    /// Observation times, increasing multiples of the cell width.
    pub times: Vec<f64>,
    /// Cell width, a power of two.
    pub cell: f64,
    pub chunk: u64,
}

impl EquilibriumConfig {
    pub fn new(paths: u64) -> Self {
        Self {
            lambda: 1.0,
            scale: 1.0,
            paths,
            bins: 64,
            times: (2..=20).map(|k| 0.5 * k as f64).collect(),
            cell: 1.0 / 128.0,
            chunk: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub times: Vec<f64>,
    pub initial_phases: [f64; 2],
    /// Sup over bins of `|histogram density - bin average of μ|`, per start and time.
    pub distances: [Vec<f64>; 2],
    /// Sup distance between the two histograms at each time.
    pub gap: Vec<f64>,
    pub noise_floor: f64,
    pub rate: f64,
    pub rate_se: f64,
    pub fitted_points: usize,
    /// Decay rate of the gap between the two curves.
    pub gap_rate: f64,
    pub gap_rate_se: f64,
    pub gap_points: usize,
}

// Log-linear fit of `values` against `times` over the points above `floor`.
fn decay_fit<'a>(times: &[f64], curves: impl IntoIterator<Item = &'a Vec<f64>>, floor: f64) -> (f64, f64, usize) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for c in curves {
        for (&t, &d) in times.iter().zip(c) {
            if d > floor {
                xs.push(t);
                ys.push(d.ln());
            }
        }
    }
    if xs.len() < 3 {
        return (f64::NAN, f64::NAN, xs.len());
    }
    let (slope, _, se) = stats::linear_fit(&xs, &ys);
    (-slope, se, xs.len())
}

type Histograms = Vec<[Vec<u64>; 2]>;

fn bin_of(theta: f64, bins: usize) -> usize {
    let a = theta.rem_euclid(PI);
    ((a / PI * bins as f64) as usize).min(bins - 1)
}

fn chunk_histograms(cfg: &EquilibriumConfig, params: &FlowParams, master_seed: u64, first: u64, count: u64) -> Result<Histograms, LabError> {
    let t_end = *cfg.times.last().expect("at least one time");
    let cells = (t_end / cfg.cell).ceil().max(1.0);
    let level = cells.log2().ceil() as u32;
    let span = cfg.cell * (1u64 << level) as f64;
    let mut hist: Histograms = cfg.times.iter().map(|_| [vec![0; cfg.bins], vec![0; cfg.bins]]).collect();
    for i in first..first + count {
        let path = NoisePath::generate(crate::parallel::task_seed(master_seed, i), 0.0, span, level)?;
        for (side, theta0) in [0.0, 0.5 * PI].into_iter().enumerate() {
            let mut state = PhaseState::new(0.0, theta0);
            for (k, &t) in cfg.times.iter().enumerate() {
                state = evolve_final(&path, params, &state, t)?;
                hist[k][side][bin_of(state.theta(), cfg.bins)] += 1;
            }
        }
    }
    Ok(hist)
}

/// Bin averages of `μ` over the histogram bins.
pub fn reference_bins(table: &InvariantTable, bins: usize) -> Vec<f64> {
    let w = PI / bins as f64;
    (0..bins).map(|b| (table.mu_cdf((b + 1) as f64 * w) - table.mu_cdf(b as f64 * w)) / w).collect()
}

pub fn equilibrium_run(cfg: &EquilibriumConfig, master_seed: u64, workers: usize) -> Result<EquilibriumResult, LabError> {
    if cfg.times.is_empty() || cfg.bins == 0 || cfg.paths == 0 {
        return Err(LabError::Config("equilibrium run needs times, bins and paths".into()));
    }
    let scale = Scale::new(cfg.scale)?;
    let table = cache::global().table(cfg.lambda, scale)?;
    let params = FlowParams::new(cfg.lambda, scale).with_step(cfg.cell).with_scheme(Scheme::CellExact);
    let chunk = cfg.chunk.max(1);
    let starts: Vec<u64> = (0..cfg.paths).step_by(chunk as usize).collect();
    let parts = map_ordered(workers, &starts, |&s| chunk_histograms(cfg, &params, master_seed, s, chunk.min(cfg.paths - s)));
    let mut hist: Histograms = cfg.times.iter().map(|_| [vec![0; cfg.bins], vec![0; cfg.bins]]).collect();
    for part in parts {
        for (acc, h) in hist.iter_mut().zip(part?) {
            for side in 0..2 {
                acc[side].iter_mut().zip(&h[side]).for_each(|(a, b)| *a += b);
            }
        }
    }
    let reference = reference_bins(&table, cfg.bins);
    let w = PI / cfg.bins as f64;
    let n = cfg.paths as f64;
    let density = |counts: &[u64]| counts.iter().map(|&c| c as f64 / (n * w)).collect::<Vec<_>>();
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut distances = [Vec::new(), Vec::new()];
    let mut gap = Vec::new();
    for h in &hist {
        let d0 = density(&h[0]);
        let d1 = density(&h[1]);
        distances[0].push(sup(&d0, &reference));
        distances[1].push(sup(&d1, &reference));
        gap.push(sup(&d0, &d1));
    }
    // Binomial standard deviation of a bin density at the typical bin mass
    let noise_floor = (1.0 / (cfg.bins as f64 * n)).sqrt() / w;
    let (rate, rate_se, fitted_points) = decay_fit(&cfg.times, &distances, 3.0 * noise_floor);
    let (gap_rate, gap_rate_se, gap_points) = decay_fit(&cfg.times, [&gap], 3.0 * 2f64.sqrt() * noise_floor);
    Ok(EquilibriumResult {
        times: cfg.times.clone(),
        initial_phases: [0.0, 0.5 * PI],
        distances,
        gap,
        noise_floor,
        rate,
        rate_se,
        fitted_points,
        gap_rate,
        gap_rate_se,
        gap_points,
    })
}

/// Positive decay rate beyond three standard errors, and the two curves
/// merging: their gap either decays the same way or ends within sampling noise.
pub fn equilibrium_reports(res: &EquilibriumResult, seeds: SeedSpan) -> Vec<TestReport> {
    let margin = res.rate / res.rate_se;
    let decay = TestReport::check("equilibrium_rate", res.rate, 3.0 * res.rate_se, res.fitted_points >= 3 && margin > 3.0, res.fitted_points, seeds);
    let last = *res.gap.last().unwrap_or(&f64::NAN);
    let tol = 3.0 * 2f64.sqrt() * res.noise_floor;
    let decaying = res.gap_points >= 3 && res.gap_rate > 3.0 * res.gap_rate_se;
    let merge = TestReport::check("equilibrium_merge", last, tol, last <= tol || decaying, res.gap_points, seeds);
    vec![decay, merge]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_bins_integrate_to_one() {
        let table = cache::global().table(1.0, Scale::ORIGINAL).unwrap();
        let r = reference_bins(&table, 64);
        let total: f64 = r.iter().sum::<f64>() * PI / 64.0;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bins_wrap_modulo_pi() {
        assert_eq!(bin_of(0.0, 8), 0);
        assert_eq!(bin_of(PI + 0.01, 8), 0);
        assert_eq!(bin_of(-0.01, 8), 7);
        assert_eq!(bin_of(PI - 1e-15, 8), 7);
    }

    #[test]
    fn small_run_is_chunking_invariant() {
        let mut cfg = EquilibriumConfig::new(60);
        cfg.times = vec![0.5, 1.0];
        cfg.chunk = 7;
        let a = equilibrium_run(&cfg, 3, 1).unwrap();
        cfg.chunk = 60;
        let b = equilibrium_run(&cfg, 3, 2).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
