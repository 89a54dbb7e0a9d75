//! Pair counts in sub-boxes of a growing segment: `k P(N ≥ 2)` per box
//! should shrink with `L` while the second moment of the full count stays put.

use crossover_core::spectrum::{EigenSolveConfig, EigenSolver};
use crossover_core::Scale;
use serde::Serialize;

use crate::parallel::map_seeds;
use crate::report::{SeedSpan, TestReport};
use crate::stats;
use crate::LabError;

#[derive(Debug, Clone, PartialEq)]
pub struct MinamiConfig {
    pub lengths: Vec<f64>,
    pub center: f64,
    pub half_width: f64,
    pub scale: f64,
    pub step: f64,
    pub first_seed: u64,
    pub seeds: u64,
    /// Ceiling on `E[N²]` of the full-window count.
    pub second_moment_cap: f64,
}

impl MinamiConfig {
    pub fn new(lengths: Vec<f64>, seeds: u64) -> Self {
        Self { lengths, center: 1.0, half_width: 1.0, scale: 1.0, step: 0.01, first_seed: 0, seeds, second_moment_cap: 12.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinamiLevel {
    pub length: f64,
    pub boxes: usize,
    /// `k P(N_box ≥ 2)` and its standard error.
    pub pair_rate: f64,
    pub pair_rate_se: f64,
    pub pair_events: u64,
    pub mean_count: f64,
    pub second_moment: f64,
    pub failed_tasks: u64,
}

/// `⌊(L/E)^{1/4}⌋`, at least 1.
pub fn box_count(length: f64, scale: f64) -> usize {
    ((length / scale).powf(0.25).floor() as usize).max(1)
}

struct SeedCounts {
    pairs: usize,
    total: u64,
}

fn seed_counts(solver: &EigenSolver, boxes: usize, seed: u64) -> Result<SeedCounts, LabError> {
    let path = solver.generate_path(seed)?;
    let (lo, hi) = solver.window();
    let cells = path.cells();
    let mut pairs = 0;
    for b in 0..boxes {
        let (ia, ib) = (b * cells / boxes, (b + 1) * cells / boxes);
        let (ta, tb) = (path.node_time(ia), path.node_time(ib));
        let n = solver.count_below_on(&path, ta, tb, hi)? - solver.count_below_on(&path, ta, tb, lo)?;
        if n >= 2 {
            pairs += 1;
        }
    }
    let total = solver.count_below(&path, hi)? - solver.count_below(&path, lo)?;
    Ok(SeedCounts { pairs, total })
}

pub fn minami_level(cfg: &MinamiConfig, length: f64, master_seed: u64, workers: usize) -> Result<MinamiLevel, LabError> {
    let solver = EigenSolver::new(EigenSolveConfig {
        scale: Scale::new(cfg.scale)?,
        step: cfg.step,
        ..EigenSolveConfig::new(length, cfg.center, cfg.half_width)
    })?;
    let boxes = box_count(length, cfg.scale);
    let results = map_seeds(workers, master_seed, cfg.first_seed, cfg.seeds, |_, s| seed_counts(&solver, boxes, s));
    let mut rates = Vec::new();
    let mut counts = Vec::new();
    let mut squares = Vec::new();
    let mut events = 0;
    let mut failed = 0;
    for r in results {
        match r {
            Ok(c) => {
                events += c.pairs as u64;
                rates.push(c.pairs as f64);
                counts.push(c.total as f64);
                squares.push((c.total * c.total) as f64);
            }
            Err(_) => failed += 1,
        }
    }
    if rates.len() < 2 {
        return Err(LabError::Insufficient(format!("no successful seeds at L = {length}")));
    }
    // per seed, the number of boxes with a pair has mean k P(N ≥ 2)
    Ok(MinamiLevel {
        length,
        boxes,
        pair_rate: stats::mean(&rates),
        pair_rate_se: stats::std_error(&rates),
        pair_events: events,
        mean_count: stats::mean(&counts),
        second_moment: stats::mean(&squares),
        failed_tasks: failed,
    })
}

/// One level per length, then a trend verdict (each step down by more than
/// two combined standard errors) and a second-moment verdict.
pub fn minami_run(cfg: &MinamiConfig, master_seed: u64, workers: usize) -> Result<(Vec<MinamiLevel>, Vec<TestReport>), LabError> {
    let levels = cfg
        .lengths
        .iter()
        .map(|&l| minami_level(cfg, l, master_seed, workers))
        .collect::<Result<Vec<_>, _>>()?;
    let events: u64 = levels.iter().map(|l| l.pair_events).sum();
    if events < 10 {
        return Err(LabError::Insufficient(format!("only {events} pair events; raise the seed count")));
    }
    let seeds = SeedSpan { master: master_seed, start: cfg.first_seed, count: cfg.seeds };
    let mut margin = f64::INFINITY;
    for w in levels.windows(2) {
        let se = w[0].pair_rate_se.hypot(w[1].pair_rate_se);
        margin = margin.min((w[0].pair_rate - w[1].pair_rate) / se);
    }
    let trend = TestReport::check("minami_decreasing", margin, 2.0, margin > 2.0, levels.len(), seeds);
    let worst = levels.iter().map(|l| l.second_moment).fold(0.0, f64::max);
    let bounded = TestReport::check("count_second_moment", worst, cfg.second_moment_cap, worst <= cfg.second_moment_cap, levels.len(), seeds);
    Ok((levels, vec![trend, bounded]))
}
