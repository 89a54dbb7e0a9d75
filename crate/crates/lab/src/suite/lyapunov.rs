//! Three estimates of the Lyapunov rate: quadrature, renewal ratio over
//! rotation cycles and the slope of `ρ` along long trajectories.

use crossover_core::flow::{evolve_final, rotation_times, FlowParams, PhaseState};
use crossover_core::noise::NoisePath;
use crossover_core::rng::{block, unit_closed_open};
use crossover_core::Scale;
use serde::Serialize;

use crate::cache;
use crate::parallel::{map_ordered, task_seed};
use crate::report::{SeedSpan, TestReport};
use crate::stats;
use crate::LabError;

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovConfig {
    pub lambda: f64,
    pub scale: f64,
    pub step: f64,
    pub rotation_paths: u64,
    pub rotations_per_path: usize,
    pub slope_paths: u64,
    pub slope_time: f64,
}

impl LyapunovConfig {
    pub fn new(lambda: f64) -> Self {
        Self { lambda, scale: 1.0, step: 1.0 / 128.0, rotation_paths: 64, rotations_per_path: 500, slope_paths: 200, slope_time: 200.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovResult {
    pub quadrature: Estimate,
    pub renewal: Estimate,
    pub slope: Estimate,
}

// Smallest dyadic interval [0, 2^k step] covering `t`.
fn dyadic_path(seed: u64, t: f64, step: f64) -> Result<NoisePath, LabError> {
    let level = (t / step).log2().ceil().max(0.0) as u32;
    Ok(NoisePath::generate(seed, 0.0, step * (1u64 << level) as f64, level)?)
}

pub fn lyapunov_run(cfg: &LyapunovConfig, master_seed: u64, workers: usize) -> Result<LyapunovResult, LabError> {
    let scale = Scale::new(cfg.scale)?;
    let oracle = cache::global().oracle(cfg.lambda, scale, 1e-10)?;
    let params = FlowParams::new(cfg.lambda, scale).with_step(cfg.step);

    // a path long enough for the requested rotations with a wide margin
    let horizon = 1.5 * cfg.rotations_per_path as f64 * oracle.m + 50.0;
    let paths: Vec<u64> = (0..cfg.rotation_paths).collect();
    let cycles = map_ordered(workers, &paths, |&i| -> Result<Vec<(f64, f64)>, LabError> {
        let path = dyadic_path(task_seed(master_seed, i), horizon, cfg.step)?;
        let r = rotation_times(&path, &params, cfg.rotations_per_path)?;
        Ok(r.into_iter().map(|s| (s.rho_gain, s.duration)).collect())
    });
    let mut gains = Vec::new();
    let mut durations = Vec::new();
    for c in cycles {
        for (g, d) in c? {
            gains.push(g);
            durations.push(d);
        }
    }
    let (ratio, ratio_se) = stats::ratio_estimate(&gains, &durations);

    let table = cache::global().table(cfg.lambda, scale)?;
    let offset = cfg.rotation_paths;
    let slope_seeds: Vec<u64> = (offset..offset + cfg.slope_paths).collect();
    let slopes = map_ordered(workers, &slope_seeds, |&i| -> Result<f64, LabError> {
        let seed = task_seed(master_seed, i);
        let path = dyadic_path(seed, cfg.slope_time, cfg.step)?;
        // start from the invariant law so the slope has no transient bias
        let theta0 = table.sample_mu(unit_closed_open(block(seed, u64::MAX, 0).0));
        let end = evolve_final(&path, &params, &PhaseState::new(0.0, theta0), cfg.slope_time)?;
        Ok(end.rho / cfg.slope_time)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    Ok(LyapunovResult {
        quadrature: Estimate { value: oracle.nu, std_error: 0.0 },
        renewal: Estimate { value: ratio, std_error: ratio_se },
        slope: Estimate { value: stats::mean(&slopes), std_error: stats::std_error(&slopes) },
    })
}

/// Pairwise agreement within three combined standard errors.
pub fn lyapunov_reports(res: &LyapunovResult, seeds: SeedSpan) -> Vec<TestReport> {
    let pairs = [
        ("lyapunov_quadrature_vs_renewal", res.quadrature, res.renewal),
        ("lyapunov_quadrature_vs_slope", res.quadrature, res.slope),
        ("lyapunov_renewal_vs_slope", res.renewal, res.slope),
    ];
    pairs
        .iter()
        .map(|(name, a, b)| {
            let se = a.std_error.hypot(b.std_error);
            let z = (a.value - b.value).abs() / se;
            TestReport::check(name, z, 3.0, z <= 3.0, 2, seeds)
        })
        .collect()
}
