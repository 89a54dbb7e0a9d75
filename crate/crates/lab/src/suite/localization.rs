//! Envelope decay of Bulk eigenfunctions against half the Lyapunov rate.

use crossover_core::Scale;
use serde::Serialize;

use crate::cache;
use crate::report::{SeedSpan, TestReport};
use crate::stats;
use crate::suite::bulk::{run_bulk, BulkConfig};
use crate::LabError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationResult {
    pub pairs: usize,
    pub seeds_used: u64,
    pub mean_rate: f64,
    pub rate_se: f64,
    pub target: f64,
    pub max_defect: f64,
    /// Eigenpairs whose gluing failed or whose decay could not be fitted.
    pub failures: usize,
}

/// Solves seeds in batches until `pairs` eigenpairs are collected; the first
/// `pairs` in task order are kept.
pub fn localization_run(cfg: &BulkConfig, pairs: usize, master_seed: u64, workers: usize) -> Result<LocalizationResult, LabError> {
    let cfg = BulkConfig { eigenpairs: true, keep_shapes: false, ..*cfg };
    let batch = ((pairs as f64 / (2.0 * cfg.half_width)).ceil() as u64).max(1);
    let mut rates = Vec::new();
    let mut max_defect = 0.0f64;
    let mut failures = 0;
    let mut next = 0;
    while rates.len() + failures < pairs {
        if next > 100 * batch {
            return Err(LabError::Insufficient(format!("only {} eigenpairs after {next} seeds", rates.len())));
        }
        for run in run_bulk(&cfg, master_seed, next, batch, workers)? {
            if run.error.is_some() {
                failures += 1;
            }
            for p in &run.pairs {
                if rates.len() + failures == pairs {
                    break;
                }
                max_defect = max_defect.max(p.match_defect);
                match p.decay_rate {
                    Some(r) => rates.push(r),
                    None => failures += 1,
                }
            }
        }
        next += batch;
    }
    let nu = cache::global().oracle(cfg.center, Scale::new(cfg.scale)?, 1e-10)?.nu;
    Ok(LocalizationResult {
        pairs: rates.len(),
        seeds_used: next,
        mean_rate: stats::mean(&rates),
        rate_se: stats::std_error(&rates),
        target: 0.5 * nu,
        max_defect,
        failures,
    })
}

pub fn localization_reports(res: &LocalizationResult, match_tol: f64, seeds: SeedSpan) -> Vec<TestReport> {
    let rel = res.mean_rate / res.target - 1.0;
    vec![
        TestReport::check("decay_rate_vs_half_lyapunov", rel, 0.3, rel.abs() <= 0.3, res.pairs, seeds),
        TestReport::check("match_defect_max", res.max_defect, match_tol, res.failures == 0 && res.max_defect <= match_tol, res.pairs, seeds),
    ]
}
