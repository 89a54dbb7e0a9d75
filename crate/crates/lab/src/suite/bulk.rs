//! Per-seed spectra in an energy window: eigenvalues, eigenpairs and the
//! rescaled point process.

use crossover_core::measure::GridMeasure;
use crossover_core::spectrum::{EigenSolveConfig, EigenSolver};
use crossover_core::Scale;

use crate::parallel::map_seeds;
use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkConfig {
    pub length: f64,
    pub center: f64,
    pub half_width: f64,
    pub scale: f64,
    pub step: f64,
    pub lambda_tol: Option<f64>,
    pub match_tol: f64,
    pub eigenpairs: bool,
    pub keep_shapes: bool,
}

impl BulkConfig {
    pub fn new(length: f64, center: f64, half_width: f64) -> Self {
        Self { length, center, half_width, scale: 1.0, step: 0.01, lambda_tol: None, match_tol: 1e-3, eigenpairs: false, keep_shapes: false }
    }

    pub fn solver(&self) -> Result<EigenSolver, LabError> {
        let cfg = EigenSolveConfig {
            scale: Scale::new(self.scale)?,
            lambda_tol: self.lambda_tol,
            match_tol: self.match_tol,
            step: self.step,
            ..EigenSolveConfig::new(self.length, self.center, self.half_width)
        };
        Ok(EigenSolver::new(cfg)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSummary {
    pub lambda: f64,
    pub center: f64,
    pub decay_rate: Option<f64>,
    pub match_defect: f64,
    pub second_moment: f64,
    pub shape: Option<GridMeasure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSpectrum {
    pub index: u64,
    pub seed: u64,
    pub eigenvalues: Vec<f64>,
    pub pairs: Vec<PairSummary>,
    pub error: Option<String>,
}

fn solve_seed(solver: &EigenSolver, cfg: &BulkConfig, index: u64, seed: u64) -> SeedSpectrum {
    let mut out = SeedSpectrum { index, seed, eigenvalues: Vec::new(), pairs: Vec::new(), error: None };
    let result = (|| -> Result<(), LabError> {
        let path = solver.generate_path(seed)?;
        out.eigenvalues = solver.eigenvalues_in(&path)?;
        if cfg.eigenpairs {
            for &l in &out.eigenvalues {
                let p = solver.eigenfunction(&path, l)?;
                out.pairs.push(PairSummary {
                    lambda: p.lambda,
                    center: p.center,
                    decay_rate: p.decay_rate,
                    match_defect: p.match_defect,
                    second_moment: p.shape.second_moment(),
                    shape: cfg.keep_shapes.then_some(p.shape),
                });
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        out.error = Some(e.to_string());
    }
    out
}

/// Solves tasks `start..start + count` of `master_seed`, results in task order.
pub fn run_bulk(cfg: &BulkConfig, master_seed: u64, start: u64, count: u64, workers: usize) -> Result<Vec<SeedSpectrum>, LabError> {
    let solver = cfg.solver()?;
    Ok(map_seeds(workers, master_seed, start, count, |i, s| solve_seed(&solver, cfg, i, s)))
}

/// Rescaled points `(L n (λ - E), U / L)` per realization.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    pub half_width: f64,
    pub realizations: Vec<Vec<(f64, f64)>>,
}

impl PointSample {
    pub fn from_runs(cfg: &BulkConfig, runs: &[SeedSpectrum]) -> Result<Self, LabError> {
        let solver = cfg.solver()?;
        let realizations = runs
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| r.pairs.iter().map(|p| solver.rescale_point(p.lambda, p.center)).collect())
            .collect();
        Ok(Self { half_width: cfg.half_width, realizations })
    }

    pub fn counts(&self) -> Vec<f64> {
        self.realizations.iter().map(|r| r.len() as f64).collect()
    }
}
