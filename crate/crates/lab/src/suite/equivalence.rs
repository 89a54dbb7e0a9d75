//! Shooting eigenvalues against the finite-difference oracle on shared noise.

use crossover_core::lattice::TridiagonalOperator;
use crossover_core::noise::NoisePath;
use crossover_core::spectrum::{EigenSolveConfig, EigenSolver};
use serde::Serialize;

use crate::parallel::map_seeds;
use crate::report::{SeedSpan, TestReport};
use crate::LabError;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceConfig {
    pub length: f64,
    pub lambda_max: f64,
    /// Dyadic level of the coarse grid; the mesh is `length / 2^level`.
    pub level: u32,
    pub seeds: u64,
    pub lambda_tol: f64,
}

impl EquivalenceConfig {
    pub fn new(seeds: u64) -> Self {
        Self { length: 10.0, lambda_max: 10.0, level: 13, seeds, lambda_tol: 1e-10 }
    }

    pub fn mesh(&self) -> f64 {
        self.length / (1u64 << self.level) as f64
    }
}

/// Eigenvalues below `lambda_max` from both solvers at the mesh and at half of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedComparison {
    pub index: u64,
    pub seed: u64,
    pub shooting: Vec<f64>,
    pub shooting_fine: Vec<f64>,
    pub lattice: Vec<f64>,
    pub lattice_fine: Vec<f64>,
}

impl SeedComparison {
    pub fn counts_agree(&self) -> bool {
        let n = self.shooting.len();
        self.shooting_fine.len() == n && self.lattice.len() == n && self.lattice_fine.len() == n
    }

    /// `(|Δ shooting| + |Δ lattice|) / (h (1 + |λ|))` under mesh halving.
    fn refinement_ratios(&self, mesh: f64) -> impl Iterator<Item = f64> + '_ {
        (0..self.shooting.len()).map(move |i| {
            let d = (self.shooting[i] - self.shooting_fine[i]).abs() + (self.lattice[i] - self.lattice_fine[i]).abs();
            d / (mesh * (1.0 + self.lattice[i].abs()))
        })
    }
}

fn compare_seed(cfg: &EquivalenceConfig, index: u64, seed: u64) -> Result<SeedComparison, LabError> {
    let half = 0.5 * cfg.length;
    let mesh = cfg.mesh();
    let path = NoisePath::generate(seed, -half, half, cfg.level)?;
    let fine = path.refine()?;
    let shoot = |p: &NoisePath| -> Result<Vec<f64>, LabError> {
        let solver = EigenSolver::with_dos(
            EigenSolveConfig {
                lambda_tol: Some(cfg.lambda_tol),
                step: p.cell_width(),
                ..EigenSolveConfig::new(cfg.length, 0.5 * cfg.lambda_max, 1.0)
            },
            1.0,
        )?;
        let floor = solver.spectrum_floor(p)?;
        Ok(solver.eigenvalues_between(p, floor, cfg.lambda_max)?)
    };
    let lattice = |p: &NoisePath, h: f64| -> Result<Vec<f64>, LabError> {
        let op = TridiagonalOperator::from_path(p, h)?;
        // Gershgorin: nothing lies below min(diag) - 2/h²
        let floor = op.diagonal().iter().copied().fold(f64::INFINITY, f64::min) - 2.0 / (h * h) - 1.0;
        Ok(op.eigenvalues_bisect(floor, cfg.lambda_max, cfg.lambda_tol)?)
    };
    Ok(SeedComparison {
        index,
        seed,
        shooting: shoot(&path)?,
        shooting_fine: shoot(&fine)?,
        lattice: lattice(&path, mesh)?,
        lattice_fine: lattice(&fine, 0.5 * mesh)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceResult {
    pub mesh: f64,
    pub seeds: Vec<SeedComparison>,
    /// Largest refinement ratio over the battery.
    pub refinement_constant: f64,
    /// Largest `|shooting - lattice| / tolerance` over all eigenvalues.
    pub worst_ratio: f64,
    pub count_mismatches: usize,
    pub eigenvalues: usize,
}

/// Tolerance for eigenvalue `λ`: three times the pooled refinement constant
/// times `h (1 + |λ|)`, plus the bisection tolerances.
pub fn tolerance(refinement_constant: f64, mesh: f64, lambda: f64, lambda_tol: f64) -> f64 {
    3.0 * refinement_constant * mesh * (1.0 + lambda.abs()) + 2.0 * lambda_tol
}

pub fn equivalence_run(cfg: &EquivalenceConfig, master_seed: u64, workers: usize) -> Result<EquivalenceResult, LabError> {
    let seeds = map_seeds(workers, master_seed, 0, cfg.seeds, |i, s| compare_seed(cfg, i, s))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mesh = cfg.mesh();
    let count_mismatches = seeds.iter().filter(|s| !s.counts_agree()).count();
    let matched: Vec<&SeedComparison> = seeds.iter().filter(|s| s.counts_agree()).collect();
    let refinement_constant = matched.iter().flat_map(|s| s.refinement_ratios(mesh)).fold(0.0, f64::max);
    let mut worst_ratio = 0.0f64;
    let mut eigenvalues = 0;
    for s in &matched {
        for (a, b) in s.shooting.iter().zip(&s.lattice) {
            worst_ratio = worst_ratio.max((a - b).abs() / tolerance(refinement_constant, mesh, *b, cfg.lambda_tol));
            eigenvalues += 1;
        }
    }
    Ok(EquivalenceResult { mesh, seeds, refinement_constant, worst_ratio, count_mismatches, eigenvalues })
}

pub fn equivalence_reports(res: &EquivalenceResult, seeds: SeedSpan) -> Vec<TestReport> {
    vec![
        TestReport::check("oracle_count_mismatches", res.count_mismatches as f64, 0.0, res.count_mismatches == 0, res.seeds.len(), seeds),
        TestReport::check("oracle_worst_tolerance_ratio", res.worst_ratio, 1.0, res.worst_ratio <= 1.0, res.eigenvalues, seeds),
    ]
}
