//! Eigenvalues and eigenfunctions of `-d²/dx² + ξ` on `[-L/2, L/2]` with
//! Dirichlet conditions, by shooting with the phase of the forward diffusion.
//!
//! The number of eigenvalues `≤ λ` is the winding `⌊θ_λ(L/2)⌋_π` of the phase
//! started at 0 on the left end. Solves run in the original coordinates with
//! the cell-exact scheme, so the count is exactly non-decreasing in `λ` and
//! the forward and backward solutions at an eigenvalue glue without defect up
//! to the eigenvalue tolerance.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::closed_form;
use crate::flow::{self, FlowParams, PhaseState, Scheme};
use crate::measure::GridMeasure;
use crate::noise::NoisePath;
use crate::scale::Scale;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSolveConfig {
    /// Segment length `L`.
    pub length: f64,
    /// Scale `E` used to rescale shapes (`w(dt) = E φ(U + tE)² dt`).
    pub scale: Scale,
    /// Center energy of the window.
    pub center: f64,
    /// Window half-width `h` in units of the mean level spacing.
    pub half_width: f64,
    /// Absolute eigenvalue tolerance; defaults to `1e-9` times the window width.
    pub lambda_tol: Option<f64>,
    /// Largest accepted gluing defect, in radians.
    pub match_tol: f64,
    /// Integration step (cells of the driving path are at most this wide).
    pub step: f64,
    /// Approximate number of eigenfunction grid points.
    pub grid_points: usize,
    pub max_bisections: u32,
}

impl EigenSolveConfig {
    pub fn new(length: f64, center: f64, half_width: f64) -> Self {
        Self {
            length,
            scale: Scale::ORIGINAL,
            center,
            half_width,
            lambda_tol: None,
            match_tol: 1e-3,
            step: 0.01,
            grid_points: 4096,
            max_bisections: 80,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::InvalidParameter("segment length must be positive"));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::InvalidParameter("window half-width must be positive"));
        }
        if !(self.step > 0.0) {
            return Err(Error::InvalidParameter("step must be positive"));
        }
        if !(self.match_tol > 0.0) {
            return Err(Error::InvalidParameter("match tolerance must be positive"));
        }
        if let Some(t) = self.lambda_tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter("eigenvalue tolerance must be positive"));
            }
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidParameter("eigenfunction grid needs at least 2 points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Center of mass `∫ t φ² dt`.
    pub center: f64,
    pub times: Vec<f64>,
    /// `φ` on `times`, normalized so that `Σ φ² Δt = 1`.
    pub samples: Vec<f64>,
    /// `E φ(U + tE)² dt` on the grid.
    pub shape: GridMeasure,
    /// Fitted exponential rate of the envelope, per unit of `t / E`.
    pub decay_rate: Option<f64>,
    /// `{θ⁺(u) + θ⁻(-u)}_π` at the gluing point, in `(-π/2, π/2]`.
    pub match_defect: f64,
    pub junction: f64,
}

/// Shooting solver for one window `[E - h/(L n(E)), E + h/(L n(E))]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSolver {
    config: EigenSolveConfig,
    dos: f64,
}

impl EigenSolver {
    pub fn new(config: EigenSolveConfig) -> Result<Self> {
        config.validate()?;
        let dos = closed_form::dos(config.center)?;
        Ok(Self { config, dos })
    }

    /// Uses a known density of states at the center energy.
    pub fn with_dos(config: EigenSolveConfig, dos: f64) -> Result<Self> {
        config.validate()?;
        if !(dos > 0.0) {
            return Err(Error::InvalidParameter("density of states must be positive"));
        }
        Ok(Self { config, dos })
    }

    pub fn config(&self) -> &EigenSolveConfig {
        &self.config
    }

    pub fn dos(&self) -> f64 {
        self.dos
    }

    pub fn window(&self) -> (f64, f64) {
        let w = self.config.half_width / (self.config.length * self.dos);
        (self.config.center - w, self.config.center + w)
    }

    pub fn lambda_tol(&self) -> f64 {
        let (lo, hi) = self.window();
        self.config.lambda_tol.unwrap_or(1e-9 * (hi - lo))
    }

    /// A path on `[-L/2, L/2]` with cells no wider than the step.
    pub fn generate_path(&self, seed: u64) -> Result<NoisePath> {
        let half = 0.5 * self.config.length;
        let level = (self.config.length / self.config.step).log2().ceil().max(0.0) as u32;
        NoisePath::generate(seed, -half, half, level)
    }

    fn check_path(&self, path: &NoisePath) -> Result<()> {
        let half = 0.5 * self.config.length;
        let (t0, t1) = path.interval();
        if (t0 + half).abs() > 1e-9 * half || (t1 - half).abs() > 1e-9 * half {
            return Err(Error::InvalidParameter("path must span [-L/2, L/2]"));
        }
        if path.cell_width() > self.config.step * (1.0 + 1e-9) {
            return Err(Error::PathTooCoarse { dt: path.cell_width(), step: self.config.step });
        }
        Ok(())
    }

    /// `#{λ_i ≤ λ}`.
    pub fn count_below(&self, path: &NoisePath, lambda: f64) -> Result<u64> {
        self.check_path(path)?;
        Ok(flow::winding_cells(path, lambda, Scale::ORIGINAL, 0, path.cells()) as u64)
    }

    /// `#{λ_i ≤ λ}` for the Dirichlet operator restricted to `[t_a, t_b]`.
    pub fn count_below_on(&self, path: &NoisePath, t_a: f64, t_b: f64, lambda: f64) -> Result<u64> {
        self.check_path(path)?;
        let (i0, i1) = (path.node_index(t_a)?, path.node_index(t_b)?);
        if i1 <= i0 {
            return Err(Error::InvalidInterval { t0: t_a, t1: t_b });
        }
        Ok(flow::winding_cells(path, lambda, Scale::ORIGINAL, i0, i1) as u64)
    }

    // Eigenvalues in (lo, hi] given the counts at the ends.
    #[allow(clippy::too_many_arguments)]
    fn isolate(&self, path: &NoisePath, lo: f64, hi: f64, c_lo: u64, c_hi: u64, depth: u32, out: &mut Vec<f64>) -> Result<()> {
        if c_hi == c_lo {
            return Ok(());
        }
        let tol = self.lambda_tol();
        if hi - lo <= tol {
            for _ in c_lo..c_hi {
                out.push(0.5 * (lo + hi));
            }
            return Ok(());
        }
        if depth >= self.config.max_bisections {
            return Err(Error::BisectionBudget { budget: self.config.max_bisections as usize });
        }
        let mid = 0.5 * (lo + hi);
        let c_mid = self.count_below(path, mid)?;
        self.isolate(path, lo, mid, c_lo, c_mid, depth + 1, out)?;
        self.isolate(path, mid, hi, c_mid, c_hi, depth + 1, out)
    }

    /// Eigenvalues in the window, each located to the eigenvalue tolerance.
    /// The window is first scanned at a quarter of the mean spacing.
    pub fn eigenvalues_in(&self, path: &NoisePath) -> Result<Vec<f64>> {
        let (lo, hi) = self.window();
        let needed = ((hi - lo) / self.lambda_tol()).log2().ceil();
        if needed > f64::from(self.config.max_bisections) {
            return Err(Error::BisectionBudget { budget: self.config.max_bisections as usize });
        }
        let spacing = 1.0 / (4.0 * self.config.length * self.dos);
        let cells = ((hi - lo) / spacing).ceil().max(1.0) as usize;
        let mut out = Vec::new();
        let mut prev = (lo, self.count_below(path, lo)?);
        for k in 1..=cells {
            let x = if k == cells { hi } else { lo + (hi - lo) * k as f64 / cells as f64 };
            let c = self.count_below(path, x)?;
            self.isolate(path, prev.0, x, prev.1, c, 0, &mut out)?;
            prev = (x, c);
        }
        Ok(out)
    }

    /// All eigenvalues in `(lo, hi]` by recursive bisection on the count.
    pub fn eigenvalues_between(&self, path: &NoisePath, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if !(hi > lo) {
            return Err(Error::InvalidInterval { t0: lo, t1: hi });
        }
        let (c_lo, c_hi) = (self.count_below(path, lo)?, self.count_below(path, hi)?);
        let mut out = Vec::new();
        self.isolate(path, lo, hi, c_lo, c_hi, 0, &mut out)?;
        Ok(out)
    }

    /// A lower bound of the spectrum on this path.
    pub fn spectrum_floor(&self, path: &NoisePath) -> Result<f64> {
        let mut lo = -50.0f64.min(self.config.center - 1.0);
        while self.count_below(path, lo)? > 0 {
            lo *= 2.0;
            if lo < -1e12 {
                return Err(Error::NoConvergence { residual: lo });
            }
        }
        Ok(lo)
    }

    fn flow_params(&self, path: &NoisePath, lambda: f64) -> (FlowParams, usize) {
        let steps = path.cells();
        let stride = (steps / self.config.grid_points.max(1)).max(1);
        let params = FlowParams::new(lambda, Scale::ORIGINAL)
            .with_step(path.cell_width())
            .with_scheme(Scheme::CellExact)
            .with_stride(stride);
        (params, stride)
    }

    /// Eigenfunction at the polished eigenvalue, glued at the point maximizing
    /// `min(ρ⁺(t), ρ⁻(-t))` on the longest stretch where the phases match.
    pub fn eigenfunction(&self, path: &NoisePath, lambda: f64) -> Result<Eigenpair> {
        self.glue(path, lambda, None)
    }

    /// Eigenfunction glued at the grid point nearest to `junction`.
    pub fn eigenfunction_at(&self, path: &NoisePath, lambda: f64, junction: f64) -> Result<Eigenpair> {
        self.glue(path, lambda, Some(junction))
    }

    /// Narrows the count jump nearest to `lambda` down to adjacent floats.
    pub fn polish(&self, path: &NoisePath, lambda: f64) -> Result<f64> {
        let tol = self.lambda_tol();
        let (mut lo, mut hi) = (lambda - 2.0 * tol, lambda + 2.0 * tol);
        let (c_lo, c_hi) = (self.count_below(path, lo)?, self.count_below(path, hi)?);
        if c_hi != c_lo + 1 {
            return Ok(lambda);
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                return Ok(mid);
            }
            if self.count_below(path, mid)? == c_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    fn glue(&self, path: &NoisePath, lambda: f64, junction: Option<f64>) -> Result<Eigenpair> {
        self.check_path(path)?;
        let lambda = self.polish(path, lambda)?;
        let (params, stride) = self.flow_params(path, lambda);
        let n = path.cells();
        if !n.is_multiple_of(stride) {
            return Err(Error::IncompatibleMesh { mesh: stride as f64 * path.cell_width(), cells: n, dt: path.cell_width() });
        }
        let start = PhaseState::new(path.interval().0, 0.0);
        let fwd = flow::trajectory_cells(path, &params, 0, n, &start)?;
        let reversed = path.time_reverse(0.0)?;
        let bwd = flow::trajectory_cells(&reversed, &params, 0, n, &start)?;
        let m = fwd.samples.len();
        debug_assert_eq!(m, bwd.samples.len());
        // grid node j of the forward run is node m-1-j of the backward run
        let back = |j: usize| &bwd.samples[m - 1 - j];
        let dt = stride as f64 * path.cell_width();
        let defect_at = |j: usize| {
            let sum = fwd.samples[j].theta() + back(j).theta();
            sum - (sum / PI).round() * PI
        };
        let u = match junction {
            Some(t) => ((t - fwd.samples[0].t) / dt).round().clamp(1.0, (m - 2) as f64) as usize,
            None => {
                // Far past the localization center each shot solution is swamped
                // by the growing mode its eigenvalue error excites. Both are valid
                // only on the stretch where the phases agree, so the junction is
                // sought within the longest such run.
                let (mut best, mut run_start) = ((1, 1), None);
                for j in 1..m {
                    let inside = j < m - 1 && defect_at(j).abs() <= self.config.match_tol;
                    match (inside, run_start) {
                        (true, None) => run_start = Some(j),
                        (false, Some(i)) => {
                            if j - i > best.1 - best.0 {
                                best = (i, j);
                            }
                            run_start = None;
                        }
                        _ => {}
                    }
                }
                let range = if best.1 > best.0 { best.0..best.1 } else { 1..m - 1 };
                range
                    .max_by(|&i, &j| {
                        let si = fwd.samples[i].rho.min(back(i).rho);
                        let sj = fwd.samples[j].rho.min(back(j).rho);
                        si.total_cmp(&sj)
                    })
                    .unwrap_or(m / 2)
            }
        };
        let sum = fwd.samples[u].theta() + back(u).theta();
        let k = (sum / PI).round();
        let defect = sum - k * PI;
        let sign = if (k as i64) % 2 == 0 { -1.0 } else { 1.0 };
        let e = self.config.scale.get();
        // log-amplitude and sine factor of the glued solution on the grid
        let mut log_r = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        let mut env_factor = Vec::with_capacity(m);
        for j in 0..m {
            let (state, base, sgn) = if j <= u { (&fwd.samples[j], fwd.samples[u].rho, 1.0) } else { (back(j), back(u).rho, sign) };
            let lr = 0.5 * (state.rho - base);
            let s = state.theta().sin();
            let c = state.theta().cos();
            log_r.push(lr);
            values.push(sgn * s);
            env_factor.push((s * s + c * c / e).sqrt());
        }
        let top = log_r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut samples: Vec<f64> = values.iter().zip(&log_r).map(|(v, l)| v * (l - top).exp()).collect();
        let norm = (samples.iter().map(|v| v * v).sum::<f64>() * dt).sqrt();
        for v in samples.iter_mut() {
            *v /= norm;
        }
        let times: Vec<f64> = fwd.samples.iter().map(|s| s.t).collect();
        let center = times.iter().zip(&samples).map(|(t, v)| t * v * v).sum::<f64>() * dt;
        let weights: Vec<f64> = samples.iter().map(|v| v * v * dt).collect();
        let shape = GridMeasure::new((times[0] - center) / e, dt / e, weights)?;
        let envelope: Vec<f64> = log_r.iter().zip(&env_factor).map(|(l, f)| l - top - norm.ln() + f.ln()).collect();
        let decay_rate = fit_decay(&times, &envelope, center).map(|r| r * e);
        if defect.abs() > self.config.match_tol {
            return Err(Error::MatchDefect { defect, tol: self.config.match_tol });
        }
        Ok(Eigenpair {
            lambda,
            center,
            times,
            samples,
            shape,
            decay_rate,
            match_defect: defect,
            junction: fwd.samples[u].t,
        })
    }

    /// `(L n(E) (λ_i - E), U_i / L)`.
    pub fn rescaled_points(&self, pairs: &[Eigenpair]) -> Vec<(f64, f64)> {
        pairs.iter().map(|p| self.rescale_point(p.lambda, p.center)).collect()
    }

    pub fn rescale_point(&self, lambda: f64, center: f64) -> (f64, f64) {
        let l = self.config.length;
        (l * self.dos * (lambda - self.config.center), center / l)
    }
}

/// Decay rate of `log env` away from `center`: least squares with a common
/// slope and one intercept per side, over points where the envelope lies
/// between `1e-6` and `1e-2` of its maximum.
pub fn fit_decay(times: &[f64], log_env: &[f64], center: f64) -> Option<f64> {
    let top = log_env.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (hi, lo) = (top + (1e-2f64).ln(), top + (1e-6f64).ln());
    // per side: n, Σd, Σy, Σdd, Σdy
    let mut acc = [[0.0f64; 5]; 2];
    for (t, y) in times.iter().zip(log_env) {
        if *y > hi || *y < lo {
            continue;
        }
        let side = usize::from(*t > center);
        let d = (t - center).abs();
        let a = &mut acc[side];
        a[0] += 1.0;
        a[1] += d;
        a[2] += y;
        a[3] += d * d;
        a[4] += d * y;
    }
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for a in &acc {
        if a[0] >= 2.0 {
            sxx += a[3] - a[1] * a[1] / a[0];
            sxy += a[4] - a[1] * a[2] / a[0];
        }
    }
    (sxx > 0.0).then(|| -sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(length: f64, level: u32) -> NoisePath {
        let half = length / 2.0;
        NoisePath::from_increments(0, -half, half, level, &alloc::vec![0.0; 1 << level]).unwrap()
    }

    #[test]
    fn free_dirichlet_spectrum() {
        // eigenvalues (kπ/L)² without noise
        let cfg = EigenSolveConfig { step: 1.0 / 1024.0, ..EigenSolveConfig::new(2.0, 10.0, 1.0) };
        let solver = EigenSolver::with_dos(cfg, 1.0).unwrap();
        let path = quiet(2.0, 11);
        let ev = solver.eigenvalues_between(&path, 0.0, 30.0).unwrap();
        assert_eq!(ev.len(), 3);
        for (k, l) in ev.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI / 2.0).powi(2);
            assert!((l - exact).abs() < 1e-6, "{l} vs {exact}");
        }
        assert_eq!(solver.count_below(&path, -1.0).unwrap(), 0);
    }

    #[test]
    fn free_ground_state_shape() {
        let cfg = EigenSolveConfig { step: 1.0 / 1024.0, grid_points: 512, ..EigenSolveConfig::new(2.0, 2.5, 1.0) };
        let solver = EigenSolver::with_dos(cfg, 1.0).unwrap();
        let path = quiet(2.0, 11);
        let l = solver.eigenvalues_between(&path, 0.0, 5.0).unwrap()[0];
        let pair = solver.eigenfunction(&path, l).unwrap();
        assert!(pair.match_defect.abs() < 1e-6);
        assert!(pair.center.abs() < 1e-6);
        let dt = pair.times[1] - pair.times[0];
        let norm: f64 = pair.samples.iter().map(|v| v * v).sum::<f64>() * dt;
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(pair.samples[0].abs() < 1e-9 && pair.samples.last().unwrap().abs() < 1e-9);
        for (t, v) in pair.times.iter().zip(&pair.samples) {
            let exact = (PI * (t + 1.0) / 2.0).sin();
            assert!((v.abs() - exact).abs() < 1e-5);
        }
    }

    #[test]
    fn decay_fit_recovers_slope() {
        let times: Vec<f64> = (0..2001).map(|i| -50.0 + i as f64 * 0.05).collect();
        let env: Vec<f64> = times.iter().map(|t| 3.0 - 0.4 * (t - 1.0).abs()).collect();
        let r = fit_decay(&times, &env, 1.0).unwrap();
        assert!((r - 0.4).abs() < 1e-12);
    }

    #[test]
    fn rescaled_points_of_window() {
        let cfg = EigenSolveConfig::new(400.0, 1.0, 1.0);
        let solver = EigenSolver::with_dos(cfg, 0.25).unwrap();
        let (lo, hi) = solver.window();
        assert!((solver.rescale_point(lo, 0.0).0 + 1.0).abs() < 1e-12);
        assert!((solver.rescale_point(hi, 0.0).0 - 1.0).abs() < 1e-12);
        assert_eq!(solver.rescale_point(1.0, 0.0), (0.0, 0.0));
    }
}
