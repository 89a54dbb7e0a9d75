//! Finite-difference discretization of `-d²/dx² + ξ` with Dirichlet ends:
//! one unknown per cell of width `h`, the potential being the cell average
//! of the noise. The boundary nodes sit half a cell outside the segment, so
//! the free spectrum is that of a segment of length `L + h`.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::noise::NoisePath;
use crate::{Error, Result};

/// Symmetric tridiagonal matrix with constant off-diagonal `-1/h²`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    mesh: f64,
    origin: f64,
    diagonal: Vec<f64>,
}

impl TridiagonalOperator {
    /// Operator on the interval of `path`, using cells of width `mesh`.
    pub fn from_path(path: &NoisePath, mesh: f64) -> Result<Self> {
        let potential = path.cell_integrals(mesh)?;
        Self::from_potential(path.interval().0 + 0.5 * mesh, mesh, &potential)
    }

    /// `origin` is the position of the first unknown.
    pub fn from_potential(origin: f64, mesh: f64, potential: &[f64]) -> Result<Self> {
        if !(mesh > 0.0) || potential.is_empty() {
            return Err(Error::InvalidParameter("lattice needs a positive mesh and at least one cell"));
        }
        let d = 2.0 / (mesh * mesh);
        Ok(Self { mesh, origin, diagonal: potential.iter().map(|v| d + v).collect() })
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> f64 {
        -1.0 / (self.mesh * self.mesh)
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.origin + i as f64 * self.mesh)
    }

    /// Number of eigenvalues strictly below `lambda`, from the signs of the
    /// pivots of `A - λ`. A zero pivot is nudged up, which only moves
    /// eigenvalues up.
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let e2 = self.off_diagonal().powi(2);
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = 1.0;
        for (i, a) in self.diagonal.iter().enumerate() {
            d = a - lambda - if i == 0 { 0.0 } else { e2 / d };
            if d == 0.0 {
                d = tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalues in `[lo, hi)`, each to absolute accuracy `tol`.
    pub fn eigenvalues_bisect(&self, lo: f64, hi: f64, tol: f64) -> Result<Vec<f64>> {
        if !(hi > lo) {
            return Err(Error::InvalidInterval { t0: lo, t1: hi });
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive"));
        }
        let mut out = Vec::new();
        let mut stack = alloc::vec![(lo, hi, self.sturm_count(lo), self.sturm_count(hi))];
        while let Some((a, b, ca, cb)) = stack.pop() {
            if ca == cb {
                continue;
            }
            let mid = 0.5 * (a + b);
            if b - a <= tol || !(mid > a && mid < b) {
                out.extend(core::iter::repeat_n(mid, cb - ca));
                continue;
            }
            let cm = self.sturm_count(mid);
            stack.push((mid, b, cm, cb));
            stack.push((a, mid, ca, cm));
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    // Solves (A - σ) x = rhs by the Thomas algorithm.
    #[allow(clippy::needless_range_loop)]
    fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let e = self.off_diagonal();
        let n = self.len();
        let tiny = f64::EPSILON * (2.0 / (self.mesh * self.mesh));
        let mut c = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut prev_c = 0.0;
        let mut prev_y = 0.0;
        for i in 0..n {
            let mut d = self.diagonal[i] - sigma - if i == 0 { 0.0 } else { e * prev_c };
            if d.abs() < tiny {
                d = tiny;
            }
            prev_c = e / d;
            prev_y = (rhs[i] - if i == 0 { 0.0 } else { e * prev_y }) / d;
            c.push(prev_c);
            y.push(prev_y);
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        y
    }

    /// Eigenvector for an eigenvalue estimate, normalized to `Σ v² h = 1`
    /// with a positive largest component. Fails when the residual
    /// `max |(A - λ) v| / max |v|` stays above `1e-8` times the operator norm.
    pub fn eigenvector_inverse_iteration(&self, lambda: f64, iterations: usize) -> Result<Vec<f64>> {
        let n = self.len();
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..iterations.max(1) {
            v = self.solve_shifted(lambda, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NoConvergence { residual: f64::INFINITY });
            }
            v.iter_mut().for_each(|x| *x /= norm);
        }
        let peak = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let residual = self.residual(lambda, &v) / peak.abs();
        let scale = self.diagonal.iter().fold(0.0f64, |m, d| m.max(d.abs())) + 2.0 / (self.mesh * self.mesh);
        if !(residual <= 1e-8 * scale) {
            return Err(Error::NoConvergence { residual });
        }
        let norm = (v.iter().map(|x| x * x).sum::<f64>() * self.mesh).sqrt() * peak.signum();
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(v)
    }

    /// `max |(A - λ) v|`.
    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let e = self.off_diagonal();
        (0..v.len())
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = if i + 1 < v.len() { v[i + 1] } else { 0.0 };
                ((self.diagonal[i] - lambda) * v[i] + e * (left + right)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `k`-th eigenvalue (from 1) of the noiseless lattice with `cells` unknowns.
pub fn free_eigenvalue(k: usize, cells: usize, mesh: f64) -> f64 {
    let arg = k as f64 * core::f64::consts::PI / (2.0 * (cells + 1) as f64);
    4.0 / (mesh * mesh) * arg.sin().powi(2)
}
