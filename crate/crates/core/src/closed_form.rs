//! Quadrature oracles for the rotation-time mean, the Lyapunov rate, the
//! density of states and the invariant law of the phase.
//!
//! The one-dimensional integrals `I_p(λ) = ∫₀^∞ u^p exp(-2λu - u³/6) du`
//! for `p = ±1/2` are computed after the substitution `u = v²`, which removes
//! the endpoint singularity, on a range truncated where the integrand has
//! dropped by `e^-760` from its maximum.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::quad::Quadrature;
use crate::scale::Scale;
use crate::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const TAIL_DROP: f64 = 760.0;

// `x mod π` in `[0, π)`.
fn wrap_pi(x: f64) -> f64 {
    let r = x % PI;
    if r < 0.0 { r + PI } else { r }
}

/// Default relative tolerance of the oracles.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Tolerance of the agreement between the two density-of-states routes.
pub const DOS_AGREEMENT: f64 = 1e-5;

// Smallest `s > from` with `g(s) >= target`, for `g` increasing beyond `from`.
fn cutoff<G: Fn(f64) -> f64>(g: G, from: f64, first_step: f64, target: f64) -> f64 {
    let mut step = first_step;
    for _ in 0..400 {
        if g(from + step) >= target {
            return from + step;
        }
        step *= 2.0;
    }
    from + step
}

/// `I_{-1/2}` and `I_{1/2}` scaled by `e^{shift}`, with `shift` the minimum of the exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ScaledMoments {
    neg_half: f64,
    pos_half: f64,
    shift: f64,
}

fn moments(lambda: f64, rel_tol: f64) -> Result<ScaledMoments> {
    let psi = |v: f64| {
        let v2 = v * v;
        2.0 * lambda * v2 + v2 * v2 * v2 / 6.0
    };
    let v_min = if lambda < 0.0 { (-4.0 * lambda).sqrt().sqrt() } else { 0.0 };
    let shift = psi(v_min);
    let first = 1e-3 / (1.0 + lambda.abs()).sqrt();
    let end = cutoff(|v| psi(v) - shift, v_min, first, TAIL_DROP);
    let breaks: Vec<f64> = if v_min > 0.0 { alloc::vec![0.0, v_min, end] } else { alloc::vec![0.0, end] };
    let q = Quadrature::with_tol(0.0, rel_tol);
    let neg = q.integrate_breaks(&mut |v| 2.0 * (shift - psi(v)).exp(), &breaks)?;
    let pos = q.integrate_breaks(&mut |v| 2.0 * v * v * (shift - psi(v)).exp(), &breaks)?;
    Ok(ScaledMoments { neg_half: neg.value, pos_half: pos.value, shift })
}

/// Mean rotation time `m_λ` at scale `E`; `m^{(E)} = m^{(1)} / E`.
pub fn m_lambda(lambda: f64, scale: Scale) -> Result<f64> {
    let s = moments(lambda, DEFAULT_TOL)?;
    Ok(SQRT_2PI * s.neg_half * (-s.shift).exp() / scale.get())
}

/// Linear growth rate `ν_λ` of the log squared radius at scale `E`.
pub fn nu_lambda(lambda: f64, scale: Scale) -> Result<f64> {
    let s = moments(lambda, DEFAULT_TOL)?;
    Ok(scale.get() * s.pos_half / s.neg_half)
}

/// Density of states from the analytic derivative of `1/m_λ`.
pub fn dos(lambda: f64) -> Result<f64> {
    let s = moments(lambda, DEFAULT_TOL)?;
    Ok(2.0 * s.pos_half * s.shift.exp() / (SQRT_2PI * s.neg_half * s.neg_half))
}

/// Density of states from the product of invariant densities,
/// `E^{-1/2} ∫₀^π μ(θ) μ(π-θ) sin²θ dθ`.
pub fn dos_product(lambda: f64, scale: Scale) -> Result<f64> {
    let inv = InvariantDensity::new(lambda, scale)?;
    let q = Quadrature::with_tol(0.0, 1e-10);
    let mut failure = None;
    let est = q.integrate(
        |t| {
            let s = t.sin();
            match (inv.mu(t), inv.mu(PI - t)) {
                (Ok(a), Ok(b)) => a * b * s * s,
                (Err(e), _) | (_, Err(e)) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        0.0,
        PI,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est.value / scale.get().sqrt())
}

/// Both density-of-states routes, failing if they disagree beyond [`DOS_AGREEMENT`].
pub fn dos_checked(lambda: f64) -> Result<f64> {
    let a = dos(lambda)?;
    let b = dos_product(lambda, Scale::ORIGINAL)?;
    if ((a - b) / a).abs() > DOS_AGREEMENT {
        return Err(Error::DosMismatch { route_a: a, route_b: b });
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOracle {
    pub lambda: f64,
    pub scale: Scale,
    pub m: f64,
    pub nu: f64,
    /// Density of states at energy `lambda` (independent of the scale).
    pub n: f64,
    pub quadrature_tol: f64,
}

impl SpectralOracle {
    pub fn compute(lambda: f64, scale: Scale, quadrature_tol: f64) -> Result<Self> {
        if !(quadrature_tol > 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerance must be positive"));
        }
        let s = moments(lambda, quadrature_tol.min(1e-6))?;
        let m1 = SQRT_2PI * s.neg_half * (-s.shift).exp();
        Ok(Self {
            lambda,
            scale,
            m: m1 / scale.get(),
            nu: scale.get() * s.pos_half / s.neg_half,
            n: 2.0 * s.pos_half * s.shift.exp() / (SQRT_2PI * s.neg_half * s.neg_half),
            quadrature_tol,
        })
    }
}

/// Stationary law of the phase: `f` on the Riccati line `x = cot θ` and `μ` on `[0, π)`.
#[derive(Debug, Clone, Copy)]
pub struct InvariantDensity {
    lambda: f64,
    scale: Scale,
    a: f64,
    b: f64,
    m: f64,
    quad: Quadrature,
}

impl InvariantDensity {
    pub fn new(lambda: f64, scale: Scale) -> Result<Self> {
        Ok(Self {
            lambda,
            scale,
            a: scale.potential(lambda),
            b: scale.rotation(),
            m: m_lambda(lambda, scale)?,
            quad: Quadrature::with_tol(0.0, DEFAULT_TOL),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// Normalization `∫ f = m_λ`.
    pub fn normalization(&self) -> f64 {
        self.m
    }

    // `f(x)` and `f'(x)` from `f(x) = 2 ∫₀^∞ exp(-φ(s)) ds`,
    // `φ(s) = 2as + 2b(x²s - xs² + s³/3)`.
    fn riccati_pair(&self, x: f64, with_derivative: bool) -> Result<(f64, f64)> {
        let (a, b) = (self.a, self.b);
        let phi = |s: f64| 2.0 * a * s + 2.0 * b * s * (x * x - x * s + s * s / 3.0);
        let mut breaks: Vec<f64> = alloc::vec![0.0];
        let mut floor = 0.0f64;
        let mut start = 0.0f64;
        if a < 0.0 {
            let r = (-a / b).sqrt();
            let lo = x - r;
            let hi = x + r;
            if lo > 0.0 {
                breaks.push(lo);
            }
            if hi > 0.0 {
                breaks.push(hi);
                floor = floor.min(phi(hi));
                start = hi;
            }
        }
        let slope = (2.0 * a).abs() + 2.0 * b * x * x + 2.0 * b.cbrt();
        let end = cutoff(|s| phi(s) - floor, start, 1e-2 / slope, TAIL_DROP);
        breaks.push(end);
        let value = self.quad.integrate_breaks(&mut |s| (floor - phi(s)).exp(), &breaks)?.value;
        let deriv = if with_derivative {
            // the integrand changes sign, so the tolerance is set against its magnitude
            let magnitude = value * (2.0 * x.abs() * value + value * value);
            Quadrature { abs_tol: 1e-13 * magnitude, ..self.quad }
                .integrate_breaks(&mut |s| (2.0 * x * s - s * s) * (floor - phi(s)).exp(), &breaks)?
                .value
        } else {
            0.0
        };
        let scale = 2.0 * (-floor).exp();
        Ok((scale * value, -2.0 * b * scale * deriv))
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        Ok(self.riccati_pair(x, false)?.0)
    }

    /// `(f(x), f'(x))`.
    pub fn f_with_derivative(&self, x: f64) -> Result<(f64, f64)> {
        self.riccati_pair(x, true)
    }

    /// `μ(θ) = f(cot θ) / (sin²θ m)`, π-periodic, continuous at `πZ`.
    pub fn mu(&self, theta: f64) -> Result<f64> {
        let t = wrap_pi(theta);
        if t == 0.0 {
            return Ok(1.0 / (self.b * self.m));
        }
        let x = t.cos() / t.sin();
        Ok(self.f(x)? * (1.0 + x * x) / self.m)
    }

    /// `∂_θ log μ(θ)`; vanishes on `πZ`.
    pub fn log_derivative(&self, theta: f64) -> Result<f64> {
        let t = wrap_pi(theta);
        if t == 0.0 {
            return Ok(0.0);
        }
        let x = t.cos() / t.sin();
        let (f, fp) = self.f_with_derivative(x)?;
        Ok(-(1.0 + x * x) * fp / f - 2.0 * x)
    }
}

/// `μ`, `∂_θ log μ` and the sampling laws tabulated on the midpoint grid
/// `θ_j = (j + 1/2) π / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantTable {
    lambda: f64,
    scale: Scale,
    mu: Vec<f64>,
    log_derivative: Vec<f64>,
    mu_cdf: Vec<f64>,
    mixture_cdf: Vec<f64>,
    mixture_mass: f64,
}

fn cumulative(weights: impl Iterator<Item = f64>) -> (Vec<f64>, f64) {
    let mut acc = 0.0;
    let mut cdf = alloc::vec![0.0];
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    let total = acc;
    for c in cdf.iter_mut() {
        *c /= total;
    }
    (cdf, total)
}

fn invert(cdf: &[f64], u: f64, width: f64) -> f64 {
    let j = cdf.partition_point(|&c| c <= u).clamp(1, cdf.len() - 1) - 1;
    let span = cdf[j + 1] - cdf[j];
    let frac = if span > 0.0 { ((u - cdf[j]) / span).clamp(0.0, 1.0) } else { 0.5 };
    (j as f64 + frac) * width
}

impl InvariantTable {
    pub const DEFAULT_POINTS: usize = 2048;

    pub fn build(density: &InvariantDensity, points: usize) -> Result<Self> {
        if points < 8 {
            return Err(Error::InvalidParameter("invariant table needs at least 8 points"));
        }
        let h = PI / points as f64;
        let mut mu = Vec::with_capacity(points);
        let mut log_derivative = Vec::with_capacity(points);
        for j in 0..points {
            let t = (j as f64 + 0.5) * h;
            let x = t.cos() / t.sin();
            let (f, fp) = density.f_with_derivative(x)?;
            mu.push(f * (1.0 + x * x) / density.normalization());
            log_derivative.push(-(1.0 + x * x) * fp / f - 2.0 * x);
        }
        let (mu_cdf, _) = cumulative(mu.iter().map(|m| m * h));
        let (mixture_cdf, mass) = cumulative((0..points).map(|j| {
            let s = ((j as f64 + 0.5) * h).sin();
            mu[j] * mu[points - 1 - j] * s * s * h
        }));
        Ok(Self {
            lambda: density.lambda(),
            scale: density.scale(),
            mu,
            log_derivative,
            mu_cdf,
            mixture_cdf,
            mixture_mass: mass / density.scale().get().sqrt(),
        })
    }

    pub fn new(lambda: f64, scale: Scale) -> Result<Self> {
        Self::build(&InvariantDensity::new(lambda, scale)?, Self::DEFAULT_POINTS)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn points(&self) -> usize {
        self.mu.len()
    }

    pub fn mu_values(&self) -> &[f64] {
        &self.mu
    }

    /// `E^{-1/2} ∫ μ(θ) μ(π-θ) sin²θ dθ` by the midpoint rule; equals the density of states.
    pub fn mixture_mass(&self) -> f64 {
        self.mixture_mass
    }

    #[inline]
    fn interpolate(values: &[f64], theta: f64) -> f64 {
        let n = values.len();
        let y = wrap_pi(theta) * (n as f64 / PI) - 0.5;
        let fl = y.floor();
        let frac = y - fl;
        let j = (fl as i64).rem_euclid(n as i64) as usize;
        let k = if j + 1 == n { 0 } else { j + 1 };
        values[j] + frac * (values[k] - values[j])
    }

    #[inline]
    pub fn mu_at(&self, theta: f64) -> f64 {
        Self::interpolate(&self.mu, theta)
    }

    #[inline]
    pub fn log_derivative_at(&self, theta: f64) -> f64 {
        Self::interpolate(&self.log_derivative, theta)
    }

    /// Inverse-CDF draw from `μ` given a uniform `u ∈ [0, 1)`.
    pub fn sample_mu(&self, u: f64) -> f64 {
        invert(&self.mu_cdf, u, PI / self.mu.len() as f64)
    }

    /// Inverse-CDF draw from `μ(θ) μ(π-θ) sin²θ`, normalized.
    pub fn sample_mixture(&self, u: f64) -> f64 {
        invert(&self.mixture_cdf, u, PI / self.mu.len() as f64)
    }

    /// Probability under `μ` of `[0, θ]`, `θ ∈ [0, π]`.
    pub fn mu_cdf(&self, theta: f64) -> f64 {
        let n = self.mu.len();
        let y = (theta / PI * n as f64).clamp(0.0, n as f64);
        let j = (y.floor() as usize).min(n - 1);
        self.mu_cdf[j] + (y - j as f64) * (self.mu_cdf[j + 1] - self.mu_cdf[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        ((a - b) / b).abs() <= rel
    }

    // Independent oracle: plain trapezoid sums of the v-substituted integrands
    // on a fixed fine grid (exponentially convergent for these smooth tails).
    fn trapezoid_moments(lambda: f64) -> (f64, f64) {
        let upper = 8.0;
        let steps = 400_000;
        let h = upper / steps as f64;
        let (mut neg, mut pos) = (0.0, 0.0);
        for k in 0..=steps {
            let v = k as f64 * h;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            let e = (-2.0 * lambda * v * v - v.powi(6) / 6.0).exp();
            neg += w * 2.0 * e;
            pos += w * 2.0 * v * v * e;
        }
        (neg * h, pos * h)
    }

    #[test]
    fn matches_trapezoid_oracle() {
        for &l in &[-3.0, 0.0, 1.0, 5.0] {
            let (neg, pos) = trapezoid_moments(l);
            let m = m_lambda(l, Scale::ORIGINAL).unwrap();
            assert!(close(m, SQRT_2PI * neg, 1e-11), "m at {l}");
            let nu = nu_lambda(l, Scale::ORIGINAL).unwrap();
            assert!(close(nu, pos / neg, 1e-11), "nu at {l}");
            let n = dos(l).unwrap();
            assert!(close(n, 2.0 * pos / (SQRT_2PI * neg * neg), 1e-11), "n at {l}");
        }
    }

    #[test]
    fn regression_constants() {
        // frozen from a 30-digit evaluation, cross-checked against the trapezoid oracle
        assert!(close(m_lambda(0.0, Scale::ORIGINAL).unwrap(), 6.269_435_118_352_459, 1e-12));
        assert!(close(nu_lambda(1.0, Scale::ORIGINAL).unwrap(), 0.220_460_503_660_227_6, 1e-10));
        assert!(close(dos(1.0).unwrap(), 0.144_058_914_500_115_2, 1e-10));
    }

    #[test]
    fn scaling_identities() {
        let e = Scale::new(4.0).unwrap();
        for &l in &[-2.0, 0.5, 7.0] {
            let m1 = m_lambda(l, Scale::ORIGINAL).unwrap();
            assert!(close(m_lambda(l, e).unwrap(), m1 / 4.0, 1e-15));
            let n1 = nu_lambda(l, Scale::ORIGINAL).unwrap();
            assert!(close(nu_lambda(l, e).unwrap(), 4.0 * n1, 1e-15));
        }
    }

    #[test]
    fn large_energy_asymptotics() {
        let m = m_lambda(1e6, Scale::ORIGINAL).unwrap();
        assert!(close(m, PI / 1000.0, 3e-3));
        let n = dos(1e4).unwrap();
        assert!(close(n, 1.0 / (2.0 * PI * 100.0), 1e-2));
    }

    #[test]
    fn rate_is_positive_at_negative_energy() {
        assert!(nu_lambda(-5.0, Scale::ORIGINAL).unwrap() > 0.0);
        assert!(dos(-3.0).unwrap() > 0.0);
    }

    #[test]
    fn density_matches_double_integral() {
        // f(x) = 2 e^{-2V(x)} ∫_{-∞}^x e^{2V(y)} dy with V(x) = a x + b x³/3
        let inv = InvariantDensity::new(1.0, Scale::ORIGINAL).unwrap();
        for &x in &[-1.5, -0.3, 0.0, 0.7, 2.0] {
            let v = |y: f64| y + y * y * y / 3.0;
            let lo = x - 12.0;
            let steps = 200_000;
            let h = (x - lo) / steps as f64;
            let mut acc = 0.0;
            for k in 0..=steps {
                let y = lo + k as f64 * h;
                let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
                acc += w * (2.0 * (v(y) - v(x))).exp();
            }
            let naive = 2.0 * acc * h;
            assert!((inv.f(x).unwrap() - naive).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn mu_is_normalized_and_continuous() {
        let inv = InvariantDensity::new(1.0, Scale::ORIGINAL).unwrap();
        let q = Quadrature::with_tol(0.0, 1e-11);
        let total = q.integrate(|t| inv.mu(t).unwrap(), 0.0, PI).unwrap().value;
        assert!((total - 1.0).abs() < 1e-8);
        let at0 = inv.mu(0.0).unwrap();
        assert!((inv.mu(1e-6).unwrap() - at0).abs() < 1e-5);
        assert!((inv.mu(PI - 1e-6).unwrap() - at0).abs() < 1e-5);
    }

    #[test]
    fn log_derivative_matches_finite_difference() {
        let inv = InvariantDensity::new(1.0, Scale::ORIGINAL).unwrap();
        let d = 1e-5;
        for &t in &[0.3, 1.0, 2.5] {
            let fd = (inv.mu(t + d).unwrap().ln() - inv.mu(t - d).unwrap().ln()) / (2.0 * d);
            assert!((inv.log_derivative(t).unwrap() - fd).abs() < 1e-4);
        }
        assert_eq!(inv.log_derivative(0.0).unwrap(), 0.0);
        assert!(inv.log_derivative(1e-7).unwrap().abs() < 1e-4);
    }

    #[test]
    fn dos_routes_agree() {
        for &l in &[0.0, 1.0, 5.0, 25.0] {
            let a = dos(l).unwrap();
            let b = dos_product(l, Scale::ORIGINAL).unwrap();
            assert!(close(b, a, DOS_AGREEMENT), "λ = {l}: {a} vs {b}");
        }
        let e = Scale::new(9.0).unwrap();
        let b = dos_product(9.0, e).unwrap();
        assert!(close(b, dos(9.0).unwrap(), DOS_AGREEMENT));
    }

    #[test]
    fn table_mixture_mass_is_dos() {
        let t = InvariantTable::new(1.0, Scale::ORIGINAL).unwrap();
        assert!(close(t.mixture_mass(), dos(1.0).unwrap(), 1e-5));
        let total: f64 = t.mu_values().iter().sum::<f64>() * PI / t.points() as f64;
        assert!((total - 1.0).abs() < 1e-6);
        assert!((t.mu_cdf(PI) - 1.0).abs() < 1e-15);
        let s = t.sample_mu(0.5);
        assert!((t.mu_cdf(s) - 0.5).abs() < 1e-9);
    }
}
