//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use alloc::vec::Vec;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: 0.0, rel_tol: 1e-12, max_panels: 2000 }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    /// Integral of `f` over `[a, b]`, refining the worst panel until the summed
    /// error estimate meets the tolerance.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_breaks(&mut f, &[a, b])
    }

    /// As [`integrate`](Self::integrate) with initial panel boundaries at `breaks` (sorted).
    pub fn integrate_breaks<F: FnMut(f64) -> f64>(&self, f: &mut F, breaks: &[f64]) -> Result<Estimate> {
        let mut panels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                let (v, e) = gk15(f, w[0], w[1]);
                panels.push((w[0], w[1], v, e));
            }
        }
        loop {
            let value: f64 = panels.iter().map(|p| p.2).sum();
            let error: f64 = panels.iter().map(|p| p.3).sum();
            if !value.is_finite() {
                return Err(Error::Quadrature { error: f64::INFINITY });
            }
            if error <= self.abs_tol.max(self.rel_tol * value.abs()) {
                return Ok(Estimate { value, error });
            }
            if panels.len() >= self.max_panels {
                return Err(Error::Quadrature { error });
            }
            let (worst, _) = panels
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
            let (a, b, _, _) = panels[worst];
            let m = 0.5 * (a + b);
            if !(m > a && m < b) {
                // panel at floating-point resolution; accept what we have
                return Ok(Estimate { value, error });
            }
            let (v1, e1) = gk15(f, a, m);
            let (v2, e2) = gk15(f, m, b);
            panels[worst] = (a, m, v1, e1);
            panels.push((m, b, v2, e2));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x.powi(10) - 3.0 * x, -1.0, 2.0).unwrap();
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 1.5 * 3.0;
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integral() {
        let q = Quadrature::default();
        let r = q.integrate(|x| (-x * x).exp(), -10.0, 10.0).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn sharp_peak_with_breaks() {
        let q = Quadrature::with_tol(0.0, 1e-12);
        let w = 1e-2;
        let r = q
            .integrate_breaks(&mut |x: f64| (-(x - 0.3).powi(2) / (2.0 * w * w)).exp(), &[0.0, 0.3, 1.0])
            .unwrap();
        let rel = r.value / (w * (2.0 * PI).sqrt()) - 1.0;
        assert!(rel.abs() < 1e-11, "{rel:e}");
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let q = Quadrature { abs_tol: 0.0, rel_tol: 1e-15, max_panels: 3 };
        assert!(matches!(q.integrate(|x| (1.0 / x).sin(), 1e-3, 1.0), Err(Error::Quadrature { .. })));
    }
}
