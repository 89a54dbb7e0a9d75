//! Probability measures on uniform grids and the Lévy–Prokhorov distance.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Probability measure with atoms at `origin + j * spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    origin: f64,
    spacing: f64,
    weights: Vec<f64>,
}

impl GridMeasure {
    /// Normalizes non-negative `weights` to unit mass.
    pub fn new(origin: f64, spacing: f64, weights: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0) || !origin.is_finite() {
            return Err(Error::InvalidParameter("grid needs a finite origin and positive spacing"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("measure has zero mass"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { origin, spacing, weights })
    }

    pub fn dirac(at: f64) -> Self {
        Self { origin: at, spacing: 1.0, weights: alloc::vec![1.0] }
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn position(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.spacing
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(j, &w)| (self.position(j), w))
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(x, w)| x * w).sum()
    }

    /// Same weights, grid shifted so that the mean sits at 0.
    pub fn recentered(&self) -> Self {
        Self { origin: self.origin - self.mean(), ..self.clone() }
    }

    /// `∫ t² w(dt)`.
    pub fn second_moment(&self) -> f64 {
        self.atoms().map(|(x, w)| x * x * w).sum()
    }

    /// Grid proxy of `∫ (dw/dt)² dt`.
    pub fn inverse_participation(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>() / self.spacing
    }
}

fn support(m: &GridMeasure) -> Vec<(f64, f64)> {
    m.atoms().filter(|a| a.1 > 0.0).collect()
}

// Largest mass of a coupling of `xs` and `ys` (both sorted) moving no atom by
// `ε` or more. Neighbourhoods are intervals whose ends increase with x, so
// serving each x from the leftmost unused y is optimal.
fn coupled_mass(xs: &[(f64, f64)], ys: &[(f64, f64)], eps: f64) -> f64 {
    let mut left: Vec<f64> = ys.iter().map(|y| y.1).collect();
    let mut j = 0;
    let mut moved = 0.0;
    for &(x, w) in xs {
        while j < ys.len() && (ys[j].0 <= x - eps || left[j] <= 0.0) {
            j += 1;
        }
        let mut need = w;
        let mut k = j;
        while need > 0.0 && k < ys.len() && ys[k].0 < x + eps {
            let take = need.min(left[k]);
            left[k] -= take;
            need -= take;
            moved += take;
            k += 1;
        }
    }
    moved
}

/// Lévy–Prokhorov distance `inf{ε : w(B) ≤ w'(B^ε) + ε for all B}` with open
/// `ε`-neighbourhoods, to machine precision.
///
/// By Strassen's theorem the condition holds iff a coupling moves all but
/// `ε` of the mass by less than `ε`; the left side is monotone in `ε`, so
/// bisection on the maximal coupled mass finds the infimum.
pub fn lp_distance(w: &GridMeasure, w_prime: &GridMeasure) -> f64 {
    let xs = support(w);
    let ys = support(w_prime);
    let feasible = |eps: f64| coupled_mass(&xs, &ys, eps) >= 1.0 - eps - 1e-12;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !feasible(hi) {
        return 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Oracle straight from the definition: every subset B of the support of w,
    // with the infimum located on the finitely many breakpoints.
    fn brute_force(w: &GridMeasure, v: &GridMeasure) -> f64 {
        let xs = support(w);
        let ys = support(v);
        let mut cands: Vec<f64> = alloc::vec![0.0, 1.0];
        for x in &xs {
            for y in &ys {
                cands.push((x.0 - y.0).abs());
            }
        }
        let mut worst = 0.0f64;
        for mask in 1u32..(1 << xs.len()) {
            let mass: f64 = (0..xs.len()).filter(|i| mask >> i & 1 == 1).map(|i| xs[i].1).sum();
            // g(ε) = w'(B^ε), left-continuous step function; need mass ≤ g(ε) + ε
            let g = |eps: f64| -> f64 {
                ys.iter()
                    .filter(|y| (0..xs.len()).any(|i| mask >> i & 1 == 1 && (xs[i].0 - y.0).abs() < eps))
                    .map(|y| y.1)
                    .sum()
            };
            let mut best = 1.0f64;
            for &c in &cands {
                // on (c, next] the neighbourhood is at least that of c+
                let g_after = g(c + 1e-12);
                let eps = c.max(mass - g_after);
                if eps < best && mass <= g(eps + 1e-12) + eps + 1e-9 {
                    best = eps;
                }
            }
            worst = worst.max(best.min(1.0));
        }
        worst
    }

    #[test]
    fn identical_measures() {
        let w = GridMeasure::new(-1.0, 0.5, alloc::vec![0.1, 0.4, 0.5]).unwrap();
        assert!(lp_distance(&w, &w) < 1e-12);
    }

    #[test]
    fn point_masses() {
        for &a in &[0.0, 0.2, 0.75, 1.5, 10.0] {
            let d = lp_distance(&GridMeasure::dirac(0.0), &GridMeasure::dirac(a));
            assert!((d - a.min(1.0)).abs() < 1e-12, "a = {a}: {d}");
        }
    }

    #[test]
    fn moments() {
        let w = GridMeasure::new(0.0, 1.0, alloc::vec![1.0, 0.0, 1.0]).unwrap();
        assert!((w.mean() - 1.0).abs() < 1e-15);
        let c = w.recentered();
        assert!((c.second_moment() - 1.0).abs() < 1e-15);
        assert!((c.total_mass() - 1.0).abs() < 1e-15);
        assert!((w.inverse_participation() - 0.5).abs() < 1e-15);
        assert!(GridMeasure::new(0.0, 1.0, alloc::vec![0.0]).is_err());
        assert!(GridMeasure::new(0.0, 1.0, alloc::vec![-1.0, 2.0]).is_err());
    }

    fn measure() -> impl Strategy<Value = GridMeasure> {
        (-3i32..3, prop::collection::vec(0u32..5, 1..6)).prop_filter_map("zero mass", |(o, ws)| {
            let ws: Vec<f64> = ws.into_iter().map(f64::from).collect();
            GridMeasure::new(f64::from(o) * 0.25, 0.25, ws).ok()
        })
    }

    proptest! {
        #[test]
        fn agrees_with_definition(w in measure(), v in measure()) {
            let fast = lp_distance(&w, &v);
            let slow = brute_force(&w, &v);
            prop_assert!((fast - slow).abs() < 1e-9, "fast {} slow {}", fast, slow);
        }

        #[test]
        fn metric_axioms(a in measure(), b in measure(), c in measure()) {
            let ab = lp_distance(&a, &b);
            prop_assert!((ab - lp_distance(&b, &a)).abs() < 1e-9);
            prop_assert!(ab <= lp_distance(&a, &c) + lp_distance(&c, &b) + 1e-9);
            prop_assert!((0.0..=1.0).contains(&ab));
        }
    }
}
