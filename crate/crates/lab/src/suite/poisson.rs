//! Poisson statistics of the rescaled point process and the Wegner mean count.

use crate::report::{SeedSpan, TestReport};
use crate::stats;
use crate::suite::bulk::PointSample;
use crate::LabError;

pub const MIN_REALIZATIONS: usize = 200;

/// CDF of a gap between consecutive points of a unit-rate Poisson process
/// seen through the window `[-h, h]`: density `∝ (2h - s) e^{-s}` on `[0, 2h]`.
pub fn interior_gap_cdf(half_width: f64, s: f64) -> f64 {
    let g = |s: f64| (2.0 * half_width - 1.0) * (1.0 - (-s).exp()) + s * (-s).exp();
    (g(s.clamp(0.0, 2.0 * half_width)) / g(2.0 * half_width)).clamp(0.0, 1.0)
}

/// Spacing, dispersion, center-uniformity and rank-independence tests, each
/// at `alpha / 4`.
pub fn poisson_suite(sample: &PointSample, alpha: f64, seeds: SeedSpan) -> Result<Vec<TestReport>, LabError> {
    if sample.realizations.len() < MIN_REALIZATIONS {
        return Err(LabError::Insufficient(format!(
            "Poisson suite needs {MIN_REALIZATIONS} realizations, got {}",
            sample.realizations.len()
        )));
    }
    let level = alpha / 4.0;
    let h = sample.half_width;
    let mut gaps = Vec::new();
    let mut energies = Vec::new();
    let mut centers = Vec::new();
    for r in &sample.realizations {
        let mut xs: Vec<f64> = r.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        gaps.extend(xs.windows(2).map(|w| w[1] - w[0]));
        energies.extend(r.iter().map(|p| p.0));
        centers.extend(r.iter().map(|p| p.1));
    }
    if gaps.len() < 20 || energies.len() < 20 {
        return Err(LabError::Insufficient("too few points for the Poisson suite".into()));
    }
    let (d, p) = stats::ks_test(&gaps, |s| interior_gap_cdf(h, s));
    let spacing = TestReport::significance("spacing_ks", d, p, level, gaps.len(), seeds);
    let counts = sample.counts();
    let (index, p) = stats::dispersion_test(&counts);
    let dispersion = TestReport::significance("count_dispersion", index, p, level, counts.len(), seeds);
    let (d, p) = stats::ks_test(&centers, |u| (u + 0.5).clamp(0.0, 1.0));
    let uniform = TestReport::significance("center_uniformity_ks", d, p, level, centers.len(), seeds);
    let (rho, p) = stats::spearman(&energies, &centers);
    let independence = TestReport::significance("energy_center_spearman", rho, p, level, energies.len(), seeds);
    Ok(vec![spacing, dispersion, uniform, independence])
}

/// Mean number of eigenvalues in the window against `2h`.
pub fn wegner_check(sample: &PointSample, tol: f64, seeds: SeedSpan) -> TestReport {
    let counts = sample.counts();
    TestReport::tolerance("wegner_mean_count", stats::mean(&counts), 2.0 * sample.half_width, tol, counts.len(), seeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crossover_core::rng::CounterRng;

    fn synthetic(seed: u64, n: usize, h: f64, lengthwise: bool) -> PointSample {
        let mut rng = CounterRng::new(seed, 0);
        let mut realizations = Vec::new();
        for _ in 0..n {
            // unit-rate Poisson points on [-h, h] via exponential gaps
            let mut pts = Vec::new();
            let mut x = -h;
            loop {
                x += -(1.0 - rng.next_f64()).ln();
                if x > h {
                    break;
                }
                let u = if lengthwise { (x + h) / (2.0 * h) - 0.5 } else { rng.next_f64() - 0.5 };
                pts.push((x, u));
            }
            realizations.push(pts);
        }
        PointSample { half_width: h, realizations }
    }

    #[test]
    fn gap_law_is_a_cdf() {
        assert_eq!(interior_gap_cdf(1.0, 0.0), 0.0);
        assert!((interior_gap_cdf(1.0, 2.0) - 1.0).abs() < 1e-15);
        // density (2h - s) e^{-s} / norm at s = 0.5 by a centered difference
        let fd = (interior_gap_cdf(1.0, 0.5 + 1e-6) - interior_gap_cdf(1.0, 0.5 - 1e-6)) / 2e-6;
        let norm = 1.0 * (1.0 - (-2.0f64).exp()) + 2.0 * (-2.0f64).exp();
        assert!((fd - 1.5 * (-0.5f64).exp() / norm).abs() < 1e-6);
    }

    #[test]
    fn calibration_on_poisson_input() {
        let seeds = SeedSpan { master: 0, start: 0, count: 2000 };
        let reports = poisson_suite(&synthetic(3, 2000, 1.0, false), 0.01, seeds).unwrap();
        for r in &reports {
            assert!(r.pass, "{}", r.line());
        }
        assert!(wegner_check(&synthetic(3, 2000, 1.0, false), 0.1, seeds).pass);
    }

    #[test]
    fn detects_correlated_centers() {
        let seeds = SeedSpan { master: 0, start: 0, count: 2000 };
        let reports = poisson_suite(&synthetic(3, 2000, 1.0, true), 0.01, seeds).unwrap();
        assert!(!reports[3].pass);
    }

    #[test]
    fn too_few_realizations() {
        let seeds = SeedSpan { master: 0, start: 0, count: 10 };
        assert!(matches!(poisson_suite(&synthetic(1, 10, 1.0, false), 0.01, seeds), Err(LabError::Insufficient(_))));
    }
}
