//! Limit-shape samplers and their comparison with eigenfunction shapes.

use crossover_core::closed_form::{dos, dos_product};
use crossover_core::flow::{sample_y_e, sample_y_infinity};
use crossover_core::measure::{lp_distance, GridMeasure};
use crossover_core::Scale;
use serde::Serialize;

use crate::cache;
use crate::parallel::map_seeds;
use crate::report::{SeedSpan, TestReport};
use crate::stats;
use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogMoments {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub samples: usize,
}

/// Mean and variance of `log Y_∞(t)` at `t > 0` over `samples` draws.
pub fn y_infinity_log_moments(t: f64, spacing: f64, samples: u64, master_seed: u64, workers: usize) -> Result<LogMoments, LabError> {
    let logs = map_seeds(workers, master_seed, 0, samples, |_, s| -> Result<f64, LabError> {
        let y = sample_y_infinity(s, t, spacing)?;
        Ok(y.values.last().expect("nonempty grid").ln())
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let n = logs.len() as f64;
    let mean = stats::mean(&logs);
    let variance = stats::variance(&logs);
    let m4 = stats::mean(&logs.iter().map(|x| (x - mean).powi(4)).collect::<Vec<_>>());
    Ok(LogMoments {
        mean,
        mean_se: (variance / n).sqrt(),
        variance,
        variance_se: ((m4 - variance * variance) / n).sqrt(),
        samples: logs.len(),
    })
}

pub fn y_infinity_reports(m: &LogMoments, t: f64, seeds: SeedSpan) -> Vec<TestReport> {
    vec![
        TestReport::tolerance("y_infinity_log_mean", m.mean, -t / 8.0, 3.0 * m.mean_se, m.samples, seeds),
        TestReport::tolerance("y_infinity_log_variance", m.variance, t / 8.0, 3.0 * m.variance_se, m.samples, seeds),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureMass {
    pub lambda: f64,
    pub scale: f64,
    /// Quadrature of the mixture weight over the density of states.
    pub quadrature: f64,
    /// Same ratio from the tabulated invariant density.
    pub table: f64,
}

pub fn mixture_mass(lambda: f64, scale: f64) -> Result<MixtureMass, LabError> {
    let s = Scale::new(scale)?;
    let n = dos(lambda)?;
    let table = cache::global().table(lambda, s)?;
    Ok(MixtureMass { lambda, scale, quadrature: dos_product(lambda, s)? / n, table: table.mixture_mass() / n })
}

pub fn mixture_reports(m: &MixtureMass, tol: f64, seeds: SeedSpan) -> Vec<TestReport> {
    vec![
        TestReport::tolerance("mixture_mass_quadrature", m.quadrature, 1.0, tol, 1, seeds),
        TestReport::tolerance("mixture_mass_table", m.table, 1.0, tol, 1, seeds),
    ]
}

#[allow(clippy::too_many_arguments)]
/// Recentered shapes of `Y_E` at energy `lambda` and scale `scale`.
pub fn sample_limit_shapes(
    lambda: f64,
    scale: f64,
    samples: u64,
    t_max: f64,
    step: f64,
    stride: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<GridMeasure>, LabError> {
    let table = cache::global().table(lambda, Scale::new(scale)?)?;
    map_seeds(workers, master_seed, 0, samples, |_, s| -> Result<GridMeasure, LabError> {
        Ok(sample_y_e(s, &table, t_max, step, stride)?.shape)
    })
    .into_iter()
    .collect()
}

/// Moves every atom to the nearest node of `k * spacing`, `|k| ≤ half`.
/// Mass beyond the last node is dropped before renormalizing.
pub fn rebin(m: &GridMeasure, spacing: f64, half: usize) -> Result<GridMeasure, LabError> {
    let mut w = vec![0.0; 2 * half + 1];
    for (x, a) in m.atoms() {
        let k = (x / spacing).round();
        if k.abs() <= half as f64 {
            w[(k as i64 + half as i64) as usize] += a;
        }
    }
    Ok(GridMeasure::new(-(half as f64) * spacing, spacing, w)?)
}

fn mean_measure(ms: &[GridMeasure]) -> Result<GridMeasure, LabError> {
    let first = ms.first().ok_or_else(|| LabError::Insufficient("no shapes".into()))?;
    let mut w = vec![0.0; first.weights().len()];
    for m in ms {
        w.iter_mut().zip(m.weights()).for_each(|(a, b)| *a += b);
    }
    Ok(GridMeasure::new(first.origin(), first.spacing(), w)?)
}

/// Two-sample KS tests of eigenfunction shapes against limit shapes on the
/// second moment (the primary verdict), the inverse participation and the
/// LP distance to the mean limit shape, each at `alpha`. The last two use a
/// common grid of `spacing` on `[-reach, reach]`.
pub fn shape_suite(
    eigen: &[GridMeasure],
    limit: &[GridMeasure],
    alpha: f64,
    spacing: f64,
    reach: f64,
    seeds: SeedSpan,
) -> Result<Vec<TestReport>, LabError> {
    if eigen.len() < 20 || limit.len() < 20 {
        return Err(LabError::Insufficient(format!("shape suite got {} and {} shapes", eigen.len(), limit.len())));
    }
    let half = (reach / spacing).round() as usize;
    let grid = |ms: &[GridMeasure]| ms.iter().map(|m| rebin(m, spacing, half)).collect::<Result<Vec<_>, _>>();
    let (eg, lg) = (grid(eigen)?, grid(limit)?);
    let reference = mean_measure(&lg)?;
    let n = eigen.len() + limit.len();
    let functional = |name: &str, f: &dyn Fn(&GridMeasure) -> f64, a: &[GridMeasure], b: &[GridMeasure]| {
        let xa: Vec<f64> = a.iter().map(f).collect();
        let xb: Vec<f64> = b.iter().map(f).collect();
        let (d, p) = stats::ks_two_sample(&xa, &xb);
        TestReport::significance(name, d, p, alpha, n, seeds)
    };
    Ok(vec![
        functional("shape_second_moment_ks", &|m| m.second_moment(), eigen, limit),
        functional("shape_ipr_ks", &|m| m.inverse_participation(), &eg, &lg),
        functional("shape_lp_to_mean_ks", &|m| lp_distance(m, &reference), &eg, &lg),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rebin_keeps_mass_and_mean() {
        let m = GridMeasure::new(-1.0, 0.1, vec![1.0; 21]).unwrap();
        let r = rebin(&m, 0.5, 4).unwrap();
        assert!((r.total_mass() - 1.0).abs() < 1e-15);
        assert!(r.mean().abs() < 1e-12);
        assert_eq!(r.weights().len(), 9);
    }

    #[test]
    fn identical_samples_pass() {
        let shapes: Vec<GridMeasure> = (0..40)
            .map(|k| GridMeasure::new(-2.0, 0.5, vec![1.0, 2.0, 3.0 + k as f64 * 0.1, 2.0, 1.0]).unwrap().recentered())
            .collect();
        let seeds = SeedSpan { master: 0, start: 0, count: 40 };
        let r = shape_suite(&shapes, &shapes, 0.01, 0.25, 5.0, seeds).unwrap();
        assert!(r.iter().all(|t| t.pass));
    }

    #[test]
    fn mixture_mass_is_one() {
        let m = mixture_mass(1.0, 1.0).unwrap();
        assert!((m.quadrature - 1.0).abs() < 1e-5, "{m:?}");
        assert!((m.table - 1.0).abs() < 1e-5, "{m:?}");
    }
}
