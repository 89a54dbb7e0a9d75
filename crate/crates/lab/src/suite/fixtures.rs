//! Deterministic noiseless fixtures.

use std::f64::consts::PI;

use crossover_core::flow::{sample_rotation_time, FlowParams, Scheme};
use crossover_core::lattice::{free_eigenvalue, TridiagonalOperator};
use crossover_core::noise::NoisePath;
use crossover_core::Scale;

use crate::report::{SeedSpan, TestReport};
use crate::LabError;

const NO_SEEDS: SeedSpan = SeedSpan { master: 0, start: 0, count: 0 };

/// Largest `|ζ - π/√λ|` on a quiet path with the exact per-cell propagator.
pub fn noiseless_rotation(lambdas: &[f64], step: f64) -> Result<f64, LabError> {
    let level = (8.0 / step).log2().ceil() as u32;
    let span = step * (1u64 << level) as f64;
    let quiet = NoisePath::from_increments(0, 0.0, span, level, &vec![0.0; 1 << level])?;
    let mut worst = 0.0f64;
    for &l in lambdas {
        let params = FlowParams::new(l, Scale::ORIGINAL).with_step(step).with_scheme(Scheme::CellExact);
        let r = sample_rotation_time(&quiet, &params, 0.0)?;
        worst = worst.max((r.duration - PI / l.sqrt()).abs());
    }
    Ok(worst)
}

/// Largest deviation of the noiseless lattice spectrum from its closed form.
pub fn free_lattice(cells: usize, mesh: f64) -> Result<f64, LabError> {
    let op = TridiagonalOperator::from_potential(0.0, mesh, &vec![0.0; cells])?;
    let top = 4.0 / (mesh * mesh) + 1.0;
    let ev = op.eigenvalues_bisect(-1.0, top, 1e-13)?;
    if ev.len() != cells {
        return Err(LabError::Insufficient(format!("found {} of {cells} eigenvalues", ev.len())));
    }
    Ok(ev.iter().enumerate().map(|(k, l)| (l - free_eigenvalue(k + 1, cells, mesh)).abs()).fold(0.0, f64::max))
}

pub fn fixture_reports(step: f64) -> Result<Vec<TestReport>, LabError> {
    let rot = noiseless_rotation(&[1.0, 4.0, 9.0, 25.0], step)?;
    let lat = free_lattice(99, 0.01)?;
    Ok(vec![
        TestReport::check("noiseless_rotation_time", rot, step, rot <= step, 4, NO_SEEDS),
        TestReport::check("free_lattice_spectrum", lat, 1e-10, lat <= 1e-10, 99, NO_SEEDS),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_hold() {
        for r in fixture_reports(1.0 / 1024.0).unwrap() {
            assert!(r.pass, "{}", r.line());
        }
    }
}
