//! Closed-form checks of the quadrature oracles.

use std::f64::consts::PI;

use crossover_core::closed_form::{dos, dos_product, m_lambda};
use crossover_core::Scale;
use serde::Serialize;

use crate::report::{SeedSpan, TestReport};
use crate::LabError;

const NO_SEEDS: SeedSpan = SeedSpan { master: 0, start: 0, count: 0 };

/// `m_λ √λ / π - 1` at large `λ`.
pub fn rotation_asymptotics(lambda: f64) -> Result<f64, LabError> {
    Ok(m_lambda(lambda, Scale::ORIGINAL)? * lambda.sqrt() / PI - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DosRoutes {
    pub lambda: f64,
    pub derivative: f64,
    pub product: f64,
}

impl DosRoutes {
    pub fn relative_gap(&self) -> f64 {
        ((self.derivative - self.product) / self.derivative).abs()
    }
}

pub fn dos_routes(lambda: f64) -> Result<DosRoutes, LabError> {
    Ok(DosRoutes { lambda, derivative: dos(lambda)?, product: dos_product(lambda, Scale::ORIGINAL)? })
}

pub fn rotation_report(lambda: f64, tol: f64) -> Result<TestReport, LabError> {
    let rel = rotation_asymptotics(lambda)?;
    Ok(TestReport::check("rotation_time_asymptotics", rel, tol, rel.abs() <= tol, 1, NO_SEEDS))
}

/// Route agreement at each energy and the large-energy density of states.
pub fn dos_reports(lambdas: &[f64], tol: f64, large: f64, large_tol: f64) -> Result<Vec<TestReport>, LabError> {
    let mut out = Vec::new();
    for &l in lambdas {
        let r = dos_routes(l)?;
        out.push(TestReport::check(&format!("dos_routes_at_{l}"), r.relative_gap(), tol, r.relative_gap() <= tol, 1, NO_SEEDS));
    }
    let rel = dos(large)? * 2.0 * PI * large.sqrt() - 1.0;
    out.push(TestReport::check("dos_asymptotics", rel, large_tol, rel.abs() <= large_tol, 1, NO_SEEDS));
    Ok(out)
}
