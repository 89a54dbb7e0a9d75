use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid time interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("refinement level {level} exceeds the configured maximum {max}")]
    LevelTooDeep { level: u32, max: u32 },
    #[error("pivot {pivot} lies outside the path interval [{t0}, {t1}]")]
    PivotOutside { pivot: f64, t0: f64, t1: f64 },
    #[error("coordinate scale must be >= 1, got {0}")]
    ScaleBelowOne(f64),
    #[error("mesh {mesh} is incompatible with a path of {cells} cells of width {dt}")]
    IncompatibleMesh { mesh: f64, cells: usize, dt: f64 },
    #[error("time {t} lies outside the path interval [{t0}, {t1}]")]
    OutsidePath { t: f64, t0: f64, t1: f64 },
    #[error("noise path exhausted at t = {t} before the event occurred")]
    PathExhausted { t: f64 },
    #[error("path cell width {dt} is coarser than the requested step {step}")]
    PathTooCoarse { dt: f64, step: f64 },
    #[error("quadrature failed to reach tolerance (estimated error {error:e})")]
    Quadrature { error: f64 },
    #[error("bisection budget of {budget} evaluations exhausted")]
    BisectionBudget { budget: usize },
    #[error("concatenation defect {defect:e} exceeds tolerance {tol:e}")]
    MatchDefect { defect: f64, tol: f64 },
    #[error("inverse iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("density of states routes disagree: {route_a} vs {route_b}")]
    DosMismatch { route_a: f64, route_b: f64 },
    #[error("adjoint evolution requires an invariant-density table")]
    MissingInvariantTable,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
