//! Experiments behind the statistics verbs and the acceptance checks.

pub mod bulk;
pub mod poisson;
pub mod minami;
pub mod equilibrium;
pub mod lyapunov;
pub mod shapes;
pub mod equivalence;
pub mod fixtures;
pub mod localization;
pub mod oracle;
