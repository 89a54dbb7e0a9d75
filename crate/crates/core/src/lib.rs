//! Phase/radius diffusions, closed-form oracles and finite-volume spectra of the
//! continuous Anderson Hamiltonian `-d²/dx² + ξ` on a segment, where `ξ` is
//! Gaussian white noise.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! its inputs: randomness comes from [`noise::NoisePath`], a counter-based,
//! bridge-refinable Brownian path that every solver shares.
//!
//! Module map:
//!
//! - [`rng`]: Philox counter-based generator and Gaussian draws keyed by position.
//! - [`noise`]: Brownian paths stored as fixed-point increments.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature.
//! - [`scale`]: the coordinate scale `E` of the distorted phase variables.
//! - [`closed_form`]: rotation time, Lyapunov rate, density of states and the
//!   invariant density of the phase.
//! - [`flow`]: the phase/radius SDEs (forward, backward, adjoint), rotation
//!   times and limit-shape samplers.
//! - [`spectrum`]: Sturm counting, eigenvalues and eigenfunctions by shooting.
//! - [`lattice`]: the finite-difference tridiagonal oracle.
//! - [`measure`]: probability measures on a grid and the Lévy–Prokhorov distance.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod closed_form;
pub mod error;
pub mod flow;
pub mod lattice;
pub mod measure;
pub mod noise;
pub mod quad;
pub mod rng;
pub mod scale;
pub mod spectrum;

pub use error::{Error, Result};
pub use scale::Scale;
