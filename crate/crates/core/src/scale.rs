#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result};

/// Coordinate scale `E ≥ 1` of the distorted phase coordinates; 1 selects the
/// original coordinates.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Scale(f64);

impl Scale {
    pub const ORIGINAL: Scale = Scale(1.0);

    pub fn new(energy: f64) -> Result<Self> {
        if energy >= 1.0 && energy.is_finite() {
            Ok(Self(energy))
        } else {
            Err(Error::ScaleBelowOne(energy))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Coefficient of `cos²θ` in the phase drift, `E^{3/2}`.
    pub fn rotation(self) -> f64 {
        self.0 * self.0.sqrt()
    }

    /// Coefficient of `sin²θ` in the phase drift, `√E λ`.
    pub fn potential(self, lambda: f64) -> f64 {
        self.0.sqrt() * lambda
    }
}

impl Default for Scale {
    fn default() -> Self {
        Self::ORIGINAL
    }
}
