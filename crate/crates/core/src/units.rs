//! Physical grating parameters and their dimensionless counterparts.

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalScaling {
    /// Modal refractive index without grating.
    pub n0: f64,
    /// Peak index change.
    pub delta_n: f64,
    /// Grating period (m).
    pub lambda_grating: f64,
    /// Absorption coefficient (1/m); negative in gain regions.
    pub alpha0: f64,
}

impl PhysicalScaling {
    pub fn new(n0: f64, delta_n: f64, lambda_grating: f64, alpha0: f64) -> Result<Self> {
        if !(delta_n.is_finite() && delta_n > 0.0) {
            return Err(Error::InvalidArgument(format!("delta_n must be > 0, got {delta_n}")));
        }
        if !(lambda_grating.is_finite() && lambda_grating > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grating period must be > 0, got {lambda_grating}"
            )));
        }
        if !(n0.is_finite() && n0 > 0.0) {
            return Err(Error::InvalidArgument(format!("n0 must be > 0, got {n0}")));
        }
        if !alpha0.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha0 must be finite, got {alpha0}")));
        }
        Ok(Self {
            n0,
            delta_n,
            lambda_grating,
            alpha0,
        })
    }

    /// Length unit `Z = 2 n0 Lambda / (pi dn)` in meters.
    pub fn length_unit(&self) -> f64 {
        2.0 * self.n0 * self.lambda_grating / (std::f64::consts::PI * self.delta_n)
    }

    /// Group velocity `c / n0`.
    pub fn group_velocity(&self) -> f64 {
        SPEED_OF_LIGHT / self.n0
    }

    /// Time unit `T = Z / v_g` in seconds.
    pub fn time_unit(&self) -> f64 {
        self.length_unit() / self.group_velocity()
    }

    /// Bragg frequency `pi c / (Lambda n0)` (rad/s).
    pub fn bragg_frequency(&self) -> f64 {
        std::f64::consts::PI * SPEED_OF_LIGHT / (self.lambda_grating * self.n0)
    }

    /// Bragg wavenumber `pi / Lambda` (1/m).
    pub fn bragg_wavenumber(&self) -> f64 {
        std::f64::consts::PI / self.lambda_grating
    }

    /// Dimensionless absorption `gamma = Z alpha0`.
    pub fn gamma(&self) -> f64 {
        self.length_unit() * self.alpha0
    }

    /// `(z, tau)` in meters/seconds to dimensionless `(x, t)`.
    pub fn to_normalized(&self, z: f64, tau: f64) -> (f64, f64) {
        (z / self.length_unit(), tau / self.time_unit())
    }

    pub fn from_normalized(&self, x: f64, t: f64) -> (f64, f64) {
        (x * self.length_unit(), t * self.time_unit())
    }
}
