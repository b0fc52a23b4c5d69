use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex spectral parameter `E` in units of inverse length (`hbar = c = 1`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexEnergy {
    pub re: f64,
    pub im: f64,
}

impl ComplexEnergy {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    /// Like [`ComplexEnergy::new`] but rejects NaN and infinite components.
    pub fn try_new(re: f64, im: f64) -> Result<Self> {
        if re.is_finite() && im.is_finite() {
            Ok(Self { re, im })
        } else {
            Err(Error::InvalidArgument(format!(
                "energy must be finite, got ({re}, {im})"
            )))
        }
    }

    pub fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn c(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl From<Complex64> for ComplexEnergy {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

impl From<ComplexEnergy> for Complex64 {
    fn from(e: ComplexEnergy) -> Self {
        e.c()
    }
}

impl From<f64> for ComplexEnergy {
    fn from(re: f64) -> Self {
        Self::real(re)
    }
}

impl From<(f64, f64)> for ComplexEnergy {
    fn from((re, im): (f64, f64)) -> Self {
        Self::new(re, im)
    }
}

impl fmt::Display for ComplexEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im < 0.0 {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Two-component spinor `(psi_1, psi_2)^T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor2 {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl Spinor2 {
    pub const fn new(c1: Complex64, c2: Complex64) -> Self {
        Self { c1, c2 }
    }

    pub fn norm(&self) -> f64 {
        self.c1.norm().hypot(self.c2.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.c1 * s, self.c2 * s)
    }
}

/// Wronskian `det[a b]` of two spinors taken as columns.
pub fn wronskian(a: Spinor2, b: Spinor2) -> Complex64 {
    a.c1 * b.c2 - a.c2 * b.c1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_rejects_non_finite() {
        assert!(ComplexEnergy::try_new(f64::NAN, 0.0).is_err());
        assert!(ComplexEnergy::try_new(0.0, f64::INFINITY).is_err());
        assert_eq!(
            ComplexEnergy::try_new(1.0, -2.0).unwrap().conj(),
            ComplexEnergy::new(1.0, 2.0)
        );
    }

    #[test]
    fn wronskian_of_unit_spinors() {
        let a = Spinor2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let b = Spinor2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert_eq!(wronskian(a, b), Complex64::new(1.0, 0.0));
        assert_eq!(wronskian(b, a), Complex64::new(-1.0, 0.0));
    }
}
