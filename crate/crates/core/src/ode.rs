//! Fixed-step RK4 integration of the stationary Dirac equation, used as an
//! independent check on the analytic segment matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ComplexEnergy;
use crate::structure::StructureSpec;
use crate::transfer::TransferMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest accepted `steps_per_unit_length`.
pub const MIN_STEPS_PER_UNIT: usize = 100;

type Mat2 = [[Complex64; 2]; 2];

/// `psi' = i sigma_z [(E - V) - m sigma_x] psi` applied to each column of `y`.
fn rhs(e: Complex64, mass: f64, v: Complex64, y: &Mat2) -> Mat2 {
    let d = e - v;
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for col in 0..2 {
        let (p1, p2) = (y[0][col], y[1][col]);
        out[0][col] = I * (d * p1 - mass * p2);
        out[1][col] = -I * (d * p2 - mass * p1);
    }
    out
}

fn axpy(y: &Mat2, k: &Mat2, h: f64) -> Mat2 {
    let mut out = *y;
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] += k[r][c] * h;
        }
    }
    out
}

/// Transfer matrix obtained by integrating two independent spinors across the
/// structure with classical RK4. Each segment gets
/// `ceil(length * steps_per_unit_length)` equal steps so no step straddles an
/// interface.
pub fn ode_oracle_matrix(
    spec: &StructureSpec,
    e: impl Into<ComplexEnergy>,
    steps_per_unit_length: usize,
) -> Result<TransferMatrix> {
    if steps_per_unit_length < MIN_STEPS_PER_UNIT {
        return Err(Error::InvalidArgument(format!(
            "steps_per_unit_length must be >= {MIN_STEPS_PER_UNIT}, got {steps_per_unit_length}"
        )));
    }
    let e = e.into().c();
    let mut acc = TransferMatrix::IDENTITY;
    for seg in spec.segments() {
        let n = ((seg.length * steps_per_unit_length as f64).ceil() as usize).max(1);
        let h = seg.length / n as f64;
        let v = seg.potential();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut y: Mat2 = [[one, zero], [zero, one]];
        for _ in 0..n {
            let k1 = rhs(e, seg.mass, v, &y);
            let k2 = rhs(e, seg.mass, v, &axpy(&y, &k1, 0.5 * h));
            let k3 = rhs(e, seg.mass, v, &axpy(&y, &k2, 0.5 * h));
            let k4 = rhs(e, seg.mass, v, &axpy(&y, &k3, h));
            for r in 0..2 {
                for c in 0..2 {
                    y[r][c] += (k1[r][c] + 2.0 * k2[r][c] + 2.0 * k3[r][c] + k4[r][c]) * (h / 6.0);
                }
            }
        }
        acc = TransferMatrix::new(y[0][0], y[0][1], y[1][0], y[1][1]) * acc;
    }
    Ok(acc)
}
