//! Jost solutions defined by their plane-wave asymptotics.
//!
//! `phi1 = (1,0) e^{iEx}`, `phi2 = (0,1) e^{-iEx}` for `x < -L/2`;
//! `varphi1`, `varphi2` are the same plane waves for `x > L/2`.

use num_complex::Complex64;

use crate::model::{ComplexEnergy, Spinor2};
use crate::structure::StructureSpec;
use crate::transfer::{propagator, structure_matrix, TransferMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JostKind {
    Phi1,
    Phi2,
    Varphi1,
    Varphi2,
}

impl JostKind {
    fn anchored_left(self) -> bool {
        matches!(self, JostKind::Phi1 | JostKind::Phi2)
    }
}

/// Plane wave `(1,0) e^{iEx}` or `(0,1) e^{-iEx}`.
fn plane_wave(first: bool, e: Complex64, x: f64) -> Spinor2 {
    let zero = Complex64::new(0.0, 0.0);
    if first {
        Spinor2::new((I * e * x).exp(), zero)
    } else {
        Spinor2::new(zero, (-I * e * x).exp())
    }
}

/// Value at `x` of the requested Jost solution.
pub fn jost_solution(spec: &StructureSpec, e: impl Into<ComplexEnergy>, which: JostKind, x: f64) -> Spinor2 {
    let e = e.into().c();
    let first = matches!(which, JostKind::Phi1 | JostKind::Varphi1);
    let (anchor, outside) = if which.anchored_left() {
        (spec.left_edge(), x <= spec.left_edge())
    } else {
        (spec.right_edge(), x >= spec.right_edge())
    };
    if outside {
        return plane_wave(first, e, x);
    }
    propagator(spec, e, anchor, x).apply(plane_wave(first, e, anchor))
}

/// The matrix of `phi^(k) = sum_j M_jk varphi^(j)`, with plane waves referenced
/// to the global coordinate. Related to the edge-referenced
/// [`structure_matrix`] by `M = D(L/2)^-1 P D(-L/2)`, `D(x) = diag(e^{iEx}, e^{-iEx})`.
pub fn jost_matrix(spec: &StructureSpec, e: impl Into<ComplexEnergy>) -> TransferMatrix {
    let e = e.into().c();
    let p = structure_matrix(spec, e);
    let l = spec.total_length();
    let a = (-I * e * l).exp();
    let b = (I * e * l).exp();
    TransferMatrix {
        m11: p.m11 * a,
        m12: p.m12,
        m21: p.m21,
        m22: p.m22 * b,
        scale_exp: p.scale_exp,
    }
    .renormalized()
}
