//! Analytic transfer matrices of uniform segments and their composition.
//!
//! A segment of length `l`, mass `m` and potential `V` propagates the spinor
//! from its left to its right edge with `exp(A l)`, where
//! `A = i [[-sigma, -m], [m, sigma]]`, `sigma = V - E`. Since `A^2 = rho^2 I`
//! with `rho^2 = m^2 - sigma^2`, the exponential is
//! `cosh(rho l) I + sinh(rho l)/rho A`, an even function of `rho`.
//!
//! Amplitudes are referenced to the segment edges, so a massless free slab gives
//! `diag(e^{iEl}, e^{-iEl})`. [`crate::jost::jost_matrix`] converts to the
//! global-phase convention of the Jost solutions.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::model::{ComplexEnergy, Spinor2};
use crate::structure::{Segment, StructureSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Mantissas are kept inside `[2^-MAX_EXP, 2^MAX_EXP]`.
const MAX_EXP: i32 = 512;
/// Operands above this are pre-scaled before a product so it cannot overflow.
const SAFE_MUL_EXP: i32 = 256;
/// Below this `|rho l|` the series form of `sinh(rho l)/rho` is used.
const SERIES_THRESHOLD: f64 = 1e-4;
/// Above this `|Re(rho l)|` hyperbolic functions are evaluated with a split-off
/// power of two.
const HYPERBOLIC_SPLIT: f64 = 300.0;

/// Which entry of the transfer matrix a zero search or pole check refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixEntry {
    M11,
    M22,
}

impl MatrixEntry {
    pub fn name(self) -> &'static str {
        match self {
            Self::M11 => "M11",
            Self::M22 => "M22",
        }
    }

    /// Sign of `Im E` on which zeros of this entry are bound states.
    pub fn point_spectrum_sign(self) -> f64 {
        match self {
            Self::M22 => 1.0,
            Self::M11 => -1.0,
        }
    }
}

impl fmt::Display for MatrixEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// 2x2 complex matrix whose true value is the stored one times `2^scale_exp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub scale_exp: i32,
}

/// `x * 2^k` without intermediate overflow for `|k|` beyond the f64 exponent
/// range of a single power.
pub fn ldexp(x: f64, k: i32) -> f64 {
    let mut x = x;
    let mut k = k;
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
    }
    x * 2f64.powi(k)
}

fn ldexp_c(z: Complex64, k: i32) -> Complex64 {
    Complex64::new(ldexp(z.re, k), ldexp(z.im, k))
}

/// Floor of `log2 |x|` for finite nonzero `x`.
fn log2_floor(x: f64) -> i32 {
    x.abs().log2().floor() as i32
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix {
        m11: ONE,
        m12: ZERO,
        m21: ZERO,
        m22: ONE,
        scale_exp: 0,
    };

    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self {
            m11,
            m12,
            m21,
            m22,
            scale_exp: 0,
        }
        .renormalized()
    }

    /// Free propagation over `length` (no mass, no potential).
    pub fn free(e: Complex64, length: f64) -> Self {
        let phase = I * e * length;
        let split = if phase.re.abs() > HYPERBOLIC_SPLIT {
            (phase.re.abs() / std::f64::consts::LN_2).floor() as i32
        } else {
            0
        };
        let shift = split as f64 * std::f64::consts::LN_2;
        // one of the two exponentials underflows when split > 0
        let a = (phase - shift).exp();
        let b = (-phase - shift).exp();
        Self {
            m11: a,
            m12: ZERO,
            m21: ZERO,
            m22: b,
            scale_exp: split,
        }
        .renormalized()
    }

    pub fn entry(&self, which: MatrixEntry) -> Complex64 {
        match which {
            MatrixEntry::M11 => self.m11,
            MatrixEntry::M22 => self.m22,
        }
    }

    /// Largest mantissa magnitude (shares `scale_exp` with every entry).
    pub fn max_abs(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    /// Re-centres mantissas into `[2^-512, 2^512]` when they drift outside.
    pub fn renormalized(self) -> Self {
        let max = self.max_abs();
        if max == 0.0 || !max.is_finite() {
            return self;
        }
        let e = log2_floor(max);
        if (-MAX_EXP..=MAX_EXP).contains(&e) {
            return self;
        }
        self.shifted(-e)
    }

    /// Multiplies mantissas by `2^k` and compensates in `scale_exp`.
    fn shifted(self, k: i32) -> Self {
        Self {
            m11: ldexp_c(self.m11, k),
            m12: ldexp_c(self.m12, k),
            m21: ldexp_c(self.m21, k),
            m22: ldexp_c(self.m22, k),
            scale_exp: self.scale_exp - k,
        }
    }

    /// Same true matrix with mantissas scaled so the largest has magnitude in
    /// `[1, 2)`.
    pub fn normalized(self) -> Self {
        let max = self.max_abs();
        if max == 0.0 || !max.is_finite() {
            return self;
        }
        self.shifted(-log2_floor(max))
    }

    fn mul_safe(&self) -> Self {
        let max = self.max_abs();
        if max > 0.0 && max.is_finite() && log2_floor(max) > SAFE_MUL_EXP {
            self.normalized()
        } else {
            *self
        }
    }

    /// Entries of the true matrix in plain floating point (may overflow to
    /// infinity for extreme structures).
    pub fn to_plain(&self) -> [[Complex64; 2]; 2] {
        let k = self.scale_exp;
        [
            [ldexp_c(self.m11, k), ldexp_c(self.m12, k)],
            [ldexp_c(self.m21, k), ldexp_c(self.m22, k)],
        ]
    }

    /// True value of one entry.
    pub fn true_entry(&self, which: MatrixEntry) -> Complex64 {
        ldexp_c(self.entry(which), self.scale_exp)
    }

    /// Determinant of the true matrix as `(mantissa, exponent)`, i.e.
    /// `det = mantissa * 2^exponent`.
    pub fn determinant(&self) -> (Complex64, i32) {
        (self.m11 * self.m22 - self.m12 * self.m21, 2 * self.scale_exp)
    }

    /// `|det - 1|` relative to the magnitude of the products that form the
    /// determinant, so cancellation in strongly amplifying matrices is measured
    /// against the working precision of those products.
    pub fn det_residual(&self) -> f64 {
        let n = self.normalized();
        let (d, e) = n.determinant();
        let one = ldexp(1.0, -e);
        let a = (n.m11 * n.m22).norm();
        let b = (n.m12 * n.m21).norm();
        let reference = a.max(b).max(one);
        (d - one).norm() / reference
    }

    /// Inverse of the true matrix assuming unit determinant (adjugate).
    pub fn inverse_unimodular(&self) -> Self {
        Self {
            m11: self.m22,
            m12: -self.m12,
            m21: -self.m21,
            m22: self.m11,
            scale_exp: self.scale_exp,
        }
    }

    /// Maximum elementwise difference relative to the larger matrix norm.
    pub fn rel_diff(&self, other: &TransferMatrix) -> f64 {
        let a = self.normalized();
        let b = other.normalized();
        let e = a.scale_exp.max(b.scale_exp);
        let a = a.shifted(a.scale_exp - e);
        let b = b.shifted(b.scale_exp - e);
        let diff = (a.m11 - b.m11)
            .norm()
            .max((a.m12 - b.m12).norm())
            .max((a.m21 - b.m21).norm())
            .max((a.m22 - b.m22).norm());
        let reference = a.max_abs().max(b.max_abs());
        if reference == 0.0 {
            diff
        } else {
            diff / reference
        }
    }

    /// `M psi` in plain floating point.
    pub fn apply(&self, psi: Spinor2) -> Spinor2 {
        let c1 = self.m11 * psi.c1 + self.m12 * psi.c2;
        let c2 = self.m21 * psi.c1 + self.m22 * psi.c2;
        Spinor2::new(ldexp_c(c1, self.scale_exp), ldexp_c(c2, self.scale_exp))
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    /// Matrix product `self * rhs` (apply `rhs` first).
    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        let a = self.mul_safe();
        let b = rhs.mul_safe();
        TransferMatrix {
            m11: a.m11 * b.m11 + a.m12 * b.m21,
            m12: a.m11 * b.m12 + a.m12 * b.m22,
            m21: a.m21 * b.m11 + a.m22 * b.m21,
            m22: a.m21 * b.m12 + a.m22 * b.m22,
            scale_exp: a.scale_exp + b.scale_exp,
        }
        .renormalized()
    }
}

/// `sigma = V - E` and a branch of `rho = sqrt(m^2 - sigma^2)` for one segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentMatrixParams {
    pub sigma: Complex64,
    pub rho: Complex64,
}

impl SegmentMatrixParams {
    pub fn new(seg: &Segment, e: Complex64) -> Self {
        let sigma = seg.potential() - e;
        let rho = (seg.mass * seg.mass - sigma * sigma).sqrt();
        Self { sigma, rho }
    }

    pub fn with_negated_branch(self) -> Self {
        Self {
            sigma: self.sigma,
            rho: -self.rho,
        }
    }

    /// `exp(A length)` for this `sigma`, `rho` and the given mass. Negative
    /// lengths propagate right-to-left.
    pub fn matrix(&self, mass: f64, length: f64) -> TransferMatrix {
        let z = self.rho * length;
        let (ch, shc, split) = if z.norm() < SERIES_THRESHOLD {
            let z2 = z * z;
            let ch = ONE + z2 / 2.0 + z2 * z2 / 24.0;
            let shc = (ONE + z2 / 6.0 + z2 * z2 / 120.0) * length;
            (ch, shc, 0)
        } else {
            let split = if z.re.abs() > HYPERBOLIC_SPLIT {
                (z.re.abs() / std::f64::consts::LN_2).floor() as i32
            } else {
                0
            };
            let shift = split as f64 * std::f64::consts::LN_2;
            let ep = (z - shift).exp();
            let em = (-z - shift).exp();
            ((ep + em) / 2.0, (ep - em) / 2.0 / self.rho, split)
        };
        let s = I * self.sigma * shc;
        let c = I * mass * shc;
        TransferMatrix {
            m11: ch - s,
            m12: -c,
            m21: c,
            m22: ch + s,
            scale_exp: split,
        }
        .renormalized()
    }
}

/// Transfer matrix of one uniform segment at energy `e`.
pub fn segment_matrix(seg: &Segment, e: impl Into<ComplexEnergy>) -> TransferMatrix {
    let e = e.into().c();
    SegmentMatrixParams::new(seg, e).matrix(seg.mass, seg.length)
}

/// Ordered product `M_N ... M_1` over the structure (leftmost segment first).
pub fn structure_matrix(spec: &StructureSpec, e: impl Into<ComplexEnergy>) -> TransferMatrix {
    let e = e.into().c();
    spec.segments()
        .iter()
        .fold(TransferMatrix::IDENTITY, |acc, seg| segment_matrix(seg, e) * acc)
}

/// Propagator of the stationary equation from `from` to `to` (either order),
/// including free propagation outside the structure.
pub fn propagator(spec: &StructureSpec, e: impl Into<ComplexEnergy>, from: f64, to: f64) -> TransferMatrix {
    let e = e.into().c();
    if to < from {
        return propagator(spec, e, to, from).inverse_unimodular();
    }
    let edges = spec.interfaces();
    let left = edges[0];
    let right = edges[edges.len() - 1];
    let mut acc = TransferMatrix::IDENTITY;
    // free part left of the structure
    if from < left {
        let end = to.min(left);
        acc = TransferMatrix::free(e, end - from) * acc;
    }
    for (i, seg) in spec.segments().iter().enumerate() {
        let a = edges[i].max(from);
        let b = edges[i + 1].min(to);
        if b > a {
            let piece = SegmentMatrixParams::new(seg, e).matrix(seg.mass, b - a);
            acc = piece * acc;
        }
    }
    if to > right {
        let start = from.max(right);
        acc = TransferMatrix::free(e, to - start) * acc;
    }
    acc
}
