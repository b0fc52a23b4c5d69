//! Resolvent kernel `G(x, y; E)` built from Jost solutions.
//!
//! For `Im E > 0`:
//! `G+ = (-i / M22) [H(y-x) phi2(x) varphi1(y)^T + H(x-y) varphi1(x) phi2(y)^T] sigma_x`,
//! for `Im E < 0`:
//! `G- = (i / M11) [H(y-x) phi1(x) varphi2(y)^T + H(x-y) varphi2(x) phi1(y)^T] sigma_x`,
//! with `M` in the global-phase Jost convention and Heaviside `H(0) = 1/2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jost::{jost_matrix, jost_solution, JostKind};
use crate::model::{ComplexEnergy, Spinor2};
use crate::par::{self, Execution};
use crate::structure::StructureSpec;
use crate::transfer::MatrixEntry;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size of the prefactor entry below which evaluation is refused.
pub const POLE_REL_TOL: f64 = 1e-13;

/// Grid points per axis used by [`resolvent_bound_scan`].
pub const SCAN_GRID: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfPlane {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenKernelValue {
    pub matrix: [[Complex64; 2]; 2],
    pub half_plane: HalfPlane,
}

impl GreenKernelValue {
    /// Largest element magnitude.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Applies the kernel to a spinor.
    pub fn apply(&self, s: Spinor2) -> Spinor2 {
        let m = &self.matrix;
        Spinor2::new(m[0][0] * s.c1 + m[0][1] * s.c2, m[1][0] * s.c1 + m[1][1] * s.c2)
    }
}

fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// `a b^T sigma_x`, i.e. the outer product with its columns swapped.
fn outer_sigma_x(a: Spinor2, b: Spinor2) -> [[Complex64; 2]; 2] {
    [[a.c1 * b.c2, a.c1 * b.c1], [a.c2 * b.c2, a.c2 * b.c1]]
}

/// Evaluates the Green kernel off the real axis.
pub fn green_eval(spec: &StructureSpec, e: impl Into<ComplexEnergy>, x: f64, y: f64) -> Result<GreenKernelValue> {
    let energy = e.into();
    if !energy.is_finite() || energy.im == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Green kernel needs a finite energy off the real axis, got {energy}"
        )));
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidArgument("kernel coordinates must be finite".into()));
    }
    let e = energy.c();
    let upper = energy.im > 0.0;
    let entry = if upper { MatrixEntry::M22 } else { MatrixEntry::M11 };
    let m = jost_matrix(spec, e);
    let mantissa = m.entry(entry);
    if mantissa.norm() <= POLE_REL_TOL * m.max_abs() {
        return Err(Error::PoleProximity {
            energy,
            entry,
            value: m.true_entry(entry),
        });
    }
    let denom = m.true_entry(entry);
    let (left_kind, right_kind, pref) = if upper {
        (JostKind::Phi2, JostKind::Varphi1, -I / denom)
    } else {
        (JostKind::Phi1, JostKind::Varphi2, I / denom)
    };
    let (hl, hr) = (heaviside(y - x), heaviside(x - y));
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    if hl > 0.0 {
        let t = outer_sigma_x(
            jost_solution(spec, e, left_kind, x),
            jost_solution(spec, e, right_kind, y),
        );
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += t[r][c] * hl;
            }
        }
    }
    if hr > 0.0 {
        let t = outer_sigma_x(
            jost_solution(spec, e, right_kind, x),
            jost_solution(spec, e, left_kind, y),
        );
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += t[r][c] * hr;
            }
        }
    }
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= pref;
        }
    }
    Ok(GreenKernelValue {
        matrix: out,
        half_plane: if upper { HalfPlane::Upper } else { HalfPlane::Lower },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanSide {
    Above,
    Below,
}

/// Supremum of the largest kernel element over a `21 x 21` grid on
/// `[-L/2, L/2]^2`, at `E = e0 +/- i delta` for each offset.
pub fn resolvent_bound_scan(spec: &StructureSpec, e0: f64, side: ScanSide, offsets: &[f64]) -> Result<Vec<(f64, f64)>> {
    resolvent_bound_scan_with(spec, e0, side, offsets, Execution::default())
}

pub fn resolvent_bound_scan_with(
    spec: &StructureSpec,
    e0: f64,
    side: ScanSide,
    offsets: &[f64],
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    if offsets.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::InvalidArgument("offsets must be positive".into()));
    }
    if offsets.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("offsets must be strictly descending".into()));
    }
    let (a, b) = (spec.left_edge(), spec.right_edge());
    let grid: Vec<f64> = (0..SCAN_GRID)
        .map(|i| a + (b - a) * i as f64 / (SCAN_GRID - 1) as f64)
        .collect();
    let sign = match side {
        ScanSide::Above => 1.0,
        ScanSide::Below => -1.0,
    };
    Ok(offsets
        .iter()
        .map(|&delta| {
            let e = ComplexEnergy::new(e0, sign * delta);
            let sup = par::map_range(exec, SCAN_GRID * SCAN_GRID, |k| {
                let (x, y) = (grid[k / SCAN_GRID], grid[k % SCAN_GRID]);
                green_eval(spec, e, x, y).map_or(f64::INFINITY, |g| g.max_abs())
            })
            .into_iter()
            .fold(0.0, f64::max);
            (delta, sup)
        })
        .collect())
}
