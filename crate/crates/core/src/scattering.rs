//! Transmission/reflection coefficients, real-axis scans and the PT check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ComplexEnergy;
use crate::par::{self, Execution};
use crate::structure::StructureSpec;
use crate::transfer::{ldexp, structure_matrix, TransferMatrix};

/// `|M22|` relative to the matrix scale below which `t` is reported as a
/// spectral singularity.
pub const SINGULARITY_REL_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringCoefficients {
    pub t: Complex64,
    pub r_left: Complex64,
    pub r_right: Complex64,
    pub at_energy: ComplexEnergy,
}

/// `t = 1/M22`, `r_left = -M21/M22`, `r_right = M12/M22`.
pub fn coefficients_from_matrix(m: &TransferMatrix, at_energy: ComplexEnergy) -> Result<ScatteringCoefficients> {
    if m.m22.norm() <= SINGULARITY_REL_TOL * m.max_abs() {
        return Err(Error::SpectralSingularityHit { energy: at_energy });
    }
    let inv = 1.0 / m.m22;
    let t = Complex64::new(ldexp(inv.re, -m.scale_exp), ldexp(inv.im, -m.scale_exp));
    Ok(ScatteringCoefficients {
        t,
        r_left: -m.m21 * inv,
        r_right: m.m12 * inv,
        at_energy,
    })
}

pub fn scattering_coefficients(spec: &StructureSpec, e: impl Into<ComplexEnergy>) -> Result<ScatteringCoefficients> {
    let e = e.into();
    coefficients_from_matrix(&structure_matrix(spec, e), e)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumRow {
    /// Dimensionless energy `E L`.
    pub el: f64,
    pub abs_t: f64,
    pub arg_t: f64,
    pub abs_r_left: f64,
    pub abs_r_right: f64,
}

fn scan_row(spec: &StructureSpec, e: f64) -> SpectrumRow {
    let l = spec.total_length();
    match scattering_coefficients(spec, e) {
        Ok(c) => SpectrumRow {
            el: e * l,
            abs_t: c.t.norm(),
            arg_t: c.t.arg(),
            abs_r_left: c.r_left.norm(),
            abs_r_right: c.r_right.norm(),
        },
        Err(_) => SpectrumRow {
            el: e * l,
            abs_t: f64::INFINITY,
            arg_t: f64::NAN,
            abs_r_left: f64::INFINITY,
            abs_r_right: f64::INFINITY,
        },
    }
}

/// Uniformly sampled real-axis scattering data over `[e_min, e_max]` (energies
/// in inverse structure units; rows carry `E L`).
pub fn transmission_scan(spec: &StructureSpec, e_min: f64, e_max: f64, n_points: usize) -> Result<Vec<SpectrumRow>> {
    transmission_scan_with(spec, e_min, e_max, n_points, Execution::default())
}

pub fn transmission_scan_with(
    spec: &StructureSpec,
    e_min: f64,
    e_max: f64,
    n_points: usize,
    exec: Execution,
) -> Result<Vec<SpectrumRow>> {
    if !(e_min.is_finite() && e_max.is_finite() && e_min < e_max) {
        return Err(Error::InvalidArgument(format!(
            "scan range must satisfy e_min < e_max, got [{e_min}, {e_max}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidArgument(format!("n_points must be >= 2, got {n_points}")));
    }
    let step = (e_max - e_min) / (n_points - 1) as f64;
    Ok(par::map_range(exec, n_points, |i| {
        let e = if i + 1 == n_points {
            e_max
        } else {
            e_min + step * i as f64
        };
        scan_row(spec, e)
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtReport {
    pub symmetric: bool,
    /// First mismatch found, as `(left segment index, right segment index, reason)`
    /// on the merged segment list.
    pub violation: Option<(usize, usize, String)>,
}

/// Parameter comparison tolerance for [`pt_check`].
pub const PT_TOL: f64 = 1e-12;

/// Checks `m(-x) = m(x)` and `V(-x) = V*(x)` exactly on the segment list:
/// after merging equal neighbours, the list must equal its reversal with
/// `gain` negated and `mass`, `detuning` unchanged.
pub fn pt_check(spec: &StructureSpec) -> PtReport {
    let merged = spec.merged(PT_TOL);
    let segs = merged.segments();
    let n = segs.len();
    for i in 0..n.div_ceil(2) {
        let (a, b) = (&segs[i], &segs[n - 1 - i]);
        let reason = if (a.length - b.length).abs() > PT_TOL {
            Some(format!("lengths {} and {} differ", a.length, b.length))
        } else if (a.mass - b.mass).abs() > PT_TOL {
            Some(format!("mass {} is not mirrored by {}", a.mass, b.mass))
        } else if (a.detuning - b.detuning).abs() > PT_TOL {
            Some(format!("detuning {} is not mirrored by {}", a.detuning, b.detuning))
        } else if (a.gain + b.gain).abs() > PT_TOL {
            Some(format!("gain {} is not the negative of {}", a.gain, b.gain))
        } else {
            None
        };
        if let Some(reason) = reason {
            return PtReport {
                symmetric: false,
                violation: Some((i, n - 1 - i, reason)),
            };
        }
    }
    PtReport {
        symmetric: true,
        violation: None,
    }
}

/// Shape of a transmission peak.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakShape {
    /// Energy of the maximum.
    pub energy: f64,
    /// `|t|` at the maximum.
    pub height: f64,
    /// Full width at half maximum of the Lorentzian osculating `|t|^2` at
    /// the maximum, `2 sqrt(-2 T / T'')`. For an isolated resonance at
    /// `E_r - i G/2` this tends to `G`; unlike a level-crossing width it
    /// stays defined when neighbouring peaks overlap.
    pub fwhm: f64,
}

fn abs_t(spec: &StructureSpec, e: f64) -> f64 {
    scattering_coefficients(spec, e).map_or(f64::INFINITY, |c| c.t.norm())
}

/// Second derivative of `f` at `x` by Richardson-extrapolated central
/// differences, starting from step `h`.
fn second_derivative(x: f64, mut h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let fx = f(x);
    let d = |h: f64| (f(x + h) - 2.0 * fx + f(x - h)) / (h * h);
    let mut prev = f64::NAN;
    let mut coarse = d(h);
    for _ in 0..12 {
        let fine = d(h / 2.0);
        let est = (4.0 * fine - coarse) / 3.0;
        if (est - prev).abs() <= 1e-7 * est.abs() {
            return est;
        }
        prev = est;
        coarse = fine;
        h /= 2.0;
    }
    prev
}

/// Golden-section search for an extremum of `f` on `[a, b]`.
fn golden(mut a: f64, mut b: f64, maximize: bool, f: impl Fn(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let sign = if maximize { -1.0 } else { 1.0 };
    let h = |x: f64| sign * f(x);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (h(c), h(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = h(d);
        }
    }
    0.5 * (a + b)
}

/// The transmission peak closest to `E = 0` inside `[-e_max, e_max]`, located
/// on an `n_points` grid and refined. Ties in `|E|` prefer the positive side.
pub fn lowest_transmission_peak(spec: &StructureSpec, e_max: f64, n_points: usize) -> Result<Option<PeakShape>> {
    let rows = transmission_scan(spec, -e_max, e_max, n_points)?;
    let l = spec.total_length();
    let es: Vec<f64> = rows.iter().map(|r| r.el / l).collect();
    let ts: Vec<f64> = rows.iter().map(|r| r.abs_t).collect();
    let maxima: Vec<usize> = (1..ts.len() - 1)
        .filter(|&i| ts[i] > ts[i - 1] && ts[i] >= ts[i + 1])
        .collect();
    let best = maxima.iter().copied().min_by(|&a, &b| {
        let (ea, eb) = (es[a].abs(), es[b].abs());
        if (ea - eb).abs() <= 1e-12 * (1.0 + ea) {
            eb.partial_cmp(&ea).unwrap().then(es[b].partial_cmp(&es[a]).unwrap())
        } else {
            ea.partial_cmp(&eb).unwrap()
        }
    });
    let Some(i) = best else {
        return Ok(None);
    };
    let f = |e: f64| abs_t(spec, e);
    let peak_e = golden(es[i - 1], es[i + 1], true, f);
    let height = f(peak_e);
    let t2 = |e: f64| abs_t(spec, e).powi(2);
    let curvature = second_derivative(peak_e, es[i + 1] - es[i], t2);
    let fwhm = if curvature < 0.0 {
        2.0 * (-2.0 * height * height / curvature).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(Some(PeakShape {
        energy: peak_e,
        height,
        fwhm,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{make_pt_pair_structure, make_uniform_gain_structure, GainSign, Segment};

    #[test]
    fn unit_hermitian_grating_at_band_centre() {
        let spec = make_uniform_gain_structure(1.0, 0.0, GainSign::Gain).unwrap();
        let c = scattering_coefficients(&spec, 0.0).unwrap();
        assert!((c.t - Complex64::new(1.0 / 1.0f64.cosh(), 0.0)).norm() < 1e-15);
        assert!((c.r_left - Complex64::new(0.0, -1.0f64.tanh())).norm() < 1e-15);
        assert!((c.t.norm() - 0.64805).abs() < 1e-5);
        assert!((c.t.norm_sqr() + c.r_left.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn massless_is_reflectionless() {
        let spec = StructureSpec::new(vec![
            Segment::new(0.5, 0.0, 0.0, 0.0).unwrap(),
            Segment::new(1.5, 0.0, 0.0, 0.0).unwrap(),
        ])
        .unwrap();
        for e in [-2.0, 0.3, 7.0] {
            let c = scattering_coefficients(&spec, e).unwrap();
            assert!((c.t - (Complex64::new(0.0, e * 2.0)).exp()).norm() < 1e-13);
            assert_eq!(c.r_left.norm(), 0.0);
            assert_eq!(c.r_right.norm(), 0.0);
        }
    }

    #[test]
    fn scan_endpoints_and_validation() {
        let spec = make_uniform_gain_structure(1.0, 0.0, GainSign::Gain).unwrap();
        let rows = transmission_scan(&spec, -1.0, 1.0, 3).unwrap();
        assert_eq!(rows.iter().map(|r| r.el).collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0]);
        assert!(transmission_scan(&spec, 1.0, 1.0, 10).is_err());
        assert!(transmission_scan(&spec, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn hermitian_scan_is_unitary() {
        let spec = StructureSpec::new(vec![
            Segment::new(0.3, 2.0, 0.0, 0.5).unwrap(),
            Segment::new(0.9, 1.0, 0.0, -1.0).unwrap(),
        ])
        .unwrap();
        for r in transmission_scan(&spec, -10.0, 10.0, 501).unwrap() {
            assert!((r.abs_t.powi(2) + r.abs_r_left.powi(2) - 1.0).abs() < 1e-10);
            assert!((r.abs_r_left - r.abs_r_right).abs() < 1e-10);
        }
    }

    #[test]
    fn lossy_variant_stays_below_unity() {
        let spec = make_uniform_gain_structure(1.0, 1.74, GainSign::Loss).unwrap();
        let rows = transmission_scan(&spec, -20.0, 20.0, 4001).unwrap();
        assert!(rows.iter().all(|r| r.abs_t <= 1.0));
    }

    #[test]
    fn gain_peaks_grow_toward_threshold() {
        let peak = |lam: f64| {
            let spec = make_uniform_gain_structure(1.0, lam, GainSign::Gain).unwrap();
            transmission_scan(&spec, -10.0, 10.0, 4001)
                .unwrap()
                .iter()
                .map(|r| r.abs_t)
                .fold(0.0, f64::max)
        };
        let (a, b, c) = (peak(1.5), peak(1.65), peak(1.74));
        assert!(c > b && b > a, "{a} {b} {c}");
    }

    #[test]
    fn pt_check_cases() {
        assert!(pt_check(&make_pt_pair_structure(1.0, 0.0).unwrap()).symmetric);
        assert!(pt_check(&make_pt_pair_structure(1.0, 4.46).unwrap()).symmetric);
        let r = pt_check(&make_uniform_gain_structure(1.0, 1.0, GainSign::Gain).unwrap());
        assert!(!r.symmetric);
        assert_eq!(r.violation.as_ref().map(|v| (v.0, v.1)), Some((0, 0)));
        assert!(pt_check(&make_uniform_gain_structure(1.0, 0.0, GainSign::Gain).unwrap()).symmetric);
        let herm = StructureSpec::new(vec![
            Segment::new(0.2, 1.0, 0.0, 0.3).unwrap(),
            Segment::new(0.5, 2.0, 0.0, -1.0).unwrap(),
            Segment::new(0.2, 1.0, 0.0, 0.3).unwrap(),
        ])
        .unwrap();
        assert!(pt_check(&herm).symmetric);
        let odd_detuning = StructureSpec::new(vec![
            Segment::new(0.5, 1.0, 0.0, 0.3).unwrap(),
            Segment::new(0.5, 1.0, 0.0, -0.3).unwrap(),
        ])
        .unwrap();
        assert!(!pt_check(&odd_detuning).symmetric);
    }

    #[test]
    fn singular_m22_reports_hit() {
        let m = TransferMatrix::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        );
        let err = coefficients_from_matrix(&m, ComplexEnergy::real(2.0)).unwrap_err();
        assert!(matches!(err, Error::SpectralSingularityHit { energy } if energy.re == 2.0));
    }
}
