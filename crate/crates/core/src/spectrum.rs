//! Classification of transfer-matrix zeros, threshold solving and trajectory
//! tracing in the gain parameter.
//!
//! | entry | `Im E > 0`     | `Im E < 0`  |
//! |-------|----------------|-------------|
//! | `M22` | bound state    | resonance   |
//! | `M11` | antiresonance  | bound state |
//!
//! Zeros with `|Im E| <= real_axis_tol` are spectral singularities: lasing type
//! for `M22`, reflectionless type for `M11`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ComplexEnergy;
use crate::par;
use crate::structure::{StructureFamily, StructureSpec};
use crate::transfer::{structure_matrix, MatrixEntry};
use crate::zeros::{
    base_step_for, count_zeros, find_zeros, newton_refine, MatrixEntryFn, SearchOptions, UnresolvedCell, Window,
};

/// Continuous spectrum note carried by every report.
pub const CONTINUOUS_SPECTRUM_BANNER: &str =
    "continuous spectrum: the entire real energy axis (branch cut of the resolvent)";

pub const DEFAULT_REAL_AXIS_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpectralKind {
    BoundState,
    Resonance,
    Antiresonance,
    SpectralSingularity,
}

impl SpectralKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::BoundState => "bound_state",
            Self::Resonance => "resonance",
            Self::Antiresonance => "antiresonance",
            Self::SpectralSingularity => "spectral_singularity",
        }
    }
}

impl fmt::Display for SpectralKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SingularitySubtype {
    Lasing,
    Reflectionless,
}

impl SingularitySubtype {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lasing => "lasing",
            Self::Reflectionless => "reflectionless",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    pub energy: ComplexEnergy,
    pub which_entry: MatrixEntry,
    pub kind: SpectralKind,
    pub singularity_subtype: Option<SingularitySubtype>,
    /// `|entry| / max|M_ij|` at the located zero.
    pub residual: f64,
    /// For reflectionless singularities, `M21` at the zero: the amplitude of
    /// the right-incident wave that, together with a unit left-incident wave,
    /// produces no outgoing wave.
    pub m21: Option<Complex64>,
}

pub fn classify_point(
    entry: MatrixEntry,
    e: Complex64,
    real_axis_tol: f64,
) -> (SpectralKind, Option<SingularitySubtype>) {
    if e.im.abs() <= real_axis_tol {
        let subtype = match entry {
            MatrixEntry::M22 => SingularitySubtype::Lasing,
            MatrixEntry::M11 => SingularitySubtype::Reflectionless,
        };
        return (SpectralKind::SpectralSingularity, Some(subtype));
    }
    let kind = match (entry, e.im > 0.0) {
        (MatrixEntry::M22, true) | (MatrixEntry::M11, false) => SpectralKind::BoundState,
        (MatrixEntry::M22, false) => SpectralKind::Resonance,
        (MatrixEntry::M11, true) => SpectralKind::Antiresonance,
    };
    (kind, None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Sorted by `Re E`, then `Im E`, then entry.
    pub points: Vec<SpectralPoint>,
    pub search_window: Window,
    pub structure_hash: String,
    pub refinement_tol: f64,
    pub real_axis_tol: f64,
    pub unresolved: Vec<(MatrixEntry, UnresolvedCell)>,
    pub banner: &'static str,
}

impl SpectrumReport {
    pub fn count(&self, kind: SpectralKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }

    pub fn points_of(&self, entry: MatrixEntry) -> impl Iterator<Item = &SpectralPoint> {
        self.points.iter().filter(move |p| p.which_entry == entry)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub search: SearchOptions,
    pub real_axis_tol: f64,
    pub entries: EntrySelection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntrySelection {
    M11,
    M22,
    Both,
}

impl EntrySelection {
    pub fn entries(self) -> &'static [MatrixEntry] {
        match self {
            Self::M11 => &[MatrixEntry::M11],
            Self::M22 => &[MatrixEntry::M22],
            Self::Both => &[MatrixEntry::M11, MatrixEntry::M22],
        }
    }
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            search: SearchOptions::default(),
            real_axis_tol: DEFAULT_REAL_AXIS_TOL,
            entries: EntrySelection::Both,
        }
    }
}

fn make_point(spec: &StructureSpec, entry: MatrixEntry, z: Complex64, real_axis_tol: f64) -> SpectralPoint {
    let m = structure_matrix(spec, z);
    let (kind, singularity_subtype) = classify_point(entry, z, real_axis_tol);
    let m21 = (singularity_subtype == Some(SingularitySubtype::Reflectionless)).then(|| m.to_plain()[1][0]);
    SpectralPoint {
        energy: z.into(),
        which_entry: entry,
        kind,
        singularity_subtype,
        residual: m.entry(entry).norm() / m.max_abs(),
        m21,
    }
}

fn sort_points(points: &mut [SpectralPoint]) {
    points.sort_by(|a, b| {
        a.energy
            .re
            .total_cmp(&b.energy.re)
            .then(a.energy.im.total_cmp(&b.energy.im))
            .then(a.which_entry.cmp(&b.which_entry))
    });
}

/// Zeros of `M11` and `M22` in `window`, labelled by kind.
pub fn classify_spectrum(spec: &StructureSpec, window: &Window, real_axis_tol: f64) -> Result<SpectrumReport> {
    classify_spectrum_with(
        spec,
        window,
        &ClassifyOptions {
            real_axis_tol,
            ..ClassifyOptions::default()
        },
    )
}

pub fn classify_spectrum_with(spec: &StructureSpec, window: &Window, opts: &ClassifyOptions) -> Result<SpectrumReport> {
    let mut points = Vec::new();
    let mut unresolved = Vec::new();
    for &entry in opts.entries.entries() {
        let found = find_zeros(spec, entry, window, &opts.search)?;
        points.extend(
            found
                .zeros
                .iter()
                .map(|&z| make_point(spec, entry, z, opts.real_axis_tol)),
        );
        unresolved.extend(found.unresolved.into_iter().map(|u| (entry, u)));
    }
    sort_points(&mut points);
    Ok(SpectrumReport {
        points,
        search_window: *window,
        structure_hash: spec.fingerprint(),
        refinement_tol: opts.search.refinement_tol,
        real_axis_tol: opts.real_axis_tol,
        unresolved,
        banner: CONTINUOUS_SPECTRUM_BANNER,
    })
}

impl StructureFamily {
    /// Entry whose zeros cross into the point spectrum at threshold.
    pub fn threshold_entry(self) -> MatrixEntry {
        match self {
            Self::UniformGain | Self::PtPair => MatrixEntry::M22,
            Self::UniformLoss => MatrixEntry::M11,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdResult {
    pub family: StructureFamily,
    pub m0_l: f64,
    pub lambda_c_l: f64,
    pub entry: MatrixEntry,
    /// Zeros of `entry` on (or within `1e-6` of) the real axis at `lambda_c_l`.
    pub crossing_zeros: Vec<ComplexEnergy>,
    /// Final bisection bracket on `lambdaL`.
    pub bracket: (f64, f64),
}

struct ThresholdProblem<'a> {
    family: StructureFamily,
    m0_l: f64,
    window: &'a Window,
    entry: MatrixEntry,
    /// `+1` when zeros cross upward (M22), `-1` downward (M11).
    sign: f64,
}

impl ThresholdProblem<'_> {
    /// Part of the window on the point-spectrum side of the real axis.
    fn half_window(&self) -> Result<Window> {
        if self.sign > 0.0 {
            Window::new(self.window.re_min, self.window.re_max, 0.0, self.window.im_max)
        } else {
            Window::new(self.window.re_min, self.window.re_max, self.window.im_min, 0.0)
        }
    }

    fn crossed(&self, lambda_l: f64) -> Result<bool> {
        let spec = self.family.build(self.m0_l, lambda_l)?;
        let f = MatrixEntryFn {
            spec: &spec,
            entry: self.entry,
        };
        let (n, _) = count_zeros(&f, &self.half_window()?, base_step_for(&spec))?;
        Ok(n > 0)
    }

    /// Moves tracked zeros to `lambda_l` by warm-started Newton; fails when one
    /// leaves the window.
    fn track(&self, zeros: &[Complex64], lambda_l: f64) -> Result<Vec<Complex64>> {
        let spec = self.family.build(self.m0_l, lambda_l)?;
        let f = MatrixEntryFn {
            spec: &spec,
            entry: self.entry,
        };
        let moved = par::map_slice(Default::default(), zeros, |&z| newton_refine(&f, z, 1e-12));
        let mut out = Vec::with_capacity(zeros.len());
        for z in moved.into_iter().flatten() {
            if !self.window.contains(z) {
                return Err(Error::EscapingZero {
                    energy: z.into(),
                    entry: self.entry,
                    lambda_l,
                });
            }
            out.push(z);
        }
        Ok(out)
    }

    fn leading(&self, zeros: &[Complex64]) -> Option<Complex64> {
        zeros
            .iter()
            .copied()
            .max_by(|a, b| (self.sign * a.im).total_cmp(&(self.sign * b.im)))
    }
}

/// Smallest `lambdaL` at which a zero of the family's threshold entry reaches
/// the real axis from the non-physical side: `M22` zeros rising to
/// `Im E >= 0` (uniform gain, PT pair) or `M11` zeros falling to `Im E <= 0`
/// (uniform loss).
///
/// `lambdaL` is stepped upward over `[0, 2 (m0L + 5)]` (expanded once by 4x)
/// until the point-spectrum half of `window` holds a zero, then bisected to
/// `tol`. The crossing zero is finally followed by warm-started Newton and its
/// imaginary part driven to zero by regula falsi.
pub fn threshold_lambda_c(family: StructureFamily, m0_l: f64, window: &Window, tol: f64) -> Result<ThresholdResult> {
    if !(m0_l.is_finite() && m0_l > 0.0) {
        return Err(Error::InvalidArgument(format!("m0L must be > 0, got {m0_l}")));
    }
    if !(tol.is_finite() && tol >= 1e-6) {
        return Err(Error::InvalidArgument(format!("tol must be >= 1e-6, got {tol}")));
    }
    if !(window.im_min < 0.0 && window.im_max > 0.0) {
        return Err(Error::InvalidArgument(
            "threshold window must straddle the real axis".into(),
        ));
    }
    let entry = family.threshold_entry();
    let problem = ThresholdProblem {
        family,
        m0_l,
        window,
        entry,
        sign: entry.point_spectrum_sign(),
    };

    if problem.crossed(0.0)? {
        return Err(Error::InvalidArgument(format!(
            "{family} at m0L = {m0_l} already has point spectrum at lambdaL = 0"
        )));
    }

    let initial_hi = 2.0 * (m0_l + 5.0);
    let mut tracked = find_zeros(&family.build(m0_l, 0.0)?, entry, window, &SearchOptions::default())?.zeros;
    const COARSE_STEPS: usize = 48;
    let mut bracket = None;
    let mut lo = 0.0;
    'outer: for hi_end in [initial_hi, 4.0 * initial_hi] {
        let start = lo;
        let step = (hi_end - start) / COARSE_STEPS as f64;
        for k in 1..=COARSE_STEPS {
            let lam = start + step * k as f64;
            if problem.crossed(lam)? {
                bracket = Some((lo, lam));
                break 'outer;
            }
            tracked = problem.track(&tracked, lam)?;
            lo = lam;
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        let detail = match problem.leading(&tracked) {
            Some(z) => format!("highest tracked {entry} zero at E = {z}"),
            None => format!("no {entry} zeros inside the window"),
        };
        return Err(Error::ThresholdNotFound {
            max_lambda_l: 4.0 * initial_hi,
            detail,
        });
    };

    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if problem.crossed(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // locate the crossing zero(s) just above threshold
    let spec_hi = family.build(m0_l, hi)?;
    let above = find_zeros(&spec_hi, entry, &problem.half_window()?, &SearchOptions::default())?;
    let nearest_axis = above
        .zeros
        .iter()
        .copied()
        .min_by(|a, b| a.im.abs().total_cmp(&b.im.abs()));
    let lambda_c_l = nearest_axis
        .and_then(|z| refine_crossing(&problem, z, lo, hi))
        .unwrap_or(0.5 * (lo + hi));

    let spec_c = family.build(m0_l, lambda_c_l)?;
    let f = MatrixEntryFn { spec: &spec_c, entry };
    let mut crossing: Vec<ComplexEnergy> = above
        .zeros
        .iter()
        .filter_map(|&z| newton_refine(&f, z, 1e-13).ok())
        .filter(|z| z.im.abs() <= DEFAULT_REAL_AXIS_TOL.max(10.0 * (hi - lo)))
        .map(ComplexEnergy::from)
        .collect();
    crossing.sort_by(|a, b| a.re.total_cmp(&b.re));
    crossing.dedup_by(|a, b| (a.re - b.re).abs() < 1e-9 && (a.im - b.im).abs() < 1e-9);

    Ok(ThresholdResult {
        family,
        m0_l,
        lambda_c_l,
        entry,
        crossing_zeros: crossing,
        bracket: (lo, hi),
    })
}

/// Illinois regula falsi on `sign * Im z(lambda)` for the zero `z` tracked from
/// `z_hi` at `hi`.
fn refine_crossing(problem: &ThresholdProblem<'_>, z_hi: Complex64, lo: f64, hi: f64) -> Option<f64> {
    let follow = |lam: f64, z0: Complex64| -> Option<Complex64> {
        let spec = problem.family.build(problem.m0_l, lam).ok()?;
        let f = MatrixEntryFn {
            spec: &spec,
            entry: problem.entry,
        };
        newton_refine(&f, z0, 1e-14).ok()
    };
    let z_lo = follow(lo, z_hi)?;
    let (mut a, mut b) = (lo, hi);
    let (mut za, mut zb) = (z_lo, z_hi);
    let (mut ga, mut gb) = (problem.sign * za.im, problem.sign * zb.im);
    if !(ga < 0.0 && gb >= 0.0) {
        return None;
    }
    let mut side = 0;
    for _ in 0..100 {
        let c = (a * gb - b * ga) / (gb - ga);
        let zc = follow(c, if (c - a).abs() < (b - c).abs() { za } else { zb })?;
        let gc = problem.sign * zc.im;
        if gc.abs() <= 1e-15 || (b - a).abs() <= 1e-14 {
            return Some(c);
        }
        if gc < 0.0 {
            a = c;
            za = zc;
            ga = gc;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            zb = zc;
            gb = gc;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    Some(0.5 * (a + b))
}

/// Link from a point of one trace step to its trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectoryLink {
    pub trajectory_id: usize,
    /// Nearest-neighbour matching was ambiguous (second-nearest candidate
    /// closer than twice the nearest).
    pub ambiguous: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub lambda_l: f64,
    pub report: SpectrumReport,
    /// Aligned with `report.points`.
    pub links: Vec<TrajectoryLink>,
}

/// Classified zeros for each `lambdaL`, linked into trajectories.
///
/// Each point of step `k-1` is moved to step `k`'s parameters by warm-started
/// Newton; the resulting predictions are matched greedily (closest pair first)
/// to the newly found zeros of the same entry.
pub fn trace_zeros(
    family: StructureFamily,
    m0_l: f64,
    lambda_values: &[f64],
    window: &Window,
    opts: &ClassifyOptions,
) -> Result<Vec<TraceStep>> {
    if lambda_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("lambda values must be sorted ascending".into()));
    }
    let mut steps: Vec<TraceStep> = Vec::with_capacity(lambda_values.len());
    let mut next_id = 0usize;
    for &lam in lambda_values {
        let spec = family.build(m0_l, lam)?;
        let report = classify_spectrum_with(&spec, window, opts)?;
        let links = match steps.last() {
            None => {
                let links = (0..report.points.len())
                    .map(|i| TrajectoryLink {
                        trajectory_id: i,
                        ambiguous: false,
                    })
                    .collect();
                next_id = report.points.len();
                links
            }
            Some(prev) => link_step(&spec, prev, &report, &mut next_id),
        };
        steps.push(TraceStep {
            lambda_l: lam,
            report,
            links,
        });
    }
    Ok(steps)
}

fn link_step(
    spec: &StructureSpec,
    prev: &TraceStep,
    report: &SpectrumReport,
    next_id: &mut usize,
) -> Vec<TrajectoryLink> {
    // predicted positions of the previous points under the new parameters
    let predicted: Vec<(MatrixEntry, Complex64, usize)> = prev
        .report
        .points
        .iter()
        .zip(&prev.links)
        .map(|(p, link)| {
            let f = MatrixEntryFn {
                spec,
                entry: p.which_entry,
            };
            let z = newton_refine(&f, p.energy.c(), 1e-12).unwrap_or(p.energy.c());
            (p.which_entry, z, link.trajectory_id)
        })
        .collect();

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    let mut ambiguous = vec![false; report.points.len()];
    for (i, p) in report.points.iter().enumerate() {
        let mut d: Vec<(f64, usize)> = predicted
            .iter()
            .enumerate()
            .filter(|(_, q)| q.0 == p.which_entry)
            .map(|(j, q)| ((q.1 - p.energy.c()).norm(), j))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        if d.len() >= 2 && d[1].0 < 2.0 * d[0].0 {
            ambiguous[i] = true;
        }
        pairs.extend(d.into_iter().map(|(dist, j)| (dist, i, j)));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut assigned: Vec<Option<usize>> = vec![None; report.points.len()];
    let mut used = vec![false; predicted.len()];
    for (_, i, j) in pairs {
        if assigned[i].is_none() && !used[j] {
            assigned[i] = Some(predicted[j].2);
            used[j] = true;
        }
    }
    assigned
        .into_iter()
        .zip(ambiguous)
        .map(|(id, ambiguous)| {
            let trajectory_id = id.unwrap_or_else(|| {
                *next_id += 1;
                *next_id - 1
            });
            TrajectoryLink {
                trajectory_id,
                ambiguous,
            }
        })
        .collect()
}
