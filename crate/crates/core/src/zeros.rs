//! Zeros of an entire function inside a rectangle of the complex plane.
//!
//! Counting uses the argument principle: the phase of `f` is accumulated along
//! the cell perimeter with adaptive sampling that keeps every increment below
//! `pi/2`. Cells are bisected until each holds one zero, which is then polished
//! by Newton iteration with a central-difference derivative.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::structure::StructureSpec;
use crate::transfer::{ldexp, structure_matrix, MatrixEntry};

/// Relative magnitude below which a perimeter sample counts as touching a zero.
pub const PERIMETER_TOL: f64 = 1e-12;
const MAX_ARC_DEPTH: u32 = 48;
const MAX_NEWTON_ITERATIONS: usize = 100;
const SPLIT_RETRIES: u32 = 6;
const WINDOW_RETRIES: u32 = 6;

/// Axis-aligned rectangle `[re_min, re_max] x [im_min, im_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    /// `[-20, 20] x [-10, 10]`.
    pub const DEFAULT: Window = Window {
        re_min: -20.0,
        re_max: 20.0,
        im_min: -10.0,
        im_max: 10.0,
    };

    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !finite || re_min >= re_max || im_min >= im_max {
            return Err(Error::InvalidArgument(format!(
                "degenerate window [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.contains_with_margin(z, 0.0)
    }

    pub fn contains_with_margin(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.re_min - margin
            && z.re <= self.re_max + margin
            && z.im >= self.im_min - margin
            && z.im <= self.im_max + margin
    }

    /// Scales the window about its centre by `factor`.
    pub fn dilated(&self, factor: f64) -> Window {
        let c = self.center();
        let (hw, hh) = (0.5 * self.width() * factor, 0.5 * self.height() * factor);
        Window {
            re_min: c.re - hw,
            re_max: c.re + hw,
            im_min: c.im - hh,
            im_max: c.im + hh,
        }
    }

    pub fn shifted(&self, dre: f64, dim: f64) -> Window {
        Window {
            re_min: self.re_min + dre,
            re_max: self.re_max + dre,
            im_min: self.im_min + dim,
            im_max: self.im_max + dim,
        }
    }

    /// Multiplies all coordinates by `s > 0` (e.g. converting `E L` to `E`).
    pub fn scaled(&self, s: f64) -> Window {
        Window {
            re_min: self.re_min * s,
            re_max: self.re_max * s,
            im_min: self.im_min * s,
            im_max: self.im_max * s,
        }
    }

    /// Counter-clockwise corners starting bottom-left.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Splits across the longer side at fraction `frac` of its extent.
    fn split(&self, frac: f64) -> (Window, Window) {
        if self.width() >= self.height() {
            let x = self.re_min + frac * self.width();
            (Window { re_max: x, ..*self }, Window { re_min: x, ..*self })
        } else {
            let y = self.im_min + frac * self.height();
            (Window { im_max: y, ..*self }, Window { im_min: y, ..*self })
        }
    }

    fn seed(&self, salt: u64) -> u64 {
        let mut h = 0x9e37_79b9_7f4a_7c15u64 ^ salt;
        for v in [self.re_min, self.re_max, self.im_min, self.im_max] {
            h ^= v.to_bits();
            h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
            h ^= h >> 31;
        }
        h
    }
}

/// Function value as `value * 2^exp`; `scale` is a magnitude in the same
/// units as `value` against which "small" is judged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntrySample {
    pub value: Complex64,
    pub exp: i32,
    pub scale: f64,
}

impl EntrySample {
    /// Plain value with unit scale.
    pub fn plain(value: Complex64) -> Self {
        Self {
            value,
            exp: 0,
            scale: 1.0,
        }
    }

    pub fn relative(&self) -> f64 {
        self.value.norm() / self.scale
    }

    fn aligned(&self, exp: i32) -> Complex64 {
        let k = self.exp - exp;
        Complex64::new(ldexp(self.value.re, k), ldexp(self.value.im, k))
    }
}

/// An entire function that can be sampled with an exponent-aware result.
pub trait AnalyticFunction: Sync {
    fn sample(&self, z: Complex64) -> EntrySample;
}

impl<F> AnalyticFunction for F
where
    F: Fn(Complex64) -> EntrySample + Sync,
{
    fn sample(&self, z: Complex64) -> EntrySample {
        self(z)
    }
}

/// `M11(E)` or `M22(E)` of a structure; scale is the largest matrix entry.
pub struct MatrixEntryFn<'a> {
    pub spec: &'a StructureSpec,
    pub entry: MatrixEntry,
}

impl AnalyticFunction for MatrixEntryFn<'_> {
    fn sample(&self, z: Complex64) -> EntrySample {
        let m = structure_matrix(self.spec, z);
        EntrySample {
            value: m.entry(self.entry),
            exp: m.scale_exp,
            scale: m.max_abs(),
        }
    }
}

/// Base perimeter sampling step for a structure's matrix entries: phases
/// rotate at a rate comparable to the total length.
pub fn base_step_for(spec: &StructureSpec) -> f64 {
    0.05 / spec.total_length().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    /// Target accuracy of each located zero.
    pub refinement_tol: f64,
    /// Number of forced bisection levels before cells are resolved.
    pub min_depth: u32,
    /// Cells are not split beyond this depth.
    pub max_depth: u32,
    pub exec: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            refinement_tol: 1e-10,
            min_depth: 3,
            max_depth: 48,
            exec: Execution::default(),
        }
    }
}

impl SearchOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            refinement_tol: tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1e-13..=1e-3).contains(&self.refinement_tol) {
            return Err(Error::InvalidArgument(format!(
                "refinement_tol must lie in [1e-13, 1e-3], got {}",
                self.refinement_tol
            )));
        }
        if self.min_depth > self.max_depth {
            return Err(Error::InvalidArgument("min_depth exceeds max_depth".into()));
        }
        Ok(())
    }
}

/// A cell that could not be reduced to isolated simple zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct UnresolvedCell {
    pub window: Window,
    pub winding: i64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSearch {
    /// Located zeros, sorted by real then imaginary part.
    pub zeros: Vec<Complex64>,
    pub unresolved: Vec<UnresolvedCell>,
    /// Winding number of the (possibly dilated) search window.
    pub winding: i64,
    /// Window actually counted (the request, or a slightly dilated copy when a
    /// zero sat on its boundary).
    pub counted_window: Window,
}

/// A perimeter sample came within [`PERIMETER_TOL`] of a zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerimeterHit {
    pub near: Complex64,
}

fn unit_phase<F: AnalyticFunction + ?Sized>(f: &F, z: Complex64) -> std::result::Result<Complex64, PerimeterHit> {
    let s = f.sample(z);
    let r = s.relative();
    if !(r.is_finite() && r > PERIMETER_TOL) {
        return Err(PerimeterHit { near: z });
    }
    Ok(s.value / s.value.norm())
}

fn arc_phase<F: AnalyticFunction + ?Sized>(
    f: &F,
    za: Complex64,
    ua: Complex64,
    zb: Complex64,
    ub: Complex64,
    depth: u32,
) -> std::result::Result<f64, PerimeterHit> {
    let d = (ub * ua.conj()).arg();
    if d.abs() < FRAC_PI_2 {
        return Ok(d);
    }
    let zm = 0.5 * (za + zb);
    if depth >= MAX_ARC_DEPTH {
        return Err(PerimeterHit { near: zm });
    }
    let um = unit_phase(f, zm)?;
    Ok(arc_phase(f, za, ua, zm, um, depth + 1)? + arc_phase(f, zm, um, zb, ub, depth + 1)?)
}

fn edge_phase<F: AnalyticFunction + ?Sized>(
    f: &F,
    a: Complex64,
    b: Complex64,
    base_step: f64,
) -> std::result::Result<f64, PerimeterHit> {
    let n = ((b - a).norm() / base_step).ceil().max(4.0) as usize;
    let mut total = 0.0;
    let mut prev_z = a;
    let mut prev_u = unit_phase(f, a)?;
    for k in 1..=n {
        let z = if k == n { b } else { a + (b - a) * (k as f64 / n as f64) };
        let u = unit_phase(f, z)?;
        total += arc_phase(f, prev_z, prev_u, z, u, 0)?;
        prev_z = z;
        prev_u = u;
    }
    Ok(total)
}

/// Number of zeros (with multiplicity) inside `w`, from the phase change of
/// `f` along its boundary.
pub fn winding_number<F: AnalyticFunction + ?Sized>(
    f: &F,
    w: &Window,
    base_step: f64,
) -> std::result::Result<i64, PerimeterHit> {
    let c = w.corners();
    let mut total = 0.0;
    for i in 0..4 {
        total += edge_phase(f, c[i], c[(i + 1) % 4], base_step)?;
    }
    let turns = total / (2.0 * PI);
    let k = turns.round();
    if (turns - k).abs() > 0.1 {
        return Err(PerimeterHit { near: w.center() });
    }
    Ok(k as i64)
}

/// Newton iteration from `z0` with derivative step `1e-6 (1 + |z|)`.
pub fn newton_refine<F: AnalyticFunction + ?Sized>(f: &F, z0: Complex64, tol: f64) -> Result<Complex64> {
    let mut z = z0;
    let mut last_step = f64::INFINITY;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let s0 = f.sample(z);
        if s0.value == Complex64::new(0.0, 0.0) {
            return Ok(z);
        }
        let h = 1e-6 * (1.0 + z.norm());
        let sp = f.sample(z + h);
        let sm = f.sample(z - h);
        let deriv = (sp.aligned(s0.exp) - sm.aligned(s0.exp)) / (2.0 * h);
        let dz = s0.value / deriv;
        if !dz.is_finite() {
            break;
        }
        z -= dz;
        let step = dz.norm();
        let floor = 4.0 * f64::EPSILON * (1.0 + z.norm());
        if step <= (1e-3 * tol).max(floor) || (step <= tol && step >= 0.5 * last_step) {
            return Ok(z);
        }
        last_step = step;
    }
    Err(Error::NonConvergence(format!(
        "Newton iteration from {z0} did not converge within {MAX_NEWTON_ITERATIONS} steps"
    )))
}

struct Search<'f, F: ?Sized> {
    f: &'f F,
    base_step: f64,
    opts: SearchOptions,
}

#[derive(Default)]
struct CellOutcome {
    zeros: Vec<Complex64>,
    unresolved: Vec<UnresolvedCell>,
}

impl CellOutcome {
    fn merge(mut self, other: CellOutcome) -> CellOutcome {
        self.zeros.extend(other.zeros);
        self.unresolved.extend(other.unresolved);
        self
    }

    fn unresolved(window: Window, winding: i64, reason: impl Into<String>) -> CellOutcome {
        CellOutcome {
            zeros: Vec::new(),
            unresolved: vec![UnresolvedCell {
                window,
                winding,
                reason: reason.into(),
            }],
        }
    }
}

impl<F: AnalyticFunction + ?Sized> Search<'_, F> {
    fn solve(&self, cell: Window, winding: i64, depth: u32) -> CellOutcome {
        if winding == 0 {
            return CellOutcome::default();
        }
        if winding < 0 {
            return CellOutcome::unresolved(cell, winding, "negative winding number");
        }
        let mut newton_note = None;
        if winding == 1 && depth >= self.opts.min_depth {
            let margin = 1e-12 * cell.width().max(cell.height());
            match newton_refine(self.f, cell.center(), self.opts.refinement_tol) {
                Ok(z) if cell.contains_with_margin(z, margin) => {
                    return CellOutcome {
                        zeros: vec![z],
                        unresolved: Vec::new(),
                    }
                }
                Ok(z) => newton_note = Some(format!("Newton converged outside the cell at {z}")),
                Err(e) => newton_note = Some(e.to_string()),
            }
        }
        if depth >= self.opts.max_depth {
            let reason = newton_note.unwrap_or_else(|| {
                format!("winding number {winding} at maximum subdivision depth (possible multiple zero)")
            });
            return CellOutcome::unresolved(cell, winding, reason);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cell.seed(depth as u64));
        for attempt in 0..SPLIT_RETRIES {
            let frac = if attempt == 0 {
                0.5
            } else {
                // perturb the split line when it ran through a zero
                let mag = rng.gen_range(1e-6..1e-5) * 10f64.powi(attempt as i32 - 1);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                0.5 * (1.0 + sign * mag)
            };
            let (a, b) = cell.split(frac);
            let (wa, wb) = par::join(
                self.opts.exec,
                || winding_number(self.f, &a, self.base_step),
                || winding_number(self.f, &b, self.base_step),
            );
            let (Ok(wa), Ok(wb)) = (wa, wb) else { continue };
            if wa + wb != winding {
                continue;
            }
            let (ra, rb) = par::join(
                self.opts.exec,
                || self.solve(a, wa, depth + 1),
                || self.solve(b, wb, depth + 1),
            );
            return ra.merge(rb);
        }
        CellOutcome::unresolved(
            cell,
            winding,
            "children windings inconsistent with parent after retries",
        )
    }
}

fn dedup_sorted(mut zeros: Vec<Complex64>, radius: f64) -> Vec<Complex64> {
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<Complex64> = Vec::with_capacity(zeros.len());
    for z in zeros {
        if !out.iter().any(|o| (o - z).norm() <= radius) {
            out.push(z);
        }
    }
    out
}

/// Counts zeros in `window`, dilating it slightly when its boundary passes
/// through a zero. Returns the count and the window actually used.
pub fn count_zeros<F: AnalyticFunction + ?Sized>(f: &F, window: &Window, base_step: f64) -> Result<(i64, Window)> {
    let mut rng = ChaCha8Rng::seed_from_u64(window.seed(0xd11a7e));
    let mut w = *window;
    let mut last_hit = None;
    for attempt in 0..=WINDOW_RETRIES {
        match winding_number(f, &w, base_step) {
            Ok(n) => return Ok((n, w)),
            Err(hit) => {
                last_hit = Some(hit);
                let mag = rng.gen_range(1e-6..1e-5) * 10f64.powi(attempt as i32);
                w = window.dilated(1.0 + mag);
            }
        }
    }
    Err(Error::NonConvergence(format!(
        "could not count zeros: window boundary keeps touching a zero near {}",
        last_hit.map_or(window.center(), |h| h.near)
    )))
}

/// Locates all zeros of `f` in `window`.
pub fn find_zeros_of<F: AnalyticFunction + ?Sized>(
    f: &F,
    window: &Window,
    base_step: f64,
    opts: &SearchOptions,
) -> Result<ZeroSearch> {
    opts.validate()?;
    let (winding, counted) = count_zeros(f, window, base_step)?;
    let search = Search {
        f,
        base_step,
        opts: *opts,
    };
    let outcome = search.solve(counted, winding, 0);
    let zeros = outcome
        .zeros
        .into_iter()
        .filter(|z| window.contains_with_margin(*z, opts.refinement_tol))
        .collect();
    Ok(ZeroSearch {
        zeros: dedup_sorted(zeros, 10.0 * opts.refinement_tol),
        unresolved: outcome.unresolved,
        winding,
        counted_window: counted,
    })
}

/// Zeros of `M11(E)` or `M22(E)` of a structure inside `window` (energy units).
pub fn find_zeros(
    spec: &StructureSpec,
    entry: MatrixEntry,
    window: &Window,
    opts: &SearchOptions,
) -> Result<ZeroSearch> {
    find_zeros_of(&MatrixEntryFn { spec, entry }, window, base_step_for(spec), opts)
}
