#![allow(dead_code)]

use dirac_dfb::structure::{Segment, StructureSpec};
use num_complex::Complex64;
use proptest::prelude::*;

/// Up to 8 segments with every parameter bounded by 5 in magnitude.
pub fn arb_structure() -> impl Strategy<Value = StructureSpec> {
    prop::collection::vec(arb_segment(), 1..=8).prop_map(|s| StructureSpec::new(s).unwrap())
}

pub fn arb_segment() -> impl Strategy<Value = Segment> {
    (0.05..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(l, m, g, d)| Segment::new(l, m, g, d).unwrap())
}

/// Unit-scale segment, `|gain| <= 5`, no detuning.
pub fn arb_undetuned_segment() -> impl Strategy<Value = Segment> {
    (0.05..=1.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(l, m, g)| Segment::new(l, m, g, 0.0).unwrap())
}

pub fn arb_hermitian_structure() -> impl Strategy<Value = StructureSpec> {
    prop::collection::vec((0.05..5.0f64, -5.0..5.0f64, -5.0..5.0f64), 1..=8).prop_map(|s| {
        StructureSpec::new(
            s.into_iter()
                .map(|(l, m, d)| Segment::new(l, m, 0.0, d).unwrap())
                .collect(),
        )
        .unwrap()
    })
}

/// Mirror-symmetric in mass and detuning, antisymmetric in gain.
pub fn arb_pt_structure() -> impl Strategy<Value = StructureSpec> {
    prop::collection::vec(arb_segment(), 1..=4).prop_map(|half| {
        let mut segs: Vec<Segment> = half
            .iter()
            .rev()
            .map(|s| Segment::new(s.length, s.mass, -s.gain, s.detuning).unwrap())
            .collect();
        segs.extend(half);
        StructureSpec::new(segs).unwrap()
    })
}

/// `|E| <= 20`.
pub fn arb_energy() -> impl Strategy<Value = Complex64> {
    (0.0..20.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}
