use approx::assert_relative_eq;
use dirac_dfb::error::Error;
use dirac_dfb::jost::{jost_solution, JostKind};
use dirac_dfb::scattering::{pt_check, scattering_coefficients, transmission_scan};
use dirac_dfb::spectrum::{
    classify_spectrum, classify_spectrum_with, threshold_lambda_c, trace_zeros, ClassifyOptions, SpectralKind,
    DEFAULT_REAL_AXIS_TOL,
};
use dirac_dfb::structure::{Segment, StructureFamily, StructureSpec};
use dirac_dfb::transfer::{segment_matrix, MatrixEntry};
use dirac_dfb::zeros::{find_zeros, SearchOptions, Window};
use num_complex::Complex64;

fn uniform(lambda_l: f64) -> StructureSpec {
    StructureFamily::UniformGain.build(1.0, lambda_l).unwrap()
}

fn max_t(spec: &StructureSpec) -> f64 {
    transmission_scan(spec, -10.0, 10.0, 4001)
        .unwrap()
        .iter()
        .map(|r| r.abs_t)
        .fold(0.0, f64::max)
}

#[test]
fn unit_segment_by_hand() {
    let m = segment_matrix(&Segment::new(1.0, 1.0, 0.0, 0.0).unwrap(), 0.0).to_plain();
    let (c, s) = (1f64.cosh(), 1f64.sinh());
    assert_relative_eq!(m[0][0].re, c, max_relative = 1e-14);
    assert_relative_eq!(m[0][1].im, -s, max_relative = 1e-14);
    assert_relative_eq!(m[1][0].im, s, max_relative = 1e-14);
    assert_relative_eq!(m[1][1].re, c, max_relative = 1e-14);
    let sc = scattering_coefficients(&uniform(0.0), 0.0).unwrap();
    assert_relative_eq!(sc.t.re, 1.0 / c, max_relative = 1e-14);
    assert!((sc.r_left - Complex64::new(0.0, -1f64.tanh())).norm() < 1e-14);
}

#[test]
fn massless_structure_is_reflectionless() {
    let spec = StructureSpec::new(vec![
        Segment::new(0.4, 0.0, 0.0, 0.0).unwrap(),
        Segment::new(0.9, 0.0, 0.0, 0.0).unwrap(),
    ])
    .unwrap();
    for e in [-3.0, 0.2, 7.5] {
        let c = scattering_coefficients(&spec, e).unwrap();
        assert!((c.t - Complex64::new(0.0, e * 1.3).exp()).norm() < 1e-13);
        assert!(c.r_left.norm() < 1e-15 && c.r_right.norm() < 1e-15);
    }
    let z = find_zeros(&spec, MatrixEntry::M22, &Window::DEFAULT, &SearchOptions::default()).unwrap();
    assert!(z.zeros.is_empty() && z.winding == 0);
}

#[test]
fn transmission_grows_toward_threshold_and_loss_stays_bounded() {
    let (a, b, c) = (max_t(&uniform(1.5)), max_t(&uniform(1.65)), max_t(&uniform(1.74)));
    assert!(a < b && b < c, "{a} {b} {c}");
    let lossy = StructureFamily::UniformLoss.build(1.0, 1.74).unwrap();
    for row in transmission_scan(&lossy, -10.0, 10.0, 4001).unwrap() {
        assert!(row.abs_t <= 1.0 && row.abs_t.is_finite());
    }
}

#[test]
fn pt_verdicts() {
    assert!(pt_check(&StructureFamily::PtPair.build(1.0, 3.0).unwrap()).symmetric);
    assert!(pt_check(&StructureFamily::PtPair.build(1.0, 0.0).unwrap()).symmetric);
    let r = pt_check(&uniform(1.0));
    assert!(!r.symmetric && r.violation.is_some());
    let herm = StructureSpec::new(vec![
        Segment::new(0.3, 2.0, 0.0, 0.5).unwrap(),
        Segment::new(0.6, 1.0, 0.0, -0.2).unwrap(),
        Segment::new(0.3, 2.0, 0.0, 0.5).unwrap(),
    ])
    .unwrap();
    assert!(pt_check(&herm).symmetric);
}

#[test]
fn hermitian_resonances_come_in_pairs_below_the_axis() {
    let z = find_zeros(
        &uniform(0.0),
        MatrixEntry::M22,
        &Window::DEFAULT,
        &SearchOptions::default(),
    )
    .unwrap();
    assert!(!z.zeros.is_empty());
    for w in &z.zeros {
        assert!(w.im < 0.0);
        assert!(
            z.zeros.iter().any(|v| (v + w.conj()).norm() < 1e-9),
            "no partner for {w}"
        );
    }
}

#[test]
fn gain_shifts_zeros_rigidly() {
    let opts = SearchOptions::default();
    let base = find_zeros(&uniform(0.0), MatrixEntry::M22, &Window::DEFAULT, &opts)
        .unwrap()
        .zeros;
    let shifted_window = Window::DEFAULT.shifted(0.0, 1.5);
    let shifted = find_zeros(&uniform(1.5), MatrixEntry::M22, &shifted_window, &opts)
        .unwrap()
        .zeros;
    assert_eq!(base.len(), shifted.len());
    for (a, b) in base.iter().zip(&shifted) {
        assert!((a + Complex64::new(0.0, 1.5) - b).norm() < 1e-9, "{a} -> {b}");
    }
}

#[test]
fn zero_residuals_are_small() {
    for spec in [uniform(0.7), StructureFamily::PtPair.build(1.0, 3.0).unwrap()] {
        let report = classify_spectrum(&spec, &Window::DEFAULT, DEFAULT_REAL_AXIS_TOL).unwrap();
        assert!(!report.points.is_empty());
        for p in &report.points {
            assert!(p.residual <= 1e-9, "{p:?}");
        }
    }
}

#[test]
fn pt_pair_above_breaking_has_two_conjugate_pairs() {
    let spec = StructureFamily::PtPair.build(1.0, 6.0).unwrap();
    let report = classify_spectrum(&spec, &Window::DEFAULT, DEFAULT_REAL_AXIS_TOL).unwrap();
    let bound: Vec<Complex64> = report
        .points
        .iter()
        .filter(|p| p.kind == SpectralKind::BoundState)
        .map(|p| p.energy.c())
        .collect();
    assert_eq!(bound.len(), 4);
    for z in &bound {
        assert!(bound.iter().any(|w| (w - z.conj()).norm() < 1e-9));
    }
}

#[test]
fn pt_point_set_is_mirror_symmetric() {
    let spec = StructureFamily::PtPair.build(1.0, 3.0).unwrap();
    let report = classify_spectrum(&spec, &Window::DEFAULT, DEFAULT_REAL_AXIS_TOL).unwrap();
    let tol = 10.0 * report.refinement_tol;
    for p in &report.points {
        let partner = match p.which_entry {
            MatrixEntry::M11 => MatrixEntry::M22,
            MatrixEntry::M22 => MatrixEntry::M11,
        };
        assert!(
            report
                .points_of(partner)
                .any(|q| (q.energy.c() - p.energy.c().conj()).norm() <= tol),
            "no mirror for {p:?}"
        );
    }
}

#[test]
fn shifted_window_gives_same_points() {
    let spec = uniform(1.2);
    let w = Window::DEFAULT;
    let cell = (w.width() / 8.0, w.height() / 8.0);
    let moved = w.shifted(cell.0 / 2.0, cell.1 / 2.0);
    let a = classify_spectrum(&spec, &w, DEFAULT_REAL_AXIS_TOL).unwrap();
    let b = classify_spectrum(&spec, &moved, DEFAULT_REAL_AXIS_TOL).unwrap();
    let inside = |z: Complex64| w.contains_with_margin(z, -0.1) && moved.contains_with_margin(z, -0.1);
    let pa: Vec<_> = a.points.iter().filter(|p| inside(p.energy.c())).collect();
    let pb: Vec<_> = b.points.iter().filter(|p| inside(p.energy.c())).collect();
    assert_eq!(pa.len(), pb.len());
    assert!(!pa.is_empty());
    // M11 and M22 zeros share real parts here, so compare as sets
    for p in &pa {
        assert!(
            pb.iter()
                .any(|q| q.which_entry == p.which_entry && (p.energy.c() - q.energy.c()).norm() <= a.refinement_tol),
            "{p:?} missing after the shift"
        );
    }
}

#[test]
fn bound_state_jost_solution_decays() {
    let spec = uniform(1.9);
    let report = classify_spectrum(&spec, &Window::DEFAULT, DEFAULT_REAL_AXIS_TOL).unwrap();
    let eb = report
        .points
        .iter()
        .find(|p| p.kind == SpectralKind::BoundState)
        .unwrap()
        .energy;
    let half = spec.right_edge();
    for sign in [-1.0, 1.0] {
        let norms: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|d| jost_solution(&spec, eb, JostKind::Phi2, sign * (half + d)).norm())
            .collect();
        let rate1 = (norms[0] / norms[1]).ln();
        let rate2 = (norms[1] / norms[2]).ln() / 2.0;
        assert_relative_eq!(rate1, eb.im, max_relative = 1e-6);
        assert_relative_eq!(rate2, eb.im, max_relative = 1e-6);
    }
}

#[test]
fn singularity_hit_matches_located_real_zero() {
    let th = threshold_lambda_c(StructureFamily::UniformGain, 1.0, &Window::DEFAULT, 1e-6).unwrap();
    let spec = uniform(th.lambda_c_l);
    let e0 = th.crossing_zeros[0];
    assert!(e0.im.abs() < 1e-12);
    assert!(matches!(
        scattering_coefficients(&spec, e0.re),
        Err(Error::SpectralSingularityHit { .. })
    ));
    assert!(scattering_coefficients(&spec, e0.re + 1e-6).is_ok());
    let unit = uniform(0.0);
    for row in transmission_scan(&unit, -20.0, 20.0, 801).unwrap() {
        assert!(row.abs_t.is_finite());
    }
}

#[test]
fn uniform_gain_trajectories_are_vertical() {
    let grid = [0.0, 0.5, 1.0, 1.5, 1.755];
    let opts = ClassifyOptions::default();
    let steps = trace_zeros(
        StructureFamily::UniformGain,
        1.0,
        &grid,
        &Window::new(-8.0, 8.0, -4.0, 1.0).unwrap(),
        &opts,
    )
    .unwrap();
    let first = &steps[0];
    for step in &steps[1..] {
        for (p, link) in step.report.points.iter().zip(&step.links) {
            if p.which_entry != MatrixEntry::M22 || link.ambiguous {
                continue;
            }
            let origin = first
                .report
                .points
                .iter()
                .zip(&first.links)
                .find(|(_, l)| l.trajectory_id == link.trajectory_id)
                .map(|(q, _)| q.energy.c());
            if let Some(o) = origin {
                assert!((p.energy.re - o.re).abs() < 1e-8);
                assert!((p.energy.im - o.im - step.lambda_l).abs() < 1e-8);
            }
        }
    }
    let linked = steps[4]
        .links
        .iter()
        .filter(|l| first.links.iter().any(|f| f.trajectory_id == l.trajectory_id))
        .count();
    assert!(linked >= 4);
}

#[test]
fn pt_pair_zeros_reach_the_axis_near_breaking() {
    let grid = [0.0, 3.0, 4.46, 6.0];
    let steps = trace_zeros(
        StructureFamily::PtPair,
        1.0,
        &grid,
        &Window::DEFAULT,
        &ClassifyOptions::default(),
    )
    .unwrap();
    let near_axis = |i: usize| {
        steps[i]
            .report
            .points_of(MatrixEntry::M22)
            .filter(|p| p.energy.im.abs() < 0.05 && p.energy.re.abs() < 6.0)
            .count()
    };
    assert_eq!(near_axis(2), 2);
    let upper = steps[3]
        .report
        .points_of(MatrixEntry::M22)
        .filter(|p| p.energy.im > 0.5)
        .count();
    assert_eq!(upper, 2);
    assert_eq!(
        steps[1]
            .report
            .points_of(MatrixEntry::M22)
            .filter(|p| p.energy.im > 0.0)
            .count(),
        0
    );
}

#[test]
fn classification_options_restrict_entries() {
    let opts = ClassifyOptions {
        entries: dirac_dfb::spectrum::EntrySelection::M11,
        ..ClassifyOptions::default()
    };
    let r = classify_spectrum_with(&uniform(0.5), &Window::DEFAULT, &opts).unwrap();
    assert!(r.points.iter().all(|p| p.which_entry == MatrixEntry::M11));
    assert!(r
        .points
        .iter()
        .all(|p| p.kind == SpectralKind::Antiresonance || p.kind == SpectralKind::BoundState));
}
