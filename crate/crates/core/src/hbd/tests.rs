use super::*;
use crate::dirac::mode::{EnergyBranch, ModeSum, PlaneWaveMode};
use crate::dirac::DiracTerm;
use crate::foliation::{CurveShape, Domain};
use crate::presets;
use approx::assert_abs_diff_eq;
use num_complex::Complex64;

fn domain() -> Domain {
    Domain::default()
}

fn single_mode(p: f64) -> MultiTimeWaveFunction {
    MultiTimeWaveFunction::new(
        vec![1.0],
        vec![DiracTerm {
            coefficient: Complex64::new(1.0, 0.0),
            factors: vec![ModeSum::new(vec![PlaneWaveMode {
                coefficient: Complex64::new(1.0, 0.0),
                momentum: p,
                branch: EnergyBranch::Positive,
            }])
            .unwrap()],
        }],
    )
    .unwrap()
}

fn entangled() -> MultiTimeWaveFunction {
    presets::entangled_pair_state(
        &presets::PairSpec::default(),
        Complex64::new(0.0, 0.6),
        domain(),
    )
    .unwrap()
}

#[test]
fn symmetric_packet_world_line_stays_centered() {
    let wf = presets::packet_state(1.0, 0.0, 0.0, 0.25, 64, domain()).unwrap();
    let fol = Foliation::flat("rest", 0.0, domain()).unwrap();
    let params = HbdParams { ds: 5e-3, ..Default::default() };
    let traj = integrate_hbd(&wf, &fol, &[TwoVector::new(0.0, 0.0)], &params).unwrap();
    assert!(traj.valid);
    for row in &traj.points {
        assert!(row[0].x.abs() <= 1e-6, "drifted to {}", row[0].x);
    }
}

#[test]
fn single_mode_world_line_is_straight_with_v_p_over_e() {
    // p = 3/4, m = 1: v = 0.6 at every step
    let wf = single_mode(0.75);
    let fol = Foliation::flat("rest", 0.0, domain()).unwrap();
    let params = HbdParams { ds: 1e-2, ..Default::default() };
    let traj = integrate_hbd(&wf, &fol, &[TwoVector::new(0.0, 0.0)], &params).unwrap();
    assert!(traj.valid);
    for (s, row) in traj.leaf_params.iter().zip(&traj.points) {
        assert_abs_diff_eq!(row[0].x, 0.6 * s, epsilon = 1e-9);
    }
}

#[test]
fn product_state_trajectories_factorize() {
    let left = ModeSum::gaussian_packet(-1.0, 0.4, 0.4, 48, EnergyBranch::Positive).unwrap();
    let right = ModeSum::gaussian_packet(1.0, -0.4, 0.4, 48, EnergyBranch::Positive).unwrap();
    let joint = MultiTimeWaveFunction::new(
        vec![1.0, 1.0],
        vec![DiracTerm { coefficient: Complex64::new(1.0, 0.0), factors: vec![left.clone(), right.clone()] }],
    )
    .unwrap();
    let single_l = MultiTimeWaveFunction::new(
        vec![1.0],
        vec![DiracTerm { coefficient: Complex64::new(1.0, 0.0), factors: vec![left] }],
    )
    .unwrap();
    let single_r = MultiTimeWaveFunction::new(
        vec![1.0],
        vec![DiracTerm { coefficient: Complex64::new(1.0, 0.0), factors: vec![right] }],
    )
    .unwrap();
    let fol = Foliation::flat("rest", 0.0, domain()).unwrap();
    let params = HbdParams { s1: 1.5, ds: 2e-3, ..Default::default() };
    let both = integrate_hbd(&joint, &fol, &[TwoVector::new(0.0, -0.7), TwoVector::new(0.0, 0.9)], &params).unwrap();
    let tl = integrate_hbd(&single_l, &fol, &[TwoVector::new(0.0, -0.7)], &params).unwrap();
    let tr = integrate_hbd(&single_r, &fol, &[TwoVector::new(0.0, 0.9)], &params).unwrap();
    assert!(both.valid && tl.valid && tr.valid);
    let mut worst = 0.0f64;
    for (k, row) in both.points.iter().enumerate() {
        worst = worst.max((row[0].x - tl.points[k][0].x).abs());
        worst = worst.max((row[1].x - tr.points[k][0].x).abs());
    }
    assert!(worst <= 1e-8, "factorization broke at {worst:.2e}");
}

#[test]
fn flat_frame_integration_matches_leafwise_integration() {
    let wf = entangled();
    for v in [0.0, 0.3] {
        let fol = Foliation::flat(format!("flat{v}"), v, domain()).unwrap();
        // initial on leaf(0): t = v x
        let initial = [TwoVector::new(-v, -1.0), TwoVector::new(v, 1.0)];
        let params = HbdParams { s1: 1.0, ds: 5e-4, ..Default::default() };
        let leafwise = integrate_hbd(&wf, &fol, &initial, &params).unwrap();
        let framewise =
            integrate_flat_frame(&wf, v, &initial, 0.0, 1.0, 5e-4, fol.label.clone()).unwrap();
        assert!(leafwise.valid && framewise.valid);
        let d = leafwise.sup_distance(&framewise).unwrap();
        assert!(d <= 1e-6, "dual integrators disagree by {d:.2e} at v = {v}");
    }
}

#[test]
fn boosted_frame_single_mode_keeps_plane_wave_velocity() {
    let wf = single_mode(0.75);
    let fol = Foliation::flat("moving", 0.3, domain()).unwrap();
    let initial = [TwoVector::new(0.0, 0.0)];
    let params = HbdParams { s1: 1.0, ds: 5e-3, ..Default::default() };
    let traj = integrate_hbd(&wf, &fol, &initial, &params).unwrap();
    let first = traj.points[0][0];
    let last = traj.points.last().unwrap()[0];
    assert_abs_diff_eq!((last.x - first.x) / (last.t - first.t), 0.6, epsilon = 1e-9);
    let framewise = integrate_flat_frame(&wf, 0.3, &initial, 0.0, 1.0, 5e-3, "moving").unwrap();
    let d = traj.sup_distance(&framewise).unwrap();
    assert!(d <= 1e-8, "plane-wave runs disagree by {d:.2e}");
}

#[test]
fn trajectory_is_causal_and_leaf_resident() {
    let wf = entangled();
    let shape = CurveShape::Tanh { amplitude: 0.3, center: 0.0, width: 1.0 };
    let fol = Foliation::curved("tanh", shape, domain()).unwrap();
    let initial = [fol.leaf(0.0).point_at(-1.0), fol.leaf(0.0).point_at(1.0)];
    let params = HbdParams { s1: 1.0, ds: 2e-3, ..Default::default() };
    let traj = integrate_hbd(&wf, &fol, &initial, &params).unwrap();
    assert!(traj.valid);
    traj.check_causal().unwrap();
    for (s, row) in traj.leaf_params.iter().zip(&traj.points) {
        let leaf = fol.leaf(*s);
        for p in row {
            assert!(leaf.contains(p), "point {p:?} off leaf s = {s}");
        }
    }
}

#[test]
fn heun_stepping_is_second_order() {
    let wf = presets::packet_state(1.0, 0.0, 0.4, 0.25, 64, domain()).unwrap();
    let fol = Foliation::flat("rest", 0.0, domain()).unwrap();
    let initial = [TwoVector::new(0.0, 1.0)];
    let run = |ds: f64| {
        let params = HbdParams { s1: 1.0, ds, ..Default::default() };
        integrate_hbd(&wf, &fol, &initial, &params).unwrap().points.last().unwrap()[0].x
    };
    let reference = run(6.25e-4);
    let e1 = (run(0.02) - reference).abs();
    let e2 = (run(0.01) - reference).abs();
    let ratio = e1 / e2;
    assert!(
        (2.0..=8.0).contains(&ratio),
        "halving ds gave error ratio {ratio:.2}, expected about 4 (e1 = {e1:.2e}, e2 = {e2:.2e})"
    );
}

#[test]
fn covariance_under_identity_and_translation() {
    let wf = entangled();
    let fol = Foliation::flat("rest", 0.0, domain()).unwrap();
    let initial = [TwoVector::new(0.0, -1.0), TwoVector::new(0.0, 1.0)];
    let params = HbdParams { s1: 0.5, ds: 2e-3, ..Default::default() };
    let id = covariance_check(&wf, &fol, &initial, &PoincareTransform::identity(), &params).unwrap();
    assert_eq!(id.sup_distance, 0.0);
    let tr = covariance_check(
        &wf,
        &fol,
        &initial,
        &PoincareTransform::translation(0.7, -0.4),
        &params,
    )
    .unwrap();
    assert!(tr.sup_distance <= 1e-10, "translation covariance {:.2e}", tr.sup_distance);
}

#[test]
fn covariance_under_boost_converges_with_refinement() {
    let wf = entangled();
    let fol = Foliation::flat("rest", 0.0, domain()).unwrap();
    let initial = [TwoVector::new(0.0, -1.0), TwoVector::new(0.0, 1.0)];
    let params = HbdParams { s1: 1.0, ds: 1e-3, ..Default::default() };
    let report =
        covariance_check(&wf, &fol, &initial, &PoincareTransform::boost(0.3), &params).unwrap();
    assert!(report.sup_distance <= 1e-4, "boost covariance {:.2e}", report.sup_distance);
    assert!(
        report.refined_sup_distance < report.sup_distance,
        "refinement did not reduce the distance: {report:?}"
    );
}

#[test]
fn foliation_overlap_checks() {
    let wf = entangled();
    let fol = Foliation::flat("rest", 0.0, domain()).unwrap();
    let initial = [TwoVector::new(0.0, -1.0), TwoVector::new(0.0, 1.0)];
    let params = HbdParams { s1: 1.5, ds: 2e-3, ..Default::default() };

    // zero bump: exactly the same foliation
    let same = overlap_check(&wf, &fol, &initial, &params, 1.5, 0.0).unwrap();
    assert!(same.sup_distance <= 1e-12);

    // deformation away from the packets leaves the trajectory unchanged
    let away = overlap_check(&wf, &fol, &initial, &params, 1.5, 0.2).unwrap();
    assert!(away.pass, "overlap distance {:.2e} exceeds {:.2e}", away.sup_distance, away.tolerance);

    // deforming on the trajectory (margin 0) must change it
    let on_top = overlap_check(&wf, &fol, &initial, &params, 0.0, 0.2).unwrap();
    assert!(
        !on_top.pass,
        "negative control unexpectedly passed: {:.2e}",
        on_top.sup_distance
    );
}
