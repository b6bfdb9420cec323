use super::grid::{GridSpec, Potential};
use super::*;
use approx::assert_abs_diff_eq;
use num_complex::Complex64;

fn one(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn single_gaussian(center: f64, momentum: f64, width: f64) -> NrWaveFunction {
    NrWaveFunction::analytic(
        vec![1.0],
        vec![NrTerm { coefficient: one(1.0), packets: vec![PacketSpec { center, momentum, width }] }],
    )
    .unwrap()
}

#[test]
fn density_of_standard_gaussian_at_center() {
    let wf = single_gaussian(0.0, 0.0, 1.0);
    let rho = wf.density(0.0, &[0.0]).unwrap();
    assert_abs_diff_eq!(rho, (2.0 * std::f64::consts::PI).powf(-0.5), epsilon = 1e-12);
}

#[test]
fn density_vanishes_at_a_node() {
    // antisymmetric superposition has an exact node at x = 0
    let wf = NrWaveFunction::analytic(
        vec![1.0],
        vec![
            NrTerm { coefficient: one(1.0), packets: vec![PacketSpec { center: 1.0, momentum: 0.0, width: 1.0 }] },
            NrTerm { coefficient: one(-1.0), packets: vec![PacketSpec { center: -1.0, momentum: 0.0, width: 1.0 }] },
        ],
    )
    .unwrap();
    assert_abs_diff_eq!(wf.density(0.4, &[0.0]).unwrap(), 0.0, epsilon = 1e-28);
}

#[test]
fn grid_backend_matches_analytic_backend() {
    let term = vec![NrTerm {
        coefficient: one(1.0),
        packets: vec![PacketSpec { center: 0.0, momentum: 0.3, width: 1.0 }],
    }];
    let exact = NrWaveFunction::analytic(vec![1.0], term.clone()).unwrap();
    let grid = NrWaveFunction::grid(
        vec![1.0],
        term,
        GridSpec { points: 64, length: 40.0, dt: 1e-2 },
        Potential::None,
    )
    .unwrap();
    let mut worst = 0.0f64;
    for t in [0.0, 0.7, 2.0] {
        for k in 0..41 {
            let x = -4.0 + 0.2 * k as f64;
            let d = (exact.density(t, &[x]).unwrap() - grid.density(t, &[x]).unwrap()).abs();
            worst = worst.max(d);
        }
    }
    assert!(worst <= 1e-6, "backend disagreement {worst:.3e}");
}

#[test]
fn current_of_near_plane_wave_is_momentum_times_density() {
    let wf = single_gaussian(0.0, 0.7, 100.0);
    let rho = wf.density(0.0, &[0.0]).unwrap();
    let j = wf.current(0.0, &[0.0]).unwrap();
    assert!((j[0] / rho - 0.7).abs() < 1e-4 * 0.7);
}

#[test]
fn current_of_real_wave_function_vanishes() {
    let wf = single_gaussian(0.3, 0.0, 1.0);
    let j = wf.current(0.0, &[1.1]).unwrap();
    assert_abs_diff_eq!(j[0], 0.0, epsilon = 1e-15);
}

#[test]
fn product_state_current_factorizes() {
    let pa = PacketSpec { center: 0.5, momentum: 0.3, width: 1.0 };
    let pb = PacketSpec { center: -1.0, momentum: -0.2, width: 0.8 };
    let pair = NrWaveFunction::analytic(
        vec![1.0, 2.0],
        vec![NrTerm { coefficient: one(1.0), packets: vec![pa, pb] }],
    )
    .unwrap();
    let a = NrWaveFunction::analytic(vec![1.0], vec![NrTerm { coefficient: one(1.0), packets: vec![pa] }]).unwrap();
    let b = NrWaveFunction::analytic(vec![2.0], vec![NrTerm { coefficient: one(1.0), packets: vec![pb] }]).unwrap();
    let (t, x1, x2) = (0.6, 0.9, -1.4);
    let j = pair.current(t, &[x1, x2]).unwrap();
    let ja = a.current(t, &[x1]).unwrap()[0];
    let jb = b.current(t, &[x2]).unwrap()[0];
    let rho_a = a.density(t, &[x1]).unwrap();
    let rho_b = b.density(t, &[x2]).unwrap();
    assert_abs_diff_eq!(j[0], ja * rho_b, epsilon = 1e-10);
    assert_abs_diff_eq!(j[1], jb * rho_a, epsilon = 1e-10);
    // velocity of particle i depends only on its own coordinate
    let v = pair.velocity(t, &[x1, x2]).unwrap();
    assert_abs_diff_eq!(v[0], ja / rho_a, epsilon = 1e-10);
    assert_abs_diff_eq!(v[1], jb / rho_b, epsilon = 1e-10);
}

#[test]
fn guiding_velocity_of_free_gaussian() {
    let wf = single_gaussian(0.0, 0.0, 1.0);
    // v(x, t) = x t / (4 m^2 sigma^4 + t^2)
    let v = wf.velocity(2.0, &[2.0]).unwrap();
    assert_abs_diff_eq!(v[0], 0.5, epsilon = 1e-12);
    let v0 = wf.velocity(0.0, &[1.3]).unwrap();
    assert_abs_diff_eq!(v0[0], 0.0, epsilon = 1e-15);
    let plane = single_gaussian(0.0, 0.7, 100.0);
    assert!((plane.velocity(0.0, &[0.0]).unwrap()[0] - 0.7).abs() < 1e-4);
}

#[test]
fn velocity_errors_near_node() {
    let wf = NrWaveFunction::analytic(
        vec![1.0],
        vec![
            NrTerm { coefficient: one(1.0), packets: vec![PacketSpec { center: 1.0, momentum: 0.0, width: 1.0 }] },
            NrTerm { coefficient: one(-1.0), packets: vec![PacketSpec { center: -1.0, momentum: 0.0, width: 1.0 }] },
        ],
    )
    .unwrap();
    assert!(matches!(wf.velocity(0.0, &[0.0]), Err(SimError::NodeProximity(_))));
}

#[test]
fn continuity_residual_in_the_bulk() {
    let wf = single_gaussian(0.0, 0.4, 1.0);
    let mut rng = stream_rng(11, 0);
    for _ in 0..6 {
        let t = 0.2 + 1.3 * rng.random::<f64>();
        let x = -1.5 + 3.0 * rng.random::<f64>();
        let r = wf.continuity_residual(t, &[x], 1e-4).unwrap();
        assert!(r <= 1e-7, "residual {r:.3e} at t={t} x={x}");
    }
}

#[test]
fn continuity_residual_of_stationary_grid_state() {
    // harmonic ground state: width 1/sqrt(2) at m = omega = 1
    let wf = NrWaveFunction::grid(
        vec![1.0],
        vec![NrTerm {
            coefficient: one(1.0),
            packets: vec![PacketSpec { center: 0.0, momentum: 0.0, width: 0.5f64.sqrt() }],
        }],
        GridSpec { points: 128, length: 40.0, dt: 2e-4 },
        Potential::Harmonic { omega: 1.0 },
    )
    .unwrap();
    let r = wf.continuity_residual(0.25, &[0.4], 1e-3).unwrap();
    assert!(r <= 1e-6, "residual {r:.3e}");
}

#[test]
fn continuity_residual_far_tail_is_zero_by_convention() {
    let wf = single_gaussian(0.0, 0.0, 1.0);
    let r = wf.continuity_residual(0.5, &[60.0], 1e-4).unwrap();
    assert_eq!(r, 0.0);
}

#[test]
fn rk4_reproduces_the_spreading_gaussian_trajectory() {
    let wf = single_gaussian(0.0, 0.0, 1.0);
    let traj = integrate(&wf, &[1.0], 0.0, 2.0, 1e-3).unwrap();
    assert!(traj.valid);
    let last = traj.configs.last().unwrap()[0];
    assert_abs_diff_eq!(last, 2.0f64.sqrt(), epsilon = 1e-8);
    // x0 = 0 stays on the symmetry axis
    let still = integrate(&wf, &[0.0], 0.0, 2.0, 1e-2).unwrap();
    assert!(still.configs.iter().all(|c| c[0].abs() < 1e-14));
}

#[test]
fn trajectory_times_are_uniform_and_increasing() {
    let wf = single_gaussian(0.0, 0.0, 1.0);
    let traj = integrate(&wf, &[0.7], 0.0, 1.0, 0.3).unwrap();
    assert_eq!(traj.times.len(), traj.configs.len());
    let steps: Vec<f64> = traj.times.windows(2).map(|w| w[1] - w[0]).collect();
    for s in &steps {
        assert_abs_diff_eq!(*s, steps[0], epsilon = 1e-12);
        assert!(*s > 0.0);
    }
    assert!(traj.configs.iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn two_particle_product_trajectories_factorize() {
    let pa = PacketSpec { center: 0.0, momentum: 0.0, width: 1.0 };
    let pb = PacketSpec { center: 1.0, momentum: 0.5, width: 0.7 };
    let pair = NrWaveFunction::analytic(
        vec![1.0, 1.5],
        vec![NrTerm { coefficient: one(1.0), packets: vec![pa, pb] }],
    )
    .unwrap();
    let a = NrWaveFunction::analytic(vec![1.0], vec![NrTerm { coefficient: one(1.0), packets: vec![pa] }]).unwrap();
    let b = NrWaveFunction::analytic(vec![1.5], vec![NrTerm { coefficient: one(1.0), packets: vec![pb] }]).unwrap();
    let joint = integrate(&pair, &[0.8, 1.2], 0.0, 1.5, 1e-3).unwrap();
    let ta = integrate(&a, &[0.8], 0.0, 1.5, 1e-3).unwrap();
    let tb = integrate(&b, &[1.2], 0.0, 1.5, 1e-3).unwrap();
    let end = joint.configs.last().unwrap();
    assert_abs_diff_eq!(end[0], ta.configs.last().unwrap()[0], epsilon = 1e-10);
    assert_abs_diff_eq!(end[1], tb.configs.last().unwrap()[0], epsilon = 1e-10);
}

#[test]
fn rk4_is_fourth_order() {
    let wf = single_gaussian(0.0, 0.0, 1.0);
    let exact = 2.0f64.sqrt();
    let err = |h: f64| {
        (integrate(&wf, &[1.0], 0.0, 2.0, h).unwrap().configs.last().unwrap()[0] - exact).abs()
    };
    let ratio = err(0.2) / err(0.1);
    assert!(
        (8.0..=32.0).contains(&ratio),
        "halving h gave error ratio {ratio:.2}, expected about 16"
    );
}

#[test]
fn sampling_matches_gaussian_moments_and_is_deterministic() {
    let wf = single_gaussian(0.0, 0.0, 1.0);
    let m = 100_000;
    let xs = sample(&wf, 0.0, m, 7).unwrap();
    let mean = xs.iter().map(|c| c[0]).sum::<f64>() / m as f64;
    let var = xs.iter().map(|c| (c[0] - mean) * (c[0] - mean)).sum::<f64>() / m as f64;
    assert!(mean.abs() <= 0.02, "sample mean {mean}");
    assert!((var - 1.0).abs() <= 0.03, "sample variance {var}");
    let again = sample(&wf, 0.0, 100, 7).unwrap();
    assert_eq!(&xs[..100], &again[..]);
}

#[test]
fn equivariance_without_evolution_is_pure_sampling_noise() {
    let wf = single_gaussian(0.0, 0.0, 1.0);
    let spec = EquivarianceSpec { t1: 0.0, samples: 4_000, seed: 3, ..Default::default() };
    let report = equivariance(&wf, &spec).unwrap();
    assert!(report.distances[0] <= report.noise_floor, "{report:?}");
}

#[test]
fn corrupted_velocities_break_equivariance() {
    let wf = single_gaussian(0.0, 1.5, 1.0);
    let spec = EquivarianceSpec {
        samples: 2_500,
        seed: 5,
        step: 2e-3,
        velocity_scale: 0.5,
        ..Default::default()
    };
    let report = equivariance(&wf, &spec).unwrap();
    assert!(
        report.distances[0] > 3.0 * report.noise_floor,
        "corrupted run should fail: {report:?}"
    );
    let honest = equivariance(&wf, &EquivarianceSpec { samples: 2_500, seed: 5, step: 2e-3, ..Default::default() }).unwrap();
    assert!(honest.all_pass(), "honest run should pass: {honest:?}");
}

#[test]
fn norm_is_conserved() {
    let wf = NrWaveFunction::analytic(
        vec![1.0],
        vec![
            NrTerm { coefficient: one(0.8), packets: vec![PacketSpec { center: -1.0, momentum: 0.9, width: 0.8 }] },
            NrTerm { coefficient: Complex64::new(0.3, 0.4), packets: vec![PacketSpec { center: 1.0, momentum: -0.4, width: 1.2 }] },
        ],
    )
    .unwrap();
    for t in [0.0, 0.5, 1.0, 2.0, 3.0] {
        assert_abs_diff_eq!(wf.norm(t), 1.0, epsilon = 1e-9);
    }
}
