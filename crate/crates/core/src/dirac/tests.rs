use super::gamma::*;
use super::mode::*;
use super::*;
use crate::foliation::{CurveShape, Domain, Leaf};
use approx::assert_abs_diff_eq;
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single_mode_wf(p: f64, mass: f64, branch: EnergyBranch) -> MultiTimeWaveFunction {
    MultiTimeWaveFunction::new(
        vec![mass],
        vec![DiracTerm {
            coefficient: c(1.0, 0.0),
            factors: vec![ModeSum::new(vec![PlaneWaveMode {
                coefficient: c(1.0, 0.0),
                momentum: p,
                branch,
            }])
            .unwrap()],
        }],
    )
    .unwrap()
}

fn packet_wf(center: f64, mean_p: f64, width_p: f64, modes: usize) -> MultiTimeWaveFunction {
    MultiTimeWaveFunction::new(
        vec![1.0],
        vec![DiracTerm {
            coefficient: c(1.0, 0.0),
            factors: vec![ModeSum::gaussian_packet(center, mean_p, width_p, modes, EnergyBranch::Positive)
                .unwrap()],
        }],
    )
    .unwrap()
}

fn entangled_pair() -> MultiTimeWaveFunction {
    // 48 modes keep the periodic images of the mode grid outside the domain
    let a = ModeSum::gaussian_packet(-1.0, 0.5, 0.5, 48, EnergyBranch::Positive).unwrap();
    let b = ModeSum::gaussian_packet(1.0, -0.5, 0.5, 48, EnergyBranch::Positive).unwrap();
    MultiTimeWaveFunction::new(
        vec![1.0, 1.0],
        vec![
            DiracTerm { coefficient: c(1.0, 0.0), factors: vec![a.clone(), b.clone()] },
            DiracTerm { coefficient: c(0.0, 0.6), factors: vec![b, a] },
        ],
    )
    .unwrap()
}

fn random_state(rng: &mut impl Rng, n: usize) -> MultiTimeWaveFunction {
    let mut terms = Vec::new();
    for _ in 0..2 {
        let factors = (0..n)
            .map(|_| {
                let modes = (0..3)
                    .map(|_| PlaneWaveMode {
                        coefficient: c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                        momentum: 4.0 * rng.random::<f64>() - 2.0,
                        branch: if rng.random::<f64>() < 0.25 {
                            EnergyBranch::Negative
                        } else {
                            EnergyBranch::Positive
                        },
                    })
                    .collect();
                ModeSum::new(modes).unwrap()
            })
            .collect();
        terms.push(DiracTerm {
            coefficient: c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
            factors,
        });
    }
    MultiTimeWaveFunction::new(vec![1.0; n], terms).unwrap()
}

fn random_leaf(rng: &mut impl Rng) -> Leaf {
    let amplitude = 0.6 * (2.0 * rng.random::<f64>() - 1.0);
    let center = 4.0 * rng.random::<f64>() - 2.0;
    let offset = rng.random::<f64>() - 0.5;
    Leaf::curved(
        offset,
        CurveShape::Tanh { amplitude, center, width: 1.0 },
        Domain::default(),
    )
    .unwrap()
}

fn config_on(leaf: &Leaf, xs: &[f64]) -> Vec<TwoVector> {
    xs.iter().map(|x| leaf.point_at(*x)).collect()
}

#[test]
fn rest_mode_evaluates_to_basis_spinor_at_origin() {
    let wf = single_mode_wf(0.0, 1.0, EnergyBranch::Positive);
    let v = wf.evaluate(&[TwoVector::new(0.0, 0.0)]).unwrap();
    assert_abs_diff_eq!(v[0].re, 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(v[0].im, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(v[1].norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn rest_mode_phase_rotates_with_time() {
    let wf = single_mode_wf(0.0, 1.0, EnergyBranch::Positive);
    let v = wf.evaluate(&[TwoVector::new(0.9, 0.0)]).unwrap();
    let want = Complex64::from_polar(1.0, -0.9);
    assert_abs_diff_eq!(v[0].re, want.re, epsilon = 1e-15);
    assert_abs_diff_eq!(v[0].im, want.im, epsilon = 1e-15);
}

#[test]
fn product_of_rest_modes_is_basis_tensor() {
    let factor = || {
        ModeSum::new(vec![PlaneWaveMode {
            coefficient: c(1.0, 0.0),
            momentum: 0.0,
            branch: EnergyBranch::Positive,
        }])
        .unwrap()
    };
    let wf = MultiTimeWaveFunction::new(
        vec![1.0, 1.0],
        vec![DiracTerm { coefficient: c(1.0, 0.0), factors: vec![factor(), factor()] }],
    )
    .unwrap();
    let v = wf.evaluate(&[TwoVector::new(0.0, 0.0), TwoVector::new(0.0, 0.0)]).unwrap();
    assert_abs_diff_eq!(v[0].re, 1.0, epsilon = 1e-15);
    for comp in &v[1..] {
        assert_abs_diff_eq!(comp.norm(), 0.0, epsilon = 1e-15);
    }
}

#[test]
fn rest_mode_density_is_uniform_one() {
    let wf = single_mode_wf(0.0, 1.0, EnergyBranch::Positive);
    let leaf = Leaf::flat(0.0, 0.0, Domain::default()).unwrap();
    for x in [-3.0, 0.0, 1.7] {
        let rho = wf.rho_sigma(&leaf, &[leaf.point_at(x)]).unwrap();
        assert_abs_diff_eq!(rho, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn product_rest_modes_density_factorizes_to_one() {
    let factor = || {
        ModeSum::new(vec![PlaneWaveMode {
            coefficient: c(1.0, 0.0),
            momentum: 0.0,
            branch: EnergyBranch::Positive,
        }])
        .unwrap()
    };
    let wf = MultiTimeWaveFunction::new(
        vec![1.0, 1.0],
        vec![DiracTerm { coefficient: c(1.0, 0.0), factors: vec![factor(), factor()] }],
    )
    .unwrap();
    let leaf = Leaf::flat(0.0, 0.3, Domain::default()).unwrap();
    let rho = wf.rho_sigma(&leaf, &config_on(&leaf, &[0.4, -1.0])).unwrap();
    assert_abs_diff_eq!(rho, 1.0, epsilon = 1e-12);
}

#[test]
fn density_is_nonnegative_on_random_states_and_leaves() {
    let mut rng = crate::rng::stream_rng(23, 0);
    for _ in 0..100 {
        let wf = random_state(&mut rng, 2);
        let leaf = random_leaf(&mut rng);
        let xs = [6.0 * rng.random::<f64>() - 3.0, 6.0 * rng.random::<f64>() - 3.0];
        let rho = wf.rho_sigma(&leaf, &config_on(&leaf, &xs)).unwrap();
        assert!(rho >= 0.0);
    }
}

#[test]
fn off_leaf_configuration_is_rejected() {
    let wf = single_mode_wf(0.0, 1.0, EnergyBranch::Positive);
    let leaf = Leaf::flat(0.0, 0.0, Domain::default()).unwrap();
    let r = wf.rho_sigma(&leaf, &[TwoVector::new(0.5, 0.0)]);
    assert!(matches!(r, Err(SimError::Validation(_))));
}

#[test]
fn bilinear_route_matches_tensor_route() {
    fn apply_slot(tensor: &[Complex64], slot: usize, n: usize, m: &Mat2) -> Vec<Complex64> {
        let stride = 1 << (n - 1 - slot);
        let mut out = vec![Complex64::default(); tensor.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let bit = (idx / stride) % 2;
            let base = idx - bit * stride;
            *o = m[bit][0] * tensor[base] + m[bit][1] * tensor[base + stride];
        }
        out
    }
    let mut rng = crate::rng::stream_rng(29, 0);
    for _ in 0..25 {
        let wf = random_state(&mut rng, 2);
        let leaf = random_leaf(&mut rng);
        let xs = [4.0 * rng.random::<f64>() - 2.0, 4.0 * rng.random::<f64>() - 2.0];
        let config = config_on(&leaf, &xs);
        let rho = wf.rho_sigma(&leaf, &config).unwrap();
        // tensor route
        let psi = wf.evaluate(&config).unwrap();
        let mut chi = psi.clone();
        for (i, p) in config.iter().enumerate() {
            let a = adjoint_normal(&leaf.unit_normal(p.x).unwrap()).unwrap();
            chi = apply_slot(&chi, i, 2, &a);
        }
        let direct: Complex64 = psi.iter().zip(&chi).map(|(p, c)| p.conj() * c).sum();
        assert_abs_diff_eq!(rho, direct.re, epsilon = 1e-12);
        assert!(direct.im.abs() <= 1e-12);
    }
}

#[test]
fn plane_wave_current_velocity_is_p_over_e() {
    // p = 3/4, m = 1 -> E = 5/4, v = 0.6
    let wf = single_mode_wf(0.75, 1.0, EnergyBranch::Positive);
    let leaf = Leaf::flat(0.0, 0.0, Domain::default()).unwrap();
    let config = [leaf.point_at(0.3)];
    let j = wf.current_sigma(&leaf, &config, 0).unwrap();
    assert_abs_diff_eq!(j.x / j.t, 0.6, epsilon = 1e-12);
    let rest = single_mode_wf(0.0, 1.0, EnergyBranch::Positive);
    let j0 = rest.current_sigma(&leaf, &config, 0).unwrap();
    let rho = rest.rho_sigma(&leaf, &config).unwrap();
    assert_abs_diff_eq!(j0.t, rho, epsilon = 1e-12);
    assert_abs_diff_eq!(j0.x, 0.0, epsilon = 1e-12);
}

#[test]
fn currents_are_future_causal_on_random_states() {
    let mut rng = crate::rng::stream_rng(31, 0);
    for _ in 0..200 {
        let wf = random_state(&mut rng, 2);
        let leaf = random_leaf(&mut rng);
        let xs = [6.0 * rng.random::<f64>() - 3.0, 6.0 * rng.random::<f64>() - 3.0];
        let (_, currents) = wf.rho_and_currents(&leaf, &config_on(&leaf, &xs)).unwrap();
        for j in currents {
            assert!(j.t >= j.x.abs() - 1e-12, "current {j:?} is not future causal");
        }
    }
}

#[test]
fn entangled_currents_are_future_causal() {
    let wf = entangled_pair();
    let mut rng = crate::rng::stream_rng(37, 0);
    for _ in 0..100 {
        let leaf = random_leaf(&mut rng);
        let xs = [8.0 * rng.random::<f64>() - 4.0, 8.0 * rng.random::<f64>() - 4.0];
        let (_, currents) = wf.rho_and_currents(&leaf, &config_on(&leaf, &xs)).unwrap();
        for j in currents {
            assert!(j.t >= j.x.abs() - 1e-12);
        }
    }
}

#[test]
fn normalization_is_leaf_independent() {
    let domain = Domain::default();
    let rest = Leaf::flat(0.0, 0.0, domain).unwrap();
    let wf = packet_wf(0.0, 0.4, 0.25, 64).normalized_on(&rest, 801).unwrap();
    let on_rest = normalization(&wf, &rest, 801).unwrap();
    assert_abs_diff_eq!(on_rest.value, 1.0, epsilon = 1e-3);
    assert!(on_rest.coverage_ok(), "boundary ratio {:.2e}", on_rest.boundary_ratio);

    let boosted = Leaf::flat(0.6, 0.0, domain).unwrap();
    let on_boosted = normalization(&wf, &boosted, 801).unwrap();
    assert_abs_diff_eq!(on_boosted.value, 1.0, epsilon = 2e-3);

    let curved = Leaf::curved(
        0.0,
        CurveShape::Tanh { amplitude: 0.3, center: 0.0, width: 1.0 },
        domain,
    )
    .unwrap();
    let on_curved = normalization(&wf, &curved, 801).unwrap();
    assert_abs_diff_eq!(on_curved.value, 1.0, epsilon = 2e-3);
}

#[test]
fn spinor_boost_intertwines_with_the_vector_boost() {
    for eta in [-1.2, -0.3, 0.0, 0.31, 0.6931, 1.5] {
        let g = PoincareTransform { rapidity: eta, translation: TwoVector::new(0.0, 0.0) };
        let s = g.spinor_matrix();
        let sinv = g.inverse().spinor_matrix();
        let sc: Mat2 = [[c(s[0][0], 0.0), c(s[0][1], 0.0)], [c(s[1][0], 0.0), c(s[1][1], 0.0)]];
        let sinvc: Mat2 =
            [[c(sinv[0][0], 0.0), c(sinv[0][1], 0.0)], [c(sinv[1][0], 0.0), c(sinv[1][1], 0.0)]];
        // S(eta) S(-eta) = I
        assert!(mat_max_abs_diff(&mat_mul(&sc, &sinvc), &IDENTITY) <= 1e-12);
        let (ch, sh) = (eta.cosh(), eta.sinh());
        // S^{-1} γ^0 S = ch γ^0 - sh γ^1, S^{-1} γ^1 S = -sh γ^0 + ch γ^1
        let lhs0 = mat_mul(&sinvc, &mat_mul(&GAMMA0, &sc));
        let rhs0 = mat_add(&mat_scale(&GAMMA0, c(ch, 0.0)), &mat_scale(&GAMMA1, c(-sh, 0.0)));
        assert!(mat_max_abs_diff(&lhs0, &rhs0) <= 1e-12, "gamma0 intertwining at eta = {eta}");
        let lhs1 = mat_mul(&sinvc, &mat_mul(&GAMMA1, &sc));
        let rhs1 = mat_add(&mat_scale(&GAMMA0, c(-sh, 0.0)), &mat_scale(&GAMMA1, c(ch, 0.0)));
        assert!(mat_max_abs_diff(&lhs1, &rhs1) <= 1e-12, "gamma1 intertwining at eta = {eta}");
    }
}

#[test]
fn boost_preserves_the_minkowski_metric() {
    let g = PoincareTransform::boost(0.77);
    let e0 = g.apply_vector(&TwoVector::new(1.0, 0.0));
    let e1 = g.apply_vector(&TwoVector::new(0.0, 1.0));
    assert_abs_diff_eq!(e0.minkowski_norm2(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(e1.minkowski_norm2(), -1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(e0.dot(&e1), 0.0, epsilon = 1e-12);
}

#[test]
fn identity_transform_leaves_evaluation_unchanged() {
    let wf = entangled_pair();
    let moved = wf.apply_poincare(&PoincareTransform::identity());
    let pts = [TwoVector::new(0.2, -0.7), TwoVector::new(-0.1, 1.3)];
    let a = wf.evaluate(&pts).unwrap();
    let b = moved.evaluate(&pts).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn translation_shifts_the_argument() {
    let wf = packet_wf(0.0, 0.3, 0.4, 24);
    let g = PoincareTransform::translation(1.0, 0.0);
    let moved = wf.apply_poincare(&g);
    for (t, x) in [(0.0, 0.0), (0.7, -1.2), (1.0, 2.0)] {
        let lhs = moved.evaluate(&[TwoVector::new(t, x)]).unwrap();
        let rhs = wf.evaluate(&[TwoVector::new(t - 1.0, x)]).unwrap();
        for (l, r) in lhs.iter().zip(&rhs) {
            assert_abs_diff_eq!((l - r).norm(), 0.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn poincare_action_matches_pointwise_definition() {
    // (U_g psi)(x_1, x_2) = (S ⊗ S) psi(g^{-1}x_1, g^{-1}x_2)
    let wf = entangled_pair();
    let g = PoincareTransform { rapidity: 0.35, translation: TwoVector::new(0.4, -0.8) };
    let moved = wf.apply_poincare(&g);
    let ginv = g.inverse();
    let s = g.spinor_matrix();
    let sc: Mat2 = [[c(s[0][0], 0.0), c(s[0][1], 0.0)], [c(s[1][0], 0.0), c(s[1][1], 0.0)]];
    let pts = [TwoVector::new(0.3, -0.4), TwoVector::new(-0.2, 0.9)];
    let lhs = moved.evaluate(&pts).unwrap();
    let pre = [ginv.apply_point(&pts[0]), ginv.apply_point(&pts[1])];
    let mut rhs = wf.evaluate(&pre).unwrap();
    for slot in 0..2 {
        let stride = 1 << (1 - slot);
        let mut out = vec![Complex64::default(); rhs.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let bit = (idx / stride) % 2;
            let base = idx - bit * stride;
            *o = sc[bit][0] * rhs[base] + sc[bit][1] * rhs[base + stride];
        }
        rhs = out;
    }
    for (l, r) in lhs.iter().zip(&rhs) {
        assert_abs_diff_eq!((l - r).norm(), 0.0, epsilon = 1e-10);
    }
}

#[test]
fn poincare_action_is_a_representation() {
    let wf = entangled_pair();
    let g1 = PoincareTransform { rapidity: 0.3, translation: TwoVector::new(0.2, 0.5) };
    let g2 = PoincareTransform { rapidity: -0.5, translation: TwoVector::new(-0.1, 0.3) };
    let seq = wf.apply_poincare(&g1).apply_poincare(&g2);
    let comp = wf.apply_poincare(&g2.compose(&g1));
    let pts = [TwoVector::new(0.6, -0.3), TwoVector::new(-0.4, 0.2)];
    let a = seq.evaluate(&pts).unwrap();
    let b = comp.evaluate(&pts).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-9);
    }
}

#[test]
fn marginal_density_integrates_to_total() {
    let domain = Domain::default();
    let rest = Leaf::flat(0.0, 0.0, domain).unwrap();
    let wf = entangled_pair().normalized_on(&rest, 241).unwrap();
    let q = LeafDensity::new(&wf, &rest, 241).unwrap();
    assert_abs_diff_eq!(q.total(), 1.0, epsilon = 1e-9);
    let mass = crate::stats::simpson(-12.0, 12.0, 600, |x| q.marginal_at(0, x).unwrap());
    assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-4);
    // moments of a symmetric-by-construction pair are centered
    let (mean0, sd0) = q.marginal_moments(0);
    assert!(sd0 > 0.5 && sd0 < 5.0);
    assert!(mean0.abs() < 1.5);
}
