//! Invariant suite behind `bohmsim validate`: one pass/fail line per
//! invariant, exit 0 only when everything passes.

use num_complex::Complex64;
use rand::Rng;

use bohmsim::dirac::gamma::{
    mat_add, mat_max_abs_diff, mat_mul, mat_scale, GAMMA0, GAMMA1, IDENTITY,
};
use bohmsim::dirac::mode::{dirac_residual, EnergyBranch, ModeSum, PlaneWaveMode};
use bohmsim::dirac::{normalization, DiracTerm, MultiTimeWaveFunction};
use bohmsim::error::Result;
use bohmsim::foliation::{advance_to_leaf, CurveShape, Domain, Foliation, Leaf};
use bohmsim::hbd::{integrate_flat_frame, integrate_hbd, HbdParams};
use bohmsim::nr::{self, grid::GridSpec, grid::Potential, NrTerm, NrWaveFunction, PacketSpec};
use bohmsim::presets;
use bohmsim::report::{Report, RunArtifacts};
use bohmsim::rng::stream_rng;
use bohmsim::spacetime::{PoincareTransform, TwoVector};

struct Check {
    name: &'static str,
    run: fn() -> Result<(bool, String)>,
}

pub fn run_suite(artifacts: &mut RunArtifacts) -> Result<u8> {
    let checks: Vec<Check> = vec![
        Check { name: "clifford-relations", run: clifford },
        Check { name: "mode-dirac-residuals", run: mode_residuals },
        Check { name: "spinor-boost-intertwining", run: intertwining },
        Check { name: "leaf-normals-future-unit", run: normals },
        Check { name: "advance-lands-on-leaf", run: advance },
        Check { name: "foliation-family-ordering", run: family_ordering },
        Check { name: "density-positive-currents-causal", run: positivity },
        Check { name: "normalization-leaf-independent", run: leaf_independence },
        Check { name: "poincare-representation", run: representation },
        Check { name: "nr-norm-conserved", run: nr_norm },
        Check { name: "nr-backend-agreement", run: nr_backends },
        Check { name: "grid-unitarity", run: grid_unitarity },
        Check { name: "nr-guiding-oracle", run: nr_oracle },
        Check { name: "hbd-dual-integrator-agreement", run: dual_integrators },
        Check { name: "sampling-deterministic", run: sampling_determinism },
    ];
    let mut rep = Report::new();
    let mut all_ok = true;
    for check in &checks {
        let (ok, metric) = (check.run)()?;
        all_ok &= ok;
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {} ({metric})", check.name);
        rep.push(check.name, format!("{verdict} ({metric})"));
    }
    rep.push("all", if all_ok { "PASS" } else { "FAIL" });
    artifacts.write_report("validate.txt", &rep)?;
    Ok(if all_ok { 0 } else { 3 })
}

fn domain() -> Domain {
    Domain::default()
}

fn clifford() -> Result<(bool, String)> {
    let minus_i = mat_scale(&IDENTITY, Complex64::new(-1.0, 0.0));
    let d0 = mat_max_abs_diff(&mat_mul(&GAMMA0, &GAMMA0), &IDENTITY);
    let d1 = mat_max_abs_diff(&mat_mul(&GAMMA1, &GAMMA1), &minus_i);
    let anti = mat_add(&mat_mul(&GAMMA0, &GAMMA1), &mat_mul(&GAMMA1, &GAMMA0));
    let d2 = mat_max_abs_diff(&anti, &mat_scale(&IDENTITY, Complex64::default()));
    let worst = d0.max(d1).max(d2);
    Ok((worst <= 1e-12, format!("max residual {worst:.2e}")))
}

fn mode_residuals() -> Result<(bool, String)> {
    let mut rng = stream_rng(101, 0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = -10.0 + 20.0 * rng.random::<f64>();
        let m = 0.05 + 5.0 * rng.random::<f64>();
        let branch =
            if rng.random::<f64>() < 0.5 { EnergyBranch::Positive } else { EnergyBranch::Negative };
        worst = worst.max(dirac_residual(p, m, branch));
    }
    Ok((worst <= 1e-12, format!("max residual {worst:.2e}")))
}

fn intertwining() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for eta in [-1.5, -0.7, -0.1, 0.0, 0.3, 0.9, 1.8] {
        let g = PoincareTransform { rapidity: eta, translation: TwoVector::new(0.0, 0.0) };
        let s = g.spinor_matrix();
        let sinv = g.inverse().spinor_matrix();
        let c = |m: [[f64; 2]; 2]| {
            [[Complex64::new(m[0][0], 0.0), Complex64::new(m[0][1], 0.0)],
             [Complex64::new(m[1][0], 0.0), Complex64::new(m[1][1], 0.0)]]
        };
        let (ch, sh) = (eta.cosh(), eta.sinh());
        let lhs0 = mat_mul(&c(sinv), &mat_mul(&GAMMA0, &c(s)));
        let rhs0 = mat_add(
            &mat_scale(&GAMMA0, Complex64::new(ch, 0.0)),
            &mat_scale(&GAMMA1, Complex64::new(-sh, 0.0)),
        );
        let lhs1 = mat_mul(&c(sinv), &mat_mul(&GAMMA1, &c(s)));
        let rhs1 = mat_add(
            &mat_scale(&GAMMA0, Complex64::new(-sh, 0.0)),
            &mat_scale(&GAMMA1, Complex64::new(ch, 0.0)),
        );
        worst = worst.max(mat_max_abs_diff(&lhs0, &rhs0)).max(mat_max_abs_diff(&lhs1, &rhs1));
    }
    Ok((worst <= 1e-12, format!("max intertwining residual {worst:.2e}")))
}

fn normals() -> Result<(bool, String)> {
    let mut rng = stream_rng(102, 0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let amplitude = 0.7 * (2.0 * rng.random::<f64>() - 1.0);
        let leaf = Leaf::curved(
            rng.random::<f64>(),
            CurveShape::Tanh { amplitude, center: 2.0 * rng.random::<f64>(), width: 1.0 },
            domain(),
        )?;
        let x = -10.0 + 20.0 * rng.random::<f64>();
        let n = leaf.unit_normal(x)?;
        worst = worst.max((n.minkowski_norm2() - 1.0).abs());
        if n.t <= 0.0 {
            return Ok((false, "past-oriented normal".into()));
        }
    }
    Ok((worst <= 1e-12, format!("max |n·n - 1| {worst:.2e}")))
}

fn advance() -> Result<(bool, String)> {
    let fol = Foliation::curved(
        "sin",
        CurveShape::Sin { amplitude: 0.25, angular_frequency: 2.0, phase: 0.3 },
        domain(),
    )?;
    let mut rng = stream_rng(103, 0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x = -5.0 + 10.0 * rng.random::<f64>();
        let s0 = rng.random::<f64>() - 0.5;
        let s1 = s0 + 0.01 + 0.4 * rng.random::<f64>();
        let vd = 2.0 * rng.random::<f64>() - 1.0;
        let start = fol.leaf(s0).point_at(x);
        let p = advance_to_leaf(&fol, s1, &start, &TwoVector::new(1.0, vd))?;
        worst = worst.max((fol.leaf(s1).time_at(p.x) - p.t).abs());
    }
    Ok((worst <= 1e-9, format!("max landing defect {worst:.2e}")))
}

fn family_ordering() -> Result<(bool, String)> {
    for fol in presets::default_family(domain())? {
        fol.validate(0.0, 2.0)?;
    }
    Ok((true, "8 foliations ordered and spacelike".into()))
}

fn positivity() -> Result<(bool, String)> {
    let mut rng = stream_rng(104, 0);
    let mut min_rho = f64::INFINITY;
    let mut worst_causality = f64::NEG_INFINITY;
    for _ in 0..300 {
        let mut terms = Vec::new();
        for _ in 0..2 {
            let factors = (0..2)
                .map(|_| {
                    let modes = (0..3)
                        .map(|_| PlaneWaveMode {
                            coefficient: Complex64::new(
                                rng.random::<f64>() - 0.5,
                                rng.random::<f64>() - 0.5,
                            ),
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
                coefficient: Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                factors,
            });
        }
        let wf = MultiTimeWaveFunction::new(vec![1.0, 1.0], terms)?;
        let leaf = Leaf::curved(
            rng.random::<f64>() - 0.5,
            CurveShape::Tanh {
                amplitude: 0.6 * (2.0 * rng.random::<f64>() - 1.0),
                center: 2.0 * rng.random::<f64>(),
                width: 1.0,
            },
            domain(),
        )?;
        let config = [
            leaf.point_at(6.0 * rng.random::<f64>() - 3.0),
            leaf.point_at(6.0 * rng.random::<f64>() - 3.0),
        ];
        let (rho, currents) = wf.rho_and_currents(&leaf, &config)?;
        min_rho = min_rho.min(rho);
        for j in currents {
            worst_causality = worst_causality.max(j.x.abs() - j.t);
        }
    }
    let ok = min_rho >= -1e-12 && worst_causality <= 1e-12;
    Ok((ok, format!("min rho {min_rho:.2e}, max |j1|-j0 {worst_causality:.2e}")))
}

fn leaf_independence() -> Result<(bool, String)> {
    let wf = presets::packet_state(1.0, 0.0, 0.4, 0.25, 64, domain())?;
    let rest = normalization(&wf, &Leaf::flat(0.0, 0.0, domain())?, 801)?;
    let boosted = normalization(&wf, &Leaf::flat(0.6, 0.0, domain())?, 801)?;
    let curved = normalization(
        &wf,
        &Leaf::curved(0.0, CurveShape::Tanh { amplitude: 0.3, center: 0.0, width: 1.0 }, domain())?,
        801,
    )?;
    let worst =
        (rest.value - 1.0).abs().max((boosted.value - 1.0).abs()).max((curved.value - 1.0).abs());
    Ok((worst <= 2e-3, format!("max |norm - 1| {worst:.2e}")))
}

fn representation() -> Result<(bool, String)> {
    let wf = presets::entangled_pair_state(
        &presets::PairSpec::default(),
        Complex64::new(0.0, 0.6),
        domain(),
    )?;
    let g1 = PoincareTransform { rapidity: 0.3, translation: TwoVector::new(0.2, 0.5) };
    let g2 = PoincareTransform { rapidity: -0.5, translation: TwoVector::new(-0.1, 0.3) };
    let seq = wf.apply_poincare(&g1).apply_poincare(&g2);
    let comp = wf.apply_poincare(&g2.compose(&g1));
    let pts = [TwoVector::new(0.6, -0.3), TwoVector::new(-0.4, 0.2)];
    let a = seq.evaluate(&pts)?;
    let b = comp.evaluate(&pts)?;
    let worst = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    Ok((worst <= 1e-9, format!("max pointwise gap {worst:.2e}")))
}

fn nr_norm() -> Result<(bool, String)> {
    let wf = NrWaveFunction::analytic(
        vec![1.0],
        vec![
            NrTerm {
                coefficient: Complex64::new(0.8, 0.0),
                packets: vec![PacketSpec { center: -1.0, momentum: 0.9, width: 0.8 }],
            },
            NrTerm {
                coefficient: Complex64::new(0.3, 0.4),
                packets: vec![PacketSpec { center: 1.0, momentum: -0.4, width: 1.2 }],
            },
        ],
    )?;
    let worst = [0.0, 0.7, 1.5, 3.0]
        .iter()
        .map(|t| (wf.norm(*t) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok((worst <= 1e-9, format!("max |norm - 1| {worst:.2e}")))
}

fn nr_backends() -> Result<(bool, String)> {
    let term = vec![NrTerm {
        coefficient: Complex64::new(1.0, 0.0),
        packets: vec![PacketSpec { center: 0.0, momentum: 0.3, width: 1.0 }],
    }];
    let exact = NrWaveFunction::analytic(vec![1.0], term.clone())?;
    let grid = NrWaveFunction::grid(
        vec![1.0],
        term,
        GridSpec { points: 64, length: 40.0, dt: 1e-2 },
        Potential::None,
    )?;
    let mut worst = 0.0f64;
    for t in [0.0, 1.0, 2.0] {
        for k in 0..21 {
            let x = -4.0 + 0.4 * k as f64;
            worst = worst.max((exact.density(t, &[x])? - grid.density(t, &[x])?).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max density gap {worst:.2e}")))
}

fn grid_unitarity() -> Result<(bool, String)> {
    let wf = NrWaveFunction::grid(
        vec![1.0],
        vec![NrTerm {
            coefficient: Complex64::new(1.0, 0.0),
            packets: vec![PacketSpec { center: 0.0, momentum: 0.0, width: 0.5f64.sqrt() }],
        }],
        GridSpec { points: 64, length: 40.0, dt: 1e-3 },
        Potential::Harmonic { omega: 1.0 },
    )?;
    let drift = (wf.norm(1.0) - wf.norm(0.0)).abs();
    Ok((drift <= 1e-8, format!("norm drift over 1000 steps {drift:.2e}")))
}

fn nr_oracle() -> Result<(bool, String)> {
    let wf = NrWaveFunction::analytic(
        vec![1.0],
        vec![NrTerm {
            coefficient: Complex64::new(1.0, 0.0),
            packets: vec![PacketSpec { center: 0.0, momentum: 0.0, width: 1.0 }],
        }],
    )?;
    let traj = nr::integrate(&wf, &[1.0], 0.0, 2.0, 1e-3)?;
    let err = (traj.configs.last().unwrap()[0] - 2.0f64.sqrt()).abs();
    Ok((err <= 1e-8, format!("|x(2) - sqrt(2)| = {err:.2e}")))
}

fn dual_integrators() -> Result<(bool, String)> {
    let wf = presets::entangled_pair_state(
        &presets::PairSpec::default(),
        Complex64::new(0.0, 0.6),
        domain(),
    )?;
    let fol = Foliation::flat("moving", 0.3, domain())?;
    let initial = [TwoVector::new(-0.3, -1.0), TwoVector::new(0.3, 1.0)];
    let params = HbdParams { s1: 1.0, ds: 5e-4, ..Default::default() };
    let leafwise = integrate_hbd(&wf, &fol, &initial, &params)?;
    let framewise = integrate_flat_frame(&wf, 0.3, &initial, 0.0, 1.0, 5e-4, "moving")?;
    let d = leafwise.sup_distance(&framewise)?;
    Ok((d <= 1e-6, format!("sup distance {d:.2e}")))
}

fn sampling_determinism() -> Result<(bool, String)> {
    let wf = presets::packet_state(1.0, 0.0, 0.0, 0.25, 64, domain())?;
    let leaf = Leaf::flat(0.0, 0.0, domain())?;
    let a = bohmsim::ensemble::sample_on_leaf(&wf, &leaf, 64, 7)?;
    let b = bohmsim::ensemble::sample_on_leaf(&wf, &leaf, 64, 7)?;
    Ok((a == b, format!("{} samples bit-identical", a.len())))
}
