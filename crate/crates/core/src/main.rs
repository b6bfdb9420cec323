//! Batch front door: config-driven experiments with deterministic artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bohmsim::config::ExperimentConfig;
use bohmsim::ensemble::{cross_foliation_test, equivariance_rel, run_ensemble};
use bohmsim::error::{Result, SimError};
use bohmsim::event::EventPredicate;
use bohmsim::hbd::{covariance_check, integrate_hbd, overlap_check, HbdParams};
use bohmsim::nolaw::{
    check_capacity_properties, covariance_p_star, family_runs, is_typical, p_mu_with_runs,
    p_star_prime_with_runs, p_star_with_runs, CapacityEvents, FoliationFamily, LowerProbEstimate,
};
use bohmsim::nr;
use bohmsim::report::{config_hash, Report, RunArtifacts};
use bohmsim::stats::DistanceReport;

mod validate;

/// Default config used by `validate` and as a schema reference.
const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Parser)]
#[command(
    name = "bohmsim",
    about = "Bohmian trajectories in 1+1D spacetime: pilot-wave and hypersurface-guided Dirac dynamics, foliation families, and lower-probability experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dot-path overrides, e.g. --set run.samples=2000
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory for artifacts
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed (shorthand for --set run.seed=...)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: BOHMSIM_THREADS or all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate non-relativistic guiding-law trajectories
    SimulateNr,
    /// Integrate hypersurface-guided Dirac trajectories along a foliation
    SimulateHbd,
    /// Equivariance experiment (sector chosen by the wave function)
    Equivariance,
    /// Equilibrium under one foliation, measured on a leaf of another
    CrossFoliation,
    /// Lower probability of an event over a foliation family
    Pstar,
    /// Capacity properties of the lower probability on shared samples
    PstarProperties,
    /// Trajectory and lower-probability covariance under a Poincaré map
    CovarianceCheck,
    /// Trajectory stability under foliation deformation away from it
    OverlapCheck,
    /// Run the invariant suite
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("BOHMSIM_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_config(cli: &Cli) -> Result<(ExperimentConfig, String)> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let mut overrides: Vec<(String, String)> = Vec::new();
    for entry in &cli.set {
        let (k, v) = entry
            .split_once('=')
            .ok_or_else(|| SimError::Config(format!("--set expects KEY=VALUE, got \"{entry}\"")))?;
        overrides.push((k.to_string(), v.to_string()));
    }
    if let Some(seed) = cli.seed {
        overrides.push(("run.seed".into(), seed.to_string()));
    }
    ExperimentConfig::from_toml(&text, &overrides)
}

fn run(cli: &Cli) -> Result<u8> {
    let (config, canonical) = load_config(cli)?;
    let hash = config_hash(&canonical);
    let mut artifacts = RunArtifacts::create(&cli.out, hash)?;
    let outcome = dispatch(cli, &config, &mut artifacts);
    if outcome.is_err() {
        artifacts.remove_created();
    }
    outcome
}

fn dispatch(cli: &Cli, config: &ExperimentConfig, artifacts: &mut RunArtifacts) -> Result<u8> {
    match cli.command {
        Command::SimulateNr => simulate_nr(config, artifacts),
        Command::SimulateHbd => simulate_hbd(config, artifacts),
        Command::Equivariance => equivariance(config, artifacts),
        Command::CrossFoliation => cross_foliation(config, artifacts),
        Command::Pstar => pstar(config, artifacts),
        Command::PstarProperties => pstar_properties(config, artifacts),
        Command::CovarianceCheck => covariance(config, artifacts),
        Command::OverlapCheck => overlap(config, artifacts),
        Command::Validate => validate::run_suite(artifacts),
    }
}

fn base_report(config: &ExperimentConfig) -> Report {
    let mut rep = Report::new();
    rep.push("seed", config.run.seed);
    rep.push("samples", config.run.samples);
    rep
}

fn push_distance_report(rep: &mut Report, prefix: &str, d: &DistanceReport) {
    for (axis, dist) in d.distances.iter().enumerate() {
        rep.push(format!("{prefix}.distance.{axis}"), dist);
    }
    rep.push(format!("{prefix}.bins"), d.bins);
    rep.push(format!("{prefix}.noise_floor"), d.noise_floor);
    rep.push(format!("{prefix}.failures"), d.failures);
    rep.push(format!("{prefix}.pass"), d.all_pass());
}

fn write_histograms(artifacts: &mut RunArtifacts, name: &str, d: &DistanceReport) -> Result<()> {
    let mut rows = Vec::new();
    for h in &d.details {
        let width = (h.hi - h.lo) / h.empirical.len() as f64;
        for (b, (count, exact)) in h.empirical.iter().zip(&h.exact).enumerate() {
            rows.push(format!(
                "{},{},{},{},{}",
                h.axis,
                h.lo + b as f64 * width,
                h.lo + (b + 1) as f64 * width,
                count,
                exact
            ));
        }
    }
    artifacts.write_csv(name, "axis,bin_lo,bin_hi,empirical,exact", rows)?;
    Ok(())
}

fn push_lower_prob(rep: &mut Report, prefix: &str, est: &LowerProbEstimate) {
    rep.push(format!("{prefix}.value"), est.value);
    rep.push(format!("{prefix}.argmin"), &est.argmin);
    rep.push(format!("{prefix}.lower_bound"), est.lower_bound);
    for f in &est.per_foliation {
        rep.push(format!("{prefix}.p.{}", f.label), f.estimate.p);
        rep.push(
            format!("{prefix}.ci.{}", f.label),
            format!("{}..{}", f.estimate.lower, f.estimate.upper),
        );
    }
}

fn lower_prob_csv(est: &LowerProbEstimate) -> Vec<String> {
    est.per_foliation
        .iter()
        .map(|f| {
            format!(
                "{},{},{},{},{},{},{}",
                f.label,
                f.estimate.p,
                f.estimate.lower,
                f.estimate.upper,
                f.estimate.successes,
                f.estimate.samples,
                f.estimate.failures
            )
        })
        .collect()
}

fn simulate_nr(config: &ExperimentConfig, artifacts: &mut RunArtifacts) -> Result<u8> {
    let wf = config.build_nr()?;
    let run = &config.run;
    let starts: Vec<Vec<f64>> = match &run.initial {
        Some(xs) => vec![xs.clone()],
        None => nr::sample(&wf, run.t0, run.samples, run.seed)?,
    };
    let mut rep = base_report(config);
    rep.push("sector", "nonrelativistic");
    rep.push("t0", run.t0);
    rep.push("t1", run.t1);
    rep.push("step", run.step);
    rep.push("norm.t0", wf.norm(run.t0));
    rep.push("norm.t1", wf.norm(run.t1));
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for (idx, x0) in starts.iter().enumerate() {
        let traj = nr::integrate(&wf, x0, run.t0, run.t1, run.step)?;
        if !traj.valid {
            failures += 1;
        }
        for (t, cfg) in traj.times.iter().zip(&traj.configs) {
            for (particle, x) in cfg.iter().enumerate() {
                rows.push(format!("{idx},{t},{particle},{x}"));
            }
        }
    }
    artifacts.write_csv("trajectories.csv", "trajectory,t,particle,x", rows)?;
    rep.push("trajectories", starts.len());
    rep.push("failures", failures);
    artifacts.write_report("report.txt", &rep)?;
    if failures * 100 > starts.len() {
        return Err(SimError::FailureBudget { failed: failures, total: starts.len() });
    }
    Ok(0)
}

fn simulate_hbd(config: &ExperimentConfig, artifacts: &mut RunArtifacts) -> Result<u8> {
    let wf = config.build_dirac()?;
    let foliation = config.foliation()?;
    let run = &config.run;
    let mut rep = base_report(config);
    rep.push("sector", "dirac");
    rep.push("foliation", &foliation.label);
    rep.push("s0", run.s0);
    rep.push("s1", run.s1);
    rep.push("ds", run.ds);
    let mut rows = Vec::new();
    let failures;
    let count;
    if run.initial.is_some() {
        let initial = config.initial_config(&foliation.leaf(run.s0))?;
        let params = HbdParams {
            s0: run.s0,
            s1: run.s1,
            ds: run.ds,
            velocity_scale: run.velocity_scale,
            eps_rho: None,
        };
        let traj = integrate_hbd(&wf, &foliation, &initial, &params)?;
        failures = usize::from(!traj.valid);
        count = 1;
        for (s, row) in traj.leaf_params.iter().zip(&traj.points) {
            for (particle, p) in row.iter().enumerate() {
                rows.push(format!("0,{s},{particle},{},{}", p.t, p.x));
            }
        }
    } else {
        let ensemble = run_ensemble(&wf, &foliation, &config.ensemble_spec())?;
        failures = ensemble.failures;
        count = ensemble.samples();
        for (idx, traj) in ensemble.trajectories.iter().enumerate() {
            for (s, row) in traj.leaf_params.iter().zip(&traj.points) {
                for (particle, p) in row.iter().enumerate() {
                    rows.push(format!("{idx},{s},{particle},{},{}", p.t, p.x));
                }
            }
        }
    }
    artifacts.write_csv("trajectories.csv", "trajectory,s,particle,t,x", rows)?;
    rep.push("trajectories", count);
    rep.push("failures", failures);
    artifacts.write_report("report.txt", &rep)?;
    if failures * 100 > count {
        return Err(SimError::FailureBudget { failed: failures, total: count });
    }
    Ok(0)
}

fn equivariance(config: &ExperimentConfig, artifacts: &mut RunArtifacts) -> Result<u8> {
    let run = &config.run;
    let mut rep = base_report(config);
    let report = match config.wavefunction.sector {
        bohmsim::config::Sector::Nonrelativistic => {
            let wf = config.build_nr()?;
            rep.push("sector", "nonrelativistic");
            let spec = nr::EquivarianceSpec {
                t0: run.t0,
                t1: run.t1,
                samples: run.samples,
                bins: run.bins,
                seed: run.seed,
                step: run.step,
                velocity_scale: run.velocity_scale,
            };
            nr::equivariance(&wf, &spec)?
        }
        bohmsim::config::Sector::Dirac => {
            let wf = config.build_dirac()?;
            let foliation = config.foliation()?;
            rep.push("sector", "dirac");
            rep.push("foliation", &foliation.label);
            equivariance_rel(&wf, &foliation, &config.ensemble_spec())?
        }
    };
    push_distance_report(&mut rep, "equivariance", &report);
    write_histograms(artifacts, "histograms.csv", &report)?;
    artifacts.write_report("report.txt", &rep)?;
    Ok(if report.all_pass() { 0 } else { 3 })
}

fn cross_foliation(config: &ExperimentConfig, artifacts: &mut RunArtifacts) -> Result<u8> {
    let wf = config.build_dirac()?;
    let foliation = config.foliation()?;
    let section = config.cross_foliation.as_ref().ok_or_else(|| {
        SimError::Config(
            "a [cross_foliation] section (probe foliation and parameter) is required".into(),
        )
    })?;
    let probe_foliation = config.build_foliation(&section.foliation)?;
    let probe = probe_foliation.leaf(section.parameter);
    let report = cross_foliation_test(&wf, &foliation, &probe, &config.ensemble_spec())?;
    let mut rep = base_report(config);
    rep.push("foliation", &foliation.label);
    rep.push("probe.foliation", &probe_foliation.label);
    rep.push("probe.parameter", section.parameter);
    rep.push("final_parameter", report.final_parameter);
    push_distance_report(&mut rep, "cross", &report.cross);
    push_distance_report(&mut rep, "baseline", &report.baseline);
    rep.push("marginal_ratio", report.ratio);
    rep.push("joint.cross", report.cross_joint);
    rep.push("joint.baseline", report.baseline_joint);
    rep.push("joint.bins", report.joint_bins);
    rep.push("joint.noise_floor", report.joint_noise_floor);
    rep.push("joint.ratio", report.joint_ratio);
    rep.push("born_above", report.missed);
    write_histograms(artifacts, "cross_histograms.csv", &report.cross)?;
    write_histograms(artifacts, "baseline_histograms.csv", &report.baseline)?;
    artifacts.write_report("report.txt", &rep)?;
    Ok(0)
}

/// Does the event tree mention foliation labels (primitive-ontology form)?
fn mentions_labels(e: &bohmsim::config::EventConfig) -> bool {
    e.kind == "label" || e.children.iter().any(mentions_labels)
}

fn pstar(config: &ExperimentConfig, artifacts: &mut RunArtifacts) -> Result<u8> {
    let wf = config.build_dirac()?;
    let family = config.family()?;
    let spec = config.ensemble_spec();
    let runs = family_runs(&family, &wf, &spec)?;
    let event_config = config
        .event
        .as_ref()
        .ok_or_else(|| SimError::Config("an [event] section is required".into()))?;
    let mut rep = base_report(config);
    rep.push("family.size", family.foliations.len());
    rep.push("family.s0", family.s0);
    rep.push("family.s1", family.s1);
    let est = if mentions_labels(event_config) {
        rep.push("variant", "primitive-ontology");
        let predicate = config.build_pair_predicate()?;
        p_star_prime_with_runs(&predicate, &runs)?
    } else {
        rep.push("variant", "trajectory-events");
        let event = config.build_event()?;
        p_star_with_runs(&event, &runs)?
    };
    push_lower_prob(&mut rep, "p_star", &est);
    let verdict = is_typical(&est, config.run.epsilon)?;
    rep.push("typicality.epsilon", verdict.epsilon);
    rep.push("typicality.typical", verdict.typical);
    rep.push("typicality.text", &verdict.text);
    artifacts.write_csv(
        "pstar_per_foliation.csv",
        "label,p,lower,upper,successes,samples,failures",
        lower_prob_csv(&est),
    )?;
    artifacts.write_report("report.txt", &rep)?;
    Ok(0)
}

fn default_capacity_events() -> Result<CapacityEvents> {
    Ok(CapacityEvents {
        disjoint_a: EventPredicate::crosses(0, (0.95, 1.05), (0.15, 8.0))?,
        disjoint_b: EventPredicate::crosses(0, (0.95, 1.05), (-8.0, -0.15))?,
        nested_inner: EventPredicate::crosses(0, (0.9, 1.1), (0.0, 0.5))?,
        nested_outer: EventPredicate::crosses(0, (0.85, 1.15), (-0.2, 0.8))?,
    })
}

fn pstar_properties(config: &ExperimentConfig, artifacts: &mut RunArtifacts) -> Result<u8> {
    let wf = config.build_dirac()?;
    let family = config.family()?;
    let spec = config.ensemble_spec();
    let events = match &config.capacity {
        Some(c) => CapacityEvents {
            disjoint_a: bohmsim::config::build_event(&c.disjoint_a)?,
            disjoint_b: bohmsim::config::build_event(&c.disjoint_b)?,
            nested_inner: bohmsim::config::build_event(&c.nested_inner)?,
            nested_outer: bohmsim::config::build_event(&c.nested_outer)?,
        },
        None => default_capacity_events()?,
    };
    let report = check_capacity_properties(&family, &wf, &spec, &events)?;
    let mut rep = base_report(config);
    rep.push("family.size", family.foliations.len());
    push_lower_prob(&mut rep, "empty", &report.empty);
    push_lower_prob(&mut rep, "full", &report.full);
    push_lower_prob(&mut rep, "a", &report.a);
    push_lower_prob(&mut rep, "b", &report.b);
    push_lower_prob(&mut rep, "a_or_b", &report.a_or_b);
    push_lower_prob(&mut rep, "inner", &report.inner);
    push_lower_prob(&mut rep, "outer", &report.outer);
    rep.push("boundary_ok", report.boundary_ok);
    rep.push("superadditive_ok", report.superadditive_ok);
    rep.push("monotone_ok", report.monotone_ok);

    // mixtures dominate the lower probability, for several weight vectors
    let runs = family_runs(&family, &wf, &spec)?;
    let union = EventPredicate::Or(vec![events.disjoint_a.clone(), events.disjoint_b.clone()]);
    let star = p_star_with_runs(&union, &runs)?;
    let k = family.foliations.len();
    let mut point = vec![0.0; k];
    point[0] = 1.0;
    let ramp: Vec<f64> = {
        let total: f64 = (1..=k).map(|i| i as f64).sum();
        (1..=k).map(|i| i as f64 / total).collect()
    };
    let mut mixtures_ok = true;
    for (name, weights) in [("uniform", vec![1.0 / k as f64; k]), ("point", point), ("ramp", ramp)]
    {
        let value = p_mu_with_runs(&union, &runs, &weights)?;
        rep.push(format!("p_mu.{name}"), value);
        mixtures_ok &= value >= star.value - 1e-12;
    }
    rep.push("mixtures_dominate", mixtures_ok);

    // dropping the last family member can only raise the minimum
    let shrunk =
        FoliationFamily::new(family.foliations[..k - 1].to_vec(), family.s0, family.s1)?;
    let shrunk_est = p_star_with_runs(&union, &family_runs(&shrunk, &wf, &spec)?)?;
    let growth_ok = star.value <= shrunk_est.value + 1e-15;
    rep.push("p_star.full_family", star.value);
    rep.push("p_star.shrunk_family", shrunk_est.value);
    rep.push("family_growth_monotone", growth_ok);

    artifacts.write_csv(
        "pstar_union_per_foliation.csv",
        "label,p,lower,upper,successes,samples,failures",
        lower_prob_csv(&star),
    )?;
    artifacts.write_report("report.txt", &rep)?;
    let all_ok = report.boundary_ok
        && report.superadditive_ok
        && report.monotone_ok
        && mixtures_ok
        && growth_ok;
    Ok(if all_ok { 0 } else { 3 })
}

fn covariance(config: &ExperimentConfig, artifacts: &mut RunArtifacts) -> Result<u8> {
    let wf = config.build_dirac()?;
    let g = config.build_transform()?;
    let mut rep = base_report(config);
    rep.push("transform.velocity", g.velocity());
    rep.push("transform.t", g.translation.t);
    rep.push("transform.x", g.translation.x);
    let mut ok = true;
    let mut ran_anything = false;

    if config.run.initial.is_some() {
        ran_anything = true;
        let foliation = config.foliation()?;
        let initial = config.initial_config(&foliation.leaf(config.run.s0))?;
        let params = HbdParams {
            s0: config.run.s0,
            s1: config.run.s1,
            ds: config.run.ds,
            velocity_scale: 1.0,
            eps_rho: None,
        };
        let trajectory_report = covariance_check(&wf, &foliation, &initial, &g, &params)?;
        rep.push("trajectory.sup_distance", trajectory_report.sup_distance);
        rep.push("trajectory.refined_sup_distance", trajectory_report.refined_sup_distance);
        rep.push("trajectory.refinement_ratio", trajectory_report.refinement_ratio);
        ok &= trajectory_report.refined_sup_distance <= trajectory_report.sup_distance;
    }

    if config.event.is_some() {
        ran_anything = true;
        let family = config.family()?;
        let event = config.build_event()?;
        let pr = covariance_p_star(&event, &family, &wf, &g, &config.ensemble_spec())?;
        push_lower_prob(&mut rep, "p_star.base", &pr.base);
        push_lower_prob(&mut rep, "p_star.transformed", &pr.transformed);
        rep.push("p_star.ci_overlap", pr.all_overlap);
        ok &= pr.all_overlap;
    }

    if !ran_anything {
        return Err(SimError::Config(
            "covariance-check needs run.initial (trajectory check) and/or an [event] section (lower-probability check)".into(),
        ));
    }
    artifacts.write_report("report.txt", &rep)?;
    Ok(if ok { 0 } else { 3 })
}

fn overlap(config: &ExperimentConfig, artifacts: &mut RunArtifacts) -> Result<u8> {
    let wf = config.build_dirac()?;
    let foliation = config.foliation()?;
    let section = config.overlap.as_ref().ok_or_else(|| {
        SimError::Config("an [overlap] section (margin and bump) is required".into())
    })?;
    let initial = config.initial_config(&foliation.leaf(config.run.s0))?;
    let params = HbdParams {
        s0: config.run.s0,
        s1: config.run.s1,
        ds: config.run.ds,
        velocity_scale: 1.0,
        eps_rho: None,
    };
    let report = overlap_check(&wf, &foliation, &initial, &params, section.margin, section.bump)?;
    let mut rep = base_report(config);
    rep.push("foliation", &foliation.label);
    rep.push("margin", section.margin);
    rep.push("bump", section.bump);
    rep.push("deformed", &report.deformed_label);
    rep.push("sup_distance", report.sup_distance);
    rep.push("tolerance", report.tolerance);
    rep.push("pass", report.pass);
    artifacts.write_report("report.txt", &rep)?;
    Ok(if report.pass { 0 } else { 3 })
}
