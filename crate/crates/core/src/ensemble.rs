//! Monte Carlo machinery over trajectory ensembles: sampling configurations
//! from the hypersurface density, propagating ensembles along foliations,
//! equivariance and cross-foliation experiments, and event-probability
//! estimates.
//!
//! Determinism contract: every sample index owns a counter-based RNG stream
//! derived from the run seed, trajectories are integrated independently, and
//! all reductions run in sample-index order, so results do not depend on
//! thread scheduling.

use rayon::prelude::*;

use crate::dirac::{LeafDensity, MultiTimeWaveFunction};
use crate::error::{Result, SimError};
use crate::event::EventPredicate;
use crate::foliation::{Foliation, Leaf};
use crate::hbd::{integrate_hbd, integrate_hbd_stream, HbdParams, Trajectory, NODE_GUARD_FACTOR};
use crate::rng::stream_rng;
use crate::spacetime::TwoVector;
use crate::stats::{simpson, wilson_interval, Histogram};
pub use crate::stats::DistanceReport;
use rand::Rng;

/// Envelope safety factor over the scanned density maximum.
const ENVELOPE_MARGIN: f64 = 1.1;
/// Density-support threshold for the proposal box. Mode-grid packets have
/// algebraic sidelobes around 1e-8 of the peak, so a tighter threshold
/// would only widen the box with numerical floor.
const SUPPORT_THRESHOLD: f64 = 1e-8;
/// Fraction of failed trajectories beyond which an experiment aborts.
pub const FAILURE_BUDGET: f64 = 0.01;
/// Histogram window half-width in marginal spreads.
const WINDOW_SIGMAS: f64 = 6.0;

/// Parameters shared by the ensemble experiments.
#[derive(Clone, Copy, Debug)]
pub struct EnsembleSpec {
    pub samples: usize,
    pub seed: u64,
    pub s0: f64,
    pub s1: f64,
    pub ds: f64,
    pub bins: usize,
    /// cells per axis of the joint (two-particle) histogram
    pub joint_bins: usize,
    /// 1.0 for the physical guiding law (negative controls corrupt it).
    pub velocity_scale: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            samples: 2_000,
            seed: 0,
            s0: 0.0,
            s1: 2.0,
            ds: 5e-3,
            bins: 30,
            joint_bins: 10,
            velocity_scale: 1.0,
        }
    }
}

impl EnsembleSpec {
    fn params(&self, eps_rho: f64) -> HbdParams {
        HbdParams {
            s0: self.s0,
            s1: self.s1,
            ds: self.ds,
            velocity_scale: self.velocity_scale,
            eps_rho: Some(eps_rho),
        }
    }
}

pub fn default_quadrature_points(particles: usize) -> usize {
    match particles {
        1 => 801,
        2 => 241,
        _ => 81,
    }
}

/// Draw `m` i.i.d. configurations from the hypersurface density (with the
/// proper-length measure) by rejection sampling against a scanned uniform
/// envelope. Returns spatial coordinates per particle.
pub fn sample_on_leaf(
    wf: &MultiTimeWaveFunction,
    leaf: &Leaf,
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let density = LeafDensity::new(wf, leaf, default_quadrature_points(wf.particle_count()))?;
    sample_with_density(&density, m, seed)
}

fn sample_with_density(density: &LeafDensity, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if m == 0 {
        return Err(SimError::Validation("sample count must be >= 1".into()));
    }
    let boxes = density.support_box(SUPPORT_THRESHOLD);
    let envelope = ENVELOPE_MARGIN * density.max_weighted();
    if !(envelope > 0.0) || !envelope.is_finite() {
        return Err(SimError::Envelope(format!("density scan produced envelope {envelope}")));
    }
    let results: Vec<Result<Vec<f64>>> = (0..m)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(seed, idx as u64);
            let mut x = vec![0.0; boxes.len()];
            for _ in 0..1_000_000u64 {
                for (xi, (lo, hi)) in x.iter_mut().zip(&boxes) {
                    *xi = lo + (hi - lo) * rng.random::<f64>();
                }
                let u: f64 = rng.random();
                if u * envelope <= density.weighted_at(&x)? {
                    return Ok(x);
                }
            }
            Err(SimError::Envelope("acceptance rate too low".into()))
        })
        .collect();
    results.into_iter().collect()
}

/// A fully recorded ensemble: sampled initial conditions propagated along
/// one foliation. Contents are deterministic given the parameters.
#[derive(Debug)]
pub struct EnsembleRun {
    pub foliation_label: String,
    pub spec: EnsembleSpec,
    pub trajectories: Vec<Trajectory>,
    pub failures: usize,
}

impl EnsembleRun {
    pub fn samples(&self) -> usize {
        self.trajectories.len()
    }
}

/// Sample on `leaf(s0)` and integrate every trajectory to `leaf(s1)`,
/// recording full world lines.
pub fn run_ensemble(
    wf: &MultiTimeWaveFunction,
    foliation: &Foliation,
    spec: &EnsembleSpec,
) -> Result<EnsembleRun> {
    let start_leaf = foliation.leaf(spec.s0);
    let density = LeafDensity::new(wf, &start_leaf, default_quadrature_points(wf.particle_count()))?;
    let starts = sample_with_density(&density, spec.samples, spec.seed)?;
    let params = spec.params(NODE_GUARD_FACTOR * density.max_density());
    let results: Vec<Result<Trajectory>> = starts
        .par_iter()
        .map(|xs| {
            let initial: Vec<TwoVector> = xs.iter().map(|x| start_leaf.point_at(*x)).collect();
            integrate_hbd(wf, foliation, &initial, &params)
        })
        .collect();
    let mut trajectories = Vec::with_capacity(results.len());
    let mut failures = 0;
    for r in results {
        let t = r?;
        if !t.valid {
            failures += 1;
        }
        trajectories.push(t);
    }
    Ok(EnsembleRun { foliation_label: foliation.label.clone(), spec: *spec, trajectories, failures })
}

/// Event-probability estimate with a Wilson 95% interval. Failed
/// trajectories cannot satisfy the event and stay in the denominator; their
/// count is reported alongside.
#[derive(Clone, Copy, Debug)]
pub struct ProbEstimate {
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    pub successes: usize,
    pub samples: usize,
    pub failures: usize,
}

pub fn estimate_event_prob(event: &EventPredicate, run: &EnsembleRun) -> Result<ProbEstimate> {
    let samples = run.samples();
    if samples == 0 || run.failures == samples {
        return Err(SimError::FailureBudget { failed: run.failures, total: samples });
    }
    let successes = run
        .trajectories
        .iter()
        .filter(|t| t.valid && event.evaluate(t))
        .count();
    let (lower, upper) = wilson_interval(successes, samples);
    Ok(ProbEstimate {
        p: successes as f64 / samples as f64,
        lower,
        upper,
        successes,
        samples,
        failures: run.failures,
    })
}

/// Histogram window of an axis: exact marginal mean +- 6 spreads, capped to
/// the leaf's spatial extent (beyond it the parametric shapes are clamped
/// and mode-grid states are not meaningful anyway).
fn axis_window(target: &LeafDensity, axis: usize) -> (f64, f64) {
    let (mean, sd) = target.marginal_moments(axis);
    let domain = target.leaf.domain;
    let pad = 0.02 * domain.length();
    (
        (mean - WINDOW_SIGMAS * sd).max(domain.lo + pad),
        (mean + WINDOW_SIGMAS * sd).min(domain.hi - pad),
    )
}

fn exact_bin_masses(target: &LeafDensity, axis: usize, hist: &Histogram) -> Vec<f64> {
    (0..hist.counts.len())
        .map(|b| {
            let (lo, hi) = hist.bin_edges(b);
            simpson(lo, hi, 16, |x| target.marginal_at(axis, x).unwrap_or(0.0))
        })
        .collect()
}


/// Joint two-particle L1 distance between empirical samples and the exact
/// leaf density over a `bins x bins` cell grid. `None` entries are samples
/// known to lie outside the window rectangle.
fn joint_distance(
    target: &LeafDensity,
    pairs: &[Option<(Option<f64>, Option<f64>)>],
    bins: usize,
) -> Result<f64> {
    let w1 = axis_window(target, 0);
    let w2 = axis_window(target, 1);
    let mut counts = vec![0u64; bins * bins];
    let mut outside = 0u64;
    let mut total = 0u64;
    for entry in pairs.iter().flatten() {
        total += 1;
        match entry {
            (Some(x1), Some(x2)) => {
                let u1 = (x1 - w1.0) / (w1.1 - w1.0) * bins as f64;
                let u2 = (x2 - w2.0) / (w2.1 - w2.0) * bins as f64;
                if u1 >= 0.0 && u1 < bins as f64 && u2 >= 0.0 && u2 < bins as f64 {
                    counts[u1 as usize * bins + u2 as usize] += 1;
                } else {
                    outside += 1;
                }
            }
            _ => outside += 1,
        }
    }
    if total == 0 {
        return Err(SimError::Numerical("no samples reached the joint comparison".into()));
    }
    let n = total as f64;
    let dx1 = (w1.1 - w1.0) / bins as f64;
    let dx2 = (w2.1 - w2.0) / bins as f64;
    let mut l1 = 0.0;
    let mut exact_total = 0.0;
    for i in 0..bins {
        let lo1 = w1.0 + i as f64 * dx1;
        for j in 0..bins {
            let lo2 = w2.0 + j as f64 * dx2;
            let q = simpson(lo1, lo1 + dx1, 4, |x1| {
                simpson(lo2, lo2 + dx2, 4, |x2| {
                    target.weighted_at(&[x1, x2]).unwrap_or(0.0)
                })
            });
            exact_total += q;
            l1 += (counts[i * bins + j] as f64 / n - q).abs();
        }
    }
    let q_outside = (target.total() - exact_total).max(0.0);
    Ok(l1 + (outside as f64 / n - q_outside).abs())
}

/// Compare empirical per-particle marginals of sampled crossing coordinates
/// against the exact marginals of a leaf density.
fn distance_report(
    target: &LeafDensity,
    samples: &[Option<Vec<f64>>],
    bins: usize,
    total: usize,
    failures: usize,
) -> Result<DistanceReport> {
    let n = target.particle_count();
    let mut distances = Vec::with_capacity(n);
    let mut details = Vec::with_capacity(n);
    for axis in 0..n {
        let (lo, hi) = axis_window(target, axis);
        let mut hist = Histogram::new(lo, hi, bins);
        for s in samples.iter().flatten() {
            hist.add(s[axis]);
        }
        let exact = exact_bin_masses(target, axis, &hist);
        distances.push(hist.l1_distance(&exact));
        details.push(crate::stats::AxisHistogram::from_parts(axis, &hist, exact));
    }
    Ok(DistanceReport::from_distances(distances, bins, total, failures).with_details(details))
}

/// Relativistic equivariance experiment: equilibrium on `leaf(s0)`,
/// transported along the foliation, compared against the exact density on
/// `leaf(s1)`.
pub fn equivariance_rel(
    wf: &MultiTimeWaveFunction,
    foliation: &Foliation,
    spec: &EnsembleSpec,
) -> Result<DistanceReport> {
    if spec.samples < 100 {
        return Err(SimError::Validation("equivariance needs at least 100 samples".into()));
    }
    let start_leaf = foliation.leaf(spec.s0);
    let density0 =
        LeafDensity::new(wf, &start_leaf, default_quadrature_points(wf.particle_count()))?;
    let starts = sample_with_density(&density0, spec.samples, spec.seed)?;
    let finals: Vec<Result<Option<Vec<f64>>>> = if spec.s1 == spec.s0 {
        starts.iter().map(|s| Ok(Some(s.clone()))).collect()
    } else {
        let params = spec.params(NODE_GUARD_FACTOR * density0.max_density());
        starts
            .par_iter()
            .map(|xs| {
                let initial: Vec<TwoVector> = xs.iter().map(|x| start_leaf.point_at(*x)).collect();
                let mut last: Vec<f64> = Vec::new();
                let ok = integrate_hbd_stream(wf, foliation, &initial, &params, |_, _, cfg| {
                    last = cfg.iter().map(|p| p.x).collect();
                })?;
                Ok(if ok { Some(last) } else { None })
            })
            .collect()
    };
    let finals: Vec<Option<Vec<f64>>> = finals.into_iter().collect::<Result<_>>()?;
    let failures = finals.iter().filter(|f| f.is_none()).count();
    if failures as f64 > FAILURE_BUDGET * spec.samples as f64 {
        return Err(SimError::FailureBudget { failed: failures, total: spec.samples });
    }
    let target = if spec.s1 == spec.s0 {
        density0
    } else {
        LeafDensity::new(wf, &foliation.leaf(spec.s1), default_quadrature_points(wf.particle_count()))?
    };
    distance_report(&target, &finals, spec.bins, spec.samples, failures)
}

/// Outcome of a cross-foliation experiment.
///
/// Per-particle marginal distances are reported, but particle-wise current
/// conservation makes the marginal crossing distribution agree with the
/// exact marginal for every state, entangled or not (the same divergence
/// identity that makes the normalization leaf-independent). The
/// frame-dependence of quantum equilibrium therefore shows up only in the
/// joint distribution, which is what `cross_joint` measures.
#[derive(Clone, Debug)]
pub struct CrossFoliationReport {
    /// per-particle crossing marginals on the probe leaf vs. exact marginals
    pub cross: DistanceReport,
    /// final-leaf marginals vs. exact marginals (same run)
    pub baseline: DistanceReport,
    /// max marginal cross distance over max marginal baseline distance
    pub ratio: f64,
    /// joint (two-particle) L1 distance on the probe leaf
    pub cross_joint: f64,
    /// joint L1 distance on the run's final leaf
    pub baseline_joint: f64,
    pub joint_bins: usize,
    pub joint_noise_floor: f64,
    /// cross_joint / baseline_joint
    pub joint_ratio: f64,
    /// trajectories born above the probe leaf (they can never cross it);
    /// kept out of the crossing histograms and reported here
    pub missed: usize,
    pub final_parameter: f64,
}

/// Propagate an equilibrium ensemble along `foliation` and measure the
/// empirical distribution of its crossings with `probe` (a leaf of another
/// foliation) against the exact density on `probe`. The baseline distance on
/// the run's own final leaf calibrates the Monte Carlo noise.
///
/// The probe must lie in the future of the start leaf wherever the sampled
/// density has support; a causal world line born below a spacelike leaf
/// crosses it exactly once, so trajectories that have not crossed by the end
/// of the run are counted as crossings outside the histogram window (the
/// final leaf is chosen to clear the probe over the window, which makes that
/// bookkeeping exact).
pub fn cross_foliation_test(
    wf: &MultiTimeWaveFunction,
    foliation: &Foliation,
    probe: &Leaf,
    spec: &EnsembleSpec,
) -> Result<CrossFoliationReport> {
    if spec.samples < 100 {
        return Err(SimError::Validation("cross-foliation test needs at least 100 samples".into()));
    }
    let n = wf.particle_count();
    let start_leaf = foliation.leaf(spec.s0);
    let density0 = LeafDensity::new(wf, &start_leaf, default_quadrature_points(n))?;
    let probe_density = LeafDensity::new(wf, probe, default_quadrature_points(n))?;
    // sanity anchor: the probe must at least clear the start leaf where the
    // marginals are centered; rare far-tail samples born above the probe are
    // counted and excluded instead
    for axis in 0..n {
        let (mean, _) = density0.marginal_moments(axis);
        if probe.time_at(mean) <= start_leaf.time_at(mean) {
            return Err(SimError::Validation(format!(
                "probe leaf is not in the future of the start leaf at x = {mean}"
            )));
        }
    }
    // the final leaf must clear the probe over every histogram window
    let mut s1 = spec.s0;
    for axis in 0..n {
        let (lo, hi) = axis_window(&probe_density, axis);
        let pad = 0.1 * (hi - lo);
        for k in 0..=32 {
            let x = lo - pad + (hi - lo + 2.0 * pad) * k as f64 / 32.0;
            s1 = s1.max(parameter_reaching(foliation, x, probe.time_at(x), spec.s0));
        }
    }
    s1 += 2.0 * spec.ds;
    let run_spec = EnsembleSpec { s1, ..*spec };
    let starts = sample_with_density(&density0, spec.samples, spec.seed)?;
    let params = run_spec.params(NODE_GUARD_FACTOR * density0.max_density());

    #[derive(Clone, Copy)]
    enum Crossing {
        /// still below the probe when the run ended: the eventual crossing
        /// lies outside the histogram window
        Pending,
        Found(f64),
        /// started above the probe: the world line never crosses it
        BornAbove,
    }
    struct Outcome {
        final_x: Option<Vec<f64>>,
        crossings: Vec<Crossing>,
    }
    let results: Vec<Result<Outcome>> = starts
        .par_iter()
        .map(|xs| {
            let initial: Vec<TwoVector> = xs.iter().map(|x| start_leaf.point_at(*x)).collect();
            let mut prev: Vec<Option<(TwoVector, f64)>> = vec![None; n];
            let mut crossings: Vec<Crossing> = vec![Crossing::Pending; n];
            let mut last: Vec<f64> = Vec::new();
            let ok = integrate_hbd_stream(wf, foliation, &initial, &params, |_, _, cfg| {
                for (i, p) in cfg.iter().enumerate() {
                    let h = p.t - probe.time_at(p.x);
                    match (prev[i], crossings[i]) {
                        (None, _) if h > 0.0 => crossings[i] = Crossing::BornAbove,
                        (Some((q, hq)), Crossing::Pending) if hq <= 0.0 && h >= 0.0 => {
                            let alpha = if h > hq { -hq / (h - hq) } else { 0.0 };
                            crossings[i] = Crossing::Found(q.x + alpha * (p.x - q.x));
                        }
                        _ => {}
                    }
                    prev[i] = Some((*p, h));
                }
                last = cfg.iter().map(|p| p.x).collect();
            })?;
            Ok(Outcome { final_x: if ok { Some(last) } else { None }, crossings })
        })
        .collect();
    let outcomes: Vec<Outcome> = results.into_iter().collect::<Result<_>>()?;
    let failures = outcomes.iter().filter(|o| o.final_x.is_none()).count();
    let born_above = outcomes
        .iter()
        .filter(|o| {
            o.final_x.is_some() && o.crossings.iter().any(|c| matches!(c, Crossing::BornAbove))
        })
        .count();
    if (failures + born_above) as f64 > FAILURE_BUDGET * spec.samples as f64 {
        return Err(SimError::FailureBudget { failed: failures + born_above, total: spec.samples });
    }

    let mut distances = Vec::with_capacity(n);
    let mut details = Vec::with_capacity(n);
    for axis in 0..n {
        let (lo, hi) = axis_window(&probe_density, axis);
        let mut hist = Histogram::new(lo, hi, spec.bins);
        for o in &outcomes {
            if o.final_x.is_none() || o.crossings.iter().any(|c| matches!(c, Crossing::BornAbove)) {
                continue;
            }
            match o.crossings[axis] {
                Crossing::Found(x) => hist.add(x),
                Crossing::Pending => hist.add_outside(),
                Crossing::BornAbove => unreachable!(),
            }
        }
        let exact = exact_bin_masses(&probe_density, axis, &hist);
        distances.push(hist.l1_distance(&exact));
        details.push(crate::stats::AxisHistogram::from_parts(axis, &hist, exact));
    }
    let cross = DistanceReport::from_distances(distances, spec.bins, spec.samples, failures)
        .with_details(details);
    let final_samples: Vec<Option<Vec<f64>>> =
        outcomes.iter().map(|o| o.final_x.clone()).collect();
    let final_density = LeafDensity::new(wf, &foliation.leaf(s1), default_quadrature_points(n))?;
    let baseline =
        distance_report(&final_density, &final_samples, spec.bins, spec.samples, failures)?;
    let ratio = cross.max_distance() / baseline.max_distance().max(1e-12);

    // joint comparison (two particles)
    let (cross_joint, baseline_joint) = if n == 2 {
        let cross_pairs: Vec<Option<(Option<f64>, Option<f64>)>> = outcomes
            .iter()
            .map(|o| {
                if o.final_x.is_none()
                    || o.crossings.iter().any(|c| matches!(c, Crossing::BornAbove))
                {
                    return None;
                }
                let get = |c: Crossing| match c {
                    Crossing::Found(x) => Some(x),
                    _ => None,
                };
                Some((get(o.crossings[0]), get(o.crossings[1])))
            })
            .collect();
        let final_pairs: Vec<Option<(Option<f64>, Option<f64>)>> = outcomes
            .iter()
            .map(|o| o.final_x.as_ref().map(|xs| (Some(xs[0]), Some(xs[1]))))
            .collect();
        (
            joint_distance(&probe_density, &cross_pairs, spec.joint_bins)?,
            joint_distance(&final_density, &final_pairs, spec.joint_bins)?,
        )
    } else {
        (cross.max_distance(), baseline.max_distance())
    };
    let joint_noise_floor =
        2.0 * ((spec.joint_bins * spec.joint_bins) as f64 / spec.samples as f64).sqrt();
    Ok(CrossFoliationReport {
        cross,
        baseline,
        ratio,
        cross_joint,
        baseline_joint,
        joint_bins: spec.joint_bins,
        joint_noise_floor,
        joint_ratio: cross_joint / baseline_joint.max(1e-12),
        missed: born_above,
        final_parameter: s1,
    })
}

/// Smallest parameter whose leaf passes through `(t_target, x)`;
/// leaf families are strictly increasing in their parameter.
fn parameter_reaching(foliation: &Foliation, x: f64, t_target: f64, s_start: f64) -> f64 {
    let time = |s: f64| foliation.leaf(s).time_at(x);
    let mut lo = s_start;
    let mut hi = s_start + 1.0;
    let mut guard = 0;
    while time(hi) < t_target {
        let w = hi - lo;
        lo = hi;
        hi += 2.0 * w;
        guard += 1;
        assert!(guard < 100, "foliation never reaches the probe leaf");
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if time(mid) < t_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests;
