//! Typicality without a preferred foliation.
//!
//! Over a finite family of foliations, the lower probability of a
//! foliation-independent trajectory event is the infimum of the
//! per-foliation probabilities. No measure is ever placed on the family;
//! reports always name the arg-min foliation, and growing the family can
//! only lower the estimate (the finite-family value upper-bounds the
//! infimum over all foliations).
//!
//! Estimates for different events evaluated on a shared per-foliation
//! ensemble make the capacity properties (monotonicity, superadditivity,
//! boundary values, domination by every mixture) exact at the estimate
//! level rather than only statistical.

use crate::dirac::MultiTimeWaveFunction;
use crate::ensemble::{run_ensemble, EnsembleRun, EnsembleSpec, ProbEstimate};
use crate::error::{Result, SimError};
pub use crate::event::{EventPredicate, Region};
use crate::foliation::Foliation;
use crate::hbd::Trajectory;
use crate::rng::label_seed;
use crate::spacetime::PoincareTransform;

/// A finite, labelled stand-in for "all foliations", with the shared leaf
/// parameter range its ensembles run over.
#[derive(Clone, Debug)]
pub struct FoliationFamily {
    pub foliations: Vec<Foliation>,
    pub s0: f64,
    pub s1: f64,
}

impl FoliationFamily {
    pub fn new(foliations: Vec<Foliation>, s0: f64, s1: f64) -> Result<Self> {
        if foliations.is_empty() {
            return Err(SimError::Validation("foliation family must be nonempty".into()));
        }
        if !(s1 > s0) {
            return Err(SimError::Validation("family needs s1 > s0".into()));
        }
        for (i, f) in foliations.iter().enumerate() {
            for g in &foliations[..i] {
                if f.label == g.label {
                    return Err(SimError::Validation(format!("duplicate foliation label {}", f.label)));
                }
            }
            f.validate(s0, s1)?;
        }
        Ok(FoliationFamily { foliations, s0, s1 })
    }

    pub fn labels(&self) -> Vec<&str> {
        self.foliations.iter().map(|f| f.label.as_str()).collect()
    }

    /// Image under a Poincaré transformation; labels (and with them the
    /// derived seed streams) are preserved, and so is the parameter range
    /// because `transform(g).leaf(s) = g(leaf(s))`.
    pub fn transform(&self, g: &PoincareTransform) -> FoliationFamily {
        FoliationFamily {
            foliations: self.foliations.iter().map(|f| f.transform(g)).collect(),
            s0: self.s0,
            s1: self.s1,
        }
    }
}

/// One foliation's contribution to a lower-probability estimate.
#[derive(Clone, Debug)]
pub struct FoliationEstimate {
    pub label: String,
    pub estimate: ProbEstimate,
}

/// Monte Carlo estimate of the lower probability: the minimum over the
/// family of per-foliation event probabilities.
#[derive(Clone, Debug)]
pub struct LowerProbEstimate {
    pub per_foliation: Vec<FoliationEstimate>,
    /// minimum point estimate
    pub value: f64,
    pub argmin: String,
    /// minimum of the per-foliation Wilson lower bounds (conservative)
    pub lower_bound: f64,
}

impl LowerProbEstimate {
    fn from_parts(per_foliation: Vec<FoliationEstimate>) -> Result<Self> {
        let min = per_foliation
            .iter()
            .min_by(|a, b| a.estimate.p.total_cmp(&b.estimate.p))
            .ok_or_else(|| SimError::Validation("empty estimate list".into()))?;
        let value = min.estimate.p;
        let argmin = min.label.clone();
        let lower_bound = per_foliation
            .iter()
            .map(|f| f.estimate.lower)
            .fold(f64::INFINITY, f64::min);
        Ok(LowerProbEstimate { per_foliation, value, argmin, lower_bound })
    }
}

/// Per-foliation equilibrium ensembles with seed streams derived from the
/// foliation labels, so retained foliations keep their ensembles when the
/// family grows.
pub fn family_runs(
    family: &FoliationFamily,
    wf: &MultiTimeWaveFunction,
    spec: &EnsembleSpec,
) -> Result<Vec<EnsembleRun>> {
    family
        .foliations
        .iter()
        .map(|f| {
            let run_spec = EnsembleSpec {
                s0: family.s0,
                s1: family.s1,
                seed: label_seed(spec.seed, &f.label),
                ..*spec
            };
            run_ensemble(wf, f, &run_spec)
        })
        .collect()
}

fn lower_prob_over_runs<P>(runs: &[EnsembleRun], satisfied: P) -> Result<LowerProbEstimate>
where
    P: Fn(&str, &Trajectory) -> bool,
{
    let per: Vec<FoliationEstimate> = runs
        .iter()
        .map(|run| {
            let samples = run.samples();
            if samples == 0 || run.failures == samples {
                return Err(SimError::FailureBudget { failed: run.failures, total: samples });
            }
            let successes = run
                .trajectories
                .iter()
                .filter(|t| t.valid && satisfied(&run.foliation_label, t))
                .count();
            let (lower, upper) = crate::stats::wilson_interval(successes, samples);
            Ok(FoliationEstimate {
                label: run.foliation_label.clone(),
                estimate: ProbEstimate {
                    p: successes as f64 / samples as f64,
                    lower,
                    upper,
                    successes,
                    samples,
                    failures: run.failures,
                },
            })
        })
        .collect::<Result<_>>()?;
    LowerProbEstimate::from_parts(per)
}

/// Lower probability of a foliation-independent event over existing runs
/// (shared-sample evaluation).
pub fn p_star_with_runs(event: &EventPredicate, runs: &[EnsembleRun]) -> Result<LowerProbEstimate> {
    lower_prob_over_runs(runs, |_, t| event.evaluate(t))
}

/// `inf_F P_F(B)` over the family, from fresh per-foliation ensembles.
pub fn p_star(
    event: &EventPredicate,
    family: &FoliationFamily,
    wf: &MultiTimeWaveFunction,
    spec: &EnsembleSpec,
) -> Result<LowerProbEstimate> {
    let runs = family_runs(family, wf, spec)?;
    p_star_with_runs(event, &runs)
}

/// Predicate over (foliation label, trajectory) pairs: the
/// primitive-ontology variant where the foliation is part of the sample.
#[derive(Clone, Debug)]
pub enum PairPredicate {
    LabelIs(String),
    Event(EventPredicate),
    And(Vec<PairPredicate>),
    Or(Vec<PairPredicate>),
    Not(Box<PairPredicate>),
}

impl PairPredicate {
    pub fn evaluate(&self, label: &str, traj: &Trajectory) -> bool {
        match self {
            PairPredicate::LabelIs(l) => l == label,
            PairPredicate::Event(e) => e.evaluate(traj),
            PairPredicate::And(cs) => cs.iter().all(|c| c.evaluate(label, traj)),
            PairPredicate::Or(cs) => cs.iter().any(|c| c.evaluate(label, traj)),
            PairPredicate::Not(inner) => !inner.evaluate(label, traj),
        }
    }
}

/// Lower probability for the primitive-ontology sample space: the predicate
/// may read the foliation label.
pub fn p_star_prime(
    predicate: &PairPredicate,
    family: &FoliationFamily,
    wf: &MultiTimeWaveFunction,
    spec: &EnsembleSpec,
) -> Result<LowerProbEstimate> {
    let runs = family_runs(family, wf, spec)?;
    p_star_prime_with_runs(predicate, &runs)
}

pub fn p_star_prime_with_runs(
    predicate: &PairPredicate,
    runs: &[EnsembleRun],
) -> Result<LowerProbEstimate> {
    lower_prob_over_runs(runs, |label, t| predicate.evaluate(label, t))
}

/// Typicality verdict at threshold `epsilon`.
#[derive(Clone, Debug)]
pub struct TypicalityVerdict {
    pub typical: bool,
    pub epsilon: f64,
    pub lower_bound: f64,
    pub text: String,
}

/// A set is typical when its lower probability is (conservatively) at least
/// `1 - epsilon`.
pub fn is_typical(estimate: &LowerProbEstimate, epsilon: f64) -> Result<TypicalityVerdict> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SimError::Validation("epsilon must lie in (0, 1)".into()));
    }
    let typical = estimate.lower_bound >= 1.0 - epsilon;
    let text = if typical {
        format!(
            "typical: lower probability bound {:.4} >= 1 - epsilon = {:.4} (arg-min foliation {}); \
             according to Cournot's principle the realized trajectory can be expected to lie in \
             this set",
            estimate.lower_bound,
            1.0 - epsilon,
            estimate.argmin
        )
    } else {
        format!(
            "not typical: lower probability bound {:.4} < 1 - epsilon = {:.4} (arg-min foliation {})",
            estimate.lower_bound,
            1.0 - epsilon,
            estimate.argmin
        )
    };
    Ok(TypicalityVerdict { typical, epsilon, lower_bound: estimate.lower_bound, text })
}

/// `P_mu(B) = Σ_F mu(F) P_F(B)` for weights on the finite family; always
/// dominates the lower probability on shared samples.
pub fn p_mu_with_runs(
    event: &EventPredicate,
    runs: &[EnsembleRun],
    weights: &[f64],
) -> Result<f64> {
    if weights.len() != runs.len() {
        return Err(SimError::Validation(format!(
            "{} weights for {} foliations",
            weights.len(),
            runs.len()
        )));
    }
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(SimError::Validation("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(SimError::Validation(format!("weights sum to {total}, expected 1")));
    }
    let est = p_star_with_runs(event, runs)?;
    Ok(est
        .per_foliation
        .iter()
        .zip(weights)
        .map(|(f, w)| w * f.estimate.p)
        .sum())
}

pub fn p_mu(
    event: &EventPredicate,
    family: &FoliationFamily,
    weights: &[f64],
    wf: &MultiTimeWaveFunction,
    spec: &EnsembleSpec,
) -> Result<f64> {
    let runs = family_runs(family, wf, spec)?;
    p_mu_with_runs(event, &runs, weights)
}

/// Events used by the capacity-property check: a structurally disjoint pair
/// and a structurally nested pair.
#[derive(Clone, Debug)]
pub struct CapacityEvents {
    pub disjoint_a: EventPredicate,
    pub disjoint_b: EventPredicate,
    pub nested_inner: EventPredicate,
    pub nested_outer: EventPredicate,
}

#[derive(Clone, Debug)]
pub struct CapacityReport {
    pub empty: LowerProbEstimate,
    pub full: LowerProbEstimate,
    pub a: LowerProbEstimate,
    pub b: LowerProbEstimate,
    pub a_or_b: LowerProbEstimate,
    pub inner: LowerProbEstimate,
    pub outer: LowerProbEstimate,
    /// `P*(A ∪ B) >= P*(A) + P*(B)` on the shared samples
    pub superadditive_ok: bool,
    /// `P*(inner) <= P*(outer)` on the shared samples
    pub monotone_ok: bool,
    /// `P*(∅) = 0` and `P*(everything) = 1` exactly
    pub boundary_ok: bool,
}

/// Check the capacity properties of the lower probability on one shared
/// ensemble per foliation, which makes every inequality exact.
pub fn check_capacity_properties(
    family: &FoliationFamily,
    wf: &MultiTimeWaveFunction,
    spec: &EnsembleSpec,
    events: &CapacityEvents,
) -> Result<CapacityReport> {
    let runs = family_runs(family, wf, spec)?;
    let empty = p_star_with_runs(&EventPredicate::never(), &runs)?;
    let full = p_star_with_runs(&EventPredicate::always(), &runs)?;
    let a = p_star_with_runs(&events.disjoint_a, &runs)?;
    let b = p_star_with_runs(&events.disjoint_b, &runs)?;
    let union = EventPredicate::Or(vec![events.disjoint_a.clone(), events.disjoint_b.clone()]);
    let a_or_b = p_star_with_runs(&union, &runs)?;
    let inner = p_star_with_runs(&events.nested_inner, &runs)?;
    let outer = p_star_with_runs(&events.nested_outer, &runs)?;
    let superadditive_ok = a_or_b.value >= a.value + b.value - 1e-12;
    let monotone_ok = inner.value <= outer.value + 1e-12;
    let boundary_ok = empty.value == 0.0 && full.value == 1.0;
    Ok(CapacityReport {
        empty,
        full,
        a,
        b,
        a_or_b,
        inner,
        outer,
        superadditive_ok,
        monotone_ok,
        boundary_ok,
    })
}

/// Covariance of the lower probability: `P*(B)` for `(ψ, family)` against
/// `P*(gB)` for `(U_g ψ, g·family)` with label-paired seed streams.
#[derive(Clone, Debug)]
pub struct PStarCovariance {
    pub base: LowerProbEstimate,
    pub transformed: LowerProbEstimate,
    /// per-foliation Wilson intervals overlap
    pub per_foliation_overlap: Vec<bool>,
    pub all_overlap: bool,
}

pub fn covariance_p_star(
    event: &EventPredicate,
    family: &FoliationFamily,
    wf: &MultiTimeWaveFunction,
    g: &PoincareTransform,
    spec: &EnsembleSpec,
) -> Result<PStarCovariance> {
    let base = p_star(event, family, wf, spec)?;
    let moved_event = event.transform(g)?;
    let moved_family = family.transform(g);
    let moved_wf = wf.apply_poincare(g);
    let transformed = p_star(&moved_event, &moved_family, &moved_wf, spec)?;
    let per_foliation_overlap: Vec<bool> = base
        .per_foliation
        .iter()
        .zip(&transformed.per_foliation)
        .map(|(x, y)| x.estimate.lower <= y.estimate.upper && y.estimate.lower <= x.estimate.upper)
        .collect();
    let all_overlap = per_foliation_overlap.iter().all(|b| *b);
    Ok(PStarCovariance { base, transformed, per_foliation_overlap, all_overlap })
}

#[cfg(test)]
mod tests;
