//! Non-relativistic N-particle pilot-wave dynamics in one spatial dimension
//! per particle (configuration space `R^N`, natural units `hbar = 1`).
//!
//! Two wave-function backends share one interface: exact analytic Gaussian
//! superpositions for `V = 0`, which double as the oracle, and a periodic
//! grid evolved by split-step Fourier for sampled potentials.

pub mod gaussian;
pub mod grid;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SimError};
use crate::rng::stream_rng;
use crate::stats::{simpson, DistanceReport, Histogram};
use gaussian::GaussianFactor;
use grid::{GridBackend, GridSpec, GridState, Potential};
use rand::Rng;

/// Density threshold is `NODE_GUARD_FACTOR * (peak density at t0)`; below it
/// a trajectory is aborted instead of dividing by a near-zero density.
pub const NODE_GUARD_FACTOR: f64 = 1e-12;
/// Rejection-sampling envelope: `1.1 * (scanned max density)`.
const ENVELOPE_MARGIN: f64 = 1.1;
/// Sampling box half-width in units of the per-axis spread.
const BOX_SIGMAS: f64 = 8.0;

/// One Gaussian packet of one particle: center, momentum, position spread.
#[derive(Clone, Copy, Debug)]
pub struct PacketSpec {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
}

/// One product term of a superposition: a coefficient and one packet per
/// particle.
#[derive(Clone, Debug)]
pub struct NrTerm {
    pub coefficient: Complex64,
    pub packets: Vec<PacketSpec>,
}

#[derive(Clone)]
struct TermFactors {
    coeff: Complex64,
    factors: Vec<GaussianFactor>,
}

enum Backend {
    Analytic,
    Grid(GridBackend),
}

/// Immutable N-particle wave function. Safe to share across threads; all
/// queries are pure.
pub struct NrWaveFunction {
    masses: Vec<f64>,
    terms: Vec<TermFactors>,
    backend: Backend,
}

impl NrWaveFunction {
    /// Exact analytic backend (free evolution only).
    pub fn analytic(masses: Vec<f64>, terms: Vec<NrTerm>) -> Result<Self> {
        let terms = build_terms(&masses, terms)?;
        let mut wf = NrWaveFunction { masses, terms, backend: Backend::Analytic };
        let norm = wf.norm(0.0);
        if !(norm > 0.0) {
            return Err(SimError::Validation("state has zero norm".into()));
        }
        for t in wf.terms.iter_mut() {
            t.coeff /= norm;
        }
        Ok(wf)
    }

    /// Periodic-grid backend; the initial state is the same packet
    /// superposition sampled on the grid at `t = 0`.
    pub fn grid(
        masses: Vec<f64>,
        terms: Vec<NrTerm>,
        spec: GridSpec,
        potential: Potential,
    ) -> Result<Self> {
        let built = build_terms(&masses, terms)?;
        let backend = GridBackend::new(masses.clone(), spec, potential, |x| {
            let mut v = Complex64::default();
            for term in &built {
                let mut p = term.coeff;
                for (f, xi) in term.factors.iter().zip(x) {
                    p *= f.value(*xi);
                }
                v += p;
            }
            v
        })?;
        Ok(NrWaveFunction { masses, terms: built, backend: Backend::Grid(backend) })
    }

    pub fn particle_count(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.backend, Backend::Grid(_))
    }

    /// Frozen-time view of the state.
    pub fn snapshot(&self, t: f64) -> NrSnapshot<'_> {
        match &self.backend {
            Backend::Analytic => NrSnapshot(Inner::Analytic {
                masses: &self.masses,
                terms: evolve_terms(&self.terms, &self.masses, t),
            }),
            Backend::Grid(g) => {
                let mut state = g.state_at(t);
                state.prepare();
                NrSnapshot(Inner::Grid { masses: &self.masses, state })
            }
        }
    }

    /// `∫ |psi_t|^2 d^N x`, which the dynamics must conserve.
    pub fn norm(&self, t: f64) -> f64 {
        match &self.backend {
            Backend::Analytic => {
                let terms = evolve_terms(&self.terms, &self.masses, t);
                analytic_norm2(&terms).sqrt()
            }
            Backend::Grid(g) => g.state_at(t).norm(),
        }
    }

    pub fn density(&self, t: f64, x: &[f64]) -> Result<f64> {
        let snap = self.snapshot(t);
        snap.check_domain(x)?;
        Ok(snap.density(x))
    }

    pub fn current(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let snap = self.snapshot(t);
        snap.check_domain(x)?;
        Ok(snap.current(x))
    }

    /// Guiding velocity `j/rho`. Errors out near nodes, where the velocity
    /// is unbounded; the node guard is relative to the peak density at `t`.
    pub fn velocity(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let snap = self.snapshot(t);
        snap.check_domain(x)?;
        let eps = NODE_GUARD_FACTOR * snap.peak_density();
        snap.velocity(x, eps)
    }

    /// `|d rho/dt + div j|` with a central difference in `t` and analytic or
    /// spectral spatial derivatives. Points with negligible density return 0.
    pub fn continuity_residual(&self, t: f64, x: &[f64], h_t: f64) -> Result<f64> {
        let snap = self.snapshot(t);
        snap.check_domain(x)?;
        if snap.density(x) < 1e-300 {
            return Ok(0.0);
        }
        let rho_plus = self.snapshot(t + h_t).density(x);
        let rho_minus = self.snapshot(t - h_t).density(x);
        let drho_dt = (rho_plus - rho_minus) / (2.0 * h_t);
        Ok((drho_dt + snap.divergence_of_current(x)).abs())
    }
}

fn build_terms(masses: &[f64], terms: Vec<NrTerm>) -> Result<Vec<TermFactors>> {
    if masses.is_empty() {
        return Err(SimError::Validation("at least one particle required".into()));
    }
    if masses.iter().any(|m| !(*m > 0.0)) {
        return Err(SimError::Validation("masses must be positive".into()));
    }
    if terms.is_empty() {
        return Err(SimError::Validation("at least one term required".into()));
    }
    let mut out = Vec::with_capacity(terms.len());
    for term in terms {
        if term.packets.len() != masses.len() {
            return Err(SimError::Validation(format!(
                "term has {} packets but there are {} particles",
                term.packets.len(),
                masses.len()
            )));
        }
        if term.packets.iter().any(|p| !(p.width > 0.0)) {
            return Err(SimError::Validation("packet widths must be positive".into()));
        }
        let factors = term
            .packets
            .iter()
            .map(|p| GaussianFactor::packet(p.center, p.momentum, p.width))
            .collect();
        out.push(TermFactors { coeff: term.coefficient, factors });
    }
    Ok(out)
}

fn evolve_terms(terms: &[TermFactors], masses: &[f64], t: f64) -> Vec<TermFactors> {
    terms
        .iter()
        .map(|term| TermFactors {
            coeff: term.coeff,
            factors: term
                .factors
                .iter()
                .zip(masses)
                .map(|(f, m)| f.evolved(t, *m))
                .collect(),
        })
        .collect()
}

fn analytic_norm2(terms: &[TermFactors]) -> f64 {
    let mut acc = Complex64::default();
    for a in terms {
        for b in terms {
            let mut prod = a.coeff * b.coeff.conj();
            for (fa, fb) in a.factors.iter().zip(&b.factors) {
                prod *= fa.overlap(fb);
            }
            acc += prod;
        }
    }
    acc.re
}

/// The state at one instant. Density, current and velocity queries run
/// against this view without re-evolving anything.
pub struct NrSnapshot<'a>(Inner<'a>);

enum Inner<'a> {
    Analytic { masses: &'a [f64], terms: Vec<TermFactors> },
    Grid { masses: &'a [f64], state: GridState<'a> },
}

impl<'a> NrSnapshot<'a> {
    pub fn masses(&self) -> &[f64] {
        match &self.0 {
            Inner::Analytic { masses, .. } | Inner::Grid { masses, .. } => masses,
        }
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.masses().len() {
            return Err(SimError::Validation(format!(
                "configuration has {} coordinates for {} particles",
                x.len(),
                self.masses().len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::OutOfDomain("non-finite coordinate".into()));
        }
        if let Inner::Grid { state, .. } = &self.0 {
            if !state_backend(state).contains(x) {
                return Err(SimError::OutOfDomain(format!("{x:?} outside the periodic box")));
            }
        }
        Ok(())
    }

    /// `(psi, d_i psi, d_i^2 psi)` at a configuration.
    fn eval(&self, x: &[f64]) -> (Complex64, Vec<Complex64>, Vec<Complex64>) {
        match &self.0 {
            Inner::Analytic { terms, .. } => {
                let n = x.len();
                let mut value = Complex64::default();
                let mut grad = vec![Complex64::default(); n];
                let mut second = vec![Complex64::default(); n];
                for term in terms {
                    let mut p = term.coeff;
                    for (f, xi) in term.factors.iter().zip(x) {
                        p *= f.value(*xi);
                    }
                    value += p;
                    for i in 0..n {
                        grad[i] += p * term.factors[i].log_derivative(x[i]);
                        second[i] += p * term.factors[i].log_second_derivative(x[i]);
                    }
                }
                (value, grad, second)
            }
            Inner::Grid { state, .. } => state.eval(x),
        }
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        let (v, _, _) = self.eval(x);
        v.norm_sqr()
    }

    /// Probability current `j_i = Im(conj(psi) d_i psi) / m_i`.
    pub fn current(&self, x: &[f64]) -> Vec<f64> {
        let (v, grad, _) = self.eval(x);
        grad.iter()
            .zip(self.masses())
            .map(|(g, m)| (v.conj() * g).im / m)
            .collect()
    }

    pub fn velocity(&self, x: &[f64], eps_rho: f64) -> Result<Vec<f64>> {
        let (v, grad, _) = self.eval(x);
        let rho = v.norm_sqr();
        if rho <= eps_rho {
            return Err(SimError::NodeProximity(format!("rho = {rho:.3e} at {x:?}")));
        }
        Ok(grad
            .iter()
            .zip(self.masses())
            .map(|(g, m)| (v.conj() * g).im / (m * rho))
            .collect())
    }

    /// `div j = sum_i Im(conj(psi) d_i^2 psi) / m_i`.
    pub fn divergence_of_current(&self, x: &[f64]) -> f64 {
        let (v, _, second) = self.eval(x);
        second
            .iter()
            .zip(self.masses())
            .map(|(s, m)| (v.conj() * s).im / m)
            .sum()
    }

    /// Axis-aligned box that contains all but a negligible density tail.
    pub fn support_box(&self) -> Vec<(f64, f64)> {
        match &self.0 {
            Inner::Analytic { terms, .. } => {
                let n = self.masses().len();
                (0..n)
                    .map(|i| {
                        let mut lo = f64::INFINITY;
                        let mut hi = f64::NEG_INFINITY;
                        for term in terms {
                            let f = &term.factors[i];
                            let spread = (-1.0 / (4.0 * f.c.re)).sqrt();
                            let center = -f.b.re / (2.0 * f.c.re);
                            lo = lo.min(center - BOX_SIGMAS * spread);
                            hi = hi.max(center + BOX_SIGMAS * spread);
                        }
                        (lo, hi)
                    })
                    .collect()
            }
            Inner::Grid { state, .. } => {
                let b = state_backend(state);
                vec![(-b.half_length(), b.half_length()); self.masses().len()]
            }
        }
    }

    /// Scanned maximum of the density over the support box.
    pub fn peak_density(&self) -> f64 {
        let boxes = self.support_box();
        let per_axis = scan_points_per_axis(boxes.len());
        let mut max = 0.0f64;
        let mut idx = vec![0usize; boxes.len()];
        let mut x = vec![0.0f64; boxes.len()];
        loop {
            for (a, j) in idx.iter().enumerate() {
                let (lo, hi) = boxes[a];
                x[a] = lo + (hi - lo) * *j as f64 / (per_axis - 1) as f64;
            }
            max = max.max(self.density(&x));
            if !advance_index(&mut idx, per_axis) {
                break;
            }
        }
        max
    }

    /// Marginal density of particle `axis` (exact closed form for the
    /// analytic backend, grid sums otherwise).
    pub fn marginal_density(&self, axis: usize, x: f64) -> f64 {
        match &self.0 {
            Inner::Analytic { terms, .. } => {
                let mut acc = Complex64::default();
                for a in terms {
                    for b in terms {
                        let mut prod = a.coeff * b.coeff.conj();
                        for (i, (fa, fb)) in a.factors.iter().zip(&b.factors).enumerate() {
                            if i == axis {
                                prod *= fa.value(x) * fb.value(x).conj();
                            } else {
                                prod *= fa.overlap(fb);
                            }
                        }
                        acc += prod;
                    }
                }
                acc.re.max(0.0)
            }
            Inner::Grid { state, .. } => state.marginal_density(axis, x),
        }
    }

    /// Mean and spread of the marginal of particle `axis`, via quadrature.
    pub fn marginal_moments(&self, axis: usize) -> (f64, f64) {
        let (lo, hi) = self.support_box()[axis];
        let mass = simpson(lo, hi, 800, |x| self.marginal_density(axis, x));
        let mean = simpson(lo, hi, 800, |x| x * self.marginal_density(axis, x)) / mass;
        let var =
            simpson(lo, hi, 800, |x| (x - mean) * (x - mean) * self.marginal_density(axis, x))
                / mass;
        (mean, var.max(0.0).sqrt())
    }
}

fn state_backend<'b>(state: &'b GridState<'_>) -> &'b GridBackend {
    state.backend()
}

fn scan_points_per_axis(dims: usize) -> usize {
    // keep the total scan budget bounded for higher particle counts
    match dims {
        1 => 1025,
        2 => 257,
        3 => 65,
        _ => 33,
    }
}

fn advance_index(idx: &mut [usize], per_axis: usize) -> bool {
    for j in (0..idx.len()).rev() {
        idx[j] += 1;
        if idx[j] < per_axis {
            return true;
        }
        idx[j] = 0;
    }
    false
}

/// A sampled Bohmian trajectory on a uniform time grid.
#[derive(Clone, Debug)]
pub struct NrTrajectory {
    pub times: Vec<f64>,
    pub configs: Vec<Vec<f64>>,
    /// false when the integration was aborted near a node; the recorded
    /// prefix is still returned.
    pub valid: bool,
}

/// Integrate the guiding equation with classical fixed-step RK4.
pub fn integrate(wf: &NrWaveFunction, x0: &[f64], t0: f64, t1: f64, h: f64) -> Result<NrTrajectory> {
    let mut record: Vec<Vec<Vec<f64>>> = Vec::new();
    let (finals, _failures, mut times) =
        propagate_batch(wf, &[x0.to_vec()], t0, t1, h, 1.0, Some(&mut record))?;
    let mut configs: Vec<Vec<f64>> =
        record.into_iter().map(|mut per_step| per_step.remove(0)).collect();
    // keep only the finite prefix when the run aborted near a node
    if let Some(cut) = configs.iter().position(|c| c.iter().any(|v| !v.is_finite())) {
        configs.truncate(cut);
        times.truncate(cut);
    }
    Ok(NrTrajectory { times, configs, valid: finals[0].is_some() })
}

/// Propagate many trajectories in lock-step; returns the final configuration
/// per trajectory (None when aborted) and the failure count.
pub fn propagate_ensemble(
    wf: &NrWaveFunction,
    starts: &[Vec<f64>],
    t0: f64,
    t1: f64,
    h: f64,
    velocity_scale: f64,
) -> Result<(Vec<Option<Vec<f64>>>, usize)> {
    let (finals, failures, _) = propagate_batch(wf, starts, t0, t1, h, velocity_scale, None)?;
    Ok((finals, failures))
}

fn propagate_batch(
    wf: &NrWaveFunction,
    starts: &[Vec<f64>],
    t0: f64,
    t1: f64,
    h: f64,
    velocity_scale: f64,
    mut record: Option<&mut Vec<Vec<Vec<f64>>>>,
) -> Result<(Vec<Option<Vec<f64>>>, usize, Vec<f64>)> {
    if !(h > 0.0) || !(t1 > t0) {
        return Err(SimError::Validation("need t1 > t0 and h > 0".into()));
    }
    let n = wf.particle_count();
    for s in starts {
        if s.len() != n {
            return Err(SimError::Validation("start configuration has wrong arity".into()));
        }
    }
    let span = t1 - t0;
    let steps = (span / h).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let start_snap = wf.snapshot(t0);
    let eps_rho = NODE_GUARD_FACTOR * start_snap.peak_density();
    for s in starts {
        start_snap.check_domain(s)?;
        if start_snap.density(s) <= eps_rho {
            return Err(SimError::NodeProximity(format!(
                "initial configuration {s:?} is below the node guard"
            )));
        }
    }

    let mut states: Vec<Option<Vec<f64>>> = starts.iter().map(|s| Some(s.clone())).collect();
    let mut times = Vec::with_capacity(steps + 1);
    times.push(t0);
    if let Some(rec) = record.as_deref_mut() {
        rec.push(starts.to_vec());
    }
    let mut k1 = vec![vec![0.0; n]; starts.len()];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();

    let stage = |snap: &NrSnapshot,
                 states: &mut [Option<Vec<f64>>],
                 base_shift: Option<(&[Vec<f64>], f64)>,
                 out: &mut [Vec<f64>]| {
        states
            .par_iter_mut()
            .zip(out.par_iter_mut())
            .enumerate()
            .for_each(|(i, (slot, ki))| {
                let Some(y) = slot.as_ref() else { return };
                let mut point = y.clone();
                if let Some((ks, factor)) = base_shift {
                    for (p, k) in point.iter_mut().zip(&ks[i]) {
                        *p += factor * k;
                    }
                }
                if snap.check_domain(&point).is_err() {
                    *slot = None;
                    return;
                }
                match snap.velocity(&point, eps_rho) {
                    Ok(v) => {
                        for (o, vi) in ki.iter_mut().zip(v) {
                            *o = vi * velocity_scale;
                        }
                    }
                    Err(_) => *slot = None,
                }
            });
    };

    let mut cursor = Cursor::new(wf, t0);
    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        {
            let snap = cursor.snapshot_at(t);
            stage(&snap, &mut states, None, &mut k1);
        }
        {
            let snap = cursor.snapshot_at(t + dt / 2.0);
            let base: Vec<Vec<f64>> = k1.clone();
            stage(&snap, &mut states, Some((&base, dt / 2.0)), &mut k2);
            let base: Vec<Vec<f64>> = k2.clone();
            stage(&snap, &mut states, Some((&base, dt / 2.0)), &mut k3);
        }
        {
            let snap = cursor.snapshot_at(t + dt);
            let base: Vec<Vec<f64>> = k3.clone();
            let mut k4 = vec![vec![0.0; n]; states.len()];
            stage(&snap, &mut states, Some((&base, dt)), &mut k4);
            states
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, slot)| {
                    let Some(y) = slot.as_mut() else { return };
                    for a in 0..n {
                        y[a] += dt / 6.0 * (k1[i][a] + 2.0 * k2[i][a] + 2.0 * k3[i][a] + k4[i][a]);
                    }
                    if y.iter().any(|v| !v.is_finite()) || snap.check_domain(y).is_err() {
                        *slot = None;
                    }
                });
        }
        times.push(t0 + (step + 1) as f64 * dt);
        if let Some(rec) = record.as_deref_mut() {
            rec.push(
                states
                    .iter()
                    .map(|s| s.clone().unwrap_or_else(|| vec![f64::NAN; n]))
                    .collect(),
            );
        }
    }
    let failures = states.iter().filter(|s| s.is_none()).count();
    Ok((states, failures, times))
}

enum Cursor<'w> {
    Analytic(&'w NrWaveFunction),
    Grid(&'w NrWaveFunction, GridState<'w>),
}

impl<'w> Cursor<'w> {
    fn new(wf: &'w NrWaveFunction, t0: f64) -> Self {
        match &wf.backend {
            Backend::Analytic => Cursor::Analytic(wf),
            Backend::Grid(g) => Cursor::Grid(wf, g.state_at(t0)),
        }
    }

    fn snapshot_at(&mut self, t: f64) -> NrSnapshot<'w> {
        match self {
            Cursor::Analytic(wf) => wf.snapshot(t),
            Cursor::Grid(wf, state) => {
                state.evolve_to(t);
                state.prepare();
                NrSnapshot(Inner::Grid { masses: &wf.masses, state: state.clone() })
            }
        }
    }
}

/// Draw `m` i.i.d. configurations from `|psi_t|^2` by rejection sampling.
/// Deterministic for a fixed seed, independent of scheduling.
pub fn sample(wf: &NrWaveFunction, t: f64, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if m == 0 {
        return Err(SimError::Validation("sample count must be >= 1".into()));
    }
    let snap = wf.snapshot(t);
    let boxes = snap.support_box();
    let envelope = ENVELOPE_MARGIN * snap.peak_density();
    if !(envelope > 0.0) || !envelope.is_finite() {
        return Err(SimError::Envelope(format!("peak density scan produced {envelope}")));
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
                if u * envelope <= snap.density(&x) {
                    return Ok(x);
                }
            }
            Err(SimError::Envelope("acceptance rate too low".into()))
        })
        .collect();
    results.into_iter().collect()
}

/// Parameters of an equivariance experiment.
#[derive(Clone, Copy, Debug)]
pub struct EquivarianceSpec {
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    pub bins: usize,
    pub seed: u64,
    pub step: f64,
    /// 1.0 for the physical guiding law; other values deliberately corrupt
    /// the velocities (negative control).
    pub velocity_scale: f64,
}

impl Default for EquivarianceSpec {
    fn default() -> Self {
        EquivarianceSpec {
            t0: 0.0,
            t1: 2.0,
            samples: 10_000,
            bins: 30,
            seed: 0,
            step: 1e-3,
            velocity_scale: 1.0,
        }
    }
}

/// Sample from `|psi_{t0}|^2`, transport the ensemble with the guiding flow
/// to `t1`, and compare the empirical marginals against `|psi_{t1}|^2`.
pub fn equivariance(wf: &NrWaveFunction, spec: &EquivarianceSpec) -> Result<DistanceReport> {
    if spec.samples < 100 {
        return Err(SimError::Validation("equivariance needs at least 100 samples".into()));
    }
    let starts = sample(wf, spec.t0, spec.samples, spec.seed)?;
    let (finals, failures) = if spec.t1 == spec.t0 {
        (starts.iter().cloned().map(Some).collect(), 0)
    } else {
        propagate_ensemble(wf, &starts, spec.t0, spec.t1, spec.step, spec.velocity_scale)?
    };
    let target = wf.snapshot(spec.t1);
    let n = wf.particle_count();
    let mut distances = Vec::with_capacity(n);
    let mut details = Vec::with_capacity(n);
    for axis in 0..n {
        let (mean, sd) = target.marginal_moments(axis);
        let (lo, hi) = (mean - 6.0 * sd, mean + 6.0 * sd);
        let mut hist = Histogram::new(lo, hi, spec.bins);
        for f in finals.iter().flatten() {
            hist.add(f[axis]);
        }
        let exact: Vec<f64> = (0..spec.bins)
            .map(|b| {
                let (blo, bhi) = hist.bin_edges(b);
                simpson(blo, bhi, 16, |x| target.marginal_density(axis, x))
            })
            .collect();
        distances.push(hist.l1_distance(&exact));
        details.push(crate::stats::AxisHistogram::from_parts(axis, &hist, exact));
    }
    Ok(DistanceReport::from_distances(distances, spec.bins, spec.samples, failures)
        .with_details(details))
}

#[cfg(test)]
mod tests;
