//! Hypersurface-guided integration of the relativistic guiding law.
//!
//! A trajectory is built leaf by leaf along a foliation: at the current
//! configuration every particle's current `j_iΣ` is evaluated, each particle
//! moves along its own current to the next leaf, and a Heun-style corrector
//! averages the velocities at the departure and predicted configurations.
//! Currents are future causal, so every step displacement is non-spacelike
//! by construction.
//!
//! The leaf parameter `s` doubles as the trajectory parameterization; the
//! per-leaf tuples of crossing points are the trajectory's synchronization
//! and are stored rather than recomputed.

use crate::dirac::{LeafDensity, MultiTimeWaveFunction};
use crate::error::{Result, SimError};
use crate::foliation::{advance_to_leaf, Foliation, Leaf};
use crate::spacetime::{PoincareTransform, TwoVector};

/// Density threshold factor relative to the scanned peak on the initial
/// leaf; below it integration aborts instead of dividing by near-zero.
pub const NODE_GUARD_FACTOR: f64 = 1e-12;
/// Nominal accuracy of the integrator at the default step; the
/// foliation-overlap check passes at `10 x` this value.
pub const BASE_TOL: f64 = 1e-4;
/// Clamp nearly-null velocities to exactly null before stepping.
const NULL_GUARD: f64 = 1e-12;
/// Grid used when scanning the initial leaf for the node guard.
const GUARD_SCAN_POINTS: usize = 201;

/// Integration parameters along a foliation.
#[derive(Clone, Copy, Debug)]
pub struct HbdParams {
    pub s0: f64,
    pub s1: f64,
    pub ds: f64,
    /// 1.0 for the physical law; other values corrupt the velocities for
    /// negative controls.
    pub velocity_scale: f64,
    /// Node guard; scanned from the initial leaf when absent.
    pub eps_rho: Option<f64>,
}

impl Default for HbdParams {
    fn default() -> Self {
        HbdParams { s0: 0.0, s1: 2.0, ds: 1e-3, velocity_scale: 1.0, eps_rho: None }
    }
}

impl HbdParams {
    pub fn with_step(mut self, ds: f64) -> Self {
        self.ds = ds;
        self
    }
}

/// N world lines sampled leaf by leaf, carrying their synchronization.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub foliation: String,
    pub leaf_params: Vec<f64>,
    /// `points[k][i]` = crossing of particle `i` with the leaf at
    /// `leaf_params[k]`.
    pub points: Vec<Vec<TwoVector>>,
    pub valid: bool,
}

impl Trajectory {
    pub fn particle_count(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn final_config(&self) -> Option<&[TwoVector]> {
        self.points.last().map(Vec::as_slice)
    }

    /// Pointwise Poincaré image; the trajectory keeps its leaf parameters
    /// (they label the transformed foliation's leaves).
    pub fn transform(&self, g: &PoincareTransform) -> Trajectory {
        Trajectory {
            foliation: self.foliation.clone(),
            leaf_params: self.leaf_params.clone(),
            points: self
                .points
                .iter()
                .map(|row| row.iter().map(|p| g.apply_point(p)).collect())
                .collect(),
            valid: self.valid,
        }
    }

    /// Sup over leaves and particles of `max(|Δt|, |Δx|)`; trajectories must
    /// share their leaf parameterization.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.leaf_params.len() != other.leaf_params.len() {
            return Err(SimError::Validation(
                "trajectories have different leaf counts".into(),
            ));
        }
        let mut d = 0.0f64;
        for (row_a, row_b) in self.points.iter().zip(&other.points) {
            for (a, b) in row_a.iter().zip(row_b) {
                d = d.max((a.t - b.t).abs().max((a.x - b.x).abs()));
            }
        }
        Ok(d)
    }

    /// First intersection of particle `i`'s world line with a leaf, by
    /// linear interpolation between consecutive crossing points.
    pub fn crossing_with_leaf(&self, i: usize, leaf: &Leaf) -> Option<TwoVector> {
        let mut prev: Option<(TwoVector, f64)> = None;
        for row in &self.points {
            let p = row[i];
            let h = p.t - leaf.time_at(p.x);
            if let Some((q, hq)) = prev {
                if hq <= 0.0 && h >= 0.0 {
                    let alpha = if h > hq { -hq / (h - hq) } else { 0.0 };
                    return Some(TwoVector::new(
                        q.t + alpha * (p.t - q.t),
                        q.x + alpha * (p.x - q.x),
                    ));
                }
            }
            prev = Some((p, h));
        }
        None
    }

    /// Spatial extent `[min x, max x]` of particle `i`'s world line.
    pub fn spatial_extent(&self, i: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &self.points {
            lo = lo.min(row[i].x);
            hi = hi.max(row[i].x);
        }
        (lo, hi)
    }

    /// Chronological ordering and causality of every recorded step.
    pub fn check_causal(&self) -> Result<()> {
        for i in 0..self.particle_count() {
            for w in self.points.windows(2) {
                let (a, b) = (w[0][i], w[1][i]);
                let dt = b.t - a.t;
                let dx = (b.x - a.x).abs();
                if !(dt > 0.0) {
                    return Err(SimError::Numerical(format!(
                        "non-chronological step for particle {i}: dt = {dt}"
                    )));
                }
                if dx > dt + 1e-9 {
                    return Err(SimError::Numerical(format!(
                        "spacelike step for particle {i}: |dx| = {dx}, dt = {dt}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Node guard for a run: `NODE_GUARD_FACTOR` times the scanned peak of
/// `rho_Σ` on the given leaf.
pub fn node_guard(wf: &MultiTimeWaveFunction, leaf: &Leaf) -> Result<f64> {
    let density = LeafDensity::new(wf, leaf, GUARD_SCAN_POINTS)?;
    Ok(NODE_GUARD_FACTOR * density.max_density())
}

fn step_velocities(
    wf: &MultiTimeWaveFunction,
    leaf: &Leaf,
    config: &[TwoVector],
    eps_rho: f64,
    scale: f64,
) -> Result<Option<Vec<f64>>> {
    let (rho, currents) = wf.rho_and_currents(leaf, config)?;
    if rho <= eps_rho {
        return Ok(None);
    }
    let mut vs = Vec::with_capacity(currents.len());
    for j in currents {
        if !(j.t > 0.0) {
            return Ok(None);
        }
        let mut v = j.x / j.t * scale;
        if 1.0 - v.abs() < NULL_GUARD {
            v = v.signum();
        }
        vs.push(v);
    }
    Ok(Some(vs))
}

/// Integrate the relativistic guiding law along a foliation, reporting each
/// leaf crossing to `observe`. Returns false when the run aborted near a
/// node (the observations made so far are the partial data).
pub fn integrate_hbd_stream<F: FnMut(usize, f64, &[TwoVector])>(
    wf: &MultiTimeWaveFunction,
    foliation: &Foliation,
    initial: &[TwoVector],
    params: &HbdParams,
    mut observe: F,
) -> Result<bool> {
    if !(params.ds > 0.0) || !(params.s1 > params.s0) {
        return Err(SimError::Validation("need s1 > s0 and ds > 0".into()));
    }
    let start_leaf = foliation.leaf(params.s0);
    let eps_rho = match params.eps_rho {
        Some(e) => e,
        None => node_guard(wf, &start_leaf)?,
    };
    // validates arity and on-leaf placement
    let rho0 = wf.rho_sigma(&start_leaf, initial)?;
    if rho0 <= eps_rho {
        return Err(SimError::NodeProximity(format!(
            "initial density {rho0:.3e} is below the node guard {eps_rho:.3e}"
        )));
    }
    let span = params.s1 - params.s0;
    let steps = (span / params.ds).ceil().max(1.0) as usize;
    let ds = span / steps as f64;
    let n = initial.len();
    let mut config = initial.to_vec();
    observe(0, params.s0, &config);
    let mut leaf = start_leaf;
    for k in 0..steps {
        let s_next = params.s0 + (k + 1) as f64 * ds;
        let Some(v_here) = step_velocities(wf, &leaf, &config, eps_rho, params.velocity_scale)?
        else {
            return Ok(false);
        };
        // predictor: move each particle along its own current
        let mut predicted = Vec::with_capacity(n);
        for (p, v) in config.iter().zip(&v_here) {
            predicted.push(advance_to_leaf(foliation, s_next, p, &TwoVector::new(1.0, *v))?);
        }
        let next_leaf = foliation.leaf(s_next);
        let Some(v_there) =
            step_velocities(wf, &next_leaf, &predicted, eps_rho, params.velocity_scale)?
        else {
            return Ok(false);
        };
        // corrector: average the two velocity fields
        for i in 0..n {
            let mut v = 0.5 * (v_here[i] + v_there[i]);
            if 1.0 - v.abs() < NULL_GUARD {
                v = v.signum();
            }
            config[i] = advance_to_leaf(foliation, s_next, &config[i], &TwoVector::new(1.0, v))?;
        }
        leaf = next_leaf;
        observe(k + 1, s_next, &config);
    }
    Ok(true)
}

/// Integrate and record the full trajectory.
pub fn integrate_hbd(
    wf: &MultiTimeWaveFunction,
    foliation: &Foliation,
    initial: &[TwoVector],
    params: &HbdParams,
) -> Result<Trajectory> {
    let mut leaf_params = Vec::new();
    let mut points = Vec::new();
    let valid = integrate_hbd_stream(wf, foliation, initial, params, |_, s, config| {
        leaf_params.push(s);
        points.push(config.to_vec());
    })?;
    Ok(Trajectory { foliation: foliation.label.clone(), leaf_params, points, valid })
}

/// Fast path for flat foliations: boost wave function and initial data into
/// the foliation's rest frame, integrate `dx'_i/dt' = j¹_i / j⁰_i` with
/// classical RK4 at equal times, and map back. The leaf at parameter `s` of
/// `Flat(v)` is the plane `t' = s` of the boosted frame, so the output is
/// leaf-aligned with [`integrate_hbd`] runs of the same span.
pub fn integrate_flat_frame(
    wf: &MultiTimeWaveFunction,
    frame_velocity: f64,
    initial: &[TwoVector],
    t0: f64,
    t1: f64,
    h: f64,
    label: impl Into<String>,
) -> Result<Trajectory> {
    if !(h > 0.0) || !(t1 > t0) {
        return Err(SimError::Validation("need t1 > t0 and h > 0".into()));
    }
    let g = PoincareTransform::boost(frame_velocity);
    let wf_frame = wf.apply_poincare(&g);
    let domain = crate::foliation::Domain::default();
    let frame_leaf = |t: f64| Leaf::flat(0.0, t, domain).expect("rest leaf");
    let mut config: Vec<TwoVector> = initial.iter().map(|p| g.apply_point(p)).collect();
    for p in &config {
        if (p.t - t0).abs() > crate::foliation::LEAF_TOL {
            return Err(SimError::Validation(format!(
                "initial point {p:?} is not on the frame-time-{t0} leaf"
            )));
        }
        // land exactly on the frame leaf
    }
    for p in config.iter_mut() {
        p.t = t0;
    }
    let eps_rho = node_guard(&wf_frame, &frame_leaf(t0))?;
    let rho0 = wf_frame.rho_sigma(&frame_leaf(t0), &config)?;
    if rho0 <= eps_rho {
        return Err(SimError::NodeProximity("initial density below the node guard".into()));
    }
    let n = config.len();
    let steps = ((t1 - t0) / h).ceil().max(1.0) as usize;
    let dt = (t1 - t0) / steps as f64;
    let ginv = g.inverse();
    let mut leaf_params = vec![t0];
    let mut points = vec![config.iter().map(|p| ginv.apply_point(p)).collect::<Vec<_>>()];
    let mut valid = true;
    let velocity = |t: f64, xs: &[f64]| -> Result<Option<Vec<f64>>> {
        let leaf = frame_leaf(t);
        let cfg: Vec<TwoVector> = xs.iter().map(|x| TwoVector::new(t, *x)).collect();
        let (rho, currents) = wf_frame.rho_and_currents(&leaf, &cfg)?;
        if rho <= eps_rho {
            return Ok(None);
        }
        Ok(Some(currents.iter().map(|j| j.x / j.t).collect()))
    };
    let mut xs: Vec<f64> = config.iter().map(|p| p.x).collect();
    'outer: for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let stage = |tt: f64, base: &[f64], kprev: Option<(&[f64], f64)>| -> Result<Option<Vec<f64>>> {
            let mut pos = base.to_vec();
            if let Some((kv, f)) = kprev {
                for (p, kk) in pos.iter_mut().zip(kv) {
                    *p += f * kk;
                }
            }
            velocity(tt, &pos)
        };
        let k1 = stage(t, &xs, None)?;
        let Some(k1) = k1 else {
            valid = false;
            break 'outer;
        };
        let Some(k2) = stage(t + dt / 2.0, &xs, Some((&k1, dt / 2.0)))? else {
            valid = false;
            break 'outer;
        };
        let Some(k3) = stage(t + dt / 2.0, &xs, Some((&k2, dt / 2.0)))? else {
            valid = false;
            break 'outer;
        };
        let Some(k4) = stage(t + dt, &xs, Some((&k3, dt)))? else {
            valid = false;
            break 'outer;
        };
        for i in 0..n {
            xs[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = t0 + (k + 1) as f64 * dt;
        leaf_params.push(t_next);
        points.push(xs.iter().map(|x| ginv.apply_point(&TwoVector::new(t_next, *x))).collect());
    }
    Ok(Trajectory { foliation: label.into(), leaf_params, points, valid })
}

/// Covariance experiment: the image of the trajectory under `g` against the
/// trajectory of the transformed data, plus a step-refinement slope.
#[derive(Clone, Copy, Debug)]
pub struct CovarianceReport {
    pub sup_distance: f64,
    pub refined_sup_distance: f64,
    /// `sup_distance / refined_sup_distance`; > 1 means refinement converges
    pub refinement_ratio: f64,
}

pub fn covariance_check(
    wf: &MultiTimeWaveFunction,
    foliation: &Foliation,
    initial: &[TwoVector],
    g: &PoincareTransform,
    params: &HbdParams,
) -> Result<CovarianceReport> {
    let run = |ds: f64| -> Result<f64> {
        let p = params.with_step(ds);
        let base = integrate_hbd(wf, foliation, initial, &p)?;
        if !base.valid {
            return Err(SimError::NodeProximity("base covariance run aborted".into()));
        }
        let mapped = base.transform(g);
        let wf_g = wf.apply_poincare(g);
        let fol_g = foliation.transform(g);
        let init_g: Vec<TwoVector> = initial.iter().map(|p| g.apply_point(p)).collect();
        let moved = integrate_hbd(&wf_g, &fol_g, &init_g, &p)?;
        if !moved.valid {
            return Err(SimError::NodeProximity("transformed covariance run aborted".into()));
        }
        mapped.sup_distance(&moved)
    };
    let d = run(params.ds)?;
    let d_half = run(params.ds / 2.0)?;
    Ok(CovarianceReport {
        sup_distance: d,
        refined_sup_distance: d_half,
        refinement_ratio: if d_half > 0.0 { d / d_half } else { f64::INFINITY },
    })
}

/// Foliation-overlap experiment: deform the foliation away from the
/// trajectory and re-integrate from the same initial data.
#[derive(Clone, Debug)]
pub struct OverlapReport {
    pub sup_distance: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub deformed_label: String,
}

pub fn overlap_check(
    wf: &MultiTimeWaveFunction,
    foliation: &Foliation,
    initial: &[TwoVector],
    params: &HbdParams,
    margin: f64,
    bump: f64,
) -> Result<OverlapReport> {
    if margin < 0.0 {
        return Err(SimError::Validation("margin must be nonnegative".into()));
    }
    let base = integrate_hbd(wf, foliation, initial, params)?;
    if !base.valid {
        return Err(SimError::NodeProximity("base overlap run aborted".into()));
    }
    // protected x-intervals: the world-line extents padded by the margin;
    // a zero margin protects only the initial points, so the deformation
    // touches the trajectory itself (negative control)
    let keep: Vec<(f64, f64)> = if margin > 0.0 {
        (0..base.particle_count())
            .map(|i| {
                let (lo, hi) = base.spatial_extent(i);
                (lo - margin, hi + margin)
            })
            .collect()
    } else {
        initial.iter().map(|p| (p.x, p.x)).collect()
    };
    let probes = [params.s0, 0.5 * (params.s0 + params.s1), params.s1];
    let deformed = foliation.deformed(keep, bump, 1.0, &probes)?;
    let rerun = integrate_hbd(wf, &deformed, initial, params)?;
    if !rerun.valid {
        return Err(SimError::NodeProximity("deformed overlap run aborted".into()));
    }
    let d = base.sup_distance(&rerun)?;
    let tolerance = 10.0 * BASE_TOL;
    Ok(OverlapReport {
        sup_distance: d,
        tolerance,
        pass: d <= tolerance,
        deformed_label: deformed.label.clone(),
    })
}

#[cfg(test)]
mod tests;
