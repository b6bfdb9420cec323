//! Foliation-independent spacetime events on trajectories.
//!
//! An atom asks whether a particle's world line, taken as a spacetime set
//! (piecewise linear between recorded leaf crossings), intersects a region.
//! Atoms combine with conjunction, disjunction and negation. Because
//! evaluation reads only the world lines, the same trajectory yields the
//! same verdict no matter which foliation produced it.

use crate::error::{Result, SimError};
use crate::hbd::Trajectory;
use crate::spacetime::{PoincareTransform, TwoVector};

/// A spacetime region an atom can test against.
#[derive(Clone, Debug)]
pub enum Region {
    /// `[t1, t2] x [x1, x2]`; bounds may be infinite.
    Rect { t: (f64, f64), x: (f64, f64) },
    /// Convex quadrilateral (e.g. the boost image of a rectangle),
    /// counter-clockwise vertices.
    Quad([TwoVector; 4]),
}

impl Region {
    pub fn rect(t: (f64, f64), x: (f64, f64)) -> Result<Region> {
        if t.0.is_nan() || t.1.is_nan() || x.0.is_nan() || x.1.is_nan() {
            return Err(SimError::Validation("rectangle bounds must not be NaN".into()));
        }
        if !(t.0 <= t.1) || !(x.0 <= x.1) {
            return Err(SimError::Validation("rectangle bounds must be ordered".into()));
        }
        Ok(Region::Rect { t, x })
    }

    fn quad_ccw(mut vs: [TwoVector; 4]) -> Region {
        // signed area in the (t, x) plane; reverse when clockwise
        let mut area = 0.0;
        for i in 0..4 {
            let a = vs[i];
            let b = vs[(i + 1) % 4];
            area += a.t * b.x - a.x * b.t;
        }
        if area < 0.0 {
            vs.reverse();
        }
        Region::Quad(vs)
    }

    pub fn contains(&self, p: &TwoVector) -> bool {
        match self {
            Region::Rect { t, x } => p.t >= t.0 && p.t <= t.1 && p.x >= x.0 && p.x <= x.1,
            Region::Quad(vs) => {
                for i in 0..4 {
                    let a = vs[i];
                    let b = vs[(i + 1) % 4];
                    let cross = (b.t - a.t) * (p.x - a.x) - (b.x - a.x) * (p.t - a.t);
                    if cross < -1e-12 {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Does the segment `a -> b` intersect the region?
    pub fn segment_intersects(&self, a: &TwoVector, b: &TwoVector) -> bool {
        match self {
            Region::Rect { t, x } => {
                let mut lo = 0.0f64;
                let mut hi = 1.0f64;
                for (p0, d, (mn, mx)) in
                    [(a.t, b.t - a.t, *t), (a.x, b.x - a.x, *x)]
                {
                    if d == 0.0 {
                        if p0 < mn || p0 > mx {
                            return false;
                        }
                    } else {
                        let (u1, u2) = {
                            let u1 = (mn - p0) / d;
                            let u2 = (mx - p0) / d;
                            if u1 <= u2 {
                                (u1, u2)
                            } else {
                                (u2, u1)
                            }
                        };
                        lo = lo.max(u1);
                        hi = hi.min(u2);
                        if lo > hi {
                            return false;
                        }
                    }
                }
                true
            }
            Region::Quad(vs) => {
                // clip the parameter interval against each edge half-plane
                let d = b.sub(a);
                let mut lo = 0.0f64;
                let mut hi = 1.0f64;
                for i in 0..4 {
                    let v1 = vs[i];
                    let v2 = vs[(i + 1) % 4];
                    let e = v2.sub(&v1);
                    // f(u) = cross(e, a + u d - v1) >= 0 required
                    let f0 = e.t * (a.x - v1.x) - e.x * (a.t - v1.t);
                    let slope = e.t * d.x - e.x * d.t;
                    if slope.abs() < 1e-300 {
                        if f0 < 0.0 {
                            return false;
                        }
                    } else {
                        let u = -f0 / slope;
                        if slope > 0.0 {
                            lo = lo.max(u);
                        } else {
                            hi = hi.min(u);
                        }
                        if lo > hi {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// Image under a Poincaré transformation. Translations keep rectangles
    /// rectangular; boosts require finite bounds and produce quadrilaterals.
    pub fn transform(&self, g: &PoincareTransform) -> Result<Region> {
        match self {
            Region::Rect { t, x } if g.rapidity == 0.0 => Ok(Region::Rect {
                t: (t.0 + g.translation.t, t.1 + g.translation.t),
                x: (x.0 + g.translation.x, x.1 + g.translation.x),
            }),
            Region::Rect { t, x } => {
                if !(t.0.is_finite() && t.1.is_finite() && x.0.is_finite() && x.1.is_finite()) {
                    return Err(SimError::Validation(
                        "cannot boost an event region with unbounded extent".into(),
                    ));
                }
                let corners = [
                    TwoVector::new(t.0, x.0),
                    TwoVector::new(t.1, x.0),
                    TwoVector::new(t.1, x.1),
                    TwoVector::new(t.0, x.1),
                ];
                Ok(Region::quad_ccw(corners.map(|c| g.apply_point(&c))))
            }
            Region::Quad(vs) => Ok(Region::quad_ccw(vs.map(|c| g.apply_point(&c)))),
        }
    }
}

/// Boolean expression tree over world-line/region atoms.
#[derive(Clone, Debug)]
pub enum EventPredicate {
    /// World line of `particle` intersects `region`.
    Crosses { particle: usize, region: Region },
    And(Vec<EventPredicate>),
    Or(Vec<EventPredicate>),
    Not(Box<EventPredicate>),
}

impl EventPredicate {
    pub fn crosses(particle: usize, t: (f64, f64), x: (f64, f64)) -> Result<EventPredicate> {
        Ok(EventPredicate::Crosses { particle, region: Region::rect(t, x)? })
    }

    /// The whole sample space (every trajectory satisfies it).
    pub fn always() -> EventPredicate {
        EventPredicate::And(Vec::new())
    }

    /// The empty event.
    pub fn never() -> EventPredicate {
        EventPredicate::Or(Vec::new())
    }

    pub fn not(self) -> EventPredicate {
        EventPredicate::Not(Box::new(self))
    }

    /// Verdict on a trajectory's world lines.
    pub fn evaluate(&self, traj: &Trajectory) -> bool {
        match self {
            EventPredicate::Crosses { particle, region } => {
                let i = *particle;
                if i >= traj.particle_count() || traj.points.is_empty() {
                    return false;
                }
                if traj.points.len() == 1 {
                    return region.contains(&traj.points[0][i]);
                }
                traj.points
                    .windows(2)
                    .any(|w| region.segment_intersects(&w[0][i], &w[1][i]))
            }
            EventPredicate::And(children) => children.iter().all(|c| c.evaluate(traj)),
            EventPredicate::Or(children) => children.iter().any(|c| c.evaluate(traj)),
            EventPredicate::Not(inner) => !inner.evaluate(traj),
        }
    }

    /// Transform every atom region; the event `g·B` satisfied by `g·k`
    /// exactly when `B` is satisfied by `k`.
    pub fn transform(&self, g: &PoincareTransform) -> Result<EventPredicate> {
        Ok(match self {
            EventPredicate::Crosses { particle, region } => {
                EventPredicate::Crosses { particle: *particle, region: region.transform(g)? }
            }
            EventPredicate::And(cs) => {
                EventPredicate::And(cs.iter().map(|c| c.transform(g)).collect::<Result<_>>()?)
            }
            EventPredicate::Or(cs) => {
                EventPredicate::Or(cs.iter().map(|c| c.transform(g)).collect::<Result<_>>()?)
            }
            EventPredicate::Not(inner) => EventPredicate::Not(Box::new(inner.transform(g)?)),
        })
    }

    /// Time extent that must be covered by a trajectory for the verdict to
    /// be meaningful (None for unbounded or purely logical events).
    pub fn time_extent(&self) -> Option<(f64, f64)> {
        match self {
            EventPredicate::Crosses { region, .. } => match region {
                Region::Rect { t, .. } => Some(*t),
                Region::Quad(vs) => {
                    let lo = vs.iter().map(|v| v.t).fold(f64::INFINITY, f64::min);
                    let hi = vs.iter().map(|v| v.t).fold(f64::NEG_INFINITY, f64::max);
                    Some((lo, hi))
                }
            },
            EventPredicate::And(cs) | EventPredicate::Or(cs) => {
                let mut acc: Option<(f64, f64)> = None;
                for c in cs {
                    if let Some((lo, hi)) = c.time_extent() {
                        acc = Some(match acc {
                            None => (lo, hi),
                            Some((alo, ahi)) => (alo.min(lo), ahi.max(hi)),
                        });
                    }
                }
                acc
            }
            EventPredicate::Not(inner) => inner.time_extent(),
        }
    }
}
