//! Spacelike leaves and one-parameter foliations of 1+1D Minkowski
//! spacetime.
//!
//! A leaf is stored as a time function `t = T(x)` with `|T'| < 1`. Flat
//! leaves are the simultaneity planes of an inertial frame, written as
//! `γ(t - v x) = τ`. Curved leaves are `t = offset + f(x)` for a bounded
//! parametric shape; they continue with slope zero outside the configured
//! spatial interval so the geometry stays controlled where the wave packets
//! are negligible. Poincaré images and trajectory-avoiding deformations wrap
//! a base shape, so every construction in the crate stays exactly
//! representable.
//!
//! A foliation's leaf parameter survives Poincaré transformation unchanged:
//! `transform(g).leaf(s)` is exactly the image of `leaf(s)` under `g`. The
//! covariance experiments lean on this pairing.

use crate::error::{Result, SimError};
use crate::spacetime::{add_velocities, PoincareTransform, TwoVector};

/// Construction-time bound on the slope of curved shapes.
pub const SHAPE_MAX_SLOPE: f64 = 0.8;
/// Grid-verified bound for deformed leaves (shape plus bump profile).
pub const DEFORMED_MAX_SLOPE: f64 = 0.9;
/// On-leaf tolerance `|T(x) - t|`.
pub const LEAF_TOL: f64 = 1e-9;
/// Landing tolerance of `advance_to_leaf` in the time coordinate.
pub const STEP_TOL: f64 = 1e-12;
/// Step size of the spacelike-validation grid.
const VALIDATION_STEP: f64 = 0.01;

/// Configured spatial interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { lo: -20.0, hi: 20.0 }
    }
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(SimError::Validation(format!("invalid domain [{lo}, {hi}]")));
        }
        Ok(Domain { lo, hi })
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn shifted(&self, dx: f64) -> Domain {
        Domain { lo: self.lo + dx, hi: self.hi + dx }
    }
}

/// Parametric curved-leaf shapes.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveShape {
    /// `a tanh((x - x0) / w)`
    Tanh { amplitude: f64, center: f64, width: f64 },
    /// `a sin(ω x + phase)`
    Sin { amplitude: f64, angular_frequency: f64, phase: f64 },
}

impl CurveShape {
    pub fn validate(&self) -> Result<()> {
        if let CurveShape::Tanh { width, .. } = self {
            if !(*width > 0.0) {
                return Err(SimError::Validation("tanh width must be positive".into()));
            }
        }
        let m = self.max_slope();
        if !(m <= SHAPE_MAX_SLOPE) {
            return Err(SimError::Validation(format!(
                "curve slope bound {m:.3} exceeds {SHAPE_MAX_SLOPE}"
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            CurveShape::Tanh { amplitude, center, width } => {
                amplitude * ((x - center) / width).tanh()
            }
            CurveShape::Sin { amplitude, angular_frequency, phase } => {
                amplitude * (angular_frequency * x + phase).sin()
            }
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match self {
            CurveShape::Tanh { amplitude, center, width } => {
                let c = ((x - center) / width).cosh();
                amplitude / (width * c * c)
            }
            CurveShape::Sin { amplitude, angular_frequency, phase } => {
                amplitude * angular_frequency * (angular_frequency * x + phase).cos()
            }
        }
    }

    pub fn max_slope(&self) -> f64 {
        match self {
            CurveShape::Tanh { amplitude, width, .. } => (amplitude / width).abs(),
            CurveShape::Sin { amplitude, angular_frequency, .. } => {
                (amplitude * angular_frequency).abs()
            }
        }
    }

    fn translated(&self, dx: f64) -> CurveShape {
        match self {
            CurveShape::Tanh { amplitude, center, width } => {
                CurveShape::Tanh { amplitude: *amplitude, center: center + dx, width: *width }
            }
            CurveShape::Sin { amplitude, angular_frequency, phase } => CurveShape::Sin {
                amplitude: *amplitude,
                angular_frequency: *angular_frequency,
                phase: phase - angular_frequency * dx,
            },
        }
    }
}

/// Bump profile that vanishes on the `keep` intervals and saturates at
/// `amplitude` one `ramp` beyond them.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformProfile {
    pub amplitude: f64,
    pub ramp: f64,
    pub keep: Vec<(f64, f64)>,
}

impl DeformProfile {
    fn distance_to_keep(&self, x: f64) -> f64 {
        if self.keep.is_empty() {
            return f64::INFINITY;
        }
        let mut d = f64::INFINITY;
        for (lo, hi) in &self.keep {
            if x >= *lo && x <= *hi {
                return 0.0;
            }
            d = d.min((x - lo).abs().min((x - hi).abs()));
        }
        d
    }

    pub fn value(&self, x: f64) -> f64 {
        let u = (self.distance_to_keep(x) / self.ramp).clamp(0.0, 1.0);
        self.amplitude * u * u * (3.0 - 2.0 * u)
    }

    pub fn slope(&self, x: f64) -> f64 {
        let d = self.distance_to_keep(x);
        let u = d / self.ramp;
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        // sign of d(dist)/dx: +1 to the right of the nearest kept interval
        let mut sign = 1.0;
        let mut best = f64::INFINITY;
        for (lo, hi) in &self.keep {
            if x > *hi && x - hi < best {
                best = x - hi;
                sign = 1.0;
            }
            if x < *lo && lo - x < best {
                best = lo - x;
                sign = -1.0;
            }
        }
        self.amplitude * 6.0 * u * (1.0 - u) / self.ramp * sign
    }
}

/// Geometric form of a single leaf.
#[derive(Clone, Debug)]
pub enum LeafShape {
    /// `γ(t - v x) = τ`
    Flat { velocity: f64, tau: f64 },
    /// `t = offset + f(clamp(x))`
    Curve { offset: f64, shape: CurveShape, clamp: Domain },
    Deformed { base: Box<LeafShape>, profile: DeformProfile },
    Boosted { base: Box<LeafShape>, g: PoincareTransform },
}

impl LeafShape {
    pub fn time_at(&self, x: f64) -> f64 {
        match self {
            LeafShape::Flat { velocity, tau } => {
                tau * (1.0 - velocity * velocity).sqrt() + velocity * x
            }
            LeafShape::Curve { offset, shape, clamp } => offset + shape.value(clamp.clamp(x)),
            LeafShape::Deformed { base, profile } => base.time_at(x) + profile.value(x),
            LeafShape::Boosted { base, g } => {
                let u = invert_boosted_x(base, g, x);
                g.apply_point(&TwoVector::new(base.time_at(u), u)).t
            }
        }
    }

    pub fn slope_at(&self, x: f64) -> f64 {
        match self {
            LeafShape::Flat { velocity, .. } => *velocity,
            LeafShape::Curve { shape, clamp, .. } => {
                if clamp.contains(x) {
                    shape.slope(x)
                } else {
                    0.0
                }
            }
            LeafShape::Deformed { base, profile } => base.slope_at(x) + profile.slope(x),
            LeafShape::Boosted { base, g } => {
                let u = invert_boosted_x(base, g, x);
                let sb = base.slope_at(u);
                let v = g.velocity();
                (sb - v) / (1.0 - v * sb)
            }
        }
    }
}

/// Solve the x-component of `g(T_base(u), u) = (_, x)` for `u`; strictly
/// monotone because the base slope stays below 1.
fn invert_boosted_x(base: &LeafShape, g: &PoincareTransform, x: f64) -> f64 {
    let (ch, sh) = (g.rapidity.cosh(), g.rapidity.sinh());
    let image_x = |u: f64| -sh * base.time_at(u) + ch * u + g.translation.x;
    let mut lo = (x - g.translation.x) / ch - 1.0;
    let mut hi = lo + 2.0;
    let mut guard = 0;
    while image_x(lo) > x {
        let w = hi - lo;
        lo -= w;
        guard += 1;
        assert!(guard < 200, "boosted-leaf inversion failed to bracket");
    }
    guard = 0;
    while image_x(hi) < x {
        let w = hi - lo;
        hi += w;
        guard += 1;
        assert!(guard < 200, "boosted-leaf inversion failed to bracket");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if image_x(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + x.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// A spacelike hypersurface over its spatial extent.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub shape: LeafShape,
    pub domain: Domain,
}

impl Leaf {
    pub fn flat(velocity: f64, tau: f64, domain: Domain) -> Result<Leaf> {
        if !(velocity.abs() < 1.0) {
            return Err(SimError::Validation(format!(
                "frame velocity {velocity} is not subluminal"
            )));
        }
        Ok(Leaf { shape: LeafShape::Flat { velocity, tau }, domain })
    }

    pub fn curved(offset: f64, shape: CurveShape, domain: Domain) -> Result<Leaf> {
        shape.validate()?;
        Ok(Leaf { shape: LeafShape::Curve { offset, shape, clamp: domain }, domain })
    }

    pub fn time_at(&self, x: f64) -> f64 {
        self.shape.time_at(x)
    }

    pub fn slope_at(&self, x: f64) -> f64 {
        self.shape.slope_at(x)
    }

    pub fn contains(&self, p: &TwoVector) -> bool {
        p.is_finite() && (self.time_at(p.x) - p.t).abs() <= LEAF_TOL
    }

    pub fn point_at(&self, x: f64) -> TwoVector {
        TwoVector::new(self.time_at(x), x)
    }

    /// Future-oriented unit normal `(1, T') / sqrt(1 - T'^2)`.
    pub fn unit_normal(&self, x: f64) -> Result<TwoVector> {
        let s = self.slope_at(x);
        if !(s.abs() < 1.0) {
            return Err(SimError::Validation(format!(
                "leaf slope {s} at x = {x} is not spacelike"
            )));
        }
        let d = (1.0 - s * s).sqrt();
        Ok(TwoVector::new(1.0 / d, s / d))
    }

    /// Proper-length factor `sqrt(1 - T'^2)` of the induced measure.
    pub fn proper_measure(&self, x: f64) -> f64 {
        let s = self.slope_at(x);
        (1.0 - s * s).max(0.0).sqrt()
    }

    /// Check `sup |T'|` on a grid of step 0.01 over the domain.
    pub fn validate_spacelike(&self) -> Result<()> {
        let steps = (self.domain.length() / VALIDATION_STEP).ceil() as usize;
        for k in 0..=steps {
            let x = self.domain.lo + self.domain.length() * k as f64 / steps as f64;
            let s = self.slope_at(x).abs();
            if !(s <= DEFORMED_MAX_SLOPE) {
                return Err(SimError::Validation(format!(
                    "leaf slope {s:.4} at x = {x:.3} exceeds the spacelike bound"
                )));
            }
        }
        Ok(())
    }

    pub fn transform(&self, g: &PoincareTransform) -> Leaf {
        match (&self.shape, g.rapidity == 0.0) {
            (LeafShape::Flat { velocity, tau }, _) => {
                let v = add_velocities(*velocity, -g.velocity());
                let gamma = 1.0 / (1.0 - v * v).sqrt();
                let normal = TwoVector::new(gamma, gamma * v);
                Leaf {
                    shape: LeafShape::Flat { velocity: v, tau: tau + normal.dot(&g.translation) },
                    domain: boosted_domain(&self.shape, g, self.domain),
                }
            }
            (LeafShape::Curve { offset, shape, clamp }, true) => Leaf {
                shape: LeafShape::Curve {
                    offset: offset + g.translation.t,
                    shape: shape.translated(g.translation.x),
                    clamp: clamp.shifted(g.translation.x),
                },
                domain: self.domain.shifted(g.translation.x),
            },
            (shape, _) => Leaf {
                shape: LeafShape::Boosted { base: Box::new(shape.clone()), g: *g },
                domain: boosted_domain(shape, g, self.domain),
            },
        }
    }
}

fn boosted_domain(shape: &LeafShape, g: &PoincareTransform, domain: Domain) -> Domain {
    let lo = g.apply_point(&TwoVector::new(shape.time_at(domain.lo), domain.lo)).x;
    let hi = g.apply_point(&TwoVector::new(shape.time_at(domain.hi), domain.hi)).x;
    Domain { lo: lo.min(hi), hi: lo.max(hi) }
}

/// One-parameter family of leaves. `leaf(s)` is strictly increasing in `s`
/// (for flat kinds `τ = s + shift`, for curved kinds `t = s + shift + f(x)`),
/// so leaves are pairwise disjoint and ordered and the family covers the
/// slab between its extreme leaves.
#[derive(Clone, Debug)]
pub struct Foliation {
    pub label: String,
    kind: FoliationKind,
    domain: Domain,
    shift: f64,
}

#[derive(Clone, Debug)]
enum FoliationKind {
    Flat { velocity: f64 },
    Curved { shape: CurveShape },
    Deformed { base: Box<FoliationKind>, profile: DeformProfile },
    Boosted { base: Box<FoliationKind>, g: PoincareTransform },
}

impl Foliation {
    pub fn flat(label: impl Into<String>, velocity: f64, domain: Domain) -> Result<Foliation> {
        if !(velocity.abs() < 1.0) {
            return Err(SimError::Validation(format!(
                "frame velocity {velocity} is not subluminal"
            )));
        }
        Ok(Foliation {
            label: label.into(),
            kind: FoliationKind::Flat { velocity },
            domain,
            shift: 0.0,
        })
    }

    pub fn curved(label: impl Into<String>, shape: CurveShape, domain: Domain) -> Result<Foliation> {
        shape.validate()?;
        Ok(Foliation {
            label: label.into(),
            kind: FoliationKind::Curved { shape },
            domain,
            shift: 0.0,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_flat(&self) -> Option<f64> {
        match &self.kind {
            FoliationKind::Flat { velocity } => Some(*velocity),
            _ => None,
        }
    }

    pub fn leaf(&self, s: f64) -> Leaf {
        let (shape, domain) = kind_leaf(&self.kind, s + self.shift, self.domain);
        Leaf { shape, domain }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Foliation {
        self.label = label.into();
        self
    }

    /// Image under `g`, keeping the leaf parameterization:
    /// `transform(g).leaf(s)` equals `leaf(s).transform(g)`.
    pub fn transform(&self, g: &PoincareTransform) -> Foliation {
        if g.is_identity() {
            return self.clone();
        }
        match &self.kind {
            FoliationKind::Flat { velocity } => {
                let v = add_velocities(*velocity, -g.velocity());
                let gamma = 1.0 / (1.0 - v * v).sqrt();
                let normal = TwoVector::new(gamma, gamma * v);
                Foliation {
                    label: self.label.clone(),
                    kind: FoliationKind::Flat { velocity: v },
                    domain: self.domain,
                    shift: self.shift + normal.dot(&g.translation),
                }
            }
            FoliationKind::Curved { shape } if g.rapidity == 0.0 => Foliation {
                label: self.label.clone(),
                kind: FoliationKind::Curved { shape: shape.translated(g.translation.x) },
                domain: self.domain.shifted(g.translation.x),
                shift: self.shift + g.translation.t,
            },
            FoliationKind::Boosted { base, g: g1 } => Foliation {
                label: self.label.clone(),
                kind: FoliationKind::Boosted { base: base.clone(), g: g.compose(g1) },
                domain: self.domain,
                shift: self.shift,
            },
            kind => Foliation {
                label: self.label.clone(),
                kind: FoliationKind::Boosted { base: Box::new(kind.clone()), g: *g },
                domain: self.domain,
                shift: self.shift,
            },
        }
    }

    /// Deformed copy whose leaves keep their shape on the `keep` intervals
    /// and acquire a bump of the given amplitude elsewhere. Spacelikeness of
    /// the result is verified on the probe leaves.
    pub fn deformed(
        &self,
        keep: Vec<(f64, f64)>,
        amplitude: f64,
        ramp: f64,
        probe_leaves: &[f64],
    ) -> Result<Foliation> {
        if !(ramp > 0.0) {
            return Err(SimError::Validation("deformation ramp must be positive".into()));
        }
        let profile = DeformProfile { amplitude, ramp, keep };
        let out = Foliation {
            label: format!("{}+bump", self.label),
            kind: FoliationKind::Deformed { base: Box::new(self.kind.clone()), profile },
            domain: self.domain,
            shift: self.shift,
        };
        for s in probe_leaves {
            out.leaf(*s).validate_spacelike()?;
        }
        Ok(out)
    }

    /// Grid check of leaf spacelikeness and pairwise ordering over `[s0, s1]`.
    pub fn validate(&self, s0: f64, s1: f64) -> Result<()> {
        if !(s1 > s0) {
            return Err(SimError::Validation("need s1 > s0".into()));
        }
        let probes = 5;
        for k in 0..=probes {
            let s = s0 + (s1 - s0) * k as f64 / probes as f64;
            let leaf = self.leaf(s);
            leaf.validate_spacelike()?;
            if k > 0 {
                let prev = self.leaf(s - (s1 - s0) / probes as f64);
                for j in 0..=64 {
                    let x = leaf.domain.lo + leaf.domain.length() * j as f64 / 64.0;
                    if leaf.time_at(x) <= prev.time_at(x) {
                        return Err(SimError::Validation(format!(
                            "leaves out of order at s = {s}, x = {x}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn kind_leaf(kind: &FoliationKind, s: f64, domain: Domain) -> (LeafShape, Domain) {
    match kind {
        FoliationKind::Flat { velocity } => {
            (LeafShape::Flat { velocity: *velocity, tau: s }, domain)
        }
        FoliationKind::Curved { shape } => {
            (LeafShape::Curve { offset: s, shape: shape.clone(), clamp: domain }, domain)
        }
        FoliationKind::Deformed { base, profile } => {
            let (inner, d) = kind_leaf(base, s, domain);
            (LeafShape::Deformed { base: Box::new(inner), profile: profile.clone() }, d)
        }
        FoliationKind::Boosted { base, g } => {
            let (inner, d) = kind_leaf(base, s, domain);
            let mapped = boosted_domain(&inner, g, d);
            (LeafShape::Boosted { base: Box::new(inner), g: *g }, mapped)
        }
    }
}

/// Move `point` along `direction` (future, non-spacelike) to the leaf at
/// parameter `s_next`; the departure leaf must lie strictly in the past.
pub fn advance_to_leaf(
    foliation: &Foliation,
    s_next: f64,
    point: &TwoVector,
    direction: &TwoVector,
) -> Result<TwoVector> {
    let leaf = foliation.leaf(s_next);
    advance_to(&leaf, point, direction)
}

/// Same as [`advance_to_leaf`] for an explicit target leaf.
pub fn advance_to(leaf: &Leaf, point: &TwoVector, direction: &TwoVector) -> Result<TwoVector> {
    if !(direction.t > 0.0) || !direction.is_finite() {
        return Err(SimError::Validation(format!(
            "direction {direction:?} is not future-oriented"
        )));
    }
    let vd = direction.x / direction.t;
    match &leaf.shape {
        LeafShape::Flat { velocity, tau } => {
            let gamma = 1.0 / (1.0 - velocity * velocity).sqrt();
            let denom = gamma * (1.0 - velocity * vd);
            if denom < 1e-9 {
                return Err(SimError::DegenerateStep(format!(
                    "denominator {denom:.3e} for flat leaf v = {velocity}"
                )));
            }
            let lam = (tau - gamma * (point.t - velocity * point.x)) / denom;
            if lam < 0.0 {
                return Err(SimError::Validation("target leaf is in the past".into()));
            }
            Ok(TwoVector::new(point.t + lam, point.x + lam * vd))
        }
        LeafShape::Boosted { base, g } => {
            let ginv = g.inverse();
            let base_leaf = Leaf { shape: (**base).clone(), domain: leaf.domain };
            let p = advance_to(&base_leaf, &ginv.apply_point(point), &ginv.apply_vector(direction))?;
            Ok(g.apply_point(&p))
        }
        _ => {
            let gap = |lam: f64| point.t + lam - leaf.time_at(point.x + lam * vd);
            let g0 = gap(0.0);
            if g0 > LEAF_TOL {
                return Err(SimError::Validation("target leaf is in the past".into()));
            }
            let mut lo = 0.0;
            let mut hi = (-g0).max(1e-6) * 2.0;
            let mut guard = 0;
            while gap(hi) < 0.0 {
                hi *= 2.0;
                guard += 1;
                if guard > 80 {
                    return Err(SimError::DegenerateStep(
                        "direction never reaches the target leaf".into(),
                    ));
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if gap(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < STEP_TOL {
                    break;
                }
            }
            let lam = 0.5 * (lo + hi);
            Ok(TwoVector::new(point.t + lam, point.x + lam * vd))
        }
    }
}
