//! 1+1-dimensional Minkowski geometry with signature (+, -) and the
//! Poincaré transformations acting on it.
//!
//! Conventions, fixed once here and relied on everywhere else:
//!
//! * A boost of rapidity `eta` (velocity `v = tanh eta`) acts on column
//!   vectors as `Λ(eta) = [[cosh eta, -sinh eta], [-sinh eta, cosh eta]]`,
//!   so a particle at rest acquires momentum `p' = -γ m v`. Equivalently,
//!   a leaf of simultaneity of the rest frame maps to one moving at `-v`.
//! * Points transform as `x' = Λ x + a`, vectors as `v' = Λ v`.
//! * The spinor representation used by the Dirac layer is
//!   `S(eta) = exp(-eta γ⁰γ¹ / 2)`, which intertwines as
//!   `S⁻¹ γ^μ S = Λ^μ_ν γ^ν` with the matrix above.

use serde::{Deserialize, Serialize};

/// A spacetime point or 2-vector `(t, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoVector {
    pub t: f64,
    pub x: f64,
}

impl TwoVector {
    pub fn new(t: f64, x: f64) -> Self {
        TwoVector { t, x }
    }

    /// Minkowski inner product with signature (+, -).
    pub fn dot(&self, other: &TwoVector) -> f64 {
        self.t * other.t - self.x * other.x
    }

    pub fn minkowski_norm2(&self) -> f64 {
        self.dot(self)
    }

    pub fn is_future_timelike_unit(&self, tol: f64) -> bool {
        self.t > 0.0 && (self.minkowski_norm2() - 1.0).abs() <= tol
    }

    /// Future-oriented and non-spacelike: `t >= |x| - tol`.
    pub fn is_future_causal(&self, tol: f64) -> bool {
        self.t > 0.0 && self.t >= self.x.abs() - tol
    }

    pub fn add(&self, other: &TwoVector) -> TwoVector {
        TwoVector::new(self.t + other.t, self.x + other.x)
    }

    pub fn sub(&self, other: &TwoVector) -> TwoVector {
        TwoVector::new(self.t - other.t, self.x - other.x)
    }

    pub fn scale(&self, s: f64) -> TwoVector {
        TwoVector::new(self.t * s, self.x * s)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite()
    }
}

/// Proper orthochronous Poincaré transformation: boost by rapidity plus a
/// translation, applied as `x' = Λ x + a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareTransform {
    pub rapidity: f64,
    pub translation: TwoVector,
}

impl PoincareTransform {
    pub fn identity() -> Self {
        PoincareTransform { rapidity: 0.0, translation: TwoVector::new(0.0, 0.0) }
    }

    pub fn boost(velocity: f64) -> Self {
        assert!(velocity.abs() < 1.0, "boost velocity must satisfy |v| < 1");
        PoincareTransform { rapidity: velocity.atanh(), translation: TwoVector::new(0.0, 0.0) }
    }

    pub fn translation(t: f64, x: f64) -> Self {
        PoincareTransform { rapidity: 0.0, translation: TwoVector::new(t, x) }
    }

    pub fn velocity(&self) -> f64 {
        self.rapidity.tanh()
    }

    pub fn is_identity(&self) -> bool {
        self.rapidity == 0.0 && self.translation.t == 0.0 && self.translation.x == 0.0
    }

    /// Boost matrix entries `(cosh eta, sinh eta)`.
    fn ch_sh(&self) -> (f64, f64) {
        (self.rapidity.cosh(), self.rapidity.sinh())
    }

    /// Apply `Λ` only (vectors, momenta, normals).
    pub fn apply_vector(&self, v: &TwoVector) -> TwoVector {
        let (ch, sh) = self.ch_sh();
        TwoVector::new(ch * v.t - sh * v.x, -sh * v.t + ch * v.x)
    }

    /// Apply the full transformation `Λ x + a` (spacetime points).
    pub fn apply_point(&self, p: &TwoVector) -> TwoVector {
        self.apply_vector(p).add(&self.translation)
    }

    pub fn inverse(&self) -> PoincareTransform {
        let inv_boost = PoincareTransform { rapidity: -self.rapidity, translation: TwoVector::new(0.0, 0.0) };
        let a = inv_boost.apply_vector(&self.translation).scale(-1.0);
        PoincareTransform { rapidity: -self.rapidity, translation: a }
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &PoincareTransform) -> PoincareTransform {
        PoincareTransform {
            rapidity: self.rapidity + other.rapidity,
            translation: self.apply_vector(&other.translation).add(&self.translation),
        }
    }

    /// Spinor representation `S(eta) = exp(-eta γ⁰γ¹ / 2)` as a real 2x2
    /// matrix `[[cosh(eta/2), -sinh(eta/2)], [-sinh(eta/2), cosh(eta/2)]]`.
    pub fn spinor_matrix(&self) -> [[f64; 2]; 2] {
        let ch = (self.rapidity / 2.0).cosh();
        let sh = (self.rapidity / 2.0).sinh();
        [[ch, -sh], [-sh, ch]]
    }
}

/// Relativistic velocity addition `(u + w) / (1 + u w)`.
pub fn add_velocities(u: f64, w: f64) -> f64 {
    (u + w) / (1.0 + u * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn boost_preserves_minkowski_products() {
        let g = PoincareTransform::boost(0.6);
        let a = TwoVector::new(1.3, -0.4);
        let b = TwoVector::new(-0.2, 2.0);
        let ga = g.apply_vector(&a);
        let gb = g.apply_vector(&b);
        assert_abs_diff_eq!(a.dot(&b), ga.dot(&gb), epsilon = 1e-12);
    }

    #[test]
    fn rest_momentum_boosts_to_minus_gamma_m_v() {
        // (E, p) = (m, 0) with m = 1 under a boost v = 0.6.
        let g = PoincareTransform::boost(0.6);
        let p = g.apply_vector(&TwoVector::new(1.0, 0.0));
        assert_abs_diff_eq!(p.t, 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p.x, -0.75, epsilon = 1e-12);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let g = PoincareTransform { rapidity: 0.31, translation: TwoVector::new(0.7, -1.2) };
        let id = g.compose(&g.inverse());
        let p = TwoVector::new(0.4, 0.9);
        let q = id.apply_point(&p);
        assert_abs_diff_eq!(p.t, q.t, epsilon = 1e-12);
        assert_abs_diff_eq!(p.x, q.x, epsilon = 1e-12);
        assert_abs_diff_eq!(id.rapidity, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let g1 = PoincareTransform { rapidity: 0.2, translation: TwoVector::new(0.5, 0.1) };
        let g2 = PoincareTransform { rapidity: -0.45, translation: TwoVector::new(-0.3, 0.8) };
        let p = TwoVector::new(1.0, -2.0);
        let seq = g2.apply_point(&g1.apply_point(&p));
        let comp = g2.compose(&g1).apply_point(&p);
        assert_abs_diff_eq!(seq.t, comp.t, epsilon = 1e-12);
        assert_abs_diff_eq!(seq.x, comp.x, epsilon = 1e-12);
    }

    #[test]
    fn velocity_addition_stays_subluminal() {
        assert_abs_diff_eq!(add_velocities(0.6, 0.6), 15.0 / 17.0, epsilon = 1e-15);
        assert!(add_velocities(0.999, 0.999).abs() < 1.0);
    }
}
