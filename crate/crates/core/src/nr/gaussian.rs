//! Exact free evolution of complex Gaussian factors.
//!
//! A single-particle factor is stored as the quadratic exponential
//! `phi(x) = exp(c x^2 + b x + a)` with `Re c < 0`. Free Schrödinger
//! evolution maps this family to itself: Fourier transform, multiply by
//! `exp(-i p^2 t / 2m)`, transform back — all three steps are Gaussian
//! integrals, so the evolved coefficients come out in closed form. The
//! momentum-space coefficient keeps `Re < 0` for every real `t`, which makes
//! the formulas non-singular both forward and backward in time.

use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One particle's Gaussian factor `exp(c x^2 + b x + a)`.
#[derive(Clone, Copy, Debug)]
pub struct GaussianFactor {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl GaussianFactor {
    /// Normalized packet `(2πσ²)^{-1/4} exp(-(x-x0)²/(4σ²) + i p0 (x - x0))`
    /// with position spread `σ` at construction time.
    pub fn packet(center: f64, momentum: f64, width: f64) -> Self {
        assert!(width > 0.0, "packet width must be positive");
        let s2 = width * width;
        let c = Complex64::new(-1.0 / (4.0 * s2), 0.0);
        let b = Complex64::new(center / (2.0 * s2), momentum);
        let a = Complex64::new(
            -center * center / (4.0 * s2) - 0.25 * (2.0 * std::f64::consts::PI * s2).ln(),
            -momentum * center,
        );
        GaussianFactor { a, b, c }
    }

    /// Coefficients after free evolution for time `t` with mass `m`.
    ///
    /// All complex logarithms below take arguments in the right half plane,
    /// so the principal branch is the analytic continuation from `t = 0`.
    pub fn evolved(&self, t: f64, mass: f64) -> GaussianFactor {
        if t == 0.0 {
            return *self;
        }
        // position -> momentum representation
        let cm = 1.0 / (4.0 * self.c);
        let bm = I * self.b / (2.0 * self.c);
        let am = self.a - self.b * self.b / (4.0 * self.c) + 0.5 * (-0.5 / self.c).ln();
        // kinetic phase
        let cmt = cm - I * t / (2.0 * mass);
        // momentum -> position representation
        let c = 1.0 / (4.0 * cmt);
        let b = -I * bm / (2.0 * cmt);
        let a = am - bm * bm / (4.0 * cmt) + 0.5 * (-0.5 / cmt).ln();
        GaussianFactor { a, b, c }
    }

    pub fn value(&self, x: f64) -> Complex64 {
        ((self.c * x + self.b) * x + self.a).exp()
    }

    /// Logarithmic derivative `phi'/phi = b + 2 c x`.
    pub fn log_derivative(&self, x: f64) -> Complex64 {
        self.b + 2.0 * self.c * x
    }

    /// `phi''/phi = (b + 2 c x)^2 + 2 c`.
    pub fn log_second_derivative(&self, x: f64) -> Complex64 {
        let d = self.log_derivative(x);
        d * d + 2.0 * self.c
    }

    /// `∫ conj(other)(x) · self(x) dx` in closed form.
    pub fn overlap(&self, other: &GaussianFactor) -> Complex64 {
        let c = self.c + other.c.conj();
        let b = self.b + other.b.conj();
        let a = self.a + other.a.conj();
        debug_assert!(c.re < 0.0);
        (std::f64::consts::PI / -c).sqrt() * (a - b * b / (4.0 * c)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn packet_is_normalized() {
        for (x0, p0, s) in [(0.0, 0.0, 1.0), (1.3, -0.7, 0.4), (-2.0, 2.5, 3.0)] {
            let g = GaussianFactor::packet(x0, p0, s);
            let n = g.overlap(&g);
            assert_abs_diff_eq!(n.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(n.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn evolution_is_identity_at_t_zero_and_reversible() {
        let g = GaussianFactor::packet(0.5, 1.2, 0.8);
        let back = g.evolved(1.7, 1.0).evolved(-1.7, 1.0);
        for x in [-1.0, 0.0, 0.3, 2.0] {
            let v0 = g.value(x);
            let v1 = back.value(x);
            assert_abs_diff_eq!(v0.re, v1.re, epsilon = 1e-12);
            assert_abs_diff_eq!(v0.im, v1.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn evolution_preserves_norm() {
        let g = GaussianFactor::packet(-0.5, 0.9, 0.6);
        for t in [0.1, 1.0, 5.0, -2.0] {
            let e = g.evolved(t, 2.0);
            assert_abs_diff_eq!(e.overlap(&e).re, 1.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn free_gaussian_spreads_with_known_width() {
        // sigma(t)^2 = sigma^2 + (t / (2 m sigma))^2 for the |psi|^2 spread
        let g = GaussianFactor::packet(0.0, 0.0, 1.0).evolved(2.0, 1.0);
        // |phi(x)|^2 = exp(2 Re a + 2 Re b x + 2 Re c x^2): spread = 1/sqrt(-4 Re c)
        let spread2 = -1.0 / (4.0 * g.c.re);
        assert_abs_diff_eq!(spread2, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn guiding_velocity_of_spreading_gaussian() {
        // v(x, t) = x t / (4 m^2 sigma^4 + t^2) for a packet at rest; at
        // m = sigma = 1, x = 2, t = 2 this is 0.5.
        let g = GaussianFactor::packet(0.0, 0.0, 1.0).evolved(2.0, 1.0);
        let v = g.log_derivative(2.0).im / 1.0;
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn schroedinger_residual_vanishes() {
        // i d/dt phi = -(1/2m) phi'' checked with a central difference in t.
        let g = GaussianFactor::packet(0.3, 0.8, 0.7);
        let (t, m, x, h) = (0.9, 1.4, 0.5, 1e-5);
        let plus = g.evolved(t + h, m).value(x);
        let minus = g.evolved(t - h, m).value(x);
        let dt = (plus - minus) / (2.0 * h);
        let at = g.evolved(t, m);
        let rhs = I * at.log_second_derivative(x) * at.value(x) / (2.0 * m);
        assert_abs_diff_eq!(dt.re, rhs.re, epsilon = 1e-8);
        assert_abs_diff_eq!(dt.im, rhs.im, epsilon = 1e-8);
    }
}
