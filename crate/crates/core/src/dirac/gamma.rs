//! 2x2 gamma matrices for the 1+1D Dirac equation, metric signature (+, -):
//! `γ⁰ = [[1, 0], [0, -1]]`, `γ¹ = [[0, 1], [-1, 0]]`.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::spacetime::TwoVector;

pub type Spinor = [Complex64; 2];
pub type Mat2 = [[Complex64; 2]; 2];

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

pub const GAMMA0: Mat2 = [[C1, C0], [C0, Complex64::new(-1.0, 0.0)]];
pub const GAMMA1: Mat2 = [[C0, C1], [Complex64::new(-1.0, 0.0), C0]];
/// `γ⁰ γ¹ = [[0, 1], [1, 0]]`
pub const GAMMA0_GAMMA1: Mat2 = [[C0, C1], [C1, C0]];
pub const IDENTITY: Mat2 = [[C1, C0], [C0, C1]];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[C0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, item) in row.iter_mut().enumerate() {
            *item = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat_vec(m: &Mat2, v: &Spinor) -> Spinor {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = *a;
    for (row, rb) in out.iter_mut().zip(b) {
        for (v, w) in row.iter_mut().zip(rb) {
            *v += *w;
        }
    }
    out
}

pub fn mat_scale(a: &Mat2, s: Complex64) -> Mat2 {
    let mut out = *a;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    out
}

pub fn mat_max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut d = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

/// Contraction `γ·n = γ⁰ n⁰ - γ¹ n¹` for a future-oriented unit timelike `n`.
pub fn gamma_dot(n: &TwoVector) -> Result<Mat2> {
    if !(n.t > 0.0) {
        return Err(SimError::Validation(format!("normal {n:?} is not future-oriented")));
    }
    if (n.minkowski_norm2() - 1.0).abs() > 1e-9 {
        return Err(SimError::Validation(format!("normal {n:?} is not a unit timelike vector")));
    }
    Ok(mat_add(&mat_scale(&GAMMA0, n.t.into()), &mat_scale(&GAMMA1, (-n.x).into())))
}

/// `γ⁰ (γ·n)` — the per-particle factor of the hypersurface density. For
/// future unit timelike `n` this matrix is Hermitian positive definite.
pub fn adjoint_normal(n: &TwoVector) -> Result<Mat2> {
    Ok(mat_mul(&GAMMA0, &gamma_dot(n)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn mat_sub(a: &Mat2, b: &Mat2) -> Mat2 {
        mat_add(a, &mat_scale(b, Complex64::new(-1.0, 0.0)))
    }

    #[test]
    fn clifford_relations_hold_exactly() {
        let g0g0 = mat_mul(&GAMMA0, &GAMMA0);
        let g1g1 = mat_mul(&GAMMA1, &GAMMA1);
        let anti = mat_add(&mat_mul(&GAMMA0, &GAMMA1), &mat_mul(&GAMMA1, &GAMMA0));
        assert!(mat_max_abs_diff(&g0g0, &IDENTITY) <= 1e-15);
        assert!(mat_max_abs_diff(&g1g1, &mat_scale(&IDENTITY, Complex64::new(-1.0, 0.0))) <= 1e-15);
        assert!(mat_max_abs_diff(&anti, &[[C0; 2]; 2]) <= 1e-15);
        assert!(mat_max_abs_diff(&mat_mul(&GAMMA0, &GAMMA1), &GAMMA0_GAMMA1) <= 1e-15);
    }

    #[test]
    fn gamma_dot_of_rest_normal_is_gamma0() {
        let m = gamma_dot(&TwoVector::new(1.0, 0.0)).unwrap();
        assert!(mat_max_abs_diff(&m, &GAMMA0) <= 1e-15);
    }

    #[test]
    fn gamma_dot_of_tilted_normal() {
        let m = gamma_dot(&TwoVector::new(1.25, 0.75)).unwrap();
        let want = mat_add(
            &mat_scale(&GAMMA0, Complex64::new(1.25, 0.0)),
            &mat_scale(&GAMMA1, Complex64::new(-0.75, 0.0)),
        );
        assert!(mat_max_abs_diff(&m, &want) <= 1e-15);
    }

    #[test]
    fn gamma_dot_squares_to_identity_for_random_unit_normals() {
        let mut rng = crate::rng::stream_rng(17, 0);
        for _ in 0..100 {
            let eta: f64 = -2.0 + 4.0 * rng.random::<f64>();
            let n = TwoVector::new(eta.cosh(), eta.sinh());
            let m = gamma_dot(&n).unwrap();
            let sq = mat_mul(&m, &m);
            assert!(mat_max_abs_diff(&sq, &IDENTITY) <= 1e-12, "failed for eta = {eta}");
        }
    }

    #[test]
    fn gamma_dot_rejects_bad_normals() {
        assert!(gamma_dot(&TwoVector::new(-1.0, 0.0)).is_err());
        assert!(gamma_dot(&TwoVector::new(1.0, 0.5)).is_err());
        assert!(gamma_dot(&TwoVector::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn adjoint_normal_is_hermitian_positive() {
        let n = TwoVector::new(1.25, -0.75);
        let a = adjoint_normal(&n).unwrap();
        assert!((a[0][1] - a[1][0].conj()).norm() <= 1e-15);
        // eigenvalues n0 -+ n1 of [[n0, -n1], [-n1, n0]]
        let sub = mat_sub(&a, &[[Complex64::new(1.25, 0.0), Complex64::new(0.75, 0.0)],
                                [Complex64::new(0.75, 0.0), Complex64::new(1.25, 0.0)]]);
        assert!(mat_max_abs_diff(&sub, &[[C0; 2]; 2]) <= 1e-15);
        assert!(1.25 - 0.75 > 0.0);
    }
}
