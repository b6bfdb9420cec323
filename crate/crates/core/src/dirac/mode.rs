//! Exact plane-wave solutions of the free 1+1D Dirac equation and finite
//! mode sums (wave packets) built from them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::spacetime::{PoincareTransform, TwoVector};

use super::gamma::{mat_add, mat_scale, mat_vec, Spinor, GAMMA0, GAMMA1, IDENTITY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyBranch {
    Positive,
    Negative,
}

impl EnergyBranch {
    pub fn sign(&self) -> f64 {
        match self {
            EnergyBranch::Positive => 1.0,
            EnergyBranch::Negative => -1.0,
        }
    }
}

pub fn energy(momentum: f64, mass: f64) -> f64 {
    (momentum * momentum + mass * mass).sqrt()
}

/// Normalized spinor of the mode `u_s(p) e^{-i(sE t - p x)}` with `u†u = 1`,
/// satisfying `(γ⁰ sE - γ¹ p - m) u = 0`.
pub fn mode_spinor(momentum: f64, mass: f64, branch: EnergyBranch) -> [f64; 2] {
    let e = energy(momentum, mass);
    let raw = match branch {
        EnergyBranch::Positive => [e + mass, momentum],
        EnergyBranch::Negative => [-momentum, e + mass],
    };
    let norm = (raw[0] * raw[0] + raw[1] * raw[1]).sqrt();
    [raw[0] / norm, raw[1] / norm]
}

/// `|(γ⁰ sE - γ¹ p - m) u|` — zero for an exact mode.
pub fn dirac_residual(momentum: f64, mass: f64, branch: EnergyBranch) -> f64 {
    let e = branch.sign() * energy(momentum, mass);
    let u = mode_spinor(momentum, mass, branch);
    let op = mat_add(
        &mat_add(&mat_scale(&GAMMA0, e.into()), &mat_scale(&GAMMA1, (-momentum).into())),
        &mat_scale(&IDENTITY, (-mass).into()),
    );
    let r = mat_vec(&op, &[u[0].into(), u[1].into()]);
    (r[0].norm_sqr() + r[1].norm_sqr()).sqrt()
}

/// One plane-wave mode with its superposition coefficient.
#[derive(Clone, Copy, Debug)]
pub struct PlaneWaveMode {
    pub coefficient: Complex64,
    pub momentum: f64,
    pub branch: EnergyBranch,
}

/// A single particle's factor: a finite superposition of plane-wave modes.
#[derive(Clone, Debug)]
pub struct ModeSum {
    pub modes: Vec<PlaneWaveMode>,
}

impl ModeSum {
    pub fn new(modes: Vec<PlaneWaveMode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(SimError::Validation("mode sum needs at least one mode".into()));
        }
        Ok(ModeSum { modes })
    }

    /// Wave packet with a Gaussian momentum profile: amplitudes
    /// `exp(-(p - p̄)² / (4 σ_p²))` on a uniform momentum grid cut off at
    /// `±6 σ_p`, phased to center the packet at `x = center` on the `t = 0`
    /// leaf. Spatial width there is about `1 / (2 σ_p)`.
    pub fn gaussian_packet(
        center: f64,
        mean_momentum: f64,
        momentum_width: f64,
        mode_count: usize,
        branch: EnergyBranch,
    ) -> Result<Self> {
        if !(momentum_width > 0.0) || mode_count < 2 {
            return Err(SimError::Validation(
                "packet needs momentum_width > 0 and at least two modes".into(),
            ));
        }
        let modes = (0..mode_count)
            .map(|k| {
                let xi = -6.0 + 12.0 * k as f64 / (mode_count - 1) as f64;
                let p = mean_momentum + momentum_width * xi;
                let amp = (-xi * xi / 4.0).exp();
                PlaneWaveMode {
                    coefficient: Complex64::from_polar(amp, -p * center),
                    momentum: p,
                    branch,
                }
            })
            .collect();
        Ok(ModeSum { modes })
    }

    /// `Σ_k α_k u_s(p_k) e^{-i (s E_k t - p_k x)}`
    pub fn value(&self, mass: f64, point: &TwoVector) -> Spinor {
        let mut out = [Complex64::default(); 2];
        for mode in &self.modes {
            let e = mode.branch.sign() * energy(mode.momentum, mass);
            let u = mode_spinor(mode.momentum, mass, mode.branch);
            let phase = Complex64::from_polar(1.0, -(e * point.t - mode.momentum * point.x));
            let c = mode.coefficient * phase;
            out[0] += c * u[0];
            out[1] += c * u[1];
        }
        out
    }

    /// Exact Poincaré action in the plane-wave basis: momenta are boosted,
    /// spinors picked up from the boosted momentum, and the translation
    /// becomes a per-mode phase.
    pub fn transform(&self, mass: f64, g: &PoincareTransform) -> ModeSum {
        let s_mat = g.spinor_matrix();
        let modes = self
            .modes
            .iter()
            .map(|mode| {
                let e = mode.branch.sign() * energy(mode.momentum, mass);
                let p2 = g.apply_vector(&TwoVector::new(e, mode.momentum));
                let u = mode_spinor(mode.momentum, mass, mode.branch);
                let su = [
                    s_mat[0][0] * u[0] + s_mat[0][1] * u[1],
                    s_mat[1][0] * u[0] + s_mat[1][1] * u[1],
                ];
                let u2 = mode_spinor(p2.x, mass, mode.branch);
                // S u is collinear with the boosted-mode spinor
                let scale = su[0] * u2[0] + su[1] * u2[1];
                debug_assert!(
                    ((su[0] - scale * u2[0]).abs()).max((su[1] - scale * u2[1]).abs()) <= 1e-10,
                    "spinor boost is not collinear with the boosted mode"
                );
                let phase = Complex64::from_polar(1.0, p2.dot(&g.translation));
                PlaneWaveMode {
                    coefficient: mode.coefficient * scale * phase,
                    momentum: p2.x,
                    branch: mode.branch,
                }
            })
            .collect();
        ModeSum { modes }
    }

    pub fn scaled(&self, s: Complex64) -> ModeSum {
        ModeSum {
            modes: self
                .modes
                .iter()
                .map(|m| PlaneWaveMode { coefficient: m.coefficient * s, ..*m })
                .collect(),
        }
    }
}
