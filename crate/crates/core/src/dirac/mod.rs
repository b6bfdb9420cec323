//! Free multi-time Dirac wave functions in 1+1D: finite superpositions of
//! N-fold products of exact plane-wave modes, evaluated on arbitrary
//! spacelike leaves.
//!
//! The hypersurface density and currents are the spinor bilinears
//!
//! ```text
//! rho_Σ = ψ̄ (γ·n(σ_1)) ⋯ (γ·n(σ_N)) ψ
//! j_iΣ  = ψ̄ (γ·n(σ_1)) ⋯ γ_i^μ ⋯ (γ·n(σ_N)) ψ
//! ```
//!
//! with the Dirac adjoint taken per particle. For product terms these reduce
//! to products of 2x2 bilinears, which is how the hot paths evaluate them;
//! the full `2^N`-component tensor route exists alongside and the tests pin
//! the two against each other.

pub mod gamma;
pub mod mode;

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::foliation::Leaf;
use crate::spacetime::{PoincareTransform, TwoVector};
use crate::stats::simpson_weights;
use gamma::{adjoint_normal, mat_vec, Mat2, Spinor, GAMMA0_GAMMA1, IDENTITY};
use mode::ModeSum;

/// Imaginary parts of the (mathematically real) bilinears above this are a
/// numerical failure.
const BILINEAR_IMAG_TOL: f64 = 1e-10;
/// Density clamp: values in `[-1e-12, 0)` are rounded to zero, anything more
/// negative is an error rather than a clamp.
const RHO_NEG_TOL: f64 = 1e-12;

/// One product term: a coefficient and one mode sum per particle.
#[derive(Clone, Debug)]
pub struct DiracTerm {
    pub coefficient: Complex64,
    pub factors: Vec<ModeSum>,
}

/// `ψ : M^N -> (C²)^{⊗N}`, a finite superposition of product terms, each
/// factor solving its free Dirac equation exactly.
#[derive(Clone, Debug)]
pub struct MultiTimeWaveFunction {
    masses: Vec<f64>,
    terms: Vec<DiracTerm>,
}

impl MultiTimeWaveFunction {
    pub fn new(masses: Vec<f64>, terms: Vec<DiracTerm>) -> Result<Self> {
        if masses.is_empty() || masses.iter().any(|m| !(*m > 0.0)) {
            return Err(SimError::Validation("need at least one particle with positive mass".into()));
        }
        if terms.is_empty() {
            return Err(SimError::Validation("need at least one term".into()));
        }
        for t in &terms {
            if t.factors.len() != masses.len() {
                return Err(SimError::Validation(format!(
                    "term has {} factors for {} particles",
                    t.factors.len(),
                    masses.len()
                )));
            }
        }
        Ok(MultiTimeWaveFunction { masses, terms })
    }

    pub fn particle_count(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn terms(&self) -> &[DiracTerm] {
        &self.terms
    }

    /// Value as a `2^N`-component spinor tensor, component
    /// `I = i_1 2^{N-1} + ... + i_N`.
    pub fn evaluate(&self, points: &[TwoVector]) -> Result<Vec<Complex64>> {
        self.check_points(points)?;
        let n = self.particle_count();
        let mut out = vec![Complex64::default(); 1 << n];
        for term in &self.terms {
            let mut tensor = vec![term.coefficient];
            for (factor, (mass, point)) in term.factors.iter().zip(self.masses.iter().zip(points)) {
                let v = factor.value(*mass, point);
                let mut next = Vec::with_capacity(tensor.len() * 2);
                for t in &tensor {
                    next.push(*t * v[0]);
                    next.push(*t * v[1]);
                }
                tensor = next;
            }
            for (o, t) in out.iter_mut().zip(&tensor) {
                *o += *t;
            }
        }
        Ok(out)
    }

    fn check_points(&self, points: &[TwoVector]) -> Result<()> {
        if points.len() != self.particle_count() {
            return Err(SimError::Validation(format!(
                "{} points for {} particles",
                points.len(),
                self.particle_count()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(SimError::OutOfDomain("non-finite spacetime point".into()));
        }
        Ok(())
    }

    fn check_on_leaf(&self, leaf: &Leaf, config: &[TwoVector]) -> Result<()> {
        self.check_points(config)?;
        for p in config {
            if !leaf.contains(p) {
                return Err(SimError::Validation(format!(
                    "point ({}, {}) is off the leaf (T(x) = {})",
                    p.t,
                    p.x,
                    leaf.time_at(p.x)
                )));
            }
        }
        Ok(())
    }

    /// Per-term, per-particle factor values at the given points.
    fn factor_values(&self, points: &[TwoVector]) -> Vec<Vec<Spinor>> {
        self.terms
            .iter()
            .map(|term| {
                term.factors
                    .iter()
                    .zip(self.masses.iter().zip(points))
                    .map(|(f, (m, p))| f.value(*m, p))
                    .collect()
            })
            .collect()
    }

    /// Hypersurface probability density `rho_Σ` at a configuration on the
    /// leaf. Nonnegative for valid inputs; tiny negative round-off is
    /// clamped, larger negativity is reported as a numerical failure.
    pub fn rho_sigma(&self, leaf: &Leaf, config: &[TwoVector]) -> Result<f64> {
        self.check_on_leaf(leaf, config)?;
        let mats = self.normal_matrices(leaf, config)?;
        let values = self.factor_values(config);
        let rho = bilinear(&self.coefficients(), &values, &mats);
        real_density(rho)
    }

    /// All per-particle currents `j_iΣ` (and the density) in one pass.
    pub fn rho_and_currents(&self, leaf: &Leaf, config: &[TwoVector]) -> Result<(f64, Vec<TwoVector>)> {
        self.check_on_leaf(leaf, config)?;
        let mats = self.normal_matrices(leaf, config)?;
        let values = self.factor_values(config);
        let coeffs = self.coefficients();
        let rho = real_density(bilinear(&coeffs, &values, &mats))?;
        let n = self.particle_count();
        let mut currents = Vec::with_capacity(n);
        for i in 0..n {
            let mut m = mats.clone();
            m[i] = IDENTITY;
            let j0 = real_component(bilinear(&coeffs, &values, &m))?;
            m[i] = GAMMA0_GAMMA1;
            let j1 = real_component(bilinear(&coeffs, &values, &m))?;
            currents.push(TwoVector::new(j0, j1));
        }
        Ok((rho, currents))
    }

    /// Current 2-vector of particle `i` at a configuration on the leaf.
    pub fn current_sigma(&self, leaf: &Leaf, config: &[TwoVector], i: usize) -> Result<TwoVector> {
        if i >= self.particle_count() {
            return Err(SimError::Validation(format!("particle index {i} out of range")));
        }
        Ok(self.rho_and_currents(leaf, config)?.1[i])
    }

    fn coefficients(&self) -> Vec<Complex64> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    fn normal_matrices(&self, leaf: &Leaf, config: &[TwoVector]) -> Result<Vec<Mat2>> {
        config
            .iter()
            .map(|p| adjoint_normal(&leaf.unit_normal(p.x)?))
            .collect()
    }

    /// Exact Poincaré action `(U_g ψ)(x_1..x_N) = S ⊗ ... ⊗ S ψ(g⁻¹x_1, ..)`,
    /// realized mode by mode.
    pub fn apply_poincare(&self, g: &PoincareTransform) -> MultiTimeWaveFunction {
        let terms = self
            .terms
            .iter()
            .map(|term| DiracTerm {
                coefficient: term.coefficient,
                factors: term
                    .factors
                    .iter()
                    .zip(&self.masses)
                    .map(|(f, m)| f.transform(*m, g))
                    .collect(),
            })
            .collect();
        MultiTimeWaveFunction { masses: self.masses.clone(), terms }
    }

    /// Scale all coefficients (used by leaf normalization).
    pub fn scaled(&self, s: f64) -> MultiTimeWaveFunction {
        MultiTimeWaveFunction {
            masses: self.masses.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| DiracTerm { coefficient: t.coefficient * s, factors: t.factors.clone() })
                .collect(),
        }
    }

    /// Normalize so that `∫ rho_Σ Π dℓ = 1` on the given leaf.
    pub fn normalized_on(&self, leaf: &Leaf, points_per_axis: usize) -> Result<MultiTimeWaveFunction> {
        let q = LeafDensity::new(self, leaf, points_per_axis)?;
        let total = q.total();
        if !(total > 0.0) {
            return Err(SimError::Validation("state has zero mass on the reference leaf".into()));
        }
        Ok(self.scaled(1.0 / total.sqrt()))
    }
}

fn real_component(z: Complex64) -> Result<f64> {
    if z.im.abs() > BILINEAR_IMAG_TOL * (1.0 + z.re.abs()) {
        return Err(SimError::Numerical(format!("bilinear has imaginary part {:.3e}", z.im)));
    }
    Ok(z.re)
}

fn real_density(z: Complex64) -> Result<f64> {
    let re = real_component(z)?;
    if re < -RHO_NEG_TOL {
        return Err(SimError::Numerical(format!("density {re:.3e} is negative beyond round-off")));
    }
    Ok(re.max(0.0))
}

/// `Σ_ab conj(c_b) c_a Π_i (v_{b,i}† M_i v_{a,i})`
fn bilinear(coeffs: &[Complex64], values: &[Vec<Spinor>], mats: &[Mat2]) -> Complex64 {
    let t = coeffs.len();
    let n = mats.len();
    // hoist M v_a
    let mut mv: Vec<Vec<Spinor>> = Vec::with_capacity(t);
    for va in values {
        mv.push((0..n).map(|i| mat_vec(&mats[i], &va[i])).collect());
    }
    let mut acc = Complex64::default();
    for a in 0..t {
        for b in 0..t {
            let mut prod = coeffs[a] * coeffs[b].conj();
            for i in 0..n {
                let vb = &values[b][i];
                let m = &mv[a][i];
                prod *= vb[0].conj() * m[0] + vb[1].conj() * m[1];
            }
            acc += prod;
        }
    }
    acc
}

/// Composite Simpson result of `∫ rho_Σ Π dℓ` plus a coverage indicator.
#[derive(Clone, Copy, Debug)]
pub struct NormalizationCheck {
    pub value: f64,
    /// max boundary-node density over max density; large values mean the
    /// quadrature window truncates real mass.
    pub boundary_ratio: f64,
}

impl NormalizationCheck {
    pub fn coverage_ok(&self) -> bool {
        self.boundary_ratio <= 1e-6
    }
}

/// `∫ rho_Σ Π_i dℓ_i` over the leaf's spatial window with the proper-length
/// measure `dℓ = sqrt(1 - T'(x)²) dx` per particle.
pub fn normalization(
    wf: &MultiTimeWaveFunction,
    leaf: &Leaf,
    points_per_axis: usize,
) -> Result<NormalizationCheck> {
    let q = LeafDensity::new(wf, leaf, points_per_axis)?;
    Ok(NormalizationCheck { value: q.total(), boundary_ratio: q.boundary_ratio() })
}

/// Cached quadrature view of `rho_Σ` on one leaf: per-axis factor values and
/// normal matrices at the Simpson nodes. Powers normalization, marginal
/// densities, envelope scans and rejection sampling.
pub struct LeafDensity<'a> {
    wf: &'a MultiTimeWaveFunction,
    pub leaf: Leaf,
    nodes: Vec<f64>,
    /// Simpson weight times proper measure per node.
    weights: Vec<f64>,
    proper: Vec<f64>,
    amats: Vec<Mat2>,
    /// `[term][particle][node]`
    values: Vec<Vec<Vec<Spinor>>>,
    /// per (a, b, particle): `Σ_j w_j (v_b† A_j v_a)`
    overlaps: Vec<Complex64>,
    /// weighted marginal at the nodes, per axis
    marginals: Vec<Vec<f64>>,
    total: f64,
    max_weighted: f64,
    max_density: f64,
    boundary_ratio: f64,
}

impl<'a> LeafDensity<'a> {
    pub fn new(wf: &'a MultiTimeWaveFunction, leaf: &Leaf, points_per_axis: usize) -> Result<Self> {
        let n = wf.particle_count();
        let p = if points_per_axis % 2 == 1 { points_per_axis } else { points_per_axis + 1 };
        if p < 11 {
            return Err(SimError::Validation("quadrature needs at least 11 points per axis".into()));
        }
        let domain = leaf.domain;
        let dx = domain.length() / (p - 1) as f64;
        let nodes: Vec<f64> = (0..p).map(|j| domain.lo + j as f64 * dx).collect();
        let simpson = simpson_weights(p, dx);
        let proper: Vec<f64> = nodes.iter().map(|x| leaf.proper_measure(*x)).collect();
        let weights: Vec<f64> =
            simpson.iter().zip(&proper).map(|(w, pm)| w * pm).collect();
        let amats: Vec<Mat2> = nodes
            .iter()
            .map(|x| adjoint_normal(&leaf.unit_normal(*x)?))
            .collect::<Result<_>>()?;
        let values: Vec<Vec<Vec<Spinor>>> = wf
            .terms
            .iter()
            .map(|term| {
                term.factors
                    .iter()
                    .zip(&wf.masses)
                    .map(|(f, m)| {
                        nodes
                            .iter()
                            .map(|x| f.value(*m, &TwoVector::new(leaf.time_at(*x), *x)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let t = wf.terms.len();
        // weighted single-particle overlaps for marginal evaluation
        let mut overlaps = vec![Complex64::default(); t * t * n];
        for a in 0..t {
            for b in 0..t {
                for i in 0..n {
                    let mut acc = Complex64::default();
                    for j in 0..p {
                        let mv = mat_vec(&amats[j], &values[a][i][j]);
                        let vb = &values[b][i][j];
                        acc += (vb[0].conj() * mv[0] + vb[1].conj() * mv[1]) * weights[j];
                    }
                    overlaps[(a * t + b) * n + i] = acc;
                }
            }
        }
        let mut q = LeafDensity {
            wf,
            leaf: leaf.clone(),
            nodes,
            weights,
            proper,
            amats,
            values,
            overlaps,
            marginals: Vec::new(),
            total: 0.0,
            max_weighted: 0.0,
            max_density: 0.0,
            boundary_ratio: 0.0,
        };
        q.scan()?;
        Ok(q)
    }

    /// One full sweep of the tensor grid: total mass, per-axis marginals,
    /// envelope maximum, boundary coverage.
    fn scan(&mut self) -> Result<()> {
        let n = self.wf.particle_count();
        let p = self.nodes.len();
        let t = self.wf.terms.len();
        // per (a, b, particle, node) single-particle bilinears
        let mut h = vec![Complex64::default(); t * t * n * p];
        for a in 0..t {
            for b in 0..t {
                for i in 0..n {
                    for j in 0..p {
                        let mv = mat_vec(&self.amats[j], &self.values[a][i][j]);
                        let vb = &self.values[b][i][j];
                        h[((a * t + b) * n + i) * p + j] =
                            vb[0].conj() * mv[0] + vb[1].conj() * mv[1];
                    }
                }
            }
        }
        let coeffs = self.wf.coefficients();
        let mut idx = vec![0usize; n];
        let mut total = 0.0;
        let mut max_w = 0.0f64;
        let mut max_rho = 0.0f64;
        let mut max_boundary = 0.0f64;
        let mut marginals = vec![vec![0.0; p]; n];
        loop {
            let mut rho_c = Complex64::default();
            for a in 0..t {
                for b in 0..t {
                    let mut prod = coeffs[a] * coeffs[b].conj();
                    for (i, j) in idx.iter().enumerate() {
                        prod *= h[((a * t + b) * n + i) * p + j];
                    }
                    rho_c += prod;
                }
            }
            let rho = real_density(rho_c)?;
            let mut w_all = 1.0;
            let mut proper_all = 1.0;
            for j in &idx {
                w_all *= self.weights[*j];
                proper_all *= self.proper[*j];
            }
            total += rho * w_all;
            max_w = max_w.max(rho * proper_all);
            max_rho = max_rho.max(rho);
            if idx.iter().any(|j| *j == 0 || *j == p - 1) {
                max_boundary = max_boundary.max(rho);
            }
            for (i, j) in idx.iter().enumerate() {
                // weighted marginal: all weights except axis i, proper at i
                let others = w_all / self.weights[*j];
                marginals[i][*j] += rho * others * self.proper[*j];
            }
            // advance multi-index
            let mut carry = true;
            for j in (0..n).rev() {
                idx[j] += 1;
                if idx[j] < p {
                    carry = false;
                    break;
                }
                idx[j] = 0;
            }
            if carry {
                break;
            }
        }
        self.total = total;
        self.max_weighted = max_w;
        self.max_density = max_rho;
        self.boundary_ratio = if max_rho > 0.0 { max_boundary / max_rho } else { 1.0 };
        self.marginals = marginals;
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn boundary_ratio(&self) -> f64 {
        self.boundary_ratio
    }

    /// Scanned maximum of the sampling density `rho_Σ Π sqrt(1 - T'^2)`.
    pub fn max_weighted(&self) -> f64 {
        self.max_weighted
    }

    /// Scanned maximum of the bare density `rho_Σ` (node-guard reference).
    pub fn max_density(&self) -> f64 {
        self.max_density
    }

    /// Sampling density at spatial coordinates: `rho_Σ(σ(x)) Π_i proper(x_i)`.
    pub fn weighted_at(&self, xs: &[f64]) -> Result<f64> {
        let config: Vec<TwoVector> = xs.iter().map(|x| self.leaf.point_at(*x)).collect();
        let rho = self.wf.rho_sigma(&self.leaf, &config)?;
        Ok(rho * xs.iter().map(|x| self.leaf.proper_measure(*x)).product::<f64>())
    }

    /// Exact marginal density of particle `axis` at coordinate `x`
    /// (including proper measure), integrating the other particles with the
    /// cached quadrature.
    pub fn marginal_at(&self, axis: usize, x: f64) -> Result<f64> {
        let n = self.wf.particle_count();
        let t = self.wf.terms.len();
        let point = self.leaf.point_at(x);
        let amat = adjoint_normal(&self.leaf.unit_normal(x)?)?;
        let coeffs = self.wf.coefficients();
        let mut acc = Complex64::default();
        for a in 0..t {
            for b in 0..t {
                let va = self.wf.terms[a].factors[axis].value(self.wf.masses[axis], &point);
                let vb = self.wf.terms[b].factors[axis].value(self.wf.masses[axis], &point);
                let mv = mat_vec(&amat, &va);
                let mut prod = coeffs[a] * coeffs[b].conj() * (vb[0].conj() * mv[0] + vb[1].conj() * mv[1]);
                for i in 0..n {
                    if i != axis {
                        prod *= self.overlaps[(a * t + b) * n + i];
                    }
                }
                acc += prod;
            }
        }
        Ok(real_density(acc)? * self.leaf.proper_measure(x))
    }

    /// Mean and spread of the marginal of particle `axis` from the node grid.
    pub fn marginal_moments(&self, axis: usize) -> (f64, f64) {
        let m = &self.marginals[axis];
        let mass: f64 = m.iter().sum();
        let mean: f64 = m.iter().zip(&self.nodes).map(|(q, x)| q * x).sum::<f64>() / mass;
        let var: f64 =
            m.iter().zip(&self.nodes).map(|(q, x)| q * (x - mean) * (x - mean)).sum::<f64>() / mass;
        (mean, var.max(0.0).sqrt())
    }

    /// Per-axis interval outside which the marginal density is below
    /// `threshold` times its maximum.
    pub fn support_box(&self, threshold: f64) -> Vec<(f64, f64)> {
        self.marginals
            .iter()
            .map(|m| {
                let max = m.iter().cloned().fold(0.0, f64::max);
                let cut = threshold * max;
                let first = m.iter().position(|q| *q > cut).unwrap_or(0);
                let last = m.iter().rposition(|q| *q > cut).unwrap_or(m.len() - 1);
                (self.nodes[first.saturating_sub(1)], self.nodes[(last + 1).min(m.len() - 1)])
            })
            .collect()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn particle_count(&self) -> usize {
        self.wf.particle_count()
    }
}

#[cfg(test)]
mod tests;
