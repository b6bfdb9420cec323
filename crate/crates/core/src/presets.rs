//! Ready-made wave functions and foliation families for experiments and
//! CLI defaults.

use num_complex::Complex64;

use crate::dirac::mode::{EnergyBranch, ModeSum};
use crate::dirac::{DiracTerm, MultiTimeWaveFunction};
use crate::error::Result;
use crate::foliation::{CurveShape, Domain, Foliation, Leaf};

/// Quadrature nodes used when normalizing preset states on the rest leaf.
pub const NORMALIZE_POINTS_1P: usize = 801;
pub const NORMALIZE_POINTS_2P: usize = 241;

/// Single-particle Gaussian wave packet, normalized on the `t = 0` leaf.
pub fn packet_state(
    mass: f64,
    center: f64,
    mean_momentum: f64,
    momentum_width: f64,
    modes: usize,
    domain: Domain,
) -> Result<MultiTimeWaveFunction> {
    let wf = MultiTimeWaveFunction::new(
        vec![mass],
        vec![DiracTerm {
            coefficient: Complex64::new(1.0, 0.0),
            factors: vec![ModeSum::gaussian_packet(
                center,
                mean_momentum,
                momentum_width,
                modes,
                EnergyBranch::Positive,
            )?],
        }],
    )?;
    wf.normalized_on(&Leaf::flat(0.0, 0.0, domain)?, NORMALIZE_POINTS_1P)
}

/// Parameters of a two-packet pair state.
#[derive(Clone, Copy, Debug)]
pub struct PairSpec {
    pub mass: f64,
    /// packets sit at `±separation/2`
    pub separation: f64,
    /// packets carry momenta `∓momentum` (converging for positive values)
    pub momentum: f64,
    pub momentum_width: f64,
    pub modes: usize,
}

impl Default for PairSpec {
    fn default() -> Self {
        PairSpec { mass: 1.0, separation: 2.0, momentum: 0.5, momentum_width: 0.5, modes: 48 }
    }
}

impl PairSpec {
    fn packets(&self) -> Result<(ModeSum, ModeSum)> {
        let left = ModeSum::gaussian_packet(
            -self.separation / 2.0,
            self.momentum,
            self.momentum_width,
            self.modes,
            EnergyBranch::Positive,
        )?;
        let right = ModeSum::gaussian_packet(
            self.separation / 2.0,
            -self.momentum,
            self.momentum_width,
            self.modes,
            EnergyBranch::Positive,
        )?;
        Ok((left, right))
    }
}

/// Exchange-entangled two-particle state
/// `c1 (L ⊗ R) + c2 (R ⊗ L)`, normalized on the `t = 0` leaf.
pub fn entangled_pair_state(
    spec: &PairSpec,
    second_coefficient: Complex64,
    domain: Domain,
) -> Result<MultiTimeWaveFunction> {
    let (left, right) = spec.packets()?;
    let wf = MultiTimeWaveFunction::new(
        vec![spec.mass, spec.mass],
        vec![
            DiracTerm { coefficient: Complex64::new(1.0, 0.0), factors: vec![left.clone(), right.clone()] },
            DiracTerm { coefficient: second_coefficient, factors: vec![right, left] },
        ],
    )?;
    wf.normalized_on(&Leaf::flat(0.0, 0.0, domain)?, NORMALIZE_POINTS_2P)
}

/// Product counterpart of [`entangled_pair_state`] (same packets, one term).
pub fn product_pair_state(spec: &PairSpec, domain: Domain) -> Result<MultiTimeWaveFunction> {
    let (left, right) = spec.packets()?;
    let wf = MultiTimeWaveFunction::new(
        vec![spec.mass, spec.mass],
        vec![DiracTerm { coefficient: Complex64::new(1.0, 0.0), factors: vec![left, right] }],
    )?;
    wf.normalized_on(&Leaf::flat(0.0, 0.0, domain)?, NORMALIZE_POINTS_2P)
}

/// Two-particle state whose terms pair the wave packets with opposite
/// energy branches. The inter-particle correlations then rotate at the
/// zitterbewegung frequency in both leaf times, which makes the frame
/// dependence of quantum equilibrium easy to resolve in the joint
/// distribution on a tilted leaf.
pub fn branch_entangled_pair_state(
    spec: &PairSpec,
    second_coefficient: Complex64,
    domain: Domain,
) -> Result<MultiTimeWaveFunction> {
    let left_pos = ModeSum::gaussian_packet(
        -spec.separation / 2.0,
        spec.momentum,
        spec.momentum_width,
        spec.modes,
        EnergyBranch::Positive,
    )?;
    let right_pos = ModeSum::gaussian_packet(
        spec.separation / 2.0,
        -spec.momentum,
        spec.momentum_width,
        spec.modes,
        EnergyBranch::Positive,
    )?;
    let left_neg = ModeSum::gaussian_packet(
        -spec.separation / 2.0,
        spec.momentum,
        spec.momentum_width,
        spec.modes,
        EnergyBranch::Negative,
    )?;
    let right_neg = ModeSum::gaussian_packet(
        spec.separation / 2.0,
        -spec.momentum,
        spec.momentum_width,
        spec.modes,
        EnergyBranch::Negative,
    )?;
    let wf = MultiTimeWaveFunction::new(
        vec![spec.mass, spec.mass],
        vec![
            DiracTerm { coefficient: Complex64::new(1.0, 0.0), factors: vec![left_pos, right_pos] },
            DiracTerm { coefficient: second_coefficient, factors: vec![left_neg, right_neg] },
        ],
    )?;
    wf.normalized_on(&Leaf::flat(0.0, 0.0, domain)?, NORMALIZE_POINTS_2P)
}

/// The default foliation family: five flat frames and three curved shapes.
pub fn default_family(domain: Domain) -> Result<Vec<Foliation>> {
    Ok(vec![
        Foliation::flat("flat0", 0.0, domain)?,
        Foliation::flat("flat+0.3", 0.3, domain)?,
        Foliation::flat("flat-0.3", -0.3, domain)?,
        Foliation::flat("flat+0.6", 0.6, domain)?,
        Foliation::flat("flat-0.6", -0.6, domain)?,
        Foliation::curved(
            "tanh-a",
            CurveShape::Tanh { amplitude: 0.3, center: 0.0, width: 1.0 },
            domain,
        )?,
        Foliation::curved(
            "tanh-b",
            CurveShape::Tanh { amplitude: -0.4, center: 1.0, width: 2.0 },
            domain,
        )?,
        Foliation::curved(
            "sin-a",
            CurveShape::Sin { amplitude: 0.15, angular_frequency: 2.0, phase: 0.0 },
            domain,
        )?,
    ])
}
