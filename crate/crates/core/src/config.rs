//! TOML experiment configuration: schema types, validation, and builders
//! for the simulation objects.
//!
//! Unknown keys are rejected with the offending key named. All physical
//! constraints (subluminal velocities, positive widths, slope bounds) are
//! checked before any computation starts.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac::mode::{EnergyBranch, ModeSum, PlaneWaveMode};
use crate::dirac::{DiracTerm, MultiTimeWaveFunction};
use crate::ensemble::EnsembleSpec;
use crate::error::{Result, SimError};
use crate::event::EventPredicate;
use crate::foliation::{CurveShape, Domain, Foliation, Leaf};
use crate::nolaw::{FoliationFamily, PairPredicate};
use crate::nr::grid::{GridSpec, Potential};
use crate::nr::{NrTerm, NrWaveFunction, PacketSpec};
use crate::spacetime::{PoincareTransform, TwoVector};

fn default_one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Nonrelativistic,
    Dirac,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    /// "packet" or "modes"
    pub kind: String,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub momentum: f64,
    /// momentum spread (dirac) or position spread (nonrelativistic)
    #[serde(default = "default_one")]
    pub width: f64,
    /// mode count of a dirac packet
    #[serde(default)]
    pub modes: Option<usize>,
    /// "positive" or "negative"
    #[serde(default)]
    pub branch: Option<String>,
    /// explicit mode list (kind = "modes")
    #[serde(default)]
    pub mode_list: Vec<ModeConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub momentum: f64,
    #[serde(default)]
    pub branch: Option<String>,
    #[serde(default = "default_coeff")]
    pub coefficient: [f64; 2],
}

fn default_coeff() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    #[serde(default = "default_coeff")]
    pub coefficient: [f64; 2],
    pub factors: Vec<FactorConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveFunctionConfig {
    pub sector: Sector,
    pub masses: Vec<f64>,
    pub terms: Vec<TermConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    pub length: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// "none" or "harmonic"
    pub kind: String,
    #[serde(default = "default_one")]
    pub omega: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NrConfig {
    /// "analytic" or "grid"
    pub backend: String,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub potential: Option<PotentialConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoliationConfig {
    pub label: String,
    /// "flat", "tanh" or "sin"
    pub kind: String,
    #[serde(default)]
    pub velocity: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "default_one")]
    pub width: f64,
    #[serde(default = "default_one")]
    pub angular_frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    /// "crosses", "and", "or", "not", "always", "never"
    pub kind: String,
    #[serde(default)]
    pub particle: Option<usize>,
    #[serde(default)]
    pub t_min: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub x_min: Option<f64>,
    #[serde(default)]
    pub x_max: Option<f64>,
    /// for "label" atoms of the primitive-ontology variant
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub children: Vec<EventConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub s0: f64,
    #[serde(default = "default_s1")]
    pub s1: f64,
    #[serde(default = "default_ds")]
    pub ds: f64,
    /// RK4 step of the nonrelativistic integrator
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_s1")]
    pub t1: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_joint_bins")]
    pub joint_bins: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_one")]
    pub velocity_scale: f64,
    /// spatial starting configuration for single-trajectory experiments
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

fn default_samples() -> usize {
    1000
}
fn default_s1() -> f64 {
    2.0
}
fn default_ds() -> f64 {
    1e-3
}
fn default_step() -> f64 {
    1e-3
}
fn default_bins() -> usize {
    30
}
fn default_joint_bins() -> usize {
    10
}
fn default_epsilon() -> f64 {
    0.02
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty run config")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossFoliationConfig {
    pub foliation: FoliationConfig,
    /// leaf parameter of the probe within its foliation
    pub parameter: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    #[serde(default)]
    pub velocity: f64,
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub x: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapConfig {
    pub margin: f64,
    pub bump: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub disjoint_a: EventConfig,
    pub disjoint_b: EventConfig,
    pub nested_inner: EventConfig,
    pub nested_outer: EventConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub wavefunction: WaveFunctionConfig,
    #[serde(default)]
    pub nonrelativistic: Option<NrConfig>,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    #[serde(default)]
    pub foliation: Option<FoliationConfig>,
    #[serde(default)]
    pub family: Option<Vec<FoliationConfig>>,
    #[serde(default)]
    pub event: Option<EventConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub cross_foliation: Option<CrossFoliationConfig>,
    #[serde(default)]
    pub transform: Option<TransformConfig>,
    #[serde(default)]
    pub overlap: Option<OverlapConfig>,
    #[serde(default)]
    pub capacity: Option<CapacityConfig>,
}

impl ExperimentConfig {
    /// Parse a TOML string and apply `key=value` dot-path overrides, then
    /// validate physical constraints.
    pub fn from_toml(text: &str, overrides: &[(String, String)]) -> Result<(Self, String)> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        for (path, raw) in overrides {
            apply_override(&mut value, path, raw)?;
        }
        let canonical =
            toml::to_string(&value).map_err(|e| SimError::Config(e.to_string()))?;
        let config: ExperimentConfig =
            value.try_into().map_err(|e: toml::de::Error| SimError::Config(e.to_string()))?;
        config.validate()?;
        Ok((config, canonical))
    }

    pub fn validate(&self) -> Result<()> {
        let wf = &self.wavefunction;
        if wf.masses.is_empty() {
            return Err(SimError::Config("wavefunction.masses must be nonempty".into()));
        }
        if wf.masses.iter().any(|m| !(*m > 0.0)) {
            return Err(SimError::Config("wavefunction.masses must be positive".into()));
        }
        if wf.terms.is_empty() {
            return Err(SimError::Config("wavefunction.terms must be nonempty".into()));
        }
        for (i, term) in wf.terms.iter().enumerate() {
            if term.factors.len() != wf.masses.len() {
                return Err(SimError::Config(format!(
                    "wavefunction.terms[{i}] has {} factors for {} particles",
                    term.factors.len(),
                    wf.masses.len()
                )));
            }
            for (j, factor) in term.factors.iter().enumerate() {
                match factor.kind.as_str() {
                    "packet" => {
                        if !(factor.width > 0.0) {
                            return Err(SimError::Config(format!(
                                "wavefunction.terms[{i}].factors[{j}].width must be positive"
                            )));
                        }
                    }
                    "modes" => {
                        if factor.mode_list.is_empty() {
                            return Err(SimError::Config(format!(
                                "wavefunction.terms[{i}].factors[{j}].mode_list must be nonempty"
                            )));
                        }
                    }
                    other => {
                        return Err(SimError::Config(format!(
                            "wavefunction.terms[{i}].factors[{j}].kind: unknown kind \"{other}\""
                        )))
                    }
                }
            }
        }
        if let Some(d) = &self.domain {
            Domain::new(d.lo, d.hi).map_err(|e| SimError::Config(format!("domain: {e}")))?;
        }
        if let Some(f) = &self.foliation {
            self.build_foliation(f)?;
        }
        if let Some(family) = &self.family {
            for f in family {
                self.build_foliation(f)?;
            }
        }
        if !(self.run.ds > 0.0) {
            return Err(SimError::Config("run.ds must be positive".into()));
        }
        if !(self.run.step > 0.0) {
            return Err(SimError::Config("run.step must be positive".into()));
        }
        if !(self.run.epsilon > 0.0 && self.run.epsilon < 1.0) {
            return Err(SimError::Config("run.epsilon must lie in (0, 1)".into()));
        }
        if self.run.bins < 2 || self.run.joint_bins < 2 {
            return Err(SimError::Config("run.bins and run.joint_bins must be at least 2".into()));
        }
        if let Some(t) = &self.transform {
            if !(t.velocity.abs() < 1.0) {
                return Err(SimError::Config(format!(
                    "transform.velocity = {} is not subluminal",
                    t.velocity
                )));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        self.domain
            .as_ref()
            .map(|d| Domain { lo: d.lo, hi: d.hi })
            .unwrap_or_default()
    }

    pub fn ensemble_spec(&self) -> EnsembleSpec {
        EnsembleSpec {
            samples: self.run.samples,
            seed: self.run.seed,
            s0: self.run.s0,
            s1: self.run.s1,
            ds: self.run.ds,
            bins: self.run.bins,
            joint_bins: self.run.joint_bins,
            velocity_scale: self.run.velocity_scale,
        }
    }

    pub fn build_foliation(&self, f: &FoliationConfig) -> Result<Foliation> {
        let domain = self.domain();
        match f.kind.as_str() {
            "flat" => {
                if !(f.velocity.abs() < 1.0) {
                    return Err(SimError::Config(format!(
                        "foliation.velocity = {} is not subluminal (|v| < 1 required)",
                        f.velocity
                    )));
                }
                Foliation::flat(f.label.clone(), f.velocity, domain)
            }
            "tanh" => Foliation::curved(
                f.label.clone(),
                CurveShape::Tanh { amplitude: f.amplitude, center: f.center, width: f.width },
                domain,
            )
            .map_err(|e| SimError::Config(format!("foliation \"{}\": {e}", f.label))),
            "sin" => Foliation::curved(
                f.label.clone(),
                CurveShape::Sin {
                    amplitude: f.amplitude,
                    angular_frequency: f.angular_frequency,
                    phase: f.phase,
                },
                domain,
            )
            .map_err(|e| SimError::Config(format!("foliation \"{}\": {e}", f.label))),
            other => Err(SimError::Config(format!(
                "foliation.kind: unknown kind \"{other}\" (flat, tanh or sin)"
            ))),
        }
    }

    /// The single-foliation section, or the rest frame by default.
    pub fn foliation(&self) -> Result<Foliation> {
        match &self.foliation {
            Some(f) => self.build_foliation(f),
            None => Foliation::flat("rest", 0.0, self.domain()),
        }
    }

    /// The configured family, or the default eight-member family.
    pub fn family(&self) -> Result<FoliationFamily> {
        let foliations = match &self.family {
            Some(list) => list
                .iter()
                .map(|f| self.build_foliation(f))
                .collect::<Result<Vec<_>>>()?,
            None => crate::presets::default_family(self.domain())?,
        };
        FoliationFamily::new(foliations, self.run.s0, self.run.s1)
    }

    pub fn build_dirac(&self) -> Result<MultiTimeWaveFunction> {
        if self.wavefunction.sector != Sector::Dirac {
            return Err(SimError::Config("wavefunction.sector must be \"dirac\" here".into()));
        }
        let masses = self.wavefunction.masses.clone();
        let mut terms = Vec::new();
        for term in &self.wavefunction.terms {
            let mut factors = Vec::new();
            for f in &term.factors {
                factors.push(build_mode_sum(f)?);
            }
            terms.push(DiracTerm {
                coefficient: Complex64::new(term.coefficient[0], term.coefficient[1]),
                factors,
            });
        }
        let wf = MultiTimeWaveFunction::new(masses, terms)?;
        let reference = Leaf::flat(0.0, 0.0, self.domain())?;
        wf.normalized_on(
            &reference,
            crate::ensemble::default_quadrature_points(self.wavefunction.masses.len()),
        )
    }

    pub fn build_nr(&self) -> Result<NrWaveFunction> {
        if self.wavefunction.sector != Sector::Nonrelativistic {
            return Err(SimError::Config(
                "wavefunction.sector must be \"nonrelativistic\" here".into(),
            ));
        }
        let masses = self.wavefunction.masses.clone();
        let mut terms = Vec::new();
        for (i, term) in self.wavefunction.terms.iter().enumerate() {
            let mut packets = Vec::new();
            for (j, f) in term.factors.iter().enumerate() {
                if f.kind != "packet" {
                    return Err(SimError::Config(format!(
                        "wavefunction.terms[{i}].factors[{j}]: the nonrelativistic sector takes packet factors"
                    )));
                }
                packets.push(PacketSpec { center: f.center, momentum: f.momentum, width: f.width });
            }
            terms.push(NrTerm {
                coefficient: Complex64::new(term.coefficient[0], term.coefficient[1]),
                packets,
            });
        }
        let nr = self.nonrelativistic.as_ref();
        let backend = nr.map(|n| n.backend.as_str()).unwrap_or("analytic");
        match backend {
            "analytic" => {
                if let Some(p) = nr.and_then(|n| n.potential.as_ref()) {
                    if p.kind != "none" {
                        return Err(SimError::Config(
                            "nonrelativistic.potential requires the grid backend".into(),
                        ));
                    }
                }
                NrWaveFunction::analytic(masses, terms)
            }
            "grid" => {
                let grid = nr.and_then(|n| n.grid.as_ref()).ok_or_else(|| {
                    SimError::Config("nonrelativistic.grid is required for the grid backend".into())
                })?;
                let potential = match nr.and_then(|n| n.potential.as_ref()) {
                    None => Potential::None,
                    Some(p) => match p.kind.as_str() {
                        "none" => Potential::None,
                        "harmonic" => Potential::Harmonic { omega: p.omega },
                        other => {
                            return Err(SimError::Config(format!(
                                "nonrelativistic.potential.kind: unknown kind \"{other}\""
                            )))
                        }
                    },
                };
                NrWaveFunction::grid(
                    masses,
                    terms,
                    GridSpec { points: grid.points, length: grid.length, dt: grid.dt },
                    potential,
                )
            }
            other => Err(SimError::Config(format!(
                "nonrelativistic.backend: unknown backend \"{other}\""
            ))),
        }
    }

    pub fn build_event(&self) -> Result<EventPredicate> {
        match &self.event {
            Some(e) => build_event(e),
            None => Err(SimError::Config("an [event] section is required".into())),
        }
    }

    pub fn build_pair_predicate(&self) -> Result<PairPredicate> {
        match &self.event {
            Some(e) => build_pair_predicate(e),
            None => Err(SimError::Config("an [event] section is required".into())),
        }
    }

    pub fn build_transform(&self) -> Result<PoincareTransform> {
        let t = self.transform.as_ref().ok_or_else(|| {
            SimError::Config("a [transform] section is required for covariance checks".into())
        })?;
        let mut g = PoincareTransform::boost(t.velocity);
        g.translation = TwoVector::new(t.t, t.x);
        Ok(g)
    }

    pub fn initial_config(&self, leaf: &Leaf) -> Result<Vec<TwoVector>> {
        let xs = self.run.initial.as_ref().ok_or_else(|| {
            SimError::Config("run.initial (spatial coordinates) is required".into())
        })?;
        if xs.len() != self.wavefunction.masses.len() {
            return Err(SimError::Config(format!(
                "run.initial has {} coordinates for {} particles",
                xs.len(),
                self.wavefunction.masses.len()
            )));
        }
        Ok(xs.iter().map(|x| leaf.point_at(*x)).collect())
    }
}

fn parse_branch(b: &Option<String>) -> Result<EnergyBranch> {
    match b.as_deref() {
        None | Some("positive") => Ok(EnergyBranch::Positive),
        Some("negative") => Ok(EnergyBranch::Negative),
        Some(other) => Err(SimError::Config(format!(
            "branch: unknown branch \"{other}\" (positive or negative)"
        ))),
    }
}

fn build_mode_sum(f: &FactorConfig) -> Result<ModeSum> {
    match f.kind.as_str() {
        "packet" => ModeSum::gaussian_packet(
            f.center,
            f.momentum,
            f.width,
            f.modes.unwrap_or(64),
            parse_branch(&f.branch)?,
        ),
        "modes" => {
            let modes = f
                .mode_list
                .iter()
                .map(|m| {
                    Ok(PlaneWaveMode {
                        coefficient: Complex64::new(m.coefficient[0], m.coefficient[1]),
                        momentum: m.momentum,
                        branch: parse_branch(&m.branch)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ModeSum::new(modes)
        }
        other => Err(SimError::Config(format!("factor.kind: unknown kind \"{other}\""))),
    }
}

pub fn build_event(e: &EventConfig) -> Result<EventPredicate> {
    match e.kind.as_str() {
        "crosses" => {
            let particle = e
                .particle
                .ok_or_else(|| SimError::Config("event.particle is required for crosses".into()))?;
            EventPredicate::crosses(
                particle,
                (e.t_min.unwrap_or(f64::NEG_INFINITY), e.t_max.unwrap_or(f64::INFINITY)),
                (e.x_min.unwrap_or(f64::NEG_INFINITY), e.x_max.unwrap_or(f64::INFINITY)),
            )
        }
        "and" => Ok(EventPredicate::And(
            e.children.iter().map(build_event).collect::<Result<_>>()?,
        )),
        "or" => Ok(EventPredicate::Or(
            e.children.iter().map(build_event).collect::<Result<_>>()?,
        )),
        "not" => {
            if e.children.len() != 1 {
                return Err(SimError::Config("event: \"not\" takes exactly one child".into()));
            }
            Ok(build_event(&e.children[0])?.not())
        }
        "always" => Ok(EventPredicate::always()),
        "never" => Ok(EventPredicate::never()),
        other => Err(SimError::Config(format!("event.kind: unknown kind \"{other}\""))),
    }
}

pub fn build_pair_predicate(e: &EventConfig) -> Result<PairPredicate> {
    match e.kind.as_str() {
        "label" => {
            let label = e
                .label
                .clone()
                .ok_or_else(|| SimError::Config("event.label is required for label atoms".into()))?;
            Ok(PairPredicate::LabelIs(label))
        }
        "and" => Ok(PairPredicate::And(
            e.children.iter().map(build_pair_predicate).collect::<Result<_>>()?,
        )),
        "or" => Ok(PairPredicate::Or(
            e.children.iter().map(build_pair_predicate).collect::<Result<_>>()?,
        )),
        "not" => {
            if e.children.len() != 1 {
                return Err(SimError::Config("event: \"not\" takes exactly one child".into()));
            }
            Ok(PairPredicate::Not(Box::new(build_pair_predicate(&e.children[0])?)))
        }
        _ => Ok(PairPredicate::Event(build_event(e)?)),
    }
}

/// Apply one `--set path=value` override onto the raw TOML tree.
fn apply_override(value: &mut toml::Value, path: &str, raw: &str) -> Result<()> {
    let parsed: toml::Value = {
        // try full TOML value syntax first, fall back to a bare string
        let attempt = format!("v = {raw}");
        match toml::from_str::<toml::value::Table>(&attempt) {
            Ok(mut t) => t.remove("v").unwrap(),
            Err(_) => toml::Value::String(raw.to_string()),
        }
    };
    let mut cursor = value;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.is_empty() {
        return Err(SimError::Config("empty override path".into()));
    }
    for part in &parts[..parts.len() - 1] {
        let table = cursor
            .as_table_mut()
            .ok_or_else(|| SimError::Config(format!("override path {path}: {part} is not a table")))?;
        cursor = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = cursor
        .as_table_mut()
        .ok_or_else(|| SimError::Config(format!("override path {path} does not end in a table")))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}
