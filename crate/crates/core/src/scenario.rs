//! Scenario files: a TOML description of one demiclosedness experiment.
//!
//! ```toml
//! name = "halving-ball"
//!
//! [space]
//! weights = [0.5, 0.3, 0.2]
//!
//! [fiber]
//! dim = 2
//! exponent = 2.0
//!
//! [body]
//! kind = "ball"
//! radius = 1.0
//!
//! [map]
//! kind = "homothety"
//! factor = 0.5
//!
//! [sequence]
//! generator = "mann"
//! steps = 120
//! start = [0.6, -0.7]
//! ```
//!
//! Scalars may be given once or per atom. Points may be given as a single
//! number repeated in every coordinate, as one fiber shared by every atom, or
//! as one fiber per atom.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::body::ConvexBody;
use crate::dynamics::{AsymptoticMap, EtaSequence, MapKind, Schedule};
use crate::element::{FiberSpec, RNElement};
use crate::error::{Error, Result};
use crate::measure::{AtomicSpace, L0Real, MeasurableSet, Partition};

pub const MAX_STEPS: usize = 100_000;
pub const MAX_ATOMS: usize = 64;

/// A real number given once or per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAtom {
    Shared(f64),
    Values(Vec<f64>),
}

impl PerAtom {
    fn resolve(&self, atoms: usize, what: &str) -> Result<L0Real> {
        let values = match self {
            PerAtom::Shared(v) => vec![*v; atoms],
            PerAtom::Values(v) if v.len() == atoms => v.clone(),
            PerAtom::Values(v) => {
                return Err(Error::config(format!(
                    "{what}: expected {atoms} per-atom values, found {}",
                    v.len()
                )))
            }
        };
        L0Real::new(values).map_err(|e| Error::config(format!("{what}: {e}")))
    }
}

/// A point of E given as one value for every coordinate, one shared fiber,
/// or one fiber per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Points {
    Uniform(f64),
    Shared(Vec<f64>),
    PerAtom(Vec<Vec<f64>>),
}

impl Points {
    fn resolve(&self, space: &Arc<AtomicSpace>, spec: FiberSpec, what: &str) -> Result<RNElement> {
        let built = match self {
            Points::Uniform(v) => RNElement::constant(space.clone(), spec, &vec![*v; spec.dim]),
            Points::Shared(fiber) => RNElement::constant(space.clone(), spec, fiber),
            Points::PerAtom(fibers) => {
                if fibers.len() != space.atom_count() {
                    return Err(Error::config(format!(
                        "{what}: expected {} fibers, found {}",
                        space.atom_count(),
                        fibers.len()
                    )));
                }
                RNElement::from_fibers(space.clone(), spec, fibers)
            }
        };
        let x = built.map_err(|e| Error::config(format!("{what}: {e}")))?;
        if x.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::config(format!("{what}: non-finite coordinate")));
        }
        Ok(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    /// Atom probabilities; must sum to 1.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberConfig {
    pub dim: usize,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
}

fn default_exponent() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodyConfig {
    /// Per-atom closed balls; the center defaults to the origin.
    Ball {
        #[serde(default)]
        center: Option<Points>,
        radius: PerAtom,
    },
    /// Per-atom coordinate boxes.
    Box { lower: Points, upper: Points },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapConfig {
    Identity,
    /// x ↦ a + α(x − a); the anchor defaults to the body center.
    Homothety {
        factor: PerAtom,
        #[serde(default)]
        anchor: Option<Points>,
    },
    /// Rotation of the first two coordinates about the body center, scaled by
    /// `gain`, followed by projection onto the body.
    Rotation {
        angle: PerAtom,
        #[serde(default = "default_gain")]
        gain: f64,
    },
    /// v ↦ (0, k·v₁ + c·v₂, c·v₃, …) about the anchor.
    EventuallyContractive {
        shear: PerAtom,
        decay: PerAtom,
        #[serde(default)]
        anchor: Option<Points>,
    },
    /// Different maps on disjoint atom groups covering the space.
    Glued { parts: Vec<GluedPart> },
}

fn default_gain() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GluedPart {
    /// Zero-based atom indices.
    pub atoms: Vec<usize>,
    pub map: MapConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EtaConfig {
    /// The certificate that comes with the map constructor.
    #[default]
    Natural,
    Unit,
    /// η_m = 1 + a·r^m
    Decaying { amplitude: PerAtom, ratio: PerAtom },
    /// η_1, η_2, … as listed, then 1.
    Explicit { terms: Vec<PerAtom> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Constant { value: f64 },
    /// c_n = start / (n + 1)^power
    Decreasing { start: f64, power: f64 },
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig::Constant { value: 0.5 }
    }
}

impl ScheduleConfig {
    fn to_schedule(&self) -> Schedule {
        match *self {
            ScheduleConfig::Constant { value } => Schedule::Constant(value),
            ScheduleConfig::Decreasing { start, power } => Schedule::Decreasing { start, power },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceConfig {
    /// x_{n+1} = c_n f(x_n) + (1 − c_n) x_n; the start defaults to a seeded
    /// sample from the body.
    Mann {
        steps: usize,
        #[serde(default)]
        start: Option<Points>,
        #[serde(default)]
        schedule: ScheduleConfig,
    },
    /// x_n = limit + s_n·direction with s_n = decay^n, sign-alternating when
    /// `alternating` is set.
    Prescribed {
        steps: usize,
        limit: Points,
        direction: Points,
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default)]
        alternating: bool,
    },
}

fn default_decay() -> f64 {
    0.8
}

impl SequenceConfig {
    pub fn steps(&self) -> usize {
        match self {
            SequenceConfig::Mann { steps, .. } | SequenceConfig::Prescribed { steps, .. } => *steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    pub epsilon: f64,
    pub lambda: f64,
    /// Fraction of the sequence, counted from the end, that must sit in the
    /// (ε, λ)-neighbourhood.
    pub tail_fraction: f64,
    pub conclusion_tolerance: f64,
    /// Horizon for certificate sampling and the per-piece Lipschitz checks.
    pub horizon: usize,
    pub seed: u64,
    /// Sample count for certificate, Lipschitz and recomposition checks.
    pub samples: usize,
    /// Exponent of Lᵖ(E) used for the reported norms.
    pub p: f64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            lambda: 0.01,
            tail_fraction: 0.25,
            conclusion_tolerance: 1e-6,
            horizon: 32,
            seed: 0,
            samples: 64,
            p: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub space: SpaceConfig,
    pub fiber: FiberConfig,
    pub body: BodyConfig,
    pub map: MapConfig,
    #[serde(default)]
    pub eta: EtaConfig,
    pub sequence: SequenceConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
}

/// A scenario turned into library objects.
#[derive(Debug, Clone)]
pub struct Instance {
    pub space: Arc<AtomicSpace>,
    pub spec: FiberSpec,
    pub map: AsymptoticMap,
    /// Mann starting point, when given.
    pub start: Option<RNElement>,
    /// Limit and direction of a prescribed sequence.
    pub prescribed: Option<(RNElement, RNElement)>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Checks the numeric ranges that do not need the built instance.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name must not be empty"));
        }
        if self.space.weights.is_empty() || self.space.weights.len() > MAX_ATOMS {
            return Err(Error::config(format!(
                "space.weights must list between 1 and {MAX_ATOMS} atoms"
            )));
        }
        if self.fiber.dim == 0 || self.fiber.dim > 16 {
            return Err(Error::config("fiber.dim must lie in 1..=16"));
        }
        let steps = self.sequence.steps();
        if !(4..=MAX_STEPS).contains(&steps) {
            return Err(Error::config(format!("sequence.steps must lie in 4..={MAX_STEPS}")));
        }
        if let SequenceConfig::Prescribed { decay, .. } = &self.sequence {
            if !(0.0..=1.0).contains(decay) {
                return Err(Error::config("sequence.decay must lie in [0, 1]"));
            }
        }
        let c = &self.checks;
        if !(c.epsilon > 0.0 && c.epsilon.is_finite()) {
            return Err(Error::config("checks.epsilon must be positive"));
        }
        if !(c.lambda > 0.0 && c.lambda < 1.0) {
            return Err(Error::config("checks.lambda must lie in (0, 1)"));
        }
        if !(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0) {
            return Err(Error::config("checks.tail_fraction must lie in (0, 1]"));
        }
        if !(c.conclusion_tolerance > 0.0 && c.conclusion_tolerance.is_finite()) {
            return Err(Error::config("checks.conclusion_tolerance must be positive"));
        }
        if c.horizon == 0 || c.horizon > 1024 {
            return Err(Error::config("checks.horizon must lie in 1..=1024"));
        }
        if c.samples == 0 || c.samples > 100_000 {
            return Err(Error::config("checks.samples must lie in 1..=100000"));
        }
        if !(c.p > 1.0 && c.p.is_finite()) {
            return Err(Error::config("checks.p must satisfy 1 < p < inf"));
        }
        Ok(())
    }

    /// Index of the first term of the checked tail.
    pub fn tail_start(&self) -> usize {
        let len = self.sequence.steps() + 1;
        let tail = (len as f64 * self.checks.tail_fraction).ceil() as usize;
        len - tail.clamp(1, len)
    }

    /// SHA-256 of the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn build(&self) -> Result<Instance> {
        let space = Arc::new(
            AtomicSpace::new(self.space.weights.clone())
                .map_err(|e| Error::config(format!("space.weights: {e}")))?,
        );
        let spec = FiberSpec::new(self.fiber.dim, self.fiber.exponent)
            .map_err(|e| Error::config(format!("fiber: {e}")))?;
        let n = space.atom_count();
        let body = match &self.body {
            BodyConfig::Ball { center, radius } => {
                let center = match center {
                    Some(c) => c.resolve(&space, spec, "body.center")?,
                    None => RNElement::zero(space.clone(), spec),
                };
                ConvexBody::ball(center, radius.resolve(n, "body.radius")?)
            }
            BodyConfig::Box { lower, upper } => ConvexBody::cube(
                lower.resolve(&space, spec, "body.lower")?,
                upper.resolve(&space, spec, "body.upper")?,
            ),
        }
        .map_err(|e| Error::config(format!("body: {e}")))?;

        let kind = build_map(&self.map, &body, "map")?;
        let eta = match &self.eta {
            EtaConfig::Natural => kind.natural_certificate(&body),
            EtaConfig::Unit => EtaSequence::Unit { atoms: n },
            EtaConfig::Decaying { amplitude, ratio } => EtaSequence::Decaying {
                amplitude: amplitude.resolve(n, "eta.amplitude")?,
                ratio: ratio.resolve(n, "eta.ratio")?,
            },
            EtaConfig::Explicit { terms } => EtaSequence::Explicit {
                terms: terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t.resolve(n, &format!("eta.terms[{i}]")))
                    .collect::<Result<_>>()?,
            },
        };
        let map = AsymptoticMap::new(body, kind, eta).map_err(|e| match e {
            Error::NonConvergence { .. } => e,
            other => Error::config(format!("map: {other}")),
        })?;
        let (start, prescribed) = match &self.sequence {
            SequenceConfig::Mann { start, .. } => (
                start
                    .as_ref()
                    .map(|s| s.resolve(&space, spec, "sequence.start"))
                    .transpose()?,
                None,
            ),
            SequenceConfig::Prescribed { limit, direction, .. } => (
                None,
                Some((
                    limit.resolve(&space, spec, "sequence.limit")?,
                    direction.resolve(&space, spec, "sequence.direction")?,
                )),
            ),
        };
        Ok(Instance {
            space,
            spec,
            map,
            start,
            prescribed,
        })
    }

    pub fn schedule(&self) -> Option<Schedule> {
        match &self.sequence {
            SequenceConfig::Mann { schedule, .. } => Some(schedule.to_schedule()),
            SequenceConfig::Prescribed { .. } => None,
        }
    }
}

fn build_map(config: &MapConfig, body: &ConvexBody, what: &str) -> Result<MapKind> {
    let space = body.space();
    let spec = body.spec();
    let n = body.atom_count();
    let anchor_or_center = |anchor: &Option<Points>, field: &str| match anchor {
        Some(a) => a.resolve(space, spec, &format!("{what}.{field}")),
        None => Ok(body.center()),
    };
    Ok(match config {
        MapConfig::Identity => MapKind::Identity,
        MapConfig::Homothety { factor, anchor } => MapKind::Homothety {
            factor: factor.resolve(n, &format!("{what}.factor"))?,
            anchor: anchor_or_center(anchor, "anchor")?,
        },
        MapConfig::Rotation { angle, gain } => MapKind::RotationProjection {
            angle: angle.resolve(n, &format!("{what}.angle"))?,
            gain: *gain,
        },
        MapConfig::EventuallyContractive { shear, decay, anchor } => MapKind::EventuallyContractive {
            shear: shear.resolve(n, &format!("{what}.shear"))?,
            decay: decay.resolve(n, &format!("{what}.decay"))?,
            anchor: anchor_or_center(anchor, "anchor")?,
        },
        MapConfig::Glued { parts } => {
            let pieces = parts
                .iter()
                .enumerate()
                .map(|(i, part)| {
                    MeasurableSet::from_atoms(n, &part.atoms)
                        .map_err(|e| Error::config(format!("{what}.parts[{i}].atoms: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if pieces.iter().any(MeasurableSet::is_empty) {
                return Err(Error::config(format!("{what}: glued parts must not be empty")));
            }
            let partition = Partition::new(pieces).map_err(|e| Error::config(format!("{what}: {e}")))?;
            let parts = parts
                .iter()
                .enumerate()
                .map(|(i, part)| build_map(&part.map, body, &format!("{what}.parts[{i}].map")))
                .collect::<Result<_>>()?;
            MapKind::Glued { partition, parts }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALVING: &str = r#"
name = "halving"
[space]
weights = [0.5, 0.3, 0.2]
[fiber]
dim = 2
[body]
kind = "ball"
radius = 1
[map]
kind = "homothety"
factor = 0.5
[sequence]
generator = "mann"
steps = 40
start = [0.6, -0.7]
"#;

    #[test]
    fn parses_and_builds() {
        let config = ScenarioConfig::from_toml(HALVING).unwrap();
        assert_eq!(config.checks, ChecksConfig::default());
        assert_eq!(config.eta, EtaConfig::Natural);
        let instance = config.build().unwrap();
        assert_eq!(instance.map.kind().name(), "homothety");
        assert_eq!(instance.spec, FiberSpec::euclidean(2));
        assert_eq!(config.tail_start(), 30);
        assert_eq!(config.hash().len(), 64);
        assert_eq!(config.hash(), ScenarioConfig::from_toml(HALVING).unwrap().hash());
    }

    #[test]
    fn glued_and_box() {
        let text = r#"
name = "glued"
[space]
weights = [0.25, 0.25, 0.5]
[fiber]
dim = 2
[body]
kind = "box"
lower = [-1.0, -1.0]
upper = [[1.0, 1.0], [2.0, 1.0], [1.0, 3.0]]
[map]
kind = "glued"
parts = [
  { atoms = [0, 2], map = { kind = "rotation", angle = 0.7 } },
  { atoms = [1], map = { kind = "homothety", factor = 0.3 } },
]
[eta]
kind = "decaying"
amplitude = 1.0
ratio = [0.5, 0.25, 0.5]
[sequence]
generator = "prescribed"
steps = 30
limit = [0.0, 0.0]
direction = [0.5, 0.5]
[checks]
seed = 9
"#;
        let config = ScenarioConfig::from_toml(text).unwrap();
        let instance = config.build().unwrap();
        assert_eq!(instance.map.kind().name(), "glued");
        assert_eq!(config.checks.seed, 9);
    }

    #[test]
    fn rejects_bad_configs() {
        let unknown = HALVING.replace("factor = 0.5", "factor = 0.5\nfactr = 1");
        assert!(matches!(ScenarioConfig::from_toml(&unknown), Err(Error::Config(_))));
        let kind = HALVING.replace("\"homothety\"", "\"spiral\"");
        assert!(ScenarioConfig::from_toml(&kind).is_err());
        let weights = HALVING.replace("0.5, 0.3, 0.2", "0.5, 0.3, 0.3");
        assert!(ScenarioConfig::from_toml(&weights).unwrap().build().is_err());
        let lambda = format!("{HALVING}[checks]\nlambda = 1.5\n");
        assert!(ScenarioConfig::from_toml(&lambda).is_err());
        let fibers = HALVING.replace("[0.6, -0.7]", "[[0.6, -0.7]]");
        assert!(ScenarioConfig::from_toml(&fibers).unwrap().build().is_err());
        assert!(ScenarioConfig::from_toml("name = ").is_err());
        let stuck = HALVING.replace("factor = 0.5", "factor = 1.2");
        assert!(matches!(
            ScenarioConfig::from_toml(&stuck).unwrap().build(),
            Err(Error::NonConvergence { .. })
        ));
    }
}
