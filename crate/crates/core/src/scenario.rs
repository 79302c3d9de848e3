//! Scenario files.
//!
//! Scenarios are TOML documents with the sections `[surface]`, `[swarm]`,
//! `[estimator]`, `[target]`, `[run]`, `[initial]` and `[output]`. Loading
//! fills every default, so writing a loaded scenario back out yields a fully
//! resolved description of the run.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{RunSettings, SimulationState};
use crate::error::{Error, Result};
use crate::field::{FieldGains, DEFAULT_M_TAIL};
use crate::surfaces::{BuiltinSurface, Surface, Vec2};
use crate::swarm::{
    distance, CommGraph, ConsensusConfig, EstimatorMode, RobotState, SwarmConfig, TargetState,
};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_RECORD_EVERY: usize = 100;
pub const DEFAULT_CONSENSUS_GAIN: f64 = 5.0;

/// Upper limit on rejected draws when placing random virtual coordinates.
const MAX_PLACEMENT_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub surface: BuiltinSurface,
    pub swarm: SwarmSpec,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub target: TargetSpec,
    pub run: RunSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_name() -> String {
    "scenario".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmSpec {
    pub robots: usize,
    pub sensing_radius: f64,
    pub safe_radius: f64,
    pub k: GainSpec,
    pub c: ScalarOrList,
    #[serde(default = "default_m_tail")]
    pub m_tail: Vec2,
}

fn default_m_tail() -> Vec2 {
    DEFAULT_M_TAIL
}

/// `k` as one value for every axis and robot, one vector shared by all
/// robots, or one vector per robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Scalar(f64),
    Shared(Vec<f64>),
    PerRobot(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrList {
    Scalar(f64),
    PerRobot(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum EstimatorSpec {
    #[default]
    Broadcast,
    Consensus {
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default = "default_leaders")]
        leaders: Vec<usize>,
        /// Undirected edges; a ring over all robots when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edges: Option<Vec<[usize; 2]>>,
    },
}

fn default_gamma() -> f64 {
    DEFAULT_CONSENSUS_GAIN
}

fn default_leaders() -> Vec<usize> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(default)]
    pub omega_star: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_record_every() -> usize {
    DEFAULT_RECORD_EVERY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    /// Positions and virtual coordinates listed per robot.
    Explicit {
        x: Vec<Vec<f64>>,
        omega: Vec<Vec2>,
        /// Defaults to `omega` (consensus) or the target (broadcast).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega_hat: Option<Vec<Vec2>>,
    },
    /// Seeded rejection sampling from boxes.
    Random {
        #[serde(default, with = "seed_format")]
        seed: u64,
        /// `[[lo, hi], [lo, hi]]` for the two virtual coordinates.
        omega_box: [[f64; 2]; 2],
        /// Absolute position box, one `[lo, hi]` per axis.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_box: Option<Vec<[f64; 2]>>,
        /// Position box relative to the surface point `f(omega)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_offset_box: Option<Vec<[f64; 2]>>,
        /// Minimum pairwise distance of the sampled virtual coordinates;
        /// defaults to the safe radius.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_separation: Option<f64>,
    },
}

/// TOML integers are signed, so seeds above `i64::MAX` are written as
/// decimal strings. Either form is accepted on input.
mod seed_format {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Int(v) => u64::try_from(v).map_err(|_| de::Error::custom("seed must be non-negative")),
            Raw::Text(t) => t
                .parse()
                .map_err(|_| de::Error::custom(format!("invalid seed {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_out_dir(),
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Everything needed to start a run.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub surface: BuiltinSurface,
    pub config: SwarmConfig,
    pub initial: SimulationState,
    pub settings: RunSettings,
}

/// Command-line overrides applied on top of a loaded scenario.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub duration: Option<f64>,
    pub dt: Option<f64>,
    pub mode: Option<String>,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, path)
}

/// Parses and validates scenario text. `origin` is used in diagnostics.
pub fn parse_scenario(text: &str, origin: &Path) -> Result<Scenario> {
    let mut scenario: Scenario = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        Error::Parse {
            path: origin.to_path_buf(),
            line,
            message: e.message().to_string(),
        }
    })?;
    scenario.resolve_defaults();
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    /// Makes implicit defaults explicit so they are echoed when written.
    fn resolve_defaults(&mut self) {
        if let EstimatorSpec::Consensus { edges, .. } = &mut self.estimator {
            if edges.is_none() {
                let ring = CommGraph::ring(self.swarm.robots)
                    .edges()
                    .into_iter()
                    .map(|(a, b)| [a, b])
                    .collect();
                *edges = Some(ring);
            }
        }
        if let InitialSpec::Random { min_separation, .. } = &mut self.initial {
            if min_separation.is_none() {
                *min_separation = Some(self.swarm.safe_radius);
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario is always representable as TOML")
    }

    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            match &mut self.initial {
                InitialSpec::Random { seed: s, .. } => *s = seed,
                InitialSpec::Explicit { .. } => {
                    return Err(Error::config(
                        "--seed given but the scenario has explicit initial conditions",
                    ))
                }
            }
        }
        if let Some(d) = o.duration {
            self.run.duration = d;
        }
        if let Some(dt) = o.dt {
            self.run.dt = dt;
        }
        match o.mode.as_deref() {
            None => {}
            Some("broadcast") => self.estimator = EstimatorSpec::Broadcast,
            Some("consensus") => {
                if !matches!(self.estimator, EstimatorSpec::Consensus { .. }) {
                    self.estimator = EstimatorSpec::Consensus {
                        gamma: DEFAULT_CONSENSUS_GAIN,
                        leaders: default_leaders(),
                        edges: None,
                    };
                }
            }
            Some(other) => {
                return Err(Error::config(format!(
                    "unknown estimator mode '{other}' (expected broadcast or consensus)"
                )))
            }
        }
        self.resolve_defaults();
        self.validate()
    }

    pub fn seed(&self) -> Option<u64> {
        match self.initial {
            InitialSpec::Random { seed, .. } => Some(seed),
            InitialSpec::Explicit { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.surface.validate()?;
        let dim = self.surface.dim_ambient();
        let config = self.swarm_config()?;
        config.validate(dim)?;
        self.settings().validate()?;
        if !(self.run.duration > 0.0) {
            return Err(Error::config("duration must be positive"));
        }
        if self.target.omega_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("target omega_star must be finite"));
        }
        match &self.initial {
            InitialSpec::Explicit {
                x,
                omega,
                omega_hat,
            } => {
                let count = self.swarm.robots;
                if x.len() != count || omega.len() != count {
                    return Err(Error::config(format!(
                        "explicit initial conditions list {} positions and {} virtual \
                         coordinates for {count} robots",
                        x.len(),
                        omega.len()
                    )));
                }
                if omega_hat.as_ref().is_some_and(|h| h.len() != count) {
                    return Err(Error::config("omega_hat must list one entry per robot"));
                }
                if let Some(bad) = x.iter().position(|xi| xi.len() != dim) {
                    return Err(Error::config(format!(
                        "initial position of robot {bad} has {} components, expected {dim}",
                        x[bad].len()
                    )));
                }
                crate::swarm::validate_initial_separation(omega, self.swarm.safe_radius)?;
            }
            InitialSpec::Random {
                omega_box,
                x_box,
                x_offset_box,
                min_separation,
                ..
            } => {
                check_box(omega_box, "omega_box")?;
                match (x_box, x_offset_box) {
                    (Some(b), None) | (None, Some(b)) => {
                        if b.len() != dim {
                            return Err(Error::config(format!(
                                "position box has {} axes, expected {dim}",
                                b.len()
                            )));
                        }
                        check_box(b, "position box")?;
                    }
                    _ => {
                        return Err(Error::config(
                            "random initial conditions need exactly one of x_box or x_offset_box",
                        ))
                    }
                }
                let min_sep = min_separation.unwrap_or(self.swarm.safe_radius);
                if !(min_sep >= self.swarm.safe_radius && min_sep.is_finite()) {
                    return Err(Error::config(format!(
                        "min_separation {min_sep} must be at least the safe radius {}",
                        self.swarm.safe_radius
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            duration: self.run.duration,
            dt: self.run.dt,
            record_every: self.run.record_every,
        }
    }

    pub fn swarm_config(&self) -> Result<SwarmConfig> {
        let count = self.swarm.robots;
        if count == 0 {
            return Err(Error::config("swarm needs at least one robot"));
        }
        let dim = self.surface.dim_ambient();
        let ks: Vec<Vec<f64>> = match &self.swarm.k {
            GainSpec::Scalar(k) => vec![vec![*k; dim]; count],
            GainSpec::Shared(k) => vec![k.clone(); count],
            GainSpec::PerRobot(ks) => {
                if ks.len() != count {
                    return Err(Error::config(format!(
                        "k lists {} robots, swarm has {count}",
                        ks.len()
                    )));
                }
                ks.clone()
            }
        };
        let cs: Vec<f64> = match &self.swarm.c {
            ScalarOrList::Scalar(c) => vec![*c; count],
            ScalarOrList::PerRobot(cs) => {
                if cs.len() != count {
                    return Err(Error::config(format!(
                        "c lists {} robots, swarm has {count}",
                        cs.len()
                    )));
                }
                cs.clone()
            }
        };
        let gains = ks
            .into_iter()
            .zip(cs)
            .map(|(k, c)| FieldGains {
                k,
                c,
                m_tail: self.swarm.m_tail,
            })
            .collect();
        let estimator = match &self.estimator {
            EstimatorSpec::Broadcast => EstimatorMode::Broadcast,
            EstimatorSpec::Consensus {
                gamma,
                leaders,
                edges,
            } => {
                let graph = match edges {
                    Some(edges) => {
                        let pairs: Vec<(usize, usize)> =
                            edges.iter().map(|e| (e[0], e[1])).collect();
                        CommGraph::from_edges(count, &pairs)?
                    }
                    None => CommGraph::ring(count),
                };
                EstimatorMode::Consensus(ConsensusConfig {
                    gamma: *gamma,
                    leaders: leaders.clone(),
                    graph,
                })
            }
        };
        Ok(SwarmConfig {
            sensing_radius: self.swarm.sensing_radius,
            safe_radius: self.swarm.safe_radius,
            gains,
            estimator,
        })
    }

    /// Builds the configuration and initial state, sampling random initial
    /// conditions if requested.
    pub fn prepare(&self) -> Result<PreparedRun> {
        self.validate()?;
        let config = self.swarm_config()?;
        let dim = self.surface.dim_ambient();
        let target = TargetState::new(self.target.omega_star, dim, self.swarm.m_tail);
        let broadcast = config.estimator == EstimatorMode::Broadcast;

        let robots = match &self.initial {
            InitialSpec::Explicit {
                x,
                omega,
                omega_hat,
            } => x
                .iter()
                .zip(omega)
                .enumerate()
                .map(|(i, (x, &w))| {
                    let hat = match omega_hat {
                        Some(h) => h[i],
                        None if broadcast => target.omega_star,
                        None => w,
                    };
                    RobotState {
                        x: x.clone(),
                        omega: w,
                        omega_hat: hat,
                    }
                })
                .collect(),
            InitialSpec::Random {
                seed,
                omega_box,
                x_box,
                x_offset_box,
                min_separation,
            } => {
                let min_sep = min_separation.unwrap_or(self.swarm.safe_radius);
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let omegas = sample_separated(&mut rng, omega_box, self.swarm.robots, min_sep)?;
                omegas
                    .into_iter()
                    .map(|w| {
                        let x: Vec<f64> = match (x_box, x_offset_box) {
                            (Some(b), _) => b.iter().map(|r| sample(&mut rng, *r)).collect(),
                            (None, Some(b)) => self
                                .surface
                                .eval(w)
                                .into_iter()
                                .zip(b)
                                .map(|(f, r)| f + sample(&mut rng, *r))
                                .collect(),
                            (None, None) => unreachable!("validated above"),
                        };
                        let mut robot = RobotState::new(x, w);
                        if broadcast {
                            robot.omega_hat = target.omega_star;
                        }
                        robot
                    })
                    .collect()
            }
        };

        Ok(PreparedRun {
            surface: self.surface,
            config,
            initial: SimulationState {
                time: 0.0,
                robots,
                target,
            },
            settings: self.settings(),
        })
    }
}

fn check_box(b: &[[f64; 2]], what: &str) -> Result<()> {
    for r in b {
        if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
            return Err(Error::config(format!(
                "{what}: interval [{}, {}] must be finite with lo <= hi",
                r[0], r[1]
            )));
        }
    }
    Ok(())
}

fn sample(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.gen_range(range[0]..range[1])
    }
}

/// Draws points from the box, rejecting any closer than `min_sep` to an
/// already accepted point.
fn sample_separated(
    rng: &mut ChaCha8Rng,
    omega_box: &[[f64; 2]; 2],
    count: usize,
    min_sep: f64,
) -> Result<Vec<Vec2>> {
    let mut points: Vec<Vec2> = Vec::with_capacity(count);
    let mut draws = 0;
    while points.len() < count {
        if draws == MAX_PLACEMENT_DRAWS {
            return Err(Error::config(format!(
                "could not place {count} robots with separation > {min_sep} in the omega box \
                 after {MAX_PLACEMENT_DRAWS} draws"
            )));
        }
        draws += 1;
        let w = [sample(rng, omega_box[0]), sample(rng, omega_box[1])];
        if points.iter().all(|p| distance(*p, w) > min_sep) {
            points.push(w);
        }
    }
    Ok(points)
}

/// The bundled reproduction of the 22-robot torus experiment.
pub const TORUS22: &str = include_str!("../scenarios/torus22.toml");
