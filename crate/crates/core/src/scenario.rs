//! TOML scenario files.
//!
//! ```toml
//! name = "fig4_first_order"
//! mode = "first_order_adaptive"
//!
//! [topology]
//! adjacency = [[0, 1, 0], [1, 0, 1], [0, 1, 0]]
//! leader_adjacency = [1, 0, 0]
//!
//! [gains]
//! k1 = 1.0
//! l = 1.0
//! c = 0.5
//! tau = 1.0              # scalar or one entry per follower
//!
//! [leader_signal]
//! type = "sinusoid"      # constant | decaying | polynomial | table
//! amplitude = 1.0
//! angular_frequency = 0.6283185307179586
//!
//! [initial_states]
//! leader_position = 0.0
//! follower_positions = [3.0, 0.0, -2.0]
//!
//! [initial_states.observers]
//! adaptive_gain = [0.7, 0.7, 0.7]
//!
//! [integration]
//! dt = 0.001
//! t_end = 60.0
//! record_stride = 100
//! sign_policy = "exact"  # or { boundary_layer = 1e-3 }
//!
//! [outputs]
//! trajectory = true
//! plots = ["position", "input_estimate"]
//! cross_check = 10.0     # horizon in seconds
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::Gains;
use crate::graph::Topology;
use crate::observers::SignPolicy;
use crate::signals::LeaderSignal;
use crate::sim::{InitialStates, Mode, ObserverInit, SimConfig, DEFAULT_DT, DEFAULT_RECORD_STRIDE};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("schema error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Schema { line: Option<usize>, msg: String },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

/// What a run writes besides `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "yes")]
    pub trajectory: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plots: Vec<String>,
    /// Cross-check horizon in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<f64>,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { trajectory: true, plots: Vec::new(), cross_check: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: SimConfig,
    pub outputs: OutputSpec,
    /// Reject gains that break the convergence conditions instead of warning.
    pub strict: bool,
    /// Gain-condition violations found while loading.
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    mode: String,
    topology: TopologyStanza,
    gains: GainsStanza,
    leader_signal: SignalStanza,
    initial_states: InitialStanza,
    #[serde(default)]
    integration: IntegrationStanza,
    #[serde(default)]
    outputs: OutputSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyStanza {
    adjacency: Vec<Vec<f64>>,
    leader_adjacency: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Tau {
    Scalar(f64),
    PerFollower(Vec<f64>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsStanza {
    k1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k2: Option<f64>,
    l: f64,
    c: f64,
    tau: Tau,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    strict: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SignalStanza {
    Sinusoid {
        amplitude: f64,
        angular_frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Constant {
        value: f64,
    },
    Decaying {
        constant: f64,
        transient_amplitude: f64,
        decay_rate: f64,
    },
    Polynomial {
        coefficients: Vec<f64>,
    },
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObserverStanza {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leader_velocity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    self_velocity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    adaptive_gain: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialStanza {
    leader_position: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leader_velocity: Option<f64>,
    follower_positions: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    follower_velocities: Option<Vec<f64>>,
    #[serde(default)]
    observers: ObserverStanza,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum SignStanza {
    Exact,
    BoundaryLayer(f64),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegrationStanza {
    #[serde(default = "default_dt")]
    dt: f64,
    t_end: f64,
    #[serde(default = "default_stride")]
    record_stride: i64,
    #[serde(default = "exact")]
    sign_policy: SignStanza,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_stride() -> i64 {
    DEFAULT_RECORD_STRIDE as i64
}

fn exact() -> SignStanza {
    SignStanza::Exact
}

impl Default for IntegrationStanza {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, t_end: 60.0, record_stride: default_stride(), sign_policy: SignStanza::Exact }
    }
}

fn line_of(src: &str, span: Option<std::ops::Range<usize>>) -> Option<usize> {
    span.map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1)
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    parse_scenario_str(&src)
}

pub fn parse_scenario_str(src: &str) -> Result<Scenario, ScenarioError> {
    if let Err(e) = src.parse::<toml::Table>() {
        return Err(ScenarioError::Parse {
            line: line_of(src, e.span()).unwrap_or(1),
            msg: e.message().trim().to_string(),
        });
    }
    let file: ScenarioFile = toml::from_str(src).map_err(|e| ScenarioError::Schema {
        line: line_of(src, e.span()),
        msg: e.message().trim().to_string(),
    })?;
    file.into_scenario()
}

fn schema(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema { line: None, msg: msg.into() }
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        let mode: Mode = self.mode.parse().map_err(|_| schema(format!("unknown mode {:?}", self.mode)))?;
        let integ = &self.integration;
        if !(integ.dt > 0.0) {
            return Err(schema(format!("integration.dt = {} must be positive", integ.dt)));
        }
        if !(integ.t_end > 0.0) {
            return Err(schema(format!("integration.t_end = {} must be positive", integ.t_end)));
        }
        if integ.record_stride < 1 {
            return Err(schema("integration.record_stride must be at least 1"));
        }
        let sign_policy = match integ.sign_policy {
            SignStanza::Exact => SignPolicy::EXACT,
            SignStanza::BoundaryLayer(eps) => {
                SignPolicy::new(eps).map_err(|e| ScenarioError::ConfigInvalid(e.to_string()))?
            }
        };

        let topology = Topology::from_rows(&self.topology.adjacency, &self.topology.leader_adjacency)
            .map_err(|e| ScenarioError::ConfigInvalid(e.to_string()))?;
        let n = topology.n_followers();
        let g = self.gains;
        let tau = match g.tau {
            Tau::Scalar(t) => vec![t; n],
            Tau::PerFollower(v) => v,
        };
        let gains = Gains { k1: g.k1, k2: g.k2, l: g.l, c: g.c, tau };

        let leader_signal = match self.leader_signal {
            SignalStanza::Sinusoid { amplitude, angular_frequency, phase } => {
                LeaderSignal::Sinusoid { amplitude, angular_frequency, phase }
            }
            SignalStanza::Constant { value } => LeaderSignal::Constant { value },
            SignalStanza::Decaying { constant, transient_amplitude, decay_rate } => {
                LeaderSignal::DecayingToConstant { constant, transient_amplitude, decay_rate }
            }
            SignalStanza::Polynomial { coefficients } => LeaderSignal::Polynomial { coefficients },
            SignalStanza::Table { times, values } => LeaderSignal::SampledTable { times, values },
        };

        let init = self.initial_states;
        let obs = init.observers;
        let config = SimConfig {
            topology,
            gains,
            leader_signal,
            mode,
            initial: InitialStates {
                leader_position: init.leader_position,
                leader_velocity: init.leader_velocity,
                follower_positions: init.follower_positions,
                follower_velocities: init.follower_velocities,
                observers: ObserverInit {
                    input: obs.input,
                    position: obs.position,
                    leader_velocity: obs.leader_velocity,
                    self_velocity: obs.self_velocity,
                    adaptive_gain: obs.adaptive_gain,
                },
            },
            dt: integ.dt,
            t_end: integ.t_end,
            record_stride: integ.record_stride as usize,
            sign_policy,
        };
        config.validate().map_err(|e| ScenarioError::ConfigInvalid(e.to_string()))?;

        let warnings = config.gains.violations(mode.is_second_order());
        if g.strict && !warnings.is_empty() {
            return Err(ScenarioError::ConfigInvalid(warnings.join("; ")));
        }
        Ok(Scenario { name: self.name, config, outputs: self.outputs, strict: g.strict, warnings })
    }
}

impl Scenario {
    pub fn new(name: impl Into<String>, config: SimConfig) -> Self {
        let warnings = config.gains.violations(config.mode.is_second_order());
        Self { name: name.into(), config, outputs: OutputSpec::default(), strict: false, warnings }
    }

    /// Render as a scenario file that parses back to an equal scenario.
    pub fn emit(&self) -> String {
        let c = &self.config;
        let g = &c.gains;
        let tau = match g.tau.first() {
            Some(t0) if g.tau.iter().all(|t| t == t0) => Tau::Scalar(*t0),
            _ => Tau::PerFollower(g.tau.clone()),
        };
        let leader_signal = match c.leader_signal.clone() {
            LeaderSignal::Sinusoid { amplitude, angular_frequency, phase } => {
                SignalStanza::Sinusoid { amplitude, angular_frequency, phase }
            }
            LeaderSignal::Constant { value } => SignalStanza::Constant { value },
            LeaderSignal::DecayingToConstant { constant, transient_amplitude, decay_rate } => {
                SignalStanza::Decaying { constant, transient_amplitude, decay_rate }
            }
            LeaderSignal::Polynomial { coefficients } => SignalStanza::Polynomial { coefficients },
            LeaderSignal::SampledTable { times, values } => SignalStanza::Table { times, values },
        };
        let obs = &c.initial.observers;
        let eps = c.sign_policy.boundary_layer();
        let file = ScenarioFile {
            name: self.name.clone(),
            mode: c.mode.name().into(),
            topology: TopologyStanza {
                adjacency: c.topology.adjacency_rows(),
                leader_adjacency: c.topology.leader_adjacency().iter().copied().collect(),
            },
            gains: GainsStanza { k1: g.k1, k2: g.k2, l: g.l, c: g.c, tau, strict: self.strict },
            leader_signal,
            initial_states: InitialStanza {
                leader_position: c.initial.leader_position,
                leader_velocity: c.initial.leader_velocity,
                follower_positions: c.initial.follower_positions.clone(),
                follower_velocities: c.initial.follower_velocities.clone(),
                observers: ObserverStanza {
                    input: obs.input.clone(),
                    position: obs.position.clone(),
                    leader_velocity: obs.leader_velocity.clone(),
                    self_velocity: obs.self_velocity.clone(),
                    adaptive_gain: obs.adaptive_gain.clone(),
                },
            },
            integration: IntegrationStanza {
                dt: c.dt,
                t_end: c.t_end,
                record_stride: c.record_stride as i64,
                sign_policy: if eps > 0.0 { SignStanza::BoundaryLayer(eps) } else { SignStanza::Exact },
            },
            outputs: self.outputs.clone(),
        };
        toml::to_string(&file).expect("scenario serializes")
    }
}
