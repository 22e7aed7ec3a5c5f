use std::fmt;
use std::str::FromStr;

use crate::control::Gains;
use crate::graph::Topology;
use crate::observers::SignPolicy;
use crate::signals::LeaderSignal;

use super::SimError;

/// Which observer/controller combination closes the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// First-order agents, adaptive sliding-mode input observer.
    FirstOrderAdaptive,
    /// First-order agents, linear input observer that never reads `u0`.
    FirstOrderSimplified,
    /// First-order agents with the direct input observer of the
    /// second-order design. Experimental: no convergence guarantee is claimed.
    FirstOrderDirect,
    SecondOrder,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::FirstOrderAdaptive,
        Mode::FirstOrderSimplified,
        Mode::FirstOrderDirect,
        Mode::SecondOrder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::FirstOrderAdaptive => "first_order_adaptive",
            Mode::FirstOrderSimplified => "first_order_simplified",
            Mode::FirstOrderDirect => "first_order_direct",
            Mode::SecondOrder => "second_order",
        }
    }

    pub fn is_second_order(self) -> bool {
        self == Mode::SecondOrder
    }

    /// Whether the input observer carries adaptive gains `d_i`.
    pub fn is_adaptive(self) -> bool {
        self != Mode::FirstOrderSimplified
    }

    /// Whether the leader transmits `u0` to linked followers.
    pub fn shares_leader_input(self) -> bool {
        self != Mode::FirstOrderSimplified
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SimError::ConfigInvalid(format!("unknown mode {s:?}")))
    }
}

/// Observer initial conditions; `None` means all zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObserverInit {
    /// Input-observer state: `z_i` for the adaptive and simplified
    /// observers, `uhat_{0,i}` for the direct observer (and second order).
    pub input: Option<Vec<f64>>,
    /// `xhat_{0,i}`
    pub position: Option<Vec<f64>>,
    /// Leader-velocity observer state `z_i` (second order).
    pub leader_velocity: Option<Vec<f64>>,
    /// Self-velocity observer state `zbar_i` (second order).
    pub self_velocity: Option<Vec<f64>>,
    /// `d_i(0)`, non-negative.
    pub adaptive_gain: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialStates {
    pub leader_position: f64,
    /// Required in second-order mode, absent otherwise.
    pub leader_velocity: Option<f64>,
    pub follower_positions: Vec<f64>,
    /// Required in second-order mode, absent otherwise.
    pub follower_velocities: Option<Vec<f64>>,
    pub observers: ObserverInit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub topology: Topology,
    pub gains: Gains,
    pub leader_signal: LeaderSignal,
    pub mode: Mode,
    pub initial: InitialStates,
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    pub sign_policy: SignPolicy,
}

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_RECORD_STRIDE: usize = 100;

impl SimConfig {
    pub fn n_followers(&self) -> usize {
        self.topology.n_followers()
    }

    /// Number of integration steps, `round(t_end / dt)`.
    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Structural checks. Convergence conditions on `k1`, `k2` and `c` are
    /// not enforced here (see [`Gains::violations`]); `l > 0` and `tau > 0`
    /// are, since the observers are undefined without them.
    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.n_followers();
        let invalid = |msg: String| Err(SimError::ConfigInvalid(msg));

        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return invalid(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return invalid(format!("t_end = {} must be at least dt", self.t_end));
        }
        if self.record_stride == 0 {
            return invalid("record_stride must be positive".into());
        }

        let g = &self.gains;
        if !(g.l > 0.0) || !g.l.is_finite() {
            return invalid(format!("l = {} must be positive", g.l));
        }
        if !g.k1.is_finite() || !g.c.is_finite() {
            return invalid("k1 and c must be finite".into());
        }
        if g.tau.len() != n {
            return invalid(format!("tau has {} entries for {n} followers", g.tau.len()));
        }
        if g.tau.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return invalid("every tau must be positive".into());
        }
        match (self.mode.is_second_order(), g.k2) {
            (true, None) => return invalid("second-order mode needs k2".into()),
            (true, Some(k2)) if !k2.is_finite() => return invalid("k2 must be finite".into()),
            (false, Some(_)) => return invalid("k2 is only used in second-order mode".into()),
            _ => {}
        }

        self.leader_signal.validate().map_err(|e| SimError::ConfigInvalid(e.to_string()))?;

        let init = &self.initial;
        let check_len = |name: &str, v: &[f64]| -> Result<(), SimError> {
            if v.len() != n {
                return invalid(format!("{name} has {} entries for {n} followers", v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return invalid(format!("{name} has a non-finite entry"));
            }
            Ok(())
        };
        if !init.leader_position.is_finite() {
            return invalid("leader_position must be finite".into());
        }
        check_len("follower_positions", &init.follower_positions)?;
        if self.mode.is_second_order() {
            match (init.leader_velocity, &init.follower_velocities) {
                (Some(v0), Some(v)) if v0.is_finite() => check_len("follower_velocities", v)?,
                _ => return invalid("second-order mode needs leader and follower velocities".into()),
            }
        } else if init.leader_velocity.is_some() || init.follower_velocities.is_some() {
            return invalid("velocities are only used in second-order mode".into());
        }

        let obs = &init.observers;
        for (name, v) in [
            ("input observer init", &obs.input),
            ("position observer init", &obs.position),
            ("leader velocity observer init", &obs.leader_velocity),
            ("self velocity observer init", &obs.self_velocity),
            ("adaptive gain init", &obs.adaptive_gain),
        ] {
            if let Some(v) = v {
                check_len(name, v)?;
            }
        }
        if !self.mode.is_second_order() && (obs.leader_velocity.is_some() || obs.self_velocity.is_some()) {
            return invalid("velocity observers are only used in second-order mode".into());
        }
        if let Some(d) = &obs.adaptive_gain {
            if !self.mode.is_adaptive() {
                return invalid("the simplified observer has no adaptive gains".into());
            }
            if d.iter().any(|d| *d < 0.0) {
                return invalid("adaptive gains must start non-negative".into());
            }
        }
        Ok(())
    }
}
