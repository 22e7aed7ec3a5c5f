//! The reference five-follower study, built in code.
//!
//! Five followers on a ring, the leader linked to follower 1 only,
//! `l = 1`, `c = 0.5`, `tau_i = 1`, initial positions `(0; 3, 0, -2, 1, -1)`
//! and, for double integrators, initial velocities `(0; 1, -2, 3, 0, -1)`.
//! The controller gains `k1 = k2 = 1` and the initial adaptive gains are
//! choices of this crate.
//!
//! The bundled scenario files under `scenarios/` encode the same
//! configurations.

use std::f64::consts::PI;

use crate::control::Gains;
use crate::graph::Topology;
use crate::observers::SignPolicy;
use crate::signals::LeaderSignal;
use crate::sim::{InitialStates, Mode, ObserverInit, SimConfig, DEFAULT_DT, DEFAULT_RECORD_STRIDE};

pub const RING_FOLLOWERS: usize = 5;

/// Undirected 5-ring `1-2-3-4-5-1` with `b = (1, 0, 0, 0, 0)`.
pub fn ring_topology() -> Topology {
    ring_topology_with_leader(&[1.0, 0.0, 0.0, 0.0, 0.0])
}

pub fn ring_topology_with_leader(b: &[f64]) -> Topology {
    let n = RING_FOLLOWERS;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        let j = (i + 1) % n;
        a[i][j] = 1.0;
        a[j][i] = 1.0;
    }
    Topology::from_rows(&a, b).expect("ring topology is valid")
}

/// `u0(t) = sin(0.2 pi t)`
pub fn sine_input() -> LeaderSignal {
    LeaderSignal::Sinusoid { amplitude: 1.0, angular_frequency: 0.2 * PI, phase: 0.0 }
}

/// Input that settles to a constant: `u0(t) = 0.1 + 0.9 exp(-t)`.
pub fn settling_input() -> LeaderSignal {
    LeaderSignal::DecayingToConstant { constant: 0.1, transient_amplitude: 0.9, decay_rate: 1.0 }
}

/// Initial adaptive gain `d_i(0)` of the adaptive scenarios. It sits just
/// above the sinusoid's rate bound `0.2 pi`, so the sliding observers
/// dominate the leader input from the start.
pub const INITIAL_ADAPTIVE_GAIN: f64 = 0.7;

fn gains(second_order: bool) -> Gains {
    Gains {
        k1: 1.0,
        k2: second_order.then_some(1.0),
        l: 1.0,
        c: 0.5,
        tau: vec![1.0; RING_FOLLOWERS],
    }
}

fn base(mode: Mode, leader_signal: LeaderSignal) -> SimConfig {
    let second = mode.is_second_order();
    SimConfig {
        topology: ring_topology(),
        gains: gains(second),
        leader_signal,
        mode,
        initial: InitialStates {
            leader_position: 0.0,
            leader_velocity: second.then_some(0.0),
            follower_positions: vec![3.0, 0.0, -2.0, 1.0, -1.0],
            follower_velocities: second.then(|| vec![1.0, -2.0, 3.0, 0.0, -1.0]),
            observers: ObserverInit::default(),
        },
        dt: DEFAULT_DT,
        t_end: 60.0,
        record_stride: DEFAULT_RECORD_STRIDE,
        sign_policy: SignPolicy::EXACT,
    }
}

fn with_initial_gain(mut cfg: SimConfig) -> SimConfig {
    cfg.initial.observers.adaptive_gain = Some(vec![INITIAL_ADAPTIVE_GAIN; RING_FOLLOWERS]);
    cfg
}

/// First-order agents with the adaptive input observer, sinusoidal input.
pub fn fig4_first_order() -> SimConfig {
    with_initial_gain(base(Mode::FirstOrderAdaptive, sine_input()))
}

/// First-order agents with the simplified input observer and an input that
/// settles to a constant.
pub fn fig4_simplified() -> SimConfig {
    base(Mode::FirstOrderSimplified, settling_input())
}

/// Double-integrator agents, sinusoidal input.
pub fn fig5_second_order() -> SimConfig {
    with_initial_gain(base(Mode::SecondOrder, sine_input()))
}

/// The first-order study with the leader link removed.
pub fn negative_unreachable() -> SimConfig {
    let mut cfg = fig4_first_order();
    cfg.topology = ring_topology_with_leader(&[0.0; RING_FOLLOWERS]);
    cfg
}
