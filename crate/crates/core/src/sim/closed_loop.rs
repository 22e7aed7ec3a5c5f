use std::cell::Cell;
use std::ops::Range;

use crate::control::{first_order_control, second_order_control};
use crate::observers::{
    adaptive_input_observer_rate, direct_input_observer_rate, leader_velocity_observer_rate,
    position_observer_rate, self_velocity_estimate, self_velocity_observer_rate,
    simplified_input_observer_rate, LeaderMeasurement, NeighborView, Published,
};

use super::{Mode, SimConfig, SimError};

/// Position of every quantity inside the flattened state vector.
///
/// First order: `[x0, x_1..n, input observer_1..n, xhat0_1..n, d_1..n]`.
///
/// Second order: `[x0, v0, x_1..n, v_1..n, uhat0_1..n, leader velocity
/// observer_1..n, xhat0_1..n, zbar_1..n, d_1..n]`.
///
/// Simplified mode keeps the `d` block (with zero rate) so every first-order
/// layout has the same dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    n: usize,
    second_order: bool,
}

impl StateLayout {
    pub fn new(n: usize, mode: Mode) -> Self {
        Self { n, second_order: mode.is_second_order() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn leader_len(&self) -> usize {
        if self.second_order { 2 } else { 1 }
    }

    fn block(&self, k: usize) -> Range<usize> {
        let start = self.leader_len() + k * self.n;
        start..start + self.n
    }

    pub fn dim(&self) -> usize {
        self.leader_len() + if self.second_order { 7 } else { 4 } * self.n
    }

    pub fn leader_position(&self) -> usize {
        0
    }

    pub fn leader_velocity(&self) -> Option<usize> {
        self.second_order.then_some(1)
    }

    pub fn positions(&self) -> Range<usize> {
        self.block(0)
    }

    pub fn velocities(&self) -> Option<Range<usize>> {
        self.second_order.then(|| self.block(1))
    }

    /// `z_i` (first order, adaptive/simplified), `uhat_{0,i}` otherwise.
    pub fn input_observer(&self) -> Range<usize> {
        self.block(if self.second_order { 2 } else { 1 })
    }

    pub fn leader_velocity_observer(&self) -> Option<Range<usize>> {
        self.second_order.then(|| self.block(3))
    }

    pub fn position_observer(&self) -> Range<usize> {
        self.block(if self.second_order { 4 } else { 2 })
    }

    pub fn self_velocity_observer(&self) -> Option<Range<usize>> {
        self.second_order.then(|| self.block(5))
    }

    pub fn adaptive_gains(&self) -> Range<usize> {
        self.block(if self.second_order { 6 } else { 3 })
    }
}

/// Per-follower outputs at one instant, alongside the leader's input.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub leader_input: f64,
    pub input_estimate: Vec<f64>,
    pub position_estimate: Vec<f64>,
    pub leader_velocity_estimate: Vec<f64>,
    pub self_velocity_estimate: Vec<f64>,
    pub control: Vec<f64>,
}

/// The closed-loop vector field: leader, plants, observers and controllers
/// flattened into one ODE.
#[derive(Debug)]
pub struct ClosedLoop {
    cfg: SimConfig,
    layout: StateLayout,
    neighbors: Vec<Vec<(usize, f64)>>,
    leader_input_reads: Cell<u64>,
}

/// Validate `cfg` and build its closed-loop vector field.
pub fn assemble_vector_field(cfg: &SimConfig) -> Result<ClosedLoop, SimError> {
    ClosedLoop::new(cfg)
}

impl ClosedLoop {
    pub fn new(cfg: &SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let n = cfg.n_followers();
        Ok(Self {
            layout: StateLayout::new(n, cfg.mode),
            neighbors: (0..n).map(|i| cfg.topology.neighbors(i)).collect(),
            cfg: cfg.clone(),
            leader_input_reads: Cell::new(0),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn layout(&self) -> StateLayout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// How many neighbor views so far carried the leader's input.
    pub fn leader_input_reads(&self) -> u64 {
        self.leader_input_reads.get()
    }

    /// What the leader transmits to follower `i`: nothing unless linked,
    /// and never its input in simplified mode.
    pub fn leader_measurement(&self, i: usize, x0: f64, u0: f64) -> LeaderMeasurement {
        if self.cfg.topology.leader_weight(i) > 0.0 {
            LeaderMeasurement {
                position: Some(x0),
                input: self.cfg.mode.shares_leader_input().then_some(u0),
            }
        } else {
            LeaderMeasurement::NONE
        }
    }

    /// Flattened initial state.
    pub fn initial_state(&self) -> Vec<f64> {
        let lay = self.layout;
        let init = &self.cfg.initial;
        let mut y = vec![0.0; lay.dim()];
        y[lay.leader_position()] = init.leader_position;
        y[lay.positions()].copy_from_slice(&init.follower_positions);
        if let (Some(k), Some(v0)) = (lay.leader_velocity(), init.leader_velocity) {
            y[k] = v0;
        }
        if let (Some(r), Some(v)) = (lay.velocities(), &init.follower_velocities) {
            y[r].copy_from_slice(v);
        }
        let obs = &init.observers;
        let mut fill = |r: Option<Range<usize>>, v: &Option<Vec<f64>>| {
            if let (Some(r), Some(v)) = (r, v) {
                y[r].copy_from_slice(v);
            }
        };
        fill(Some(lay.input_observer()), &obs.input);
        fill(Some(lay.position_observer()), &obs.position);
        fill(lay.leader_velocity_observer(), &obs.leader_velocity);
        fill(lay.self_velocity_observer(), &obs.self_velocity);
        fill(Some(lay.adaptive_gains()), &obs.adaptive_gain);
        y
    }

    fn view(&self, i: usize, published: &[Published], leader: LeaderMeasurement) -> Result<NeighborView, SimError> {
        if leader.input.is_some() {
            self.leader_input_reads.set(self.leader_input_reads.get() + 1);
        }
        let neighbors = self.neighbors[i].iter().map(|&(j, a)| (j, a, published[j])).collect();
        Ok(NeighborView::from_parts(i, self.cfg.topology.leader_weight(i), neighbors, leader)?)
    }

    /// Write `dy/dt` at `(t, y)` into `dy`.
    pub fn rate(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), SimError> {
        self.evaluate(t, y, dy, None)
    }

    /// Estimates and applied inputs at `(t, y)`.
    pub fn outputs(&self, t: f64, y: &[f64]) -> Result<Outputs, SimError> {
        let n = self.layout.n();
        let mut out = Outputs {
            leader_input: 0.0,
            input_estimate: vec![0.0; n],
            position_estimate: vec![0.0; n],
            leader_velocity_estimate: vec![0.0; n],
            self_velocity_estimate: vec![0.0; n],
            control: vec![0.0; n],
        };
        let mut dy = vec![0.0; y.len()];
        self.evaluate(t, y, &mut dy, Some(&mut out))?;
        Ok(out)
    }

    fn evaluate(&self, t: f64, y: &[f64], dy: &mut [f64], out: Option<&mut Outputs>) -> Result<(), SimError> {
        if self.cfg.mode.is_second_order() {
            self.second_order(t, y, dy, out)
        } else {
            self.first_order(t, y, dy, out)
        }
    }

    fn first_order(&self, t: f64, y: &[f64], dy: &mut [f64], mut out: Option<&mut Outputs>) -> Result<(), SimError> {
        let lay = self.layout;
        let n = lay.n();
        let cfg = &self.cfg;
        let g = &cfg.gains;
        let topo = &cfg.topology;
        let mode = cfg.mode;

        let x0 = y[lay.leader_position()];
        let u0 = cfg.leader_signal.input(t);
        let x = &y[lay.positions()];
        let obs = &y[lay.input_observer()];
        let xhat = &y[lay.position_observer()];
        let d = &y[lay.adaptive_gains()];

        // every follower publishes uhat_{0,i} and xhat_{0,i}
        let published: Vec<Published> = (0..n)
            .map(|i| {
                let input = match mode {
                    Mode::FirstOrderDirect => obs[i],
                    _ => obs[i] + topo.leader_weight(i) * g.l * x0,
                };
                Published { input, position: xhat[i], leader_velocity: 0.0 }
            })
            .collect();

        dy[lay.leader_position()] = crate::signals::first_order_plant_rate(x0, u0);
        let (pos, inp, est, gain) = (lay.positions(), lay.input_observer(), lay.position_observer(), lay.adaptive_gains());
        for i in 0..n {
            let view = self.view(i, &published, self.leader_measurement(i, x0, u0))?;
            let (obs_rate, d_rate, uhat) = match mode {
                Mode::FirstOrderAdaptive => {
                    let r = adaptive_input_observer_rate(&view, obs[i], d[i], g.tau[i], g.l, cfg.sign_policy)?;
                    (r.z_rate, r.d_rate, r.uhat)
                }
                Mode::FirstOrderSimplified => {
                    let (z_rate, uhat) = simplified_input_observer_rate(&view, obs[i], g.l)?;
                    (z_rate, 0.0, uhat)
                }
                Mode::FirstOrderDirect => {
                    let (rate, d_rate) = direct_input_observer_rate(&view, obs[i], d[i], g.tau[i], cfg.sign_policy)?;
                    (rate, d_rate, obs[i])
                }
                Mode::SecondOrder => unreachable!("second-order mode in first-order field"),
            };
            let xhat_rate = position_observer_rate(&view, xhat[i], g.c, uhat)?;
            let u = first_order_control(x[i], xhat[i], uhat, g.k1);

            dy[pos.start + i] = crate::signals::first_order_plant_rate(x[i], u);
            dy[inp.start + i] = obs_rate;
            dy[est.start + i] = xhat_rate;
            dy[gain.start + i] = d_rate;

            if let Some(o) = out.as_deref_mut() {
                o.input_estimate[i] = uhat;
                o.position_estimate[i] = xhat[i];
                o.control[i] = u;
            }
        }
        if let Some(o) = out {
            o.leader_input = u0;
        }
        Ok(())
    }

    fn second_order(&self, t: f64, y: &[f64], dy: &mut [f64], mut out: Option<&mut Outputs>) -> Result<(), SimError> {
        let lay = self.layout;
        let n = lay.n();
        let cfg = &self.cfg;
        let g = &cfg.gains;
        let k2 = g.k2.expect("validated second-order gains");
        let topo = &cfg.topology;

        let x0 = y[lay.leader_position()];
        let v0_idx = lay.leader_velocity().expect("second-order layout");
        let v0 = y[v0_idx];
        let u0 = cfg.leader_signal.input(t);
        let vel = lay.velocities().expect("second-order layout");
        let lvo = lay.leader_velocity_observer().expect("second-order layout");
        let svo = lay.self_velocity_observer().expect("second-order layout");

        let x = &y[lay.positions()];
        let v = &y[vel.clone()];
        let uhat = &y[lay.input_observer()];
        let zv = &y[lvo.clone()];
        let xhat = &y[lay.position_observer()];
        let zbar = &y[svo.clone()];
        let d = &y[lay.adaptive_gains()];

        let published: Vec<Published> = (0..n)
            .map(|i| Published {
                input: uhat[i],
                position: xhat[i],
                leader_velocity: zv[i] + topo.leader_weight(i) * g.l * x0,
            })
            .collect();

        let (x0_rate, v0_rate) = crate::signals::second_order_plant_rate(x0, v0, u0);
        dy[lay.leader_position()] = x0_rate;
        dy[v0_idx] = v0_rate;
        let (pos, inp, est, gain) = (lay.positions(), lay.input_observer(), lay.position_observer(), lay.adaptive_gains());
        for i in 0..n {
            let view = self.view(i, &published, self.leader_measurement(i, x0, u0))?;
            let (uhat_rate, d_rate) = direct_input_observer_rate(&view, uhat[i], d[i], g.tau[i], cfg.sign_policy)?;
            let (zv_rate, vhat0) = leader_velocity_observer_rate(&view, zv[i], g.l, uhat[i])?;
            let xhat_rate = position_observer_rate(&view, xhat[i], g.c, vhat0)?;
            let vhat = self_velocity_estimate(x[i], zbar[i], g.l);
            let u = second_order_control(x[i], xhat[i], vhat, vhat0, uhat[i], g.k1, k2);
            let (zbar_rate, _) = self_velocity_observer_rate(x[i], zbar[i], g.l, u);
            let (x_rate, v_rate) = crate::signals::second_order_plant_rate(x[i], v[i], u);

            dy[pos.start + i] = x_rate;
            dy[vel.start + i] = v_rate;
            dy[inp.start + i] = uhat_rate;
            dy[lvo.start + i] = zv_rate;
            dy[est.start + i] = xhat_rate;
            dy[svo.start + i] = zbar_rate;
            dy[gain.start + i] = d_rate;

            if let Some(o) = out.as_deref_mut() {
                o.input_estimate[i] = uhat[i];
                o.position_estimate[i] = xhat[i];
                o.leader_velocity_estimate[i] = vhat0;
                o.self_velocity_estimate[i] = vhat;
                o.control[i] = u;
            }
        }
        if let Some(o) = out {
            o.leader_input = u0;
        }
        Ok(())
    }
}
