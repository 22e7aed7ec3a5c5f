//! Closed-loop simulation with a fixed-step RK4 integrator.

mod closed_loop;
mod config;
mod rk4;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::GraphError;
use crate::observers::ObserverError;

pub use closed_loop::{assemble_vector_field, ClosedLoop, Outputs, StateLayout};
pub use config::{InitialStates, Mode, ObserverInit, SimConfig, DEFAULT_DT, DEFAULT_RECORD_STRIDE};
pub use rk4::{step_rk4, Rk4};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("invalid topology: {0}")]
    Topology(#[from] GraphError),
    #[error(transparent)]
    Observer(#[from] ObserverError),
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
}

/// Per-sample, per-follower series: `series[k][i]`.
pub type Series = Vec<Vec<f64>>;

/// Estimation and tracking errors at every recorded sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    /// `e = x_i - x0`
    pub tracking: Series,
    /// `v_i - v0` (second order)
    pub velocity_tracking: Option<Series>,
    /// `e_u = uhat_{0,i} - u0`
    pub input: Series,
    /// `e_x = xhat_{0,i} - x0`
    pub position: Series,
    /// `e_0v = vhat_{0,i} - v0` (second order)
    pub leader_velocity: Option<Series>,
    /// `e_v = vhat_i - v_i` (second order)
    pub self_velocity: Option<Series>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    /// SHA-256 of the configuration's debug rendering.
    pub config_hash: String,
    pub steps: u64,
    /// Neighbor views that carried the leader's input, over all stages.
    pub leader_input_reads: u64,
    /// The leader table was evaluated outside its knots somewhere in the run.
    pub table_held: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub mode: Mode,
    pub n: usize,
    pub times: Vec<f64>,
    pub leader_position: Vec<f64>,
    pub leader_velocity: Option<Vec<f64>>,
    pub leader_input: Vec<f64>,
    pub position: Series,
    pub velocity: Option<Series>,
    pub input_estimate: Series,
    pub position_estimate: Series,
    pub leader_velocity_estimate: Option<Series>,
    pub self_velocity_estimate: Option<Series>,
    pub adaptive_gain: Series,
    pub control: Series,
    pub errors: ErrorSeries,
    pub final_state: Vec<f64>,
    pub meta: RunMetadata,
}

pub fn config_hash(cfg: &SimConfig) -> String {
    let digest = Sha256::digest(format!("{cfg:?}").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Default)]
struct Recorder {
    times: Vec<f64>,
    x0: Vec<f64>,
    v0: Vec<f64>,
    u0: Vec<f64>,
    x: Series,
    v: Series,
    uhat: Series,
    xhat: Series,
    vhat0: Series,
    vhat: Series,
    d: Series,
    u: Series,
}

impl Recorder {
    fn record(&mut self, field: &ClosedLoop, t: f64, y: &[f64]) -> Result<(), SimError> {
        let lay = field.layout();
        let out = field.outputs(t, y)?;
        self.times.push(t);
        self.x0.push(y[lay.leader_position()]);
        self.u0.push(out.leader_input);
        self.x.push(y[lay.positions()].to_vec());
        self.uhat.push(out.input_estimate);
        self.xhat.push(out.position_estimate);
        self.d.push(y[lay.adaptive_gains()].to_vec());
        self.u.push(out.control);
        if let (Some(k), Some(r)) = (lay.leader_velocity(), lay.velocities()) {
            self.v0.push(y[k]);
            self.v.push(y[r].to_vec());
            self.vhat0.push(out.leader_velocity_estimate);
            self.vhat.push(out.self_velocity_estimate);
        }
        Ok(())
    }

    fn finish(self, cfg: &SimConfig, final_state: Vec<f64>, meta: RunMetadata) -> SimResult {
        let second = cfg.mode.is_second_order();
        let minus = |s: &Series, truth: &[f64]| -> Series {
            s.iter().zip(truth).map(|(row, t)| row.iter().map(|v| v - t).collect()).collect()
        };
        let diff = |a: &Series, b: &Series| -> Series {
            a.iter()
                .zip(b)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(p, q)| p - q).collect())
                .collect()
        };
        let errors = ErrorSeries {
            tracking: minus(&self.x, &self.x0),
            velocity_tracking: second.then(|| minus(&self.v, &self.v0)),
            input: minus(&self.uhat, &self.u0),
            position: minus(&self.xhat, &self.x0),
            leader_velocity: second.then(|| minus(&self.vhat0, &self.v0)),
            self_velocity: second.then(|| diff(&self.vhat, &self.v)),
        };
        SimResult {
            mode: cfg.mode,
            n: cfg.n_followers(),
            times: self.times,
            leader_position: self.x0,
            leader_velocity: second.then_some(self.v0),
            leader_input: self.u0,
            position: self.x,
            velocity: second.then_some(self.v),
            input_estimate: self.uhat,
            position_estimate: self.xhat,
            leader_velocity_estimate: second.then_some(self.vhat0),
            self_velocity_estimate: second.then_some(self.vhat),
            adaptive_gain: self.d,
            control: self.u,
            errors,
            final_state,
            meta,
        }
    }
}

/// Integrate `cfg` from 0 to `t_end`, recording every `record_stride` steps
/// and at the final step.
pub fn run(cfg: &SimConfig) -> Result<SimResult, SimError> {
    let field = ClosedLoop::new(cfg)?;
    let mut y = field.initial_state();
    let steps = cfg.steps();
    let stride = cfg.record_stride as u64;
    let mut rk = Rk4::new(y.len());
    let mut rec = Recorder::default();

    rec.record(&field, 0.0, &y)?;
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        rk.step(|t, y, dy| field.rate(t, y, dy), t, cfg.dt, &mut y)?;
        let done = k + 1;
        if done % stride == 0 || done == steps {
            rec.record(&field, done as f64 * cfg.dt, &y)?;
        }
    }

    let t_final = steps as f64 * cfg.dt;
    let meta = RunMetadata {
        config_hash: config_hash(cfg),
        steps,
        leader_input_reads: field.leader_input_reads(),
        table_held: cfg.leader_signal.is_held(0.0) || cfg.leader_signal.is_held(t_final),
    };
    Ok(rec.finish(cfg, y, meta))
}

/// Earliest recorded time after which `values` stays at or below `tol`.
pub fn convergence_time(times: &[f64], values: &[f64], tol: f64) -> Option<f64> {
    match values.iter().rposition(|v| !(*v <= tol)) {
        None => times.first().copied(),
        Some(k) => times.get(k + 1).copied(),
    }
}

/// `max_i |s[k][i]|` for every sample `k`.
pub fn sup_norm(series: &Series) -> Vec<f64> {
    series.iter().map(|row| row.iter().fold(0.0_f64, |m, v| m.max(v.abs()))).collect()
}

/// Largest `|s[k][i]|` over samples with `times[k] >= from` (0 if none).
pub fn sup_after(times: &[f64], series: &Series, from: f64) -> f64 {
    times
        .iter()
        .zip(sup_norm(series))
        .filter(|(t, _)| **t >= from)
        .fold(0.0, |m, (_, v)| m.max(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_time_cases() {
        let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.1).collect();
        assert_eq!(convergence_time(&times, &vec![0.0; times.len()], 1e-3), Some(0.0));
        assert_eq!(convergence_time(&times, &vec![1.0; times.len()], 0.5), None);

        let decay: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        let t_star = convergence_time(&times, &decay, (-5.0_f64).exp()).unwrap();
        assert!((t_star - 5.0).abs() <= 0.1 + 1e-12, "{t_star}");

        // a late excursion resets the clock
        let mut bumpy = decay.clone();
        bumpy[150] = 1.0;
        assert!((convergence_time(&times, &bumpy, 0.01).unwrap() - 15.1).abs() < 1e-9);
        assert_eq!(convergence_time(&[], &[], 1.0), None);
    }

    #[test]
    fn sup_helpers() {
        let times = vec![0.0, 1.0, 2.0];
        let s = vec![vec![1.0, -3.0], vec![0.5, -0.25], vec![0.0, 0.1]];
        assert_eq!(sup_norm(&s), vec![3.0, 0.5, 0.1]);
        assert_eq!(sup_after(&times, &s, 1.0), 0.5);
        assert_eq!(sup_after(&times, &s, 5.0), 0.0);
    }
}
