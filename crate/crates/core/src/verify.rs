//! Matrix-form error dynamics and oracles for the closed loop.
//!
//! The simulation integrates each follower's observers one at a time. This
//! module evaluates the same dynamics in stacked error coordinates,
//!
//! ```text
//! e_u  = uhat0 - u0 1        e_x = xhat0 - x0 1        e = x - x0 1
//! e_0v = vhat0 - v0 1        e_v = vhat - v            (second order)
//! ```
//!
//! using only `H1 = l B + L`, `H2 = B + L` and the gains, so the two routes
//! can be checked against each other.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::control::Gains;
use crate::graph::{self, GraphError};
use crate::observers::{sgn, SignPolicy};
use crate::signals::{LeaderSignal, SignalError};
use crate::sim::{self, ClosedLoop, Mode, Rk4, SimConfig, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    NoAnalyticRate(#[from] SignalError),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite (smallest eigenvalue {0})")]
    NotPositiveDefinite(f64),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Stacked errors. Second-order channels are empty vectors in first-order
/// modes; `tracking` has `2n` entries (positions, then velocities) in
/// second-order mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Errors {
    pub input: DVector<f64>,
    pub position: DVector<f64>,
    pub tracking: DVector<f64>,
    pub leader_velocity: DVector<f64>,
    pub self_velocity: DVector<f64>,
    /// Adaptive gains `d`, integrated alongside the errors.
    pub gains: DVector<f64>,
}

impl Errors {
    fn channels(&self) -> [(&'static str, &DVector<f64>); 6] {
        [
            ("e_u", &self.input),
            ("e_x", &self.position),
            ("e", &self.tracking),
            ("e_0v", &self.leader_velocity),
            ("e_v", &self.self_velocity),
            ("d", &self.gains),
        ]
    }

    fn to_flat(&self) -> Vec<f64> {
        self.channels().iter().flat_map(|(_, v)| v.iter().copied()).collect()
    }

    fn reshape_flat(&self, flat: &[f64]) -> Self {
        let mut k = 0;
        let mut take = |len: usize| {
            let v = DVector::from_column_slice(&flat[k..k + len]);
            k += len;
            v
        };
        Self {
            input: take(self.input.len()),
            position: take(self.position.len()),
            tracking: take(self.tracking.len()),
            leader_velocity: take(self.leader_velocity.len()),
            self_velocity: take(self.self_velocity.len()),
            gains: take(self.gains.len()),
        }
    }

    /// Per-channel `max |a - b|`.
    pub fn discrepancy(&self, other: &Errors) -> BTreeMap<&'static str, f64> {
        self.channels()
            .iter()
            .zip(other.channels().iter())
            .filter(|((_, a), _)| !a.is_empty())
            .map(|((name, a), (_, b))| (*name, (*a - *b).amax()))
            .collect()
    }
}

/// The stacked error system of one configuration.
#[derive(Debug, Clone)]
pub struct ErrorSystem {
    mode: Mode,
    h1: DMatrix<f64>,
    h2: DMatrix<f64>,
    b: DVector<f64>,
    gains: Gains,
    signal: LeaderSignal,
    sign_policy: SignPolicy,
}

impl ErrorSystem {
    pub fn new(cfg: &SimConfig) -> Result<Self, VerifyError> {
        cfg.validate()?;
        let m = graph::h_matrices(&cfg.topology, cfg.gains.l)?;
        Ok(Self {
            mode: cfg.mode,
            h1: m.h1,
            h2: m.h2,
            b: cfg.topology.leader_adjacency().clone(),
            gains: cfg.gains.clone(),
            signal: cfg.leader_signal.clone(),
            sign_policy: cfg.sign_policy,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn h1(&self) -> &DMatrix<f64> {
        &self.h1
    }

    pub fn h2(&self) -> &DMatrix<f64> {
        &self.h2
    }

    /// Coupling matrix of the input-error dynamics for this mode.
    fn input_coupling(&self) -> &DMatrix<f64> {
        match self.mode {
            Mode::FirstOrderAdaptive | Mode::FirstOrderSimplified => &self.h1,
            Mode::FirstOrderDirect | Mode::SecondOrder => &self.h2,
        }
    }

    /// `F1 = [[0, I], [-k1 I, -k2 I]]`
    pub fn f1(&self) -> DMatrix<f64> {
        f1_matrix(self.n(), self.gains.k1, self.gains.k2.unwrap_or(0.0))
    }

    /// `(-H e_u - D sgn(H e_u) - du0/dt 1, tau |H e_u|)`; the switching and
    /// adaptive parts vanish for the simplified observer.
    fn input_error_rate(&self, e_u: &DVector<f64>, d: &DVector<f64>, u0_rate: f64) -> (DVector<f64>, DVector<f64>) {
        let h = self.input_coupling();
        let r = h * e_u;
        let mut rate = -&r;
        rate.add_scalar_mut(-u0_rate);
        if !self.mode.is_adaptive() {
            return (rate, DVector::zeros(d.len()));
        }
        let switching = DVector::from_iterator(r.len(), r.iter().map(|v| sgn(*v, self.sign_policy)));
        rate -= d.component_mul(&switching);
        let tau = DVector::from_column_slice(&self.gains.tau);
        let d_rate = tau.component_mul(&r.abs());
        (rate, d_rate)
    }

    /// First-order error rates:
    ///
    /// ```text
    /// de_u = -H e_u - D sgn(H e_u) - du0/dt 1
    /// de_x = -c H2 e_x + e_u
    /// de   = -k1 e + k1 e_x + e_u
    /// ```
    ///
    /// with `H = H1`, or `H2` for the direct observer.
    pub fn error_rate_first_order(&self, e: &Errors, t: f64) -> Result<Errors, VerifyError> {
        if self.mode.is_second_order() {
            return Err(VerifyError::Unsupported("second-order system".into()));
        }
        let u0_rate = self.signal.input_rate(t)?;
        let (input, gains) = self.input_error_rate(&e.input, &e.gains, u0_rate);
        let position = -(&self.h2 * &e.position) * self.gains.c + &e.input;
        let tracking = -&e.tracking * self.gains.k1 + &e.position * self.gains.k1 + &e.input;
        Ok(Errors {
            input,
            position,
            tracking,
            leader_velocity: DVector::zeros(0),
            self_velocity: DVector::zeros(0),
            gains,
        })
    }

    /// Second-order error rates:
    ///
    /// ```text
    /// de_u  = -H2 e_u - D sgn(H2 e_u) - du0/dt 1
    /// de_0v = -H1 e_0v + e_u
    /// de_x  = -c H2 e_x + e_0v
    /// de_v  = -l e_v
    /// de    = F1 e + [0; -k2 e_v + k2 e_0v + k1 e_x + e_u]
    /// ```
    pub fn error_rate_second_order(&self, e: &Errors, t: f64) -> Result<Errors, VerifyError> {
        if !self.mode.is_second_order() {
            return Err(VerifyError::Unsupported("first-order system".into()));
        }
        let g = &self.gains;
        let k2 = g.k2.expect("validated second-order gains");
        let n = self.n();
        let u0_rate = self.signal.input_rate(t)?;
        let (input, gains) = self.input_error_rate(&e.input, &e.gains, u0_rate);
        let leader_velocity = -(&self.h1 * &e.leader_velocity) + &e.input;
        let position = -(&self.h2 * &e.position) * g.c + &e.leader_velocity;
        let self_velocity = -&e.self_velocity * g.l;
        let forcing = -&e.self_velocity * k2 + &e.leader_velocity * k2 + &e.position * g.k1 + &e.input;
        let mut f2 = DVector::zeros(2 * n);
        f2.rows_mut(n, n).copy_from(&forcing);
        let tracking = self.f1() * &e.tracking + f2;
        Ok(Errors { input, position, tracking, leader_velocity, self_velocity, gains })
    }

    pub fn error_rate(&self, e: &Errors, t: f64) -> Result<Errors, VerifyError> {
        if self.mode.is_second_order() {
            self.error_rate_second_order(e, t)
        } else {
            self.error_rate_first_order(e, t)
        }
    }

    /// Generator `A` of the autonomous error system `d(e_u, e_x, e)/dt = A (e_u, e_x, e)`
    /// for the simplified observer under an input with zero rate.
    pub fn linear_generator(&self) -> Result<DMatrix<f64>, VerifyError> {
        if self.mode != Mode::FirstOrderSimplified || self.signal.rate_bound() != Some(0.0) {
            return Err(VerifyError::Unsupported(
                "only the simplified observer under a constant input is linear and autonomous".into(),
            ));
        }
        let n = self.n();
        let g = &self.gains;
        let id = DMatrix::<f64>::identity(n, n);
        let mut a = DMatrix::zeros(3 * n, 3 * n);
        a.view_mut((0, 0), (n, n)).copy_from(&(-&self.h1));
        a.view_mut((n, 0), (n, n)).copy_from(&id);
        a.view_mut((n, n), (n, n)).copy_from(&(-&self.h2 * g.c));
        a.view_mut((2 * n, 0), (n, n)).copy_from(&id);
        a.view_mut((2 * n, n), (n, n)).copy_from(&(&id * g.k1));
        a.view_mut((2 * n, 2 * n), (n, n)).copy_from(&(-&id * g.k1));
        Ok(a)
    }
}

/// `F1 = [[0, I], [-k1 I, -k2 I]]` of size `2n`.
pub fn f1_matrix(n: usize, k1: f64, k2: f64) -> DMatrix<f64> {
    let mut f = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        f[(i, n + i)] = 1.0;
        f[(n + i, i)] = -k1;
        f[(n + i, n + i)] = -k2;
    }
    f
}

/// Error coordinates of a flattened closed-loop state, computed from the
/// state layout with stacked matrix algebra.
pub fn errors_of_state(field: &ClosedLoop, t: f64, y: &[f64]) -> Errors {
    let cfg = field.config();
    let lay = field.layout();
    let n = lay.n();
    let l = cfg.gains.l;
    let b = cfg.topology.leader_adjacency();
    let slice = |r: std::ops::Range<usize>| DVector::from_column_slice(&y[r]);
    let ones = DVector::from_element(n, 1.0);

    let x0 = y[lay.leader_position()];
    let u0 = cfg.leader_signal.input(t);
    let obs = slice(lay.input_observer());
    let uhat = match cfg.mode {
        Mode::FirstOrderAdaptive | Mode::FirstOrderSimplified => obs + b * (l * x0),
        Mode::FirstOrderDirect | Mode::SecondOrder => obs,
    };
    let input = uhat - &ones * u0;
    let position = slice(lay.position_observer()) - &ones * x0;
    let x_err = slice(lay.positions()) - &ones * x0;
    let gains = slice(lay.adaptive_gains());

    match (lay.leader_velocity(), lay.velocities()) {
        (Some(k), Some(vr)) => {
            let v0 = y[k];
            let v = slice(vr);
            let zv = slice(lay.leader_velocity_observer().expect("second-order layout"));
            let zbar = slice(lay.self_velocity_observer().expect("second-order layout"));
            let leader_velocity = zv + b * (l * x0) - &ones * v0;
            let self_velocity = zbar + slice(lay.positions()) * l - &v;
            let mut tracking = DVector::zeros(2 * n);
            tracking.rows_mut(0, n).copy_from(&x_err);
            tracking.rows_mut(n, n).copy_from(&(v - &ones * v0));
            Errors { input, position, tracking, leader_velocity, self_velocity, gains }
        }
        _ => Errors {
            input,
            position,
            tracking: x_err,
            leader_velocity: DVector::zeros(0),
            self_velocity: DVector::zeros(0),
            gains,
        },
    }
}

/// Time derivative of [`errors_of_state`] obtained by pushing the
/// per-follower closed-loop rates through the (affine) change of variables.
pub fn stacked_error_rates(field: &ClosedLoop, t: f64, y: &[f64]) -> Result<Errors, VerifyError> {
    let cfg = field.config();
    let lay = field.layout();
    let n = lay.n();
    let l = cfg.gains.l;
    let b = cfg.topology.leader_adjacency();
    let ones = DVector::from_element(n, 1.0);
    let u0_rate = cfg.leader_signal.input_rate(t)?;

    let mut dy = vec![0.0; y.len()];
    field.rate(t, y, &mut dy)?;
    let slice = |r: std::ops::Range<usize>| DVector::from_column_slice(&dy[r]);

    let x0_rate = dy[lay.leader_position()];
    let obs_rate = slice(lay.input_observer());
    let uhat_rate = match cfg.mode {
        Mode::FirstOrderAdaptive | Mode::FirstOrderSimplified => obs_rate + b * (l * x0_rate),
        Mode::FirstOrderDirect | Mode::SecondOrder => obs_rate,
    };
    let input = uhat_rate - &ones * u0_rate;
    let position = slice(lay.position_observer()) - &ones * x0_rate;
    let x_rate = slice(lay.positions());
    let gains = slice(lay.adaptive_gains());

    Ok(match (lay.leader_velocity(), lay.velocities()) {
        (Some(k), Some(vr)) => {
            let v0_rate = dy[k];
            let v_rate = slice(vr);
            let zv_rate = slice(lay.leader_velocity_observer().expect("second-order layout"));
            let zbar_rate = slice(lay.self_velocity_observer().expect("second-order layout"));
            let leader_velocity = zv_rate + b * (l * x0_rate) - &ones * v0_rate;
            let self_velocity = zbar_rate + &x_rate * l - &v_rate;
            let mut tracking = DVector::zeros(2 * n);
            tracking.rows_mut(0, n).copy_from(&(x_rate - &ones * x0_rate));
            tracking.rows_mut(n, n).copy_from(&(v_rate - &ones * v0_rate));
            Errors { input, position, tracking, leader_velocity, self_velocity, gains }
        }
        _ => Errors {
            input,
            position,
            tracking: x_rate - &ones * x0_rate,
            leader_velocity: DVector::zeros(0),
            self_velocity: DVector::zeros(0),
            gains,
        },
    })
}

/// Sup-norm gap between the full simulation's error series and the
/// independently integrated error system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub mode: String,
    pub horizon: f64,
    pub dt: f64,
    pub samples: usize,
    /// Largest discrepancy per error channel (`e_u`, `e_x`, `e`, ...).
    pub channels: BTreeMap<String, f64>,
}

impl CrossCheckReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.channels.values().fold(0.0, |m, v| m.max(*v))
    }

    /// Largest discrepancy over the estimation and tracking errors, leaving
    /// out the adaptive-gain channel.
    pub fn max_error_discrepancy(&self) -> f64 {
        self.channels.iter().filter(|(k, _)| k.as_str() != "d").fold(0.0, |m, (_, v)| m.max(*v))
    }
}

/// Integrate the closed loop and the stacked error system side by side with
/// the same RK4 step and compare them every `record_stride` steps.
pub fn cross_check(cfg: &SimConfig, horizon: f64, dt: f64) -> Result<CrossCheckReport, VerifyError> {
    if !cfg.leader_signal.has_analytic_rate() {
        return Err(SignalError::NoAnalyticRate.into());
    }
    let mut cfg = cfg.clone();
    cfg.t_end = horizon;
    cfg.dt = dt;
    let field = ClosedLoop::new(&cfg)?;
    let system = ErrorSystem::new(&cfg)?;

    let mut y = field.initial_state();
    let mut reduced = errors_of_state(&field, 0.0, &y);
    let template = reduced.clone();
    let mut flat = reduced.to_flat();
    let mut rk_full = Rk4::new(y.len());
    let mut rk_reduced = Rk4::new(flat.len());

    let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut samples = 0;
    let mut compare = |t: f64, y: &[f64], reduced: &Errors| {
        let full = errors_of_state(&field, t, y);
        for (k, v) in full.discrepancy(reduced) {
            let w = worst.entry(k).or_insert(0.0);
            *w = w.max(v);
        }
        samples += 1;
    };
    compare(0.0, &y, &reduced);

    let steps = cfg.steps();
    let stride = cfg.record_stride as u64;
    for k in 0..steps {
        let t = k as f64 * dt;
        rk_full.step(|t, y, dy| field.rate(t, y, dy), t, dt, &mut y)?;
        let mut failure = None;
        rk_reduced.step(
            |t, s, ds| {
                match system.error_rate(&template.reshape_flat(s), t) {
                    Ok(rate) => ds.copy_from_slice(&rate.to_flat()),
                    Err(e) => {
                        failure = Some(e);
                        ds.fill(0.0);
                    }
                }
                Ok(())
            },
            t,
            dt,
            &mut flat,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        let done = k + 1;
        if done % stride == 0 || done == steps {
            reduced = template.reshape_flat(&flat);
            compare(done as f64 * dt, &y, &reduced);
        }
    }
    Ok(CrossCheckReport {
        mode: cfg.mode.name().into(),
        horizon,
        dt,
        samples,
        channels: worst.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}

/// `exp(-H t) e0` for symmetric positive definite `H`, via its eigenvectors.
pub fn linear_error_solution(h: &DMatrix<f64>, e0: &DVector<f64>, t: f64) -> Result<DVector<f64>, VerifyError> {
    if !h.is_square() || h.nrows() != e0.len() {
        return Err(VerifyError::Unsupported("dimension mismatch".into()));
    }
    let scale = h.amax().max(1.0);
    if (h - h.transpose()).amax() > 1e-12 * scale {
        return Err(VerifyError::NotSymmetric);
    }
    let eig = h.clone().symmetric_eigen();
    let lam_min = eig.eigenvalues.min();
    if !(lam_min > 0.0) {
        return Err(VerifyError::NotPositiveDefinite(lam_min));
    }
    let coords = eig.eigenvectors.transpose() * e0;
    let decayed = DVector::from_iterator(
        coords.len(),
        coords.iter().zip(eig.eigenvalues.iter()).map(|(c, lam)| c * (-lam * t).exp()),
    );
    Ok(&eig.eigenvectors * decayed)
}

/// Largest gap between the simplified-observer simulation under a constant
/// input and `exp(A t)` applied to its initial errors, over the recorded
/// samples. Returns `(max gap, samples)`.
pub fn linear_oracle_discrepancy(cfg: &SimConfig) -> Result<(f64, usize), VerifyError> {
    let system = ErrorSystem::new(cfg)?;
    let a = system.linear_generator()?;
    let field = ClosedLoop::new(cfg)?;
    let e0 = errors_of_state(&field, 0.0, &field.initial_state());
    let mut start = DVector::zeros(3 * system.n());
    let n = system.n();
    start.rows_mut(0, n).copy_from(&e0.input);
    start.rows_mut(n, n).copy_from(&e0.position);
    start.rows_mut(2 * n, n).copy_from(&e0.tracking);

    let result = sim::run(cfg)?;
    let mut worst = 0.0_f64;
    for (k, &t) in result.times.iter().enumerate() {
        let exact = (&a * t).exp() * &start;
        let errs = &result.errors;
        let sim_rows = [&errs.input[k], &errs.position[k], &errs.tracking[k]];
        for (block, row) in sim_rows.iter().enumerate() {
            for i in 0..n {
                worst = worst.max((row[i] - exact[block * n + i]).abs());
            }
        }
    }
    Ok((worst, result.times.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn equilibrium_has_zero_rates() {
        let mut cfg = presets::fig4_first_order();
        cfg.leader_signal = LeaderSignal::Constant { value: 0.3 };
        let es = ErrorSystem::new(&cfg).unwrap();
        let zero = DVector::zeros(5);
        let e = Errors {
            input: zero.clone(),
            position: zero.clone(),
            tracking: zero.clone(),
            leader_velocity: DVector::zeros(0),
            self_velocity: DVector::zeros(0),
            gains: DVector::from_element(5, 0.4),
        };
        let r = es.error_rate_first_order(&e, 3.0).unwrap();
        assert_eq!(r.input.amax(), 0.0);
        assert_eq!(r.position.amax(), 0.0);
        assert_eq!(r.tracking.amax(), 0.0);
        assert_eq!(r.gains.amax(), 0.0);
        assert!(es.error_rate_second_order(&e, 0.0).is_err());
    }

    #[test]
    fn scalar_input_error() {
        let mut cfg = presets::fig4_first_order();
        cfg.topology = crate::graph::Topology::from_rows(&[vec![0.0]], &[1.0]).unwrap();
        cfg.gains.tau = vec![1.0];
        cfg.initial.observers.adaptive_gain = None;
        cfg.leader_signal = LeaderSignal::Constant { value: 0.0 };
        cfg.initial.follower_positions = vec![0.0];
        let es = ErrorSystem::new(&cfg).unwrap();
        let one = DVector::from_element(1, 1.0);
        let e = Errors {
            input: one.clone(),
            position: DVector::zeros(1),
            tracking: DVector::zeros(1),
            leader_velocity: DVector::zeros(0),
            self_velocity: DVector::zeros(0),
            gains: DVector::zeros(1),
        };
        let r = es.error_rate_first_order(&e, 0.0).unwrap();
        assert_eq!(r.input[0], -1.0);
    }

    #[test]
    fn second_order_equilibrium_and_velocity_decay() {
        let mut cfg = presets::fig5_second_order();
        cfg.leader_signal = LeaderSignal::Constant { value: -0.2 };
        let es = ErrorSystem::new(&cfg).unwrap();
        let z5 = DVector::zeros(5);
        let mut e = Errors {
            input: z5.clone(),
            position: z5.clone(),
            tracking: DVector::zeros(10),
            leader_velocity: z5.clone(),
            self_velocity: z5.clone(),
            gains: z5.clone(),
        };
        let r = es.error_rate_second_order(&e, 1.0).unwrap();
        assert_eq!(r.to_flat().iter().fold(0.0_f64, |m, v| m.max(v.abs())), 0.0);
        e.self_velocity = DVector::from_element(5, 2.0);
        let r = es.error_rate_second_order(&e, 1.0).unwrap();
        assert_eq!(r.self_velocity, DVector::from_element(5, -2.0));
    }

    #[test]
    fn table_signals_have_no_oracle() {
        let mut cfg = presets::fig4_first_order();
        cfg.leader_signal = LeaderSignal::SampledTable { times: vec![0.0, 1.0], values: vec![0.0, 1.0] };
        assert!(matches!(cross_check(&cfg, 1.0, 1e-2), Err(VerifyError::NoAnalyticRate(_))));
    }

    #[test]
    fn linear_solution_basics() {
        let h = DMatrix::from_element(1, 1, 2.0);
        let e0 = DVector::from_element(1, 1.0);
        assert_eq!(linear_error_solution(&h, &e0, 0.0).unwrap(), e0);
        let e1 = linear_error_solution(&h, &e0, 1.0).unwrap();
        assert!((e1[0] - (-2.0_f64).exp()).abs() < 1e-15);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(linear_error_solution(&asym, &DVector::zeros(2), 1.0), Err(VerifyError::NotSymmetric));
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            linear_error_solution(&indefinite, &DVector::zeros(2), 1.0),
            Err(VerifyError::NotPositiveDefinite(_))
        ));
    }
}
