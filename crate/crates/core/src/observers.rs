//! Distributed observers run by each follower.
//!
//! Every observer sees the world only through a [`NeighborView`]: its own
//! state, the estimates its neighbors publish, and leader measurements when
//! and only when the follower is linked to the leader (`b_i > 0`).

use thiserror::Error;

use crate::graph::Topology;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObserverError {
    #[error("follower {i} is linked to the leader but has no leader {what} measurement")]
    MissingLeaderMeasurement { i: usize, what: &'static str },
    #[error("follower {i} is not linked to the leader but was handed leader data")]
    LeaderDataNotEntitled { i: usize },
    #[error("invalid neighbor list for follower {i}: {reason}")]
    InvalidNeighbors { i: usize, reason: String },
    #[error("boundary layer must be finite and >= 0, got {0}")]
    InvalidBoundaryLayer(f64),
}

/// Estimates a follower broadcasts to its neighbors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Published {
    /// `uhat_{0,j}`
    pub input: f64,
    /// `xhat_{0,j}`
    pub position: f64,
    /// `vhat_{0,j}`; unused in first-order modes.
    pub leader_velocity: f64,
}

/// What the leader broadcasts to a linked follower.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LeaderMeasurement {
    pub position: Option<f64>,
    pub input: Option<f64>,
}

impl LeaderMeasurement {
    pub const NONE: Self = Self { position: None, input: None };

    pub fn is_empty(&self) -> bool {
        self.position.is_none() && self.input.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Neighbor {
    index: usize,
    weight: f64,
    published: Published,
}

/// Local information available to follower `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborView {
    self_index: usize,
    leader_weight: f64,
    leader: LeaderMeasurement,
    neighbors: Vec<Neighbor>,
}

impl NeighborView {
    /// Build the view of follower `i` from the topology and everybody's
    /// published estimates. Only entries of actual neighbors are copied.
    pub fn new(
        topology: &Topology,
        i: usize,
        published: &[Published],
        leader: LeaderMeasurement,
    ) -> Result<Self, ObserverError> {
        let n = topology.n_followers();
        if i >= n || published.len() != n {
            return Err(ObserverError::InvalidNeighbors {
                i,
                reason: format!("{} published estimates for {n} followers", published.len()),
            });
        }
        let neighbors = topology
            .neighbors(i)
            .into_iter()
            .map(|(j, a)| (j, a, published[j]))
            .collect();
        Self::from_parts(i, topology.leader_weight(i), neighbors, leader)
    }

    /// Build a view from an explicit neighbor list `(j, a_ij, estimates)`.
    pub fn from_parts(
        i: usize,
        leader_weight: f64,
        neighbors: Vec<(usize, f64, Published)>,
        leader: LeaderMeasurement,
    ) -> Result<Self, ObserverError> {
        if !(leader_weight >= 0.0) {
            return Err(ObserverError::InvalidNeighbors {
                i,
                reason: format!("leader weight {leader_weight}"),
            });
        }
        if leader_weight == 0.0 && !leader.is_empty() {
            return Err(ObserverError::LeaderDataNotEntitled { i });
        }
        let mut seen = Vec::with_capacity(neighbors.len());
        for &(j, a, _) in &neighbors {
            if j == i || !(a > 0.0) || seen.contains(&j) {
                return Err(ObserverError::InvalidNeighbors {
                    i,
                    reason: format!("bad entry (j = {j}, a = {a})"),
                });
            }
            seen.push(j);
        }
        Ok(Self {
            self_index: i,
            leader_weight,
            leader,
            neighbors: neighbors
                .into_iter()
                .map(|(index, weight, published)| Neighbor { index, weight, published })
                .collect(),
        })
    }

    pub fn self_index(&self) -> usize {
        self.self_index
    }

    pub fn leader_weight(&self) -> f64 {
        self.leader_weight
    }

    pub fn leader(&self) -> LeaderMeasurement {
        self.leader
    }

    pub fn neighbor_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.neighbors.iter().map(|n| n.index)
    }

    /// `sum_j a_ij (own - field(published_j))`
    fn disagreement(&self, own: f64, field: impl Fn(&Published) -> f64) -> f64 {
        self.neighbors.iter().map(|n| n.weight * (own - field(&n.published))).sum()
    }

    /// `x0`, or 0 when the follower is not linked (then every term using it
    /// carries a zero factor `b_i`).
    fn leader_position(&self) -> Result<f64, ObserverError> {
        if self.leader_weight == 0.0 {
            return Ok(0.0);
        }
        self.leader.position.ok_or(ObserverError::MissingLeaderMeasurement {
            i: self.self_index,
            what: "position",
        })
    }

    fn leader_input(&self) -> Result<f64, ObserverError> {
        if self.leader_weight == 0.0 {
            return Ok(0.0);
        }
        self.leader.input.ok_or(ObserverError::MissingLeaderMeasurement {
            i: self.self_index,
            what: "input",
        })
    }
}

/// Regularization of `sgn`: `boundary_layer == 0` is the exact sign.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SignPolicy {
    boundary_layer: f64,
}

impl SignPolicy {
    pub const EXACT: Self = Self { boundary_layer: 0.0 };

    pub fn new(boundary_layer: f64) -> Result<Self, ObserverError> {
        if !(boundary_layer >= 0.0) || !boundary_layer.is_finite() {
            return Err(ObserverError::InvalidBoundaryLayer(boundary_layer));
        }
        Ok(Self { boundary_layer })
    }

    pub fn boundary_layer(&self) -> f64 {
        self.boundary_layer
    }
}

/// Sign with `sgn(0) = 0`, or the saturated linear ramp `clamp(x / eps)`.
pub fn sgn(x: f64, p: SignPolicy) -> f64 {
    if p.boundary_layer > 0.0 {
        (x / p.boundary_layer).clamp(-1.0, 1.0)
    } else if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveInputRate {
    pub z_rate: f64,
    pub d_rate: f64,
    pub uhat: f64,
}

/// Adaptive sliding-mode input observer with position-based internal state.
///
/// ```text
/// uhat = z + b l x0
/// r    = sum_j a_ij (uhat_i - uhat_j) + l b (uhat_i - u0)
/// dz   = -b l z - b^2 l^2 x0 - sum_j a_ij (uhat_i - uhat_j) - d sgn(r)
/// dd   = tau |r|
/// ```
///
/// The adaptation always uses the exact `|r|`, whatever the sign policy.
pub fn adaptive_input_observer_rate(
    view: &NeighborView,
    z: f64,
    d: f64,
    tau: f64,
    l: f64,
    p: SignPolicy,
) -> Result<AdaptiveInputRate, ObserverError> {
    let b = view.leader_weight;
    let x0 = view.leader_position()?;
    let u0 = view.leader_input()?;
    let uhat = z + b * l * x0;
    let consensus = view.disagreement(uhat, |e| e.input);
    let r = consensus + l * b * (uhat - u0);
    Ok(AdaptiveInputRate {
        z_rate: -b * l * z - b * b * l * l * x0 - consensus - d * sgn(r, p),
        d_rate: tau * r.abs(),
        uhat,
    })
}

/// Input observer without the switching and adaptive terms. It never reads
/// the leader's input, only its position.
///
/// Returns `(z_rate, uhat)`.
pub fn simplified_input_observer_rate(
    view: &NeighborView,
    z: f64,
    l: f64,
) -> Result<(f64, f64), ObserverError> {
    let b = view.leader_weight;
    let x0 = view.leader_position()?;
    let uhat = z + b * l * x0;
    let consensus = view.disagreement(uhat, |e| e.input);
    Ok((-b * l * z - b * b * l * l * x0 - consensus, uhat))
}

/// Input observer acting on `uhat` directly; needs no leader position.
///
/// Returns `(uhat_rate, d_rate)`.
pub fn direct_input_observer_rate(
    view: &NeighborView,
    uhat: f64,
    d: f64,
    tau: f64,
    p: SignPolicy,
) -> Result<(f64, f64), ObserverError> {
    let b = view.leader_weight;
    let u0 = view.leader_input()?;
    let r = view.disagreement(uhat, |e| e.input) + b * (uhat - u0);
    Ok((-r - d * sgn(r, p), tau * r.abs()))
}

/// Leader-position observer. `feed` is `uhat_{0,i}` for first-order agents
/// and `vhat_{0,i}` for second-order agents.
pub fn position_observer_rate(
    view: &NeighborView,
    xhat: f64,
    c: f64,
    feed: f64,
) -> Result<f64, ObserverError> {
    let b = view.leader_weight;
    let x0 = view.leader_position()?;
    let coupling = view.disagreement(xhat, |e| e.position) + b * (xhat - x0);
    Ok(-c * coupling + feed)
}

/// Leader-velocity observer driven by the local input estimate.
///
/// Returns `(z_rate, vhat0)`.
pub fn leader_velocity_observer_rate(
    view: &NeighborView,
    z: f64,
    l: f64,
    uhat: f64,
) -> Result<(f64, f64), ObserverError> {
    let b = view.leader_weight;
    let x0 = view.leader_position()?;
    let vhat0 = z + b * l * x0;
    let consensus = view.disagreement(vhat0, |e| e.leader_velocity);
    Ok((-b * l * z - b * b * l * l * x0 - consensus + uhat, vhat0))
}

/// Follower's estimate of its own velocity from position and applied input.
/// Purely local.
///
/// Returns `(zbar_rate, vhat)`.
pub fn self_velocity_observer_rate(x: f64, zbar: f64, l: f64, u: f64) -> (f64, f64) {
    (-l * zbar - l * l * x + u, self_velocity_estimate(x, zbar, l))
}

/// `vhat = zbar + l x`, available before the input `u` is known.
pub fn self_velocity_estimate(x: f64, zbar: f64, l: f64) -> f64 {
    zbar + l * x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lone(b: f64, leader: LeaderMeasurement) -> NeighborView {
        NeighborView::from_parts(0, b, vec![], leader).unwrap()
    }

    fn both(x0: f64, u0: f64) -> LeaderMeasurement {
        LeaderMeasurement { position: Some(x0), input: Some(u0) }
    }

    fn est(input: f64) -> Published {
        Published { input, ..Default::default() }
    }

    #[test]
    fn sign_policy() {
        assert_eq!(sgn(3.2, SignPolicy::EXACT), 1.0);
        assert_eq!(sgn(-1e-300, SignPolicy::EXACT), -1.0);
        assert_eq!(sgn(0.0, SignPolicy::EXACT), 0.0);
        let p = SignPolicy::new(0.1).unwrap();
        assert!((sgn(-0.05, p) + 0.5).abs() < 1e-15);
        assert_eq!(sgn(7.0, p), 1.0);
        assert!(SignPolicy::new(-0.1).is_err());
        assert!(SignPolicy::new(f64::NAN).is_err());
    }

    #[test]
    fn view_enforces_information_pattern() {
        let err = NeighborView::from_parts(
            2,
            0.0,
            vec![],
            LeaderMeasurement { position: Some(1.0), input: None },
        );
        assert_eq!(err, Err(ObserverError::LeaderDataNotEntitled { i: 2 }));
        let err = NeighborView::from_parts(
            2,
            0.0,
            vec![],
            LeaderMeasurement { position: None, input: Some(1.0) },
        );
        assert_eq!(err, Err(ObserverError::LeaderDataNotEntitled { i: 2 }));
        assert!(NeighborView::from_parts(0, 1.0, vec![(0, 1.0, est(0.0))], LeaderMeasurement::NONE).is_err());
        assert!(NeighborView::from_parts(0, 1.0, vec![(1, 0.0, est(0.0))], LeaderMeasurement::NONE).is_err());
        assert!(NeighborView::from_parts(
            0,
            1.0,
            vec![(1, 1.0, est(0.0)), (1, 1.0, est(0.0))],
            LeaderMeasurement::NONE
        )
        .is_err());
    }

    #[test]
    fn view_from_topology_keeps_exactly_the_neighbors() {
        let t = Topology::from_rows(
            &[vec![0.0, 2.0, 0.0], vec![2.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            &[1.0, 0.0, 0.0],
        )
        .unwrap();
        let published = [est(0.0), est(1.0), est(2.0)];
        let v = NeighborView::new(&t, 1, &published, LeaderMeasurement::NONE).unwrap();
        assert_eq!(v.neighbor_indices().collect::<Vec<_>>(), vec![0, 2]);
        assert!(NeighborView::new(&t, 1, &published, both(0.0, 0.0)).is_err());
    }

    #[test]
    fn adaptive_observer_fixed_point() {
        let v = lone(1.0, both(0.0, 0.0));
        let r = adaptive_input_observer_rate(&v, 0.0, 0.0, 1.0, 1.0, SignPolicy::EXACT).unwrap();
        assert_eq!(r, AdaptiveInputRate { z_rate: 0.0, d_rate: 0.0, uhat: 0.0 });
    }

    #[test]
    fn adaptive_observer_leader_linked() {
        let v = lone(1.0, both(2.0, 1.0));
        let r = adaptive_input_observer_rate(&v, 0.0, 0.0, 1.0, 1.0, SignPolicy::EXACT).unwrap();
        assert_eq!(r.uhat, 2.0);
        assert_eq!(r.z_rate, -2.0);
        assert_eq!(r.d_rate, 1.0);
    }

    #[test]
    fn adaptive_observer_unlinked_follower() {
        let v = NeighborView::from_parts(0, 0.0, vec![(1, 1.0, est(0.5))], LeaderMeasurement::NONE)
            .unwrap();
        let tau = 3.0;
        let r = adaptive_input_observer_rate(&v, 0.7, 0.2, tau, 1.0, SignPolicy::EXACT).unwrap();
        assert!((r.z_rate + 0.4).abs() < 1e-15);
        assert!((r.d_rate - tau * 0.2).abs() < 1e-15);
    }

    #[test]
    fn adaptive_observer_needs_leader_data_when_linked() {
        let v = lone(1.0, LeaderMeasurement { position: Some(0.0), input: None });
        let err = adaptive_input_observer_rate(&v, 0.0, 0.0, 1.0, 1.0, SignPolicy::EXACT);
        assert_eq!(err, Err(ObserverError::MissingLeaderMeasurement { i: 0, what: "input" }));
    }

    #[test]
    fn adaptation_uses_exact_magnitude_under_boundary_layer() {
        let v = lone(1.0, both(0.0, 0.0));
        let smooth = SignPolicy::new(10.0).unwrap();
        let r = adaptive_input_observer_rate(&v, 1.0, 2.0, 1.0, 1.0, smooth).unwrap();
        // r = 1: smoothed sign gives 0.1 but the gain grows with |r| = 1
        assert_eq!(r.d_rate, 1.0);
        assert!((r.z_rate - (-1.0 - 2.0 * 0.1)).abs() < 1e-15);
    }

    #[test]
    fn simplified_observer() {
        let v = lone(1.0, LeaderMeasurement { position: Some(0.0), input: None });
        assert_eq!(simplified_input_observer_rate(&v, 0.0, 1.0).unwrap(), (0.0, 0.0));
        let v = lone(1.0, LeaderMeasurement { position: Some(1.0), input: None });
        assert_eq!(simplified_input_observer_rate(&v, -1.0, 1.0).unwrap(), (0.0, 0.0));
        let v = lone(1.0, LeaderMeasurement::NONE);
        assert!(simplified_input_observer_rate(&v, 0.0, 1.0).is_err());
    }

    #[test]
    fn direct_observer() {
        let v = NeighborView::from_parts(
            0,
            1.0,
            vec![(1, 1.0, est(0.3))],
            LeaderMeasurement { position: None, input: Some(0.3) },
        )
        .unwrap();
        assert_eq!(direct_input_observer_rate(&v, 0.3, 5.0, 1.0, SignPolicy::EXACT).unwrap(), (0.0, 0.0));

        let v = lone(1.0, LeaderMeasurement { position: None, input: Some(0.0) });
        let (rate, dd) = direct_input_observer_rate(&v, 1.0, 0.5, 2.0, SignPolicy::EXACT).unwrap();
        assert_eq!(rate, -1.5);
        assert_eq!(dd, 2.0);

        let v = NeighborView::from_parts(0, 0.0, vec![(1, 1.0, est(0.4)), (2, 2.0, est(0.4))], LeaderMeasurement::NONE)
            .unwrap();
        assert_eq!(direct_input_observer_rate(&v, 0.4, 1.0, 1.0, SignPolicy::EXACT).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn position_observer() {
        let x0 = 1.25;
        let u0 = -0.3;
        let p = Published { position: x0, ..Default::default() };
        let v = NeighborView::from_parts(0, 1.0, vec![(1, 1.0, p)], both(x0, u0)).unwrap();
        assert_eq!(position_observer_rate(&v, x0, 0.5, u0).unwrap(), u0);

        let v = lone(1.0, LeaderMeasurement { position: Some(0.0), input: None });
        assert_eq!(position_observer_rate(&v, 2.0, 0.5, 0.0).unwrap(), -1.0);

        let p = Published { position: 4.0, ..Default::default() };
        let v = NeighborView::from_parts(0, 0.0, vec![(1, 1.0, p), (2, 1.0, p)], LeaderMeasurement::NONE)
            .unwrap();
        assert_eq!(position_observer_rate(&v, 4.0, 0.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn leader_velocity_observer() {
        let v = lone(1.0, LeaderMeasurement { position: Some(0.0), input: None });
        assert_eq!(leader_velocity_observer_rate(&v, 0.0, 1.0, 0.0).unwrap(), (0.0, 0.0));
        let v = lone(1.0, LeaderMeasurement { position: Some(1.0), input: None });
        assert_eq!(leader_velocity_observer_rate(&v, 0.0, 1.0, 0.0).unwrap(), (-1.0, 1.0));
    }

    #[test]
    fn leader_velocity_observer_on_zero_error_manifold() {
        // vhat0 = v0 and uhat = u0: d/dt vhat0 = z_rate + b l dx0/dt = u0
        let (x0, v0, u0, l) = (2.0, 0.7, -0.4, 1.5);
        let z = v0 - l * x0;
        let p = Published { leader_velocity: v0, ..Default::default() };
        let v = NeighborView::from_parts(0, 1.0, vec![(1, 1.0, p)], LeaderMeasurement { position: Some(x0), input: None })
            .unwrap();
        let (z_rate, vhat0) = leader_velocity_observer_rate(&v, z, l, u0).unwrap();
        assert!((vhat0 - v0).abs() < 1e-15);
        assert!((z_rate + l * v0 - u0).abs() < 1e-14);
    }

    #[test]
    fn self_velocity_observer() {
        assert_eq!(self_velocity_observer_rate(0.0, 0.0, 1.0, 0.0), (0.0, 0.0));
        assert_eq!(self_velocity_observer_rate(2.0, -1.0, 1.0, 3.0), (2.0, 1.0));
        // exact estimate stays exact: d/dt (vhat - v) = zbar_rate + l v - u = 0
        let (x, v, l, u) = (1.0, -2.0, 0.8, 0.3);
        let zbar = v - l * x;
        let (rate, vhat) = self_velocity_observer_rate(x, zbar, l, u);
        assert!((vhat - v).abs() < 1e-15);
        assert!((rate + l * v - u).abs() < 1e-14);
    }
}
