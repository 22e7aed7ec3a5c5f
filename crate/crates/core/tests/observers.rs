use mas_sim::graph::Topology;
use mas_sim::observers::{
    adaptive_input_observer_rate, direct_input_observer_rate, leader_velocity_observer_rate,
    position_observer_rate, simplified_input_observer_rate, LeaderMeasurement, NeighborView, ObserverError,
    Published, SignPolicy,
};

const EXACT: SignPolicy = SignPolicy::EXACT;

// path 1 -(2)- 2 -(1)- 3, leader linked to follower 1
fn path() -> Topology {
    Topology::from_rows(
        &[vec![0.0, 2.0, 0.0], vec![2.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
        &[1.0, 0.0, 0.0],
    )
    .unwrap()
}

fn published() -> [Published; 3] {
    [
        Published { input: 2.5, position: 0.2, leader_velocity: 0.0 },
        Published { input: 1.0, position: -0.3, leader_velocity: 0.5 },
        Published { input: -1.0, position: 0.0, leader_velocity: 0.0 },
    ]
}

fn leader(x0: f64, u0: f64) -> LeaderMeasurement {
    LeaderMeasurement { position: Some(x0), input: Some(u0) }
}

#[test]
fn adaptive_observer_by_hand() {
    let (t, p) = (path(), published());
    // follower 1: uhat = 0.5 + 1*2*1 = 2.5, consensus = 2 (2.5 - 1) = 3,
    // r = 3 + 2 (2.5 - 0.3) = 7.4
    let v = NeighborView::new(&t, 0, &p, leader(1.0, 0.3)).unwrap();
    let r = adaptive_input_observer_rate(&v, 0.5, 0.2, 0.5, 2.0, EXACT).unwrap();
    assert!((r.uhat - 2.5).abs() < 1e-15);
    assert!((r.z_rate - (-1.0 - 4.0 - 3.0 - 0.2)).abs() < 1e-14);
    assert!((r.d_rate - 0.5 * 7.4).abs() < 1e-14);

    // follower 2: uhat = z = 0.4, r = 2 (0.4 - 2.5) + (0.4 + 1) = -2.8
    let v = NeighborView::new(&t, 1, &p, LeaderMeasurement::NONE).unwrap();
    let r = adaptive_input_observer_rate(&v, 0.4, 0.1, 1.0, 2.0, EXACT).unwrap();
    assert!((r.z_rate - 2.9).abs() < 1e-14);
    assert!((r.d_rate - 2.8).abs() < 1e-14);
}

#[test]
fn simplified_observer_by_hand() {
    let (t, p) = (path(), published());
    let only_position = LeaderMeasurement { position: Some(1.0), input: None };
    let v = NeighborView::new(&t, 0, &p, only_position).unwrap();
    let (z_rate, uhat) = simplified_input_observer_rate(&v, 0.5, 2.0).unwrap();
    assert!((uhat - 2.5).abs() < 1e-15);
    assert!((z_rate + 8.0).abs() < 1e-14);
    // the adaptive observer refuses to run without u0
    assert!(matches!(
        adaptive_input_observer_rate(&v, 0.5, 0.0, 1.0, 2.0, EXACT),
        Err(ObserverError::MissingLeaderMeasurement { i: 0, .. })
    ));
}

#[test]
fn direct_observer_by_hand() {
    let (t, p) = (path(), published());
    // r = 2 (2.5 - 1) + (2.5 - 0.3) = 5.2
    let v = NeighborView::new(&t, 0, &p, leader(1.0, 0.3)).unwrap();
    let (rate, d_rate) = direct_input_observer_rate(&v, 2.5, 0.2, 2.0, EXACT).unwrap();
    assert!((rate + 5.4).abs() < 1e-14);
    assert!((d_rate - 10.4).abs() < 1e-14);
    let boundary = SignPolicy::new(52.0).unwrap();
    let (rate, _) = direct_input_observer_rate(&v, 2.5, 0.2, 2.0, boundary).unwrap();
    assert!((rate - (-5.2 - 0.2 * 0.1)).abs() < 1e-14);
}

#[test]
fn position_observer_by_hand() {
    let (t, p) = (path(), published());
    // -0.5 [2 (0.2 + 0.3) + (0.2 - 1)] + 2.5
    let v = NeighborView::new(&t, 0, &p, leader(1.0, 0.3)).unwrap();
    assert!((position_observer_rate(&v, 0.2, 0.5, 2.5).unwrap() - 2.4).abs() < 1e-14);
    // follower 3 sees only follower 2: -0.5 (0 + 0.3) + 1
    let v = NeighborView::new(&t, 2, &p, LeaderMeasurement::NONE).unwrap();
    assert!((position_observer_rate(&v, 0.0, 0.5, 1.0).unwrap() - 0.85).abs() < 1e-14);
}

#[test]
fn leader_velocity_observer_by_hand() {
    let (t, p) = (path(), published());
    // vhat0 = 0.1 + 1*2*1 = 2.1, consensus = 2 (2.1 - 0.5) = 3.2
    let v = NeighborView::new(&t, 0, &p, leader(1.0, 0.3)).unwrap();
    let (z_rate, vhat0) = leader_velocity_observer_rate(&v, 0.1, 2.0, 0.7).unwrap();
    assert!((vhat0 - 2.1).abs() < 1e-15);
    assert!((z_rate - (-0.2 - 4.0 - 3.2 + 0.7)).abs() < 1e-14);
}

#[test]
fn unlinked_followers_cannot_see_the_leader() {
    let (t, p) = (path(), published());
    for i in [1, 2] {
        assert_eq!(
            NeighborView::new(&t, i, &p, leader(1.0, 0.3)),
            Err(ObserverError::LeaderDataNotEntitled { i })
        );
    }
    let v = NeighborView::new(&t, 0, &p, LeaderMeasurement::NONE).unwrap();
    assert!(position_observer_rate(&v, 0.0, 1.0, 0.0).is_err());
}
