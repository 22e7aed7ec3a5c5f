//! What one follower sees, and one evaluation of each observer on it.

use mas_sim::graph::Topology;
use mas_sim::observers::{
    adaptive_input_observer_rate, position_observer_rate, simplified_input_observer_rate, LeaderMeasurement,
    NeighborView, Published, SignPolicy,
};

fn main() {
    // path 1 - 2 - 3, leader linked to follower 1
    let t = Topology::from_rows(
        &[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
        &[1.0, 0.0, 0.0],
    )
    .unwrap();
    let published = [
        Published { input: 0.2, position: 0.0, leader_velocity: 0.0 },
        Published { input: -0.1, position: 0.5, leader_velocity: 0.0 },
        Published { input: 0.4, position: -0.5, leader_velocity: 0.0 },
    ];
    let from_leader = LeaderMeasurement { position: Some(1.0), input: Some(0.3) };

    let v1 = NeighborView::new(&t, 0, &published, from_leader).unwrap();
    let r = adaptive_input_observer_rate(&v1, 0.0, 0.5, 1.0, 1.0, SignPolicy::EXACT).unwrap();
    println!("follower 1 adaptive observer: {r:?}");
    let only_position = LeaderMeasurement { input: None, ..from_leader };
    let v1 = NeighborView::new(&t, 0, &published, only_position).unwrap();
    println!("follower 1 simplified observer: {:?}", simplified_input_observer_rate(&v1, 0.0, 1.0).unwrap());

    let v2 = NeighborView::new(&t, 1, &published, LeaderMeasurement::NONE).unwrap();
    println!("follower 2 neighbors: {:?}", v2.neighbor_indices().collect::<Vec<_>>());
    println!("follower 2 position observer rate: {}", position_observer_rate(&v2, 0.5, 0.5, -0.1).unwrap());

    match NeighborView::new(&t, 2, &published, from_leader) {
        Err(e) => println!("follower 3 (index 2) offered leader data: {e}"),
        Ok(_) => unreachable!(),
    }
}
