//! A leader input given as a table, on a custom weighted topology.

use mas_sim::control::Gains;
use mas_sim::graph::Topology;
use mas_sim::observers::SignPolicy;
use mas_sim::signals::LeaderSignal;
use mas_sim::sim::{self, InitialStates, Mode, ObserverInit, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // star around follower 2, leader talks to followers 1 and 4
    let topology = Topology::from_rows(
        &[
            vec![0.0, 1.5, 0.0, 0.0],
            vec![1.5, 0.0, 1.0, 0.5],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.0, 0.0],
        ],
        &[1.0, 0.0, 0.0, 2.0],
    )?;
    let cfg = SimConfig {
        topology,
        gains: Gains { k1: 2.0, k2: None, l: 1.0, c: 1.0, tau: vec![2.0; 4] },
        leader_signal: LeaderSignal::SampledTable {
            times: vec![0.0, 10.0, 20.0, 30.0],
            values: vec![0.0, 0.5, 0.5, -0.2],
        },
        mode: Mode::FirstOrderAdaptive,
        initial: InitialStates {
            leader_position: 1.0,
            leader_velocity: None,
            follower_positions: vec![-1.0, 2.0, 0.0, 4.0],
            follower_velocities: None,
            observers: ObserverInit::default(),
        },
        dt: 1e-3,
        t_end: 40.0,
        record_stride: 500,
        sign_policy: SignPolicy::EXACT,
    };
    let r = sim::run(&cfg)?;
    for (k, t) in r.times.iter().enumerate() {
        println!("t = {t:>4.1}  x0 = {:>7.3}  x = {:>7.3?}", r.leader_position[k], r.position[k]);
    }
    println!("held beyond the table: {}", r.meta.table_held);
    Ok(())
}
