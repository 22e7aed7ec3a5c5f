//! Double integrators: input, leader-velocity, leader-position and
//! self-velocity observers feeding the tracking controller.

use mas_sim::{presets, sim};

fn main() -> Result<(), sim::SimError> {
    let r = sim::run(&presets::fig5_second_order())?;
    let e = &r.errors;
    let channels = [
        ("position", &e.tracking),
        ("velocity", e.velocity_tracking.as_ref().unwrap()),
        ("input estimate", &e.input),
        ("leader position estimate", &e.position),
        ("leader velocity estimate", e.leader_velocity.as_ref().unwrap()),
        ("self velocity estimate", e.self_velocity.as_ref().unwrap()),
    ];
    for (name, s) in channels {
        let norm = sim::sup_norm(s);
        println!(
            "{name:<26} below 0.05 from t = {:>6?}, final {:.2e}",
            sim::convergence_time(&r.times, &norm, 0.05),
            norm.last().unwrap()
        );
    }
    Ok(())
}
