//! The linear input observer: the leader never transmits `u0`, and tracking
//! still succeeds once the input settles.

use mas_sim::{presets, sim};

fn main() -> Result<(), sim::SimError> {
    let cfg = presets::fig4_simplified();
    let r = sim::run(&cfg)?;
    let e = sim::sup_norm(&r.errors.tracking);
    let eu = sim::sup_norm(&r.errors.input);
    for k in (0..r.times.len()).step_by(100) {
        println!("t = {:>4.0}  u0 = {:.4}  max|e_u| = {:.2e}  max|e| = {:.2e}", r.times[k], r.leader_input[k], eu[k], e[k]);
    }
    println!("leader input reads: {}", r.meta.leader_input_reads);
    println!("tracking below 0.05 from t = {:?}", sim::convergence_time(&r.times, &e, 0.05));
    Ok(())
}
