//! Single integrators with the adaptive input observer under `u0 = sin(0.2 pi t)`.

use mas_sim::{presets, sim};

fn main() -> Result<(), sim::SimError> {
    let cfg = presets::fig4_first_order();
    let r = sim::run(&cfg)?;

    println!("{:>5} {:>9} {:>9} {:>9} {:>7}", "t", "max|e|", "max|e_u|", "max|e_x|", "max d");
    let (e, eu, ex) = (sim::sup_norm(&r.errors.tracking), sim::sup_norm(&r.errors.input), sim::sup_norm(&r.errors.position));
    for k in (0..r.times.len()).step_by(50) {
        let d = r.adaptive_gain[k].iter().fold(0.0_f64, |m, v| m.max(*v));
        println!("{:>5.1} {:>9.2e} {:>9.2e} {:>9.2e} {:>7.4}", r.times[k], e[k], eu[k], ex[k], d);
    }
    for (name, s) in [("tracking", &e), ("input", &eu), ("position", &ex)] {
        println!("{name} error below 0.05 from t = {:?}", sim::convergence_time(&r.times, s, 0.05));
    }
    Ok(())
}
