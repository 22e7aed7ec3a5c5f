//! Chattering of the sliding-mode input observer with the exact sign and
//! with saturated boundary layers.

use mas_sim::observers::SignPolicy;
use mas_sim::{presets, sim};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for eps in [0.0, 1e-3, 1e-2, 1e-1] {
        let mut cfg = presets::fig4_first_order();
        cfg.sign_policy = SignPolicy::new(eps)?;
        let r = sim::run(&cfg)?;
        let d_end = r.adaptive_gain.last().unwrap().iter().fold(0.0_f64, |m, v| m.max(*v));
        println!(
            "eps = {eps:<6} sup_(t>=20) |e_u| = {:.3e}   d(60) = {d_end:.4}",
            sim::sup_after(&r.times, &r.errors.input, 20.0)
        );
    }
    Ok(())
}
