//! Gain conditions: the Hurwitz test for `s^2 + k2 s + k1` and the
//! complex-coefficient quadratic stability test.

use mas_sim::control::{complex_quadratic_margin, complex_quadratic_stable, validate_gains_second_order, Gains};
use mas_sim::presets;

fn main() {
    for (k1, k2) in [(1.0, 1.0), (0.5, 3.0), (1.0, 0.0), (-1.0, 2.0)] {
        println!("k1 = {k1:>4}, k2 = {k2:>4}: {}", validate_gains_second_order(k1, k2));
    }

    // s^2 + (a1 + i b1) s + (a0 + i b0)
    for (a1, b1, a0, b0) in [(1.0, 0.0, 1.0, 0.0), (1.0, 1.0, 0.2, 1.0), (0.5, 0.0, 1.0, 2.0)] {
        println!(
            "a1 {a1} b1 {b1} a0 {a0} b0 {b0}: stable {}, margin {:.3}",
            complex_quadratic_stable(a1, b1, a0, b0),
            complex_quadratic_margin(a1, b1, a0, b0)
        );
    }

    let mut g: Gains = presets::fig5_second_order().gains;
    g.k2 = Some(-0.5);
    g.c = 0.0;
    for v in g.violations(true) {
        println!("violation: {v}");
    }
}
