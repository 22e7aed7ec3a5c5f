//! The per-follower simulation against the stacked error system, and the
//! linear case against its closed-form solution.

use mas_sim::signals::LeaderSignal;
use mas_sim::verify::{self, VerifyError};
use mas_sim::{graph, presets};
use nalgebra::DVector;

fn main() -> Result<(), VerifyError> {
    for cfg in [presets::fig4_first_order(), presets::fig5_second_order()] {
        let report = verify::cross_check(&cfg, 10.0, 1e-3)?;
        println!("{}: {:?}", report.mode, report.channels);
    }

    let mut linear = presets::fig4_simplified();
    linear.leader_signal = LeaderSignal::Constant { value: 0.5 };
    let (gap, samples) = verify::linear_oracle_discrepancy(&linear)?;
    println!("simplified observer vs exp(At): {gap:.2e} over {samples} samples");

    let h2 = graph::h_matrices(&presets::ring_topology(), 1.0)?.h2;
    let e0 = DVector::from_column_slice(&[1.0, -1.0, 0.5, 0.0, 2.0]);
    for t in [0.0, 1.0, 5.0, 20.0] {
        println!("|exp(-H2 t) e0| at t = {t:>4}: {:.4e}", verify::linear_error_solution(&h2, &e0, t)?.norm());
    }
    Ok(())
}
