//! Load a scenario file, write its bundle and draw the panels.
//!
//! ```text
//! cargo run --example scenario_bundle -- crates/core/scenarios/fig5_second_order.toml out/fig5
//! ```

use std::path::PathBuf;

use mas_sim::output::run_scenario;
use mas_sim::plot::emit_plots;
use mas_sim::scenario::parse_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scenario = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/fig4_first_order.toml"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("mas-sim-bundle"));

    let sc = parse_scenario(&scenario)?;
    let bundle = run_scenario(&sc, &out)?;
    println!("{}", serde_json::to_string_pretty(&bundle.metrics.convergence_time)?);

    let extra = emit_plots(&out, &["x1".to_string(), "u0".to_string()])?;
    for p in bundle.plots.iter().chain(&extra) {
        println!("wrote {}", p.display());
    }
    Ok(())
}
