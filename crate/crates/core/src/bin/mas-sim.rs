use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mas_sim::acceptance::run_acceptance;
use mas_sim::output::run_scenario;
use mas_sim::plot::emit_plots;
use mas_sim::scenario::parse_scenario;
use mas_sim::verify::cross_check;

#[derive(Parser)]
#[command(name = "mas-sim", version, about = "Leader-follower tracking with distributed input observers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its result bundle.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw SVG panels from a result bundle.
    Plot {
        bundle: PathBuf,
        /// Comma-separated panels or raw channel names.
        #[arg(long, value_delimiter = ',')]
        panels: Vec<String>,
    },
    /// Cross-check the simulation against the stacked error system.
    Verify {
        scenario: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long)]
        dt: Option<f64>,
        /// Largest acceptable discrepancy per error channel.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Run the acceptance criteria against a directory of bundled scenarios.
    Accept {
        suite_dir: PathBuf,
        /// Also write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<bool, Box<dyn std::error::Error>> {
    match command {
        Command::Run { scenario, out } => {
            let sc = parse_scenario(&scenario)?;
            for w in &sc.warnings {
                eprintln!("warning: {w}");
            }
            let bundle = run_scenario(&sc, &out)?;
            let m = &bundle.metrics;
            println!("{}: {} steps, {} samples -> {}", m.scenario, m.steps, m.samples, bundle.dir.display());
            for (ch, t) in &m.convergence_time {
                match t {
                    Some(t) => println!("  {ch:<18} below {} from t = {t}", m.convergence_tol),
                    None => println!("  {ch:<18} not settled"),
                }
            }
            Ok(true)
        }
        Command::Plot { bundle, panels } => {
            let panels: Vec<String> = panels.into_iter().filter(|p| !p.trim().is_empty()).collect();
            for p in emit_plots(&bundle, &panels)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
        Command::Verify { scenario, horizon, dt, tolerance } => {
            let sc = parse_scenario(&scenario)?;
            let report = cross_check(&sc.config, horizon, dt.unwrap_or(sc.config.dt))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            let ok = report.max_discrepancy() <= tolerance;
            if !ok {
                eprintln!("discrepancy {:.3e} exceeds {tolerance:e}", report.max_discrepancy());
            }
            Ok(ok)
        }
        Command::Accept { suite_dir, json } => {
            let report = run_acceptance(&suite_dir);
            for line in report.lines() {
                println!("{line}");
            }
            if let Some(path) = json {
                std::fs::write(path, report.to_json() + "\n")?;
            }
            Ok(report.all_passed())
        }
    }
}
