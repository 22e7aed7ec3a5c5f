//! Result bundles: `trajectory.csv`, `metrics.json` and optional SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::plot::{self, PlotError};
use crate::scenario::Scenario;
use crate::sim::{self, SimError, SimResult};
use crate::verify::{self, CrossCheckReport, VerifyError};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_FILE: &str = "metrics.json";

/// Error level at which a channel counts as converged in the metrics.
pub const CONVERGENCE_TOL: f64 = 0.05;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cross-check failed: {0}")]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Plot(#[from] PlotError),
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), OutputError> {
    fs::write(path, contents).map_err(|source| OutputError::Io { path: path.display().to_string(), source })
}

/// Column names and values, one row per recorded sample.
pub fn trajectory_columns(r: &SimResult) -> Vec<(String, Vec<f64>)> {
    let mut cols: Vec<(String, Vec<f64>)> = vec![("t".into(), r.times.clone()), ("x0".into(), r.leader_position.clone())];
    if let Some(v0) = &r.leader_velocity {
        cols.push(("v0".into(), v0.clone()));
    }
    cols.push(("u0".into(), r.leader_input.clone()));

    let mut per_follower = |prefix: &str, s: &sim::Series| {
        for i in 0..r.n {
            cols.push((format!("{prefix}{}", i + 1), s.iter().map(|row| row[i]).collect()));
        }
    };
    per_follower("x", &r.position);
    if let Some(v) = &r.velocity {
        per_follower("v", v);
    }
    per_follower("uhat0", &r.input_estimate);
    per_follower("xhat0", &r.position_estimate);
    if let Some(s) = &r.leader_velocity_estimate {
        per_follower("vhat0", s);
    }
    if let Some(s) = &r.self_velocity_estimate {
        per_follower("vhat", s);
    }
    per_follower("u", &r.control);
    if r.mode.is_adaptive() {
        per_follower("d", &r.adaptive_gain);
    }
    cols
}

/// Comma-separated, header row first, shortest round-trip float formatting.
pub fn trajectory_csv(r: &SimResult) -> String {
    let cols = trajectory_columns(r);
    let mut out = String::new();
    let header: Vec<&str> = cols.iter().map(|(n, _)| n.as_str()).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for k in 0..r.times.len() {
        for (j, (_, v)) in cols.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", v[k]).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub scenario: String,
    pub mode: String,
    pub config_hash: String,
    pub steps: u64,
    pub samples: usize,
    pub convergence_tol: f64,
    /// Earliest recorded time after which `max_i |error_i|` stays at or
    /// below `convergence_tol`; `None` if it never settles.
    pub convergence_time: BTreeMap<String, Option<f64>>,
    pub final_error: BTreeMap<String, f64>,
    /// Largest input-estimation error over the last two thirds of the run.
    pub chattering_amplitude: f64,
    pub final_adaptive_gain_max: f64,
    pub leader_input_reads: u64,
    pub warnings: Vec<String>,
    pub cross_check: Option<CrossCheckReport>,
}

pub fn metrics(name: &str, r: &SimResult, warnings: &[String], cross: Option<CrossCheckReport>) -> Metrics {
    let e = &r.errors;
    let channels = [
        ("tracking", Some(&e.tracking)),
        ("velocity_tracking", e.velocity_tracking.as_ref()),
        ("input", Some(&e.input)),
        ("position", Some(&e.position)),
        ("leader_velocity", e.leader_velocity.as_ref()),
        ("self_velocity", e.self_velocity.as_ref()),
    ];
    let mut convergence_time = BTreeMap::new();
    let mut final_error = BTreeMap::new();
    for (name, series) in channels {
        let Some(series) = series else { continue };
        let norm = sim::sup_norm(series);
        convergence_time.insert(name.to_string(), sim::convergence_time(&r.times, &norm, CONVERGENCE_TOL));
        final_error.insert(name.to_string(), norm.last().copied().unwrap_or(0.0));
    }
    let t_end = r.times.last().copied().unwrap_or(0.0);
    Metrics {
        scenario: name.to_string(),
        mode: r.mode.name().to_string(),
        config_hash: r.meta.config_hash.clone(),
        steps: r.meta.steps,
        samples: r.times.len(),
        convergence_tol: CONVERGENCE_TOL,
        convergence_time,
        final_error,
        chattering_amplitude: sim::sup_after(&r.times, &e.input, t_end / 3.0),
        final_adaptive_gain_max: r.adaptive_gain.last().map(|d| d.iter().fold(0.0, |m: f64, v| m.max(*v))).unwrap_or(0.0),
        leader_input_reads: r.meta.leader_input_reads,
        warnings: warnings.to_vec(),
        cross_check: cross,
    }
}

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub dir: PathBuf,
    pub trajectory: Option<PathBuf>,
    pub metrics_path: PathBuf,
    pub plots: Vec<PathBuf>,
    pub metrics: Metrics,
    pub result: SimResult,
}

/// Simulate `scenario` and write its bundle into `out_dir`, overwriting any
/// previous bundle byte for byte.
pub fn run_scenario(scenario: &Scenario, out_dir: impl AsRef<Path>) -> Result<ResultBundle, OutputError> {
    let dir = out_dir.as_ref().to_path_buf();
    fs::create_dir_all(&dir).map_err(|source| OutputError::Io { path: dir.display().to_string(), source })?;

    let result = sim::run(&scenario.config)?;
    let cross = match scenario.outputs.cross_check {
        Some(h) => Some(verify::cross_check(&scenario.config, h, scenario.config.dt)?),
        None => None,
    };
    let metrics = metrics(&scenario.name, &result, &scenario.warnings, cross);

    let csv = trajectory_csv(&result);
    let trajectory = if scenario.outputs.trajectory {
        let p = dir.join(TRAJECTORY_FILE);
        write_file(&p, &csv)?;
        Some(p)
    } else {
        None
    };
    let metrics_path = dir.join(METRICS_FILE);
    let mut json = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
    json.push('\n');
    write_file(&metrics_path, &json)?;

    let plots = if scenario.outputs.plots.is_empty() {
        Vec::new()
    } else {
        let table = plot::Table::from_csv(&csv)?;
        plot::write_panels(&table, &scenario.outputs.plots, &dir.join(plot::PLOT_DIR))?
    };
    Ok(ResultBundle { dir, trajectory, metrics_path, plots, metrics, result })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn first_order_columns() {
        let mut cfg = presets::fig4_first_order();
        cfg.t_end = 0.2;
        let r = sim::run(&cfg).unwrap();
        let names: Vec<String> = trajectory_columns(&r).into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), 3 + 5 * 5);
        assert_eq!(&names[..4], ["t", "x0", "u0", "x1"]);
        assert!(names.contains(&"uhat05".to_string()));
        assert_eq!(names.last().unwrap(), "d5");
        let csv = trajectory_csv(&r);
        assert_eq!(csv.lines().count(), 1 + r.times.len());
        assert!(csv.lines().all(|l| l.split(',').count() == names.len()));
    }

    #[test]
    fn floats_round_trip() {
        let mut cfg = presets::fig5_second_order();
        cfg.t_end = 0.5;
        let r = sim::run(&cfg).unwrap();
        let csv = trajectory_csv(&r);
        let row: Vec<f64> = csv.lines().nth(3).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        let cols = trajectory_columns(&r);
        for (j, (_, v)) in cols.iter().enumerate() {
            assert_eq!(row[j].to_bits(), v[2].to_bits());
        }
        assert!(cols.iter().any(|(n, _)| n == "vhat01"));
        assert!(cols.iter().any(|(n, _)| n == "vhat5"));
    }

    #[test]
    fn simplified_has_no_gain_columns() {
        let mut cfg = presets::fig4_simplified();
        cfg.t_end = 0.1;
        let r = sim::run(&cfg).unwrap();
        assert!(!trajectory_columns(&r).iter().any(|(n, _)| n.starts_with('d')));
    }
}
