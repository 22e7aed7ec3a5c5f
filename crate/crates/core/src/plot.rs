//! Dependency-free SVG line charts drawn from a trajectory CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::output::{write_file, OutputError, TRAJECTORY_FILE};

pub const PLOT_DIR: &str = "plots";
pub const MAX_POINTS: usize = 2000;

/// Named panels. A raw column name (`x3`, `d1`, ...) is a panel too.
pub const PANELS: [&str; 8] = [
    "position",
    "input_estimate",
    "position_estimate",
    "control",
    "adaptive_gain",
    "velocity",
    "leader_velocity_estimate",
    "self_velocity_estimate",
];

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
    #[error("malformed trajectory table: {0}")]
    Malformed(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl From<OutputError> for PlotError {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::Io { path, source } => PlotError::Io { path, source },
            other => PlotError::Malformed(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_csv(text: &str) -> Result<Self, PlotError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| PlotError::Malformed("empty file".into()))?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != names.len() {
                return Err(PlotError::Malformed(format!("row {} has {} fields", k + 1, fields.len())));
            }
            for (col, f) in columns.iter_mut().zip(fields) {
                let v = f.trim().parse().map_err(|_| PlotError::Malformed(format!("bad number {f:?}")))?;
                col.push(v);
            }
        }
        Ok(Self { names, columns })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, PlotError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| PlotError::Io { path: path.display().to_string(), source })?;
        Self::from_csv(&text)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|k| self.columns[k].as_slice())
    }

    fn followers(&self) -> usize {
        (1..).take_while(|i| self.column(&format!("x{i}")).is_some()).count()
    }
}

fn canonical(panel: &str) -> String {
    let p = panel.trim().to_lowercase().replace([' ', '-'], "_");
    match p.as_str() {
        "position_tracking" | "positions" => "position".into(),
        "input_estimation" => "input_estimate".into(),
        "position_estimation" => "position_estimate".into(),
        "control_inputs" | "controls" => "control".into(),
        "adaptive_gains" => "adaptive_gain".into(),
        "velocity_tracking" | "velocities" => "velocity".into(),
        "leader_velocity_estimation" => "leader_velocity_estimate".into(),
        "self_velocity_estimation" => "self_velocity_estimate".into(),
        _ => p,
    }
}

/// Columns drawn by `panel`, truth first.
pub fn panel_columns(table: &Table, panel: &str) -> Result<Vec<String>, PlotError> {
    let n = table.followers();
    let each = |prefix: &'static str| (1..=n).map(move |i| format!("{prefix}{i}"));
    let cols: Vec<String> = match canonical(panel).as_str() {
        "position" => std::iter::once("x0".to_string()).chain(each("x")).collect(),
        "input_estimate" => std::iter::once("u0".to_string()).chain(each("uhat0")).collect(),
        "position_estimate" => std::iter::once("x0".to_string()).chain(each("xhat0")).collect(),
        "control" => each("u").collect(),
        "adaptive_gain" => each("d").collect(),
        "velocity" => std::iter::once("v0".to_string()).chain(each("v")).collect(),
        "leader_velocity_estimate" => std::iter::once("v0".to_string()).chain(each("vhat0")).collect(),
        "self_velocity_estimate" => each("v").chain(each("vhat")).collect(),
        _ => vec![panel.trim().to_string()],
    };
    match cols.iter().find(|c| table.column(c).is_none()) {
        Some(missing) => Err(PlotError::UnknownChannel(missing.clone())),
        None => Ok(cols),
    }
}

const PALETTE: [&str; 10] = [
    "#000000", "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#7f7f7f",
];

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    mag * if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn tick_label(v: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.digits$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') { "0".into() } else { s }
}

/// Render a line chart of `columns` against `t`.
pub fn render_svg(table: &Table, title: &str, columns: &[String]) -> Result<String, PlotError> {
    let t = table.column("t").ok_or_else(|| PlotError::UnknownChannel("t".into()))?;
    let series: Vec<(&str, &[f64])> = columns
        .iter()
        .map(|c| table.column(c).map(|v| (c.as_str(), v)).ok_or_else(|| PlotError::UnknownChannel(c.clone())))
        .collect::<Result<_, _>>()?;

    let (w, h) = (800.0, 480.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let t0 = t.first().copied().unwrap_or(0.0);
    let t1 = t.last().copied().unwrap_or(1.0).max(t0 + 1e-12);
    let finite = series.iter().flat_map(|(_, v)| v.iter()).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let sx = |v: f64| left + (v - t0) / (t1 - t0) * pw;
    let sy = |v: f64| top + (hi - v) / (hi - lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, left + pw / 2.0);
    let _ = writeln!(s, r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);

    let xstep = nice_step(t1 - t0);
    let mut v = (t0 / xstep).ceil() * xstep;
    while v <= t1 + 1e-9 * xstep {
        let x = sx(v);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, top + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, top + ph + 18.0, tick_label(v, xstep));
        v += xstep;
    }
    let ystep = nice_step(hi - lo);
    let mut v = (lo / ystep).ceil() * ystep;
    while v <= hi + 1e-9 * ystep {
        let y = sy(v);
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, left + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 6.0, y + 4.0, tick_label(v, ystep));
        v += ystep;
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#, left + pw / 2.0, h - 10.0);

    let stride = t.len().div_ceil(MAX_POINTS - 1).max(1);
    for (k, (name, vals)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts = String::new();
        let last = t.len().saturating_sub(1);
        for j in (0..t.len()).step_by(stride).chain((last % stride != 0).then_some(last)) {
            if vals[j].is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(t[j]), sy(vals[j]));
            }
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.3" points="{}"/>"#, pts.trim_end());
        let ly = top + 10.0 + 18.0 * k as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 22.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, lx + 28.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Write one SVG per panel into `dir`. All panels are resolved before any
/// file is written.
pub fn write_panels(table: &Table, panels: &[String], dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    let resolved: Vec<(String, Vec<String>)> = panels
        .iter()
        .map(|p| panel_columns(table, p).map(|cols| (canonical(p), cols)))
        .collect::<Result<_, _>>()?;
    if resolved.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir).map_err(|source| PlotError::Io { path: dir.display().to_string(), source })?;
    let mut out = Vec::new();
    for (name, cols) in resolved {
        let path = dir.join(format!("{name}.svg"));
        write_file(&path, &render_svg(table, &name, &cols)?)?;
        out.push(path);
    }
    Ok(out)
}

/// Plot panels of the bundle in `bundle_dir` into `bundle_dir/plots`.
pub fn emit_plots(bundle_dir: impl AsRef<Path>, panels: &[String]) -> Result<Vec<PathBuf>, PlotError> {
    let dir = bundle_dir.as_ref();
    if panels.is_empty() {
        return Ok(Vec::new());
    }
    let table = Table::read(dir.join(TRAJECTORY_FILE))?;
    write_panels(&table, panels, &dir.join(PLOT_DIR))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut csv = String::from("t,x0,u0,x1,x2,uhat01,uhat02\n");
        for k in 0..5000 {
            let t = k as f64 * 0.01;
            csv.push_str(&format!("{t},{},{},1,2,3,4\n", t.sin(), t.cos()));
        }
        Table::from_csv(&csv).unwrap()
    }

    #[test]
    fn panels_resolve() {
        let t = table();
        assert_eq!(panel_columns(&t, "position tracking").unwrap(), ["x0", "x1", "x2"]);
        assert_eq!(panel_columns(&t, "input_estimate").unwrap(), ["u0", "uhat01", "uhat02"]);
        assert_eq!(panel_columns(&t, "x2").unwrap(), ["x2"]);
        assert!(matches!(panel_columns(&t, "v0"), Err(PlotError::UnknownChannel(c)) if c == "v0"));
        assert!(matches!(panel_columns(&t, "velocity"), Err(PlotError::UnknownChannel(_))));
    }

    #[test]
    fn decimates() {
        let t = table();
        let svg = render_svg(&t, "position", &panel_columns(&t, "position").unwrap()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        for line in svg.lines().filter(|l| l.starts_with("<polyline")) {
            let pts = line.split("points=\"").nth(1).unwrap().split_whitespace().count();
            assert!((MAX_POINTS / 2..=MAX_POINTS).contains(&pts), "{pts}");
        }
    }

    #[test]
    fn malformed_rows() {
        assert!(matches!(Table::from_csv("t,x\n1\n"), Err(PlotError::Malformed(_))));
        assert!(matches!(Table::from_csv(""), Err(PlotError::Malformed(_))));
    }
}
