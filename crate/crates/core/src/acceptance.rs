//! The acceptance suite: twelve criteria run against a directory holding the
//! bundled scenario files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::control::{complex_quadratic_stable, Gains};
use crate::graph::{self, Topology, DEFAULT_EIGEN_TOL};
use crate::observers::SignPolicy;
use crate::output::{self, METRICS_FILE, TRAJECTORY_FILE};
use crate::scenario::{parse_scenario, Scenario};
use crate::signals::LeaderSignal;
use crate::sim::{self, ClosedLoop, InitialStates, Mode, ObserverInit, SimConfig, SimResult};
use crate::verify::{self, ErrorSystem};

pub const FIG4: &str = "fig4_first_order";
pub const SIMPLIFIED: &str = "fig4_simplified";
pub const FIG5: &str = "fig5_second_order";
pub const UNREACHABLE: &str = "negative_unreachable";
pub const SUITE: [&str; 4] = [FIG4, SIMPLIFIED, FIG5, UNREACHABLE];

/// Environment variable capping how many scenarios or criteria run at once.
pub const THREADS_ENV: &str = "MAS_SIM_THREADS";

const SEED: u64 = 0x5EED_2024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<32} {}  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub suite: String,
    pub verdicts: Vec<Verdict>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn lines(&self) -> Vec<String> {
        self.verdicts.iter().map(Verdict::line).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `MAS_SIM_THREADS`, with 0, unset or garbage meaning one at a time.
pub fn batch_threads() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok()).filter(|n| *n > 0).unwrap_or(1)
}

/// Map `f` over `items` on at most `threads` scoped threads, keeping order.
pub fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let done: Vec<Vec<(usize, R)>> = std::thread::scope(|s| {
        let workers: Vec<_> = (0..threads)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        if k >= items.len() {
                            break out;
                        }
                        out.push((k, f(&items[k])));
                    }
                })
            })
            .collect();
        workers.into_iter().map(|w| w.join().expect("worker panicked")).collect()
    });
    for (k, r) in done.into_iter().flatten() {
        slots[k] = Some(r);
    }
    slots.into_iter().map(|r| r.expect("every item mapped")).collect()
}

struct Run {
    result: SimResult,
    elapsed: Duration,
}

struct Suite {
    dir: PathBuf,
    scenarios: BTreeMap<&'static str, Result<Scenario, String>>,
    runs: BTreeMap<&'static str, Result<Run, String>>,
}

type Check = Result<String, String>;

impl Suite {
    fn scenario(&self, name: &str) -> Result<&Scenario, String> {
        self.scenarios[name].as_ref().map_err(Clone::clone)
    }

    fn run(&self, name: &str) -> Result<(&Scenario, &Run), String> {
        let s = self.scenario(name)?;
        let r = self.runs[name].as_ref().map_err(Clone::clone)?;
        Ok((s, r))
    }
}

fn expect_mode(s: &Scenario, mode: Mode) -> Result<(), String> {
    if s.config.mode != mode {
        return Err(format!("{} runs mode {}, expected {mode}", s.name, s.config.mode));
    }
    Ok(())
}

fn bound(label: &str, value: f64, limit: f64) -> Result<String, String> {
    let msg = format!("{label} = {value:.3e} (limit {limit:.1e})");
    if value <= limit { Ok(msg) } else { Err(msg) }
}

fn combine(parts: Vec<Result<String, String>>) -> Check {
    let failed = parts.iter().any(|p| p.is_err());
    let text = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("[x] {e}"))).collect::<Vec<_>>().join("; ");
    if failed { Err(text) } else { Ok(text) }
}

fn leader_conditions(s: &Scenario) -> Result<String, String> {
    let cfg = &s.config;
    let v = cfg.gains.violations(cfg.mode.is_second_order());
    if !v.is_empty() {
        return Err(format!("gain conditions violated: {}", v.join(", ")));
    }
    if !graph::is_leader_globally_reachable(&cfg.topology) {
        return Err("leader is not globally reachable".into());
    }
    Ok("gain conditions hold, leader reachable".into())
}

fn c1_first_order_tracking(s: &Suite) -> Check {
    let (sc, run) = s.run(FIG4)?;
    expect_mode(sc, Mode::FirstOrderAdaptive)?;
    let r = &run.result;
    combine(vec![
        leader_conditions(sc),
        bound("sup_{t>=45} |x_i - x0|", sim::sup_after(&r.times, &r.errors.tracking, 45.0), 0.05),
        bound("runtime [s]", run.elapsed.as_secs_f64(), 5.0),
    ])
}

fn c2_first_order_input(s: &Suite) -> Check {
    let (sc, run) = s.run(FIG4)?;
    expect_mode(sc, Mode::FirstOrderAdaptive)?;
    let r = &run.result;
    let d_end = r.adaptive_gain.last().map(|d| d.iter().fold(0.0_f64, |m, v| m.max(*v))).unwrap_or(0.0);
    combine(vec![
        bound("sup_{t>=10} |uhat0_i - u0|", sim::sup_after(&r.times, &r.errors.input, 10.0), 0.05),
        bound("chattering sup_{t>=20}", sim::sup_after(&r.times, &r.errors.input, 20.0), 10.0 * d_end * sc.config.dt),
    ])
}

fn c3_first_order_position(s: &Suite) -> Check {
    let (sc, run) = s.run(FIG4)?;
    expect_mode(sc, Mode::FirstOrderAdaptive)?;
    let r = &run.result;
    bound("sup_{t>=20} |xhat0_i - x0|", sim::sup_after(&r.times, &r.errors.position, 20.0), 0.05)
}

fn c4_simplified(s: &Suite) -> Check {
    let (sc, run) = s.run(SIMPLIFIED)?;
    expect_mode(sc, Mode::FirstOrderSimplified)?;
    if !matches!(sc.config.leader_signal, LeaderSignal::DecayingToConstant { .. }) {
        return Err("leader input is not a decaying-to-constant signal".into());
    }
    let r = &run.result;
    let field = ClosedLoop::new(&sc.config).map_err(|e| e.to_string())?;
    let offered = (0..sc.config.n_followers()).filter(|i| field.leader_measurement(*i, 1.0, 1.0).input.is_some()).count();
    let structural = if offered == 0 && r.meta.leader_input_reads == 0 {
        Ok("no follower is offered or reads u0".to_string())
    } else {
        Err(format!("{offered} followers offered u0, {} reads", r.meta.leader_input_reads))
    };
    combine(vec![
        leader_conditions(sc),
        bound("sup_{t>=45} |x_i - x0|", sim::sup_after(&r.times, &r.errors.tracking, 45.0), 0.05),
        structural,
    ])
}

fn c5_second_order_tracking(s: &Suite) -> Check {
    let (sc, run) = s.run(FIG5)?;
    expect_mode(sc, Mode::SecondOrder)?;
    let r = &run.result;
    let vel = r.errors.velocity_tracking.as_ref().ok_or("no velocity series")?;
    combine(vec![
        leader_conditions(sc),
        bound("sup_{t>=40} |x_i - x0|", sim::sup_after(&r.times, &r.errors.tracking, 40.0), 0.1),
        bound("sup_{t>=40} |v_i - v0|", sim::sup_after(&r.times, vel, 40.0), 0.1),
    ])
}

fn c6_second_order_estimation(s: &Suite) -> Check {
    let (sc, run) = s.run(FIG5)?;
    expect_mode(sc, Mode::SecondOrder)?;
    let r = &run.result;
    let e = &r.errors;
    combine(vec![
        bound("sup_{t>=20} |vhat0_i - v0|", sim::sup_after(&r.times, e.leader_velocity.as_ref().ok_or("missing")?, 20.0), 0.05),
        bound("sup_{t>=15} |vhat_i - v_i|", sim::sup_after(&r.times, e.self_velocity.as_ref().ok_or("missing")?, 15.0), 0.05),
        bound("sup_{t>=10} |uhat0_i - u0|", sim::sup_after(&r.times, &e.input, 10.0), 0.05),
    ])
}

fn c7_self_velocity_closed_form(s: &Suite) -> Check {
    let sc = s.scenario(FIG5)?;
    expect_mode(sc, Mode::SecondOrder)?;
    let mut cfg = sc.config.clone();
    cfg.t_end = 10.0;
    cfg.dt = 1e-3;
    cfg.record_stride = 10;
    let r = sim::run(&cfg).map_err(|e| e.to_string())?;
    let ev = r.errors.self_velocity.as_ref().ok_or("missing self-velocity errors")?;
    let l = cfg.gains.l;
    let gap = r
        .times
        .iter()
        .zip(ev)
        .flat_map(|(t, row)| row.iter().zip(&ev[0]).map(move |(e, e0)| (e - e0 * (-l * t).exp()).abs()))
        .fold(0.0_f64, f64::max);
    bound("sup_{[0,10]} |e_v - e_v(0) exp(-l t)|", gap, 1e-6)
}

fn c8_oracles(s: &Suite) -> Check {
    let sc = s.scenario(FIG4)?;
    let report = verify::cross_check(&sc.config, 10.0, 1e-3).map_err(|e| e.to_string())?;
    let mut parts: Vec<Result<String, String>> = report
        .channels
        .iter()
        .map(|(ch, v)| bound(&format!("cross-check {ch}"), *v, 1e-4))
        .collect();

    let simp = s.scenario(SIMPLIFIED)?;
    let mut cfg = simp.config.clone();
    cfg.leader_signal = LeaderSignal::Constant { value: 0.5 };
    parts.push(match verify::linear_oracle_discrepancy(&cfg) {
        Ok((gap, _)) => bound("matrix exponential", gap, 1e-10),
        Err(e) => Err(e.to_string()),
    });
    combine(parts)
}

/// A random connected undirected topology on `n` followers; leader links are
/// optional.
pub fn random_topology(rng: &mut impl Rng, n: usize, with_leader: bool) -> Topology {
    let mut a = vec![vec![0.0; n]; n];
    let link = |a: &mut Vec<Vec<f64>>, i: usize, j: usize, w: f64| {
        a[i][j] = w;
        a[j][i] = w;
    };
    for k in 1..n {
        let parent = rng.random_range(0..k);
        link(&mut a, k, parent, rng.random_range(0.2..2.0));
    }
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j] == 0.0 && rng.random_bool(0.3) {
                link(&mut a, i, j, rng.random_range(0.2..2.0));
            }
        }
    }
    let mut b = vec![0.0; n];
    if with_leader {
        for bi in b.iter_mut() {
            if rng.random_bool(0.4) {
                *bi = rng.random_range(0.2..2.0);
            }
        }
        if b.iter().all(|v| *v == 0.0) {
            b[rng.random_range(0..n)] = rng.random_range(0.2..2.0);
        }
    }
    Topology::from_rows(&a, &b).expect("random topology is valid")
}

fn random_config(rng: &mut impl Rng, mode: Mode) -> SimConfig {
    let n = rng.random_range(2..=8);
    let second = mode.is_second_order();
    let zeros = vec![0.0; n];
    SimConfig {
        topology: random_topology(rng, n, true),
        gains: Gains {
            k1: rng.random_range(0.2..3.0),
            k2: second.then(|| rng.random_range(0.2..3.0)),
            l: rng.random_range(0.2..3.0),
            c: rng.random_range(0.1..2.0),
            tau: (0..n).map(|_| rng.random_range(0.2..3.0)).collect(),
        },
        leader_signal: LeaderSignal::Sinusoid {
            amplitude: rng.random_range(0.1..2.0),
            angular_frequency: rng.random_range(0.1..2.0),
            phase: rng.random_range(0.0..6.0),
        },
        mode,
        initial: InitialStates {
            leader_position: 0.0,
            leader_velocity: second.then_some(0.0),
            follower_positions: zeros.clone(),
            follower_velocities: second.then_some(zeros),
            observers: ObserverInit::default(),
        },
        dt: 1e-3,
        t_end: 1.0,
        record_stride: 1,
        sign_policy: SignPolicy::EXACT,
    }
}

/// Largest entrywise gap between the per-follower rates pushed into error
/// coordinates and the matrix-form error rates, over `samples` random states.
pub fn stacked_equivalence_gap(cfg: &SimConfig, rng: &mut impl Rng, samples: usize) -> Result<f64, String> {
    let field = ClosedLoop::new(cfg).map_err(|e| e.to_string())?;
    let system = ErrorSystem::new(cfg).map_err(|e| e.to_string())?;
    let gains = field.layout().adaptive_gains();
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let mut y: Vec<f64> = (0..field.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
        for d in &mut y[gains.clone()] {
            *d = if cfg.mode.is_adaptive() { rng.random_range(0.0..2.0) } else { 0.0 };
        }
        let t = rng.random_range(0.0..60.0);
        let stacked = verify::stacked_error_rates(&field, t, &y).map_err(|e| e.to_string())?;
        let matrix = system.error_rate(&verify::errors_of_state(&field, t, &y), t).map_err(|e| e.to_string())?;
        worst = stacked.discrepancy(&matrix).values().fold(worst, |m, v| m.max(*v));
    }
    Ok(worst)
}

fn c9_stacked_equivalence(s: &Suite) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let mut parts = Vec::new();
    for mode in Mode::ALL {
        let base = match mode {
            Mode::FirstOrderSimplified => s.scenario(SIMPLIFIED)?.config.clone(),
            Mode::SecondOrder => s.scenario(FIG5)?.config.clone(),
            _ => {
                let mut c = s.scenario(FIG4)?.config.clone();
                c.mode = mode;
                c
            }
        };
        let mut worst = stacked_equivalence_gap(&base, &mut rng, 200)?;
        for _ in 0..40 {
            let cfg = random_config(&mut rng, mode);
            worst = worst.max(stacked_equivalence_gap(&cfg, &mut rng, 20)?);
        }
        parts.push(bound(&format!("{mode} (1000 states)"), worst, 1e-12));
    }
    combine(parts)
}

fn quadratic_roots_stable(a1: f64, b1: f64, a0: f64, b0: f64) -> (bool, f64) {
    let p = Complex::new(a1, b1);
    let q = Complex::new(a0, b0);
    let disc = (p * p - q * 4.0).sqrt();
    let r1 = (-p + disc) / 2.0;
    let r2 = (-p - disc) / 2.0;
    let re = r1.re.max(r2.re);
    (re < 0.0, re)
}

fn c10_graph_predicates(s: &Suite) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let mut failures = Vec::new();
    let mut min_re = f64::INFINITY;
    let mut max_zero = 0.0_f64;
    for k in 0..100 {
        let n = rng.random_range(1..=8);
        let t = random_topology(&mut rng, n, true);
        let l = rng.random_range(0.2..3.0);
        let m = graph::h_matrices(&t, l).map_err(|e| e.to_string())?;
        for (name, h) in [("H1", &m.h1), ("H2", &m.h2)] {
            let eig = graph::eigenvalues(h).map_err(|e| e.to_string())?;
            min_re = eig.iter().fold(min_re, |a, (re, _)| a.min(*re));
            if !graph::is_positive_stable(h, DEFAULT_EIGEN_TOL).map_err(|e| e.to_string())? {
                failures.push(format!("{name} of topology {k} not positive stable"));
            }
        }
        if !graph::is_leader_globally_reachable(&t) {
            failures.push(format!("topology {k} not reachable"));
        }
        let free = Topology::from_rows(&t.adjacency_rows(), &vec![0.0; n]).map_err(|e| e.to_string())?;
        let eig = graph::eigenvalues(&graph::laplacian(&free)).map_err(|e| e.to_string())?;
        let zero = eig.iter().map(|(re, _)| re.abs()).fold(f64::INFINITY, f64::min);
        max_zero = max_zero.max(zero);
        if zero > 1e-9 {
            failures.push(format!("leaderless L of topology {k} has no zero eigenvalue"));
        }
    }

    let (mut disagree, mut skipped) = (0, 0);
    for _ in 0..10_000 {
        let [a1, b1, a0, b0]: [f64; 4] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        let (oracle, re) = quadratic_roots_stable(a1, b1, a0, b0);
        if re.abs() < 1e-9 {
            skipped += 1;
            continue;
        }
        if oracle != complex_quadratic_stable(a1, b1, a0, b0) {
            disagree += 1;
        }
    }
    if disagree > 0 {
        failures.push(format!("stability predicate disagrees with the roots on {disagree} samples"));
    }

    for name in [FIG4, SIMPLIFIED, FIG5] {
        let sc = s.scenario(name)?;
        let t = &sc.config.topology;
        let m = graph::h_matrices(t, sc.config.gains.l).map_err(|e| e.to_string())?;
        let stable = graph::is_positive_stable(&m.h1, DEFAULT_EIGEN_TOL).map_err(|e| e.to_string())?
            && graph::is_positive_stable(&m.h2, DEFAULT_EIGEN_TOL).map_err(|e| e.to_string())?;
        if !graph::is_leader_globally_reachable(t) || !stable {
            failures.push(format!("{name}: leader not reachable or H not positive stable"));
        }
    }
    if graph::is_leader_globally_reachable(&s.scenario(UNREACHABLE)?.config.topology) {
        failures.push(format!("{UNREACHABLE}: leader is reachable"));
    }

    let summary = format!(
        "100 topologies: min Re eig(H) = {min_re:.3e}, max leaderless |Re eig_min(L)| = {max_zero:.1e}; \
         10000 polynomials, {disagree} disagreements, {skipped} boundary samples skipped"
    );
    if failures.is_empty() { Ok(summary) } else { Err(format!("{}; {summary}", failures.join("; "))) }
}

fn c11_monotone_gains(s: &Suite) -> Check {
    let mut parts = Vec::new();
    for name in [FIG4, FIG5] {
        let (_, run) = s.run(name)?;
        let d = &run.result.adaptive_gain;
        let drops = d
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a - b))
            .fold(0.0_f64, f64::max);
        parts.push(if drops <= 0.0 {
            Ok(format!("{name}: d_i non-decreasing"))
        } else {
            Err(format!("{name}: d_i drops by {drops:.3e}"))
        });
    }
    let (_, run) = s.run(FIG4)?;
    let r = &run.result;
    let t_end = *r.times.last().ok_or("empty run")?;
    let k1 = r.times.iter().rposition(|t| *t <= t_end - 1.0 + 1e-9).ok_or("run shorter than 1 s")?;
    let slope = r
        .adaptive_gain
        .last()
        .unwrap()
        .iter()
        .zip(&r.adaptive_gain[k1])
        .map(|(a, b)| (a - b) / (t_end - r.times[k1]))
        .fold(0.0_f64, f64::max);
    parts.push(bound("final-second slope of d_i", slope, 1e-3));
    combine(parts)
}

static SCRATCH: AtomicUsize = AtomicUsize::new(0);

fn scratch_dir() -> PathBuf {
    let k = SCRATCH.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("mas-sim-accept-{}-{k}", std::process::id()))
}

fn c12_determinism(s: &Suite) -> Check {
    let mut parts = Vec::new();
    for name in SUITE {
        let sc = s.scenario(name)?;
        let mut files = Vec::new();
        for _ in 0..2 {
            let dir = scratch_dir();
            let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
            let outcome = output::run_scenario(sc, &dir)
                .map_err(|e| e.to_string())
                .and_then(|_| Ok((read(&dir.join(TRAJECTORY_FILE))?, read(&dir.join(METRICS_FILE))?)));
            let _ = std::fs::remove_dir_all(&dir);
            files.push(outcome?);
        }
        parts.push(if files[0] == files[1] {
            Ok(format!("{name} identical ({} bytes)", files[0].0.len()))
        } else {
            Err(format!("{name} differs between runs"))
        });
    }
    combine(parts)
}

type Criterion = (u32, &'static str, fn(&Suite) -> Check);

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "first-order tracking"),
    (2, "first-order input estimation"),
    (3, "first-order position estimation"),
    (4, "simplified observer"),
    (5, "second-order tracking"),
    (6, "second-order estimation"),
    (7, "self-velocity closed form"),
    (8, "oracle equivalence"),
    (9, "stacked-form equivalence"),
    (10, "graph predicates"),
    (11, "monotone adaptive gains"),
    (12, "determinism"),
];

fn criteria() -> [Criterion; 12] {
    let f: [fn(&Suite) -> Check; 12] = [
        c1_first_order_tracking,
        c2_first_order_input,
        c3_first_order_position,
        c4_simplified,
        c5_second_order_tracking,
        c6_second_order_estimation,
        c7_self_velocity_closed_form,
        c8_oracles,
        c9_stacked_equivalence,
        c10_graph_predicates,
        c11_monotone_gains,
        c12_determinism,
    ];
    std::array::from_fn(|k| (CRITERIA[k].0, CRITERIA[k].1, f[k]))
}

/// Load `<suite_dir>/<name>.toml` for every bundled scenario and evaluate all
/// criteria. Failures are report entries, never errors.
pub fn run_acceptance(suite_dir: impl AsRef<Path>) -> AcceptanceReport {
    run_acceptance_with_threads(suite_dir, batch_threads())
}

pub fn run_acceptance_with_threads(suite_dir: impl AsRef<Path>, threads: usize) -> AcceptanceReport {
    let dir = suite_dir.as_ref().to_path_buf();
    let scenarios: BTreeMap<&'static str, Result<Scenario, String>> = SUITE
        .iter()
        .map(|name| (*name, parse_scenario(dir.join(format!("{name}.toml"))).map_err(|e| format!("{name}: {e}"))))
        .collect();
    let runs = par_map(&SUITE, threads, |name| {
        let sc = scenarios[name].as_ref().map_err(Clone::clone)?;
        let start = Instant::now();
        let result = sim::run(&sc.config).map_err(|e| format!("{name}: {e}"))?;
        Ok(Run { result, elapsed: start.elapsed() })
    });
    let suite = Suite { dir, scenarios, runs: SUITE.iter().copied().zip(runs).collect() };

    let verdicts = par_map(&criteria(), threads, |(id, name, check)| {
        let (passed, detail) = match check(&suite) {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        Verdict { id: *id, name, passed, detail }
    });
    AcceptanceReport { suite: suite.dir.display().to_string(), verdicts }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_keeps_order() {
        let items: Vec<u32> = (0..50).collect();
        assert_eq!(par_map(&items, 4, |x| x * 2), items.iter().map(|x| x * 2).collect::<Vec<_>>());
        assert_eq!(par_map(&items, 1, |x| x + 1)[49], 50);
        assert!(par_map(&Vec::<u32>::new(), 3, |x| *x).is_empty());
    }

    #[test]
    fn quadratic_oracle() {
        // (s + 1)(s + 2)
        assert!(quadratic_roots_stable(3.0, 0.0, 2.0, 0.0).0);
        // s^2 - 1
        assert!(!quadratic_roots_stable(0.0, 0.0, -1.0, 0.0).0);
    }

    #[test]
    fn random_topologies_are_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let n = rng.random_range(1..=8);
            let t = random_topology(&mut rng, n, true);
            assert!(graph::is_leader_globally_reachable(&t));
        }
    }

    #[test]
    fn missing_suite_fails_every_criterion() {
        let r = run_acceptance_with_threads("/nonexistent/suite", 2);
        assert_eq!(r.verdicts.len(), 12);
        assert!(r.verdicts.iter().all(|v| !v.passed));
    }
}
