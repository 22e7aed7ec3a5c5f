use mas_sim::acceptance::stacked_equivalence_gap;
use mas_sim::graph::{self, h_matrices};
use mas_sim::observers::SignPolicy;
use mas_sim::presets;
use mas_sim::signals::LeaderSignal;
use mas_sim::sim::{self, step_rk4, ClosedLoop, Mode};
use mas_sim::verify::{self, cross_check, f1_matrix, linear_error_solution, ErrorSystem, VerifyError};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn configs() -> Vec<sim::SimConfig> {
    let mut direct = presets::fig4_first_order();
    direct.mode = Mode::FirstOrderDirect;
    vec![presets::fig4_first_order(), presets::fig4_simplified(), direct, presets::fig5_second_order()]
}

#[test]
fn stacked_rates_match_matrix_rates_at_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for cfg in configs() {
        let gap = stacked_equivalence_gap(&cfg, &mut rng, 1000).unwrap();
        assert!(gap <= 1e-12, "{}: {gap:e}", cfg.mode);
    }
}

#[test]
fn stacked_rates_match_mid_run() {
    for mut cfg in configs() {
        cfg.t_end = 23.4;
        let r = sim::run(&cfg).unwrap();
        let field = ClosedLoop::new(&cfg).unwrap();
        let system = ErrorSystem::new(&cfg).unwrap();
        let stacked = verify::stacked_error_rates(&field, 23.4, &r.final_state).unwrap();
        let matrix = system.error_rate(&verify::errors_of_state(&field, 23.4, &r.final_state), 23.4).unwrap();
        for (ch, gap) in stacked.discrepancy(&matrix) {
            assert!(gap <= 1e-12, "{} {ch}: {gap:e}", cfg.mode);
        }
    }
}

#[test]
fn cross_check_bounds() {
    for cfg in [presets::fig4_first_order(), presets::fig5_second_order()] {
        let report = cross_check(&cfg, 10.0, 1e-3).unwrap();
        assert_eq!(report.samples, 101);
        assert!(report.max_discrepancy() <= 1e-4, "{report:?}");
    }
    let mut cfg = presets::fig4_simplified();
    cfg.leader_signal = LeaderSignal::Constant { value: 0.5 };
    let (gap, samples) = verify::linear_oracle_discrepancy(&cfg).unwrap();
    assert_eq!(samples, 601);
    assert!(gap <= 1e-10, "{gap:e}");
}

#[test]
fn zero_error_start_stays_at_equilibrium() {
    let u0 = 0.4;
    let start = |mut cfg: sim::SimConfig| {
        cfg.leader_signal = LeaderSignal::Constant { value: u0 };
        cfg.initial.follower_positions = vec![0.0; 5];
        // uhat = z + b l x0 = u0 with x0 = 0
        cfg.initial.observers.input = Some(vec![u0; 5]);
        cfg
    };
    let report = cross_check(&start(presets::fig4_simplified()), 5.0, 1e-3).unwrap();
    assert!(report.max_discrepancy() <= 1e-13, "{report:?}");

    // With the exact sign, rounding noise of order 1e-17 in r already flips
    // sgn(r) and the full loop chatters at O(d dt). A boundary layer keeps
    // it on the manifold as long as d dt / eps stays inside RK4's stability
    // region.
    let mut adaptive = start(presets::fig4_first_order());
    adaptive.sign_policy = SignPolicy::new(1e-2).unwrap();
    let report = cross_check(&adaptive, 5.0, 1e-3).unwrap();
    assert!(report.max_discrepancy() <= 1e-13, "{report:?}");
}

#[test]
fn cross_check_needs_an_analytic_rate() {
    let mut cfg = presets::fig4_first_order();
    cfg.leader_signal = LeaderSignal::SampledTable { times: vec![0.0, 60.0], values: vec![0.0, 1.0] };
    assert!(matches!(cross_check(&cfg, 1.0, 1e-3), Err(VerifyError::NoAnalyticRate(_))));
}

#[test]
fn f1_spectrum_is_the_product_of_quadratics() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let (k1, k2): (f64, f64) = (rng.random_range(0.05..5.0), rng.random_range(0.05..5.0));
        let n = rng.random_range(1..=4);
        let mut eig = graph::eigenvalues(&f1_matrix(n, k1, k2)).unwrap();
        let disc = k2 * k2 - 4.0 * k1;
        let (r1, r2) = if disc >= 0.0 {
            ((-k2 + disc.sqrt()) / 2.0, 0.0)
        } else {
            (-k2 / 2.0, (-disc).sqrt() / 2.0)
        };
        let mut roots = Vec::new();
        for _ in 0..n {
            if disc >= 0.0 {
                roots.push((r1, 0.0));
                roots.push(((-k2 - disc.sqrt()) / 2.0, 0.0));
            } else {
                roots.push((r1, r2));
                roots.push((r1, -r2));
            }
        }
        // repeated roots of a defective pair only agree to sqrt(eps)
        let tol = if disc.abs() < 1e-3 { 1e-6 } else { 1e-9 };
        assert_eq!(eig.len(), roots.len());
        for e in eig.drain(..) {
            let dist = |r: &(f64, f64)| (e.0 - r.0).hypot(e.1 - r.1);
            let k = (0..roots.len()).min_by(|a, b| dist(&roots[*a]).total_cmp(&dist(&roots[*b]))).unwrap();
            assert!(dist(&roots[k]) <= tol, "k1 {k1} k2 {k2}: {e:?} vs {:?}", roots[k]);
            roots.swap_remove(k);
        }
    }
}

fn rk4_linear(h: &DMatrix<f64>, e0: &DVector<f64>, t: f64, dt: f64) -> Vec<DVector<f64>> {
    let mut y: Vec<f64> = e0.iter().copied().collect();
    let mut out = vec![e0.clone()];
    for k in 0..(t / dt).round() as usize {
        y = step_rk4(
            |_, y: &[f64], dy: &mut [f64]| {
                let r = -(h * DVector::from_column_slice(y));
                dy.copy_from_slice(r.as_slice());
                Ok(())
            },
            &y,
            k as f64 * dt,
            dt,
        )
        .unwrap();
        out.push(DVector::from_column_slice(&y));
    }
    out
}

#[test]
fn linear_solution_matches_integration() {
    let m = h_matrices(&presets::ring_topology(), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e0 = DVector::from_fn(5, |_, _| rng.random_range(-3.0..3.0));
    let exact = linear_error_solution(&m.h2, &e0, 5.0).unwrap();
    let numeric = rk4_linear(&m.h2, &e0, 5.0, 1e-3);
    assert!((exact - numeric.last().unwrap()).amax() <= 1e-7);
}

#[test]
fn linear_subsystems_decay_at_the_smallest_eigenvalue() {
    let m = h_matrices(&presets::ring_topology(), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dt = 1e-2;
    for h in [m.h1.clone(), m.h2.clone(), &m.h2 * 0.5] {
        let lam = graph::min_symmetric_eigenvalue(&h).unwrap();
        for _ in 0..5 {
            let e0 = DVector::from_fn(5, |_, _| rng.random_range(-3.0..3.0));
            let traj = rk4_linear(&h, &e0, 20.0, dt);
            for _ in 0..200 {
                let a = rng.random_range(0..traj.len());
                let b = rng.random_range(a..traj.len());
                let allowed = traj[a].norm() * (-lam * (b - a) as f64 * dt).exp() * (1.0 + 1e-6);
                assert!(traj[b].norm() <= allowed);
            }
        }
    }
}
