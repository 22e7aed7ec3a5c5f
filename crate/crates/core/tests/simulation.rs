use mas_sim::observers::SignPolicy;
use mas_sim::presets;
use mas_sim::signals::LeaderSignal;
use mas_sim::sim::{self, ClosedLoop, Mode, SimConfig, SimError};
use mas_sim::verify::errors_of_state;

#[test]
fn state_dimensions() {
    assert_eq!(ClosedLoop::new(&presets::fig4_first_order()).unwrap().dim(), 21);
    assert_eq!(ClosedLoop::new(&presets::fig4_simplified()).unwrap().dim(), 21);
    assert_eq!(ClosedLoop::new(&presets::fig5_second_order()).unwrap().dim(), 37);
}

#[test]
fn runs_are_deterministic() {
    for cfg in [presets::fig4_first_order(), presets::fig5_second_order()] {
        let a = sim::run(&cfg).unwrap();
        let b = sim::run(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.meta.config_hash, sim::config_hash(&cfg));
        assert_eq!(a.times.len(), 601);
        assert_eq!(a.meta.steps, 60_000);
    }
}

#[test]
fn simplified_observer_never_reads_the_leader_input() {
    let r = sim::run(&presets::fig4_simplified()).unwrap();
    assert_eq!(r.meta.leader_input_reads, 0);
    let r = sim::run(&presets::fig4_first_order()).unwrap();
    // follower 1 at every RK4 stage and every recorded sample
    assert_eq!(r.meta.leader_input_reads, 4 * 60_000 + 601);
}

#[test]
fn adaptive_gains_never_decrease() {
    let mut direct = presets::fig4_first_order();
    direct.mode = Mode::FirstOrderDirect;
    for cfg in [presets::fig4_first_order(), presets::fig5_second_order(), direct] {
        let r = sim::run(&cfg).unwrap();
        for w in r.adaptive_gain.windows(2) {
            assert!(w[0].iter().zip(&w[1]).all(|(a, b)| b >= a), "{}", cfg.mode);
        }
    }
}

#[test]
fn errors_agree_with_the_state() {
    for cfg in [presets::fig4_first_order(), presets::fig4_simplified(), presets::fig5_second_order()] {
        let r = sim::run(&cfg).unwrap();
        for k in 0..r.times.len() {
            for i in 0..r.n {
                assert_eq!(r.errors.input[k][i], r.input_estimate[k][i] - r.leader_input[k]);
                assert_eq!(r.errors.tracking[k][i], r.position[k][i] - r.leader_position[k]);
            }
        }
        let field = ClosedLoop::new(&cfg).unwrap();
        let t = *r.times.last().unwrap();
        let e = errors_of_state(&field, t, &r.final_state);
        let last = r.times.len() - 1;
        for i in 0..r.n {
            assert!((e.input[i] - r.errors.input[last][i]).abs() <= 1e-12);
            assert!((e.position[i] - r.errors.position[last][i]).abs() <= 1e-12);
            assert!((e.tracking[i] - r.errors.tracking[last][i]).abs() <= 1e-12);
            if let Some(sv) = &r.errors.self_velocity {
                assert!((e.self_velocity[i] - sv[last][i]).abs() <= 1e-12);
                assert!((e.leader_velocity[i] - r.errors.leader_velocity.as_ref().unwrap()[last][i]).abs() <= 1e-12);
            }
        }
    }
}

// Frozen once from dt in {0.02, 0.01, 0.005}: C measured at 2.9e-4, and
// rounding sets a floor near 5e-12 on the 60 s horizon.
const REFINEMENT_C: f64 = 1e-3;
const REFINEMENT_FLOOR: f64 = 2e-11;

#[test]
fn halving_dt_changes_the_smooth_solution_at_fourth_order() {
    for dt in [0.04, 0.02, 0.01] {
        let mut a = presets::fig4_simplified();
        a.dt = dt;
        a.record_stride = 1000;
        let mut b = a.clone();
        b.dt = dt / 2.0;
        let ya = sim::run(&a).unwrap().final_state;
        let yb = sim::run(&b).unwrap().final_state;
        let diff = ya.iter().zip(&yb).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(diff <= (REFINEMENT_C * dt.powi(4)).max(REFINEMENT_FLOOR), "dt {dt}: {diff:e}");
    }
}

fn on_the_manifold(mut cfg: SimConfig, u0: f64) -> SimConfig {
    let n = cfg.n_followers();
    cfg.leader_signal = LeaderSignal::Constant { value: u0 };
    cfg.initial.leader_position = 0.0;
    cfg.initial.follower_positions = vec![0.0; n];
    cfg.initial.observers.input = Some(vec![u0; n]);
    if cfg.mode.is_second_order() {
        cfg.initial.leader_velocity = Some(0.0);
        cfg.initial.follower_velocities = Some(vec![0.0; n]);
    }
    cfg
}

#[test]
fn zero_error_manifold_is_invariant() {
    let r = sim::run(&on_the_manifold(presets::fig4_simplified(), -0.3)).unwrap();
    let e = &r.errors;
    for s in [&e.input, &e.position, &e.tracking] {
        assert!(sim::sup_after(&r.times, s, 0.0) <= 1e-12);
    }

    let mut cfg = on_the_manifold(presets::fig5_second_order(), 0.25);
    cfg.sign_policy = SignPolicy::new(1e-2).unwrap();
    let r = sim::run(&cfg).unwrap();
    let e = &r.errors;
    for s in [
        &e.input,
        &e.position,
        &e.tracking,
        e.velocity_tracking.as_ref().unwrap(),
        e.leader_velocity.as_ref().unwrap(),
        e.self_velocity.as_ref().unwrap(),
    ] {
        assert!(sim::sup_after(&r.times, s, 0.0) <= 1e-9);
    }
}

#[test]
fn unreachable_leader_is_not_tracked() {
    let r = sim::run(&presets::negative_unreachable()).unwrap();
    assert!(r.final_state.iter().all(|v| v.is_finite()));
    assert!(sim::sup_after(&r.times, &r.errors.tracking, 45.0) > 0.5);
}

#[test]
fn divergence_is_reported() {
    let mut cfg = presets::fig4_first_order();
    cfg.gains.k1 = -1e6;
    assert!(matches!(sim::run(&cfg), Err(SimError::NonFiniteState { .. })));
}

#[test]
fn invalid_configurations() {
    let mut cfg = presets::fig4_first_order();
    cfg.dt = 0.0;
    assert!(matches!(sim::run(&cfg), Err(SimError::ConfigInvalid(_))));

    let mut cfg = presets::fig5_second_order();
    cfg.gains.k2 = None;
    assert!(matches!(ClosedLoop::new(&cfg), Err(SimError::ConfigInvalid(_))));

    let mut cfg = presets::fig4_simplified();
    cfg.initial.observers.adaptive_gain = Some(vec![1.0; 5]);
    assert!(matches!(cfg.validate(), Err(SimError::ConfigInvalid(_))));
}
