use super::*;
use crate::ansatz::{match_gauge, x_gauge_rotate, Template};
use crate::tfim::{ground_energy_density, TrotterOrder};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, LN_2};
use std::sync::OnceLock;

fn quench(g1: f64, dt: f64, t_max: f64) -> QuenchSpec {
    QuenchSpec {
        j: 1.0,
        g0: 1.5,
        g1,
        dt,
        t_max,
        trotter_order: TrotterOrder::First,
    }
}

fn ground8() -> &'static AnsatzParams {
    static G: OnceLock<AnsatzParams> = OnceLock::new();
    G.get_or_init(|| ground_state_optimize(1.0, 1.5, Template::Reduced8).unwrap())
}

#[test]
fn echo_examples() {
    let p = AnsatzParams::new(
        Template::Reduced8,
        vec![0.3, -0.2, 0.9, 1.1, -0.4, 0.6, 0.2, -1.3],
    )
    .unwrap();
    assert!(echo_density(&p, &p).unwrap().abs() < 1e-12);
    let rotated = x_gauge_rotate(&p, 0.77).unwrap();
    assert!(echo_density(&p, &rotated).unwrap().abs() < 1e-10);
    // |0⟩ per site against a state with per-site overlap 1/√2.
    let z_polarised = AnsatzParams::zeros(Template::Full15);
    let mut angles = vec![0.0; 15];
    angles[1] = FRAC_PI_2;
    let tilted = AnsatzParams::new(Template::Full15, angles).unwrap();
    assert!((echo_density(&z_polarised, &tilted).unwrap() - LN_2).abs() < 1e-10);
}

#[test]
fn extrapolation_examples() {
    let v =
        AnsatzParams::new(Template::Reduced8, (0..8).map(|i| 0.1 * i as f64).collect()).unwrap();
    let zero = AnsatzParams::zeros(Template::Reduced8);
    assert_eq!(extrapolate(&v, &v).unwrap(), v);
    let twice: Vec<f64> = v.angles().iter().map(|x| 2.0 * x).collect();
    assert_eq!(extrapolate(&zero, &v).unwrap().angles(), twice.as_slice());
    assert!(extrapolate(&AnsatzParams::zeros(Template::Full15), &v).is_err());
}

#[test]
fn unwrapping_and_rms() {
    let r = AnsatzParams::new(Template::Reduced8, vec![3.0; 8]).unwrap();
    let p = AnsatzParams::new(Template::Reduced8, vec![-3.2; 8]).unwrap();
    let u = unwrap_to(&p, &r).unwrap();
    assert!(u
        .angles()
        .iter()
        .all(|a| (a - (-3.2 + 2.0 * std::f64::consts::PI)).abs() < 1e-12));
    assert_eq!(
        rms_deviation(&[1.0, 1.0], &[1.0, 3.0]).unwrap(),
        2f64.sqrt()
    );
    assert!(rms_deviation(&[1.0], &[]).is_err());
}

#[test]
fn spsa_with_no_steps_returns_seed() {
    let seed = [0.4, -1.0, 2.0];
    let r = spsa_optimize(|_, _| Ok(1.0), &seed, &SpsaSchedule::standard(0.1, 0), 3).unwrap();
    assert_eq!(r.x, seed);
    assert_eq!(r.evaluations, 0);
}

#[test]
fn spsa_converges_on_quadratic() {
    let target = [0.5, -0.3, 1.2, 0.0, -0.8, 0.25];
    let start = [0.0; 6];
    let dist = |x: &[f64]| {
        x.iter()
            .zip(&target)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    for seed in 0..20 {
        let cost = |x: &[f64], _: u64| Ok(dist(x).powi(2));
        let r = spsa_optimize(cost, &start, &SpsaSchedule::standard(0.2, 500), seed).unwrap();
        assert!(
            dist(&r.x) < 0.1 * dist(&start),
            "seed {seed}: {}",
            dist(&r.x)
        );
        assert_eq!(r.history.len(), 500);
    }
}

#[test]
fn spsa_is_deterministic_and_validates() {
    let cost = |x: &[f64], s: u64| Ok(x.iter().map(|v| v * v).sum::<f64>() + (s % 7) as f64 * 1e-3);
    let sched = SpsaSchedule::standard(0.1, 30);
    assert_eq!(
        spsa_optimize(cost, &[1.0, 2.0], &sched, 5).unwrap(),
        spsa_optimize(cost, &[1.0, 2.0], &sched, 5).unwrap()
    );
    for bad in [
        SpsaSchedule {
            alpha: 0.5,
            ..sched
        },
        SpsaSchedule {
            gamma: 0.0,
            ..sched
        },
        SpsaSchedule { a: -1.0, ..sched },
        SpsaSchedule {
            big_a: f64::NAN,
            ..sched
        },
    ] {
        assert!(spsa_optimize(cost, &[1.0], &bad, 0).is_err());
    }
}

#[test]
fn calibration_sets_first_move() {
    // Linear cost: every slope estimate is exactly ±Σ g_i δ_i.
    let g = [0.3, -0.3, 0.3, 0.3];
    let cost = |x: &[f64], _: u64| Ok(x.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>());
    let sched = SpsaSchedule::standard(1.0, 10);
    let (a, evals) = calibrate_gain(cost, &[0.0; 4], &sched, 8, 0.1, 1).unwrap();
    assert_eq!(evals, 16);
    assert!(a < sched.a);
    let (capped, _) = calibrate_gain(
        cost,
        &[0.0; 4],
        &SpsaSchedule { a: 1e-3, ..sched },
        8,
        0.1,
        1,
    )
    .unwrap();
    assert_eq!(capped, 1e-3);
    let r = spsa_optimize(
        cost,
        &[0.0; 4],
        &SpsaSchedule {
            a,
            steps: 1,
            ..sched
        },
        1,
    )
    .unwrap();
    let moved = r.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // The slope estimate is 0 or ±1.2 depending on the signs drawn.
    assert!(moved <= 0.1 * 2.0 + 1e-12, "moved {moved}");
}

#[test]
fn ground_state_energies() {
    let e = energy_density(1.0, 1.5, ground8()).unwrap();
    assert!(e <= ground_energy_density(1.0, 1.5) + 0.01, "energy {e}");
    assert!(e >= ground_energy_density(1.0, 1.5) - 1e-9);
    let again = ground_state_optimize_seeded(1.0, 1.5, Template::Reduced8, 7).unwrap();
    assert!((energy_density(1.0, 1.5, &again).unwrap() - e).abs() < 1e-6);
    let gauge = match_gauge(ground8(), &again).unwrap();
    assert!(
        gauge.residual < 1e-6,
        "states differ beyond gauge: {}",
        gauge.residual
    );

    let para = ground_state_optimize(1.0, 100.0, Template::Full15).unwrap();
    let e = energy_density(1.0, 100.0, &para).unwrap();
    assert!((e + 100.0).abs() < 1.0, "paramagnetic energy {e}");
}

fn trivial_quench_max_echo(dt: f64, order: TrotterOrder) -> f64 {
    let spec = QuenchSpec {
        g1: 1.5,
        trotter_order: order,
        ..quench(1.5, dt, 1.0)
    };
    let traj = evolve_exact_from(&spec, ground8(), &ExactOptions::default()).unwrap();
    assert!(traj.is_complete());
    traj.echoes().into_iter().fold(0.0f64, f64::max)
}

// With g1 = g0 only the Trotter error moves the state: first order leaves an
// O(dt²) echo, second order stays at the 1e-6 level.
#[test]
fn trivial_quench_keeps_the_ground_state() {
    let (coarse, fine) = (
        trivial_quench_max_echo(0.1, TrotterOrder::First),
        trivial_quench_max_echo(0.05, TrotterOrder::First),
    );
    assert!(
        coarse < 0.005 && coarse / fine > 3.0,
        "first order echo {coarse} -> {fine}"
    );
    let second = trivial_quench_max_echo(0.05, TrotterOrder::Second);
    assert!(second < 1e-6, "second order echo {second}");
}

#[test]
fn exact_step_halving_converges() {
    let coarse =
        evolve_exact_from(&quench(0.2, 0.1, 1.0), ground8(), &ExactOptions::default()).unwrap();
    let fine =
        evolve_exact_from(&quench(0.2, 0.05, 1.0), ground8(), &ExactOptions::default()).unwrap();
    let worst = coarse
        .points
        .iter()
        .map(|p| (p.echo - fine.points[2 * p.step].echo).abs())
        .fold(0.0f64, f64::max);
    assert!(worst < 0.05, "max difference {worst}");
    assert_eq!(
        coarse.times(),
        (0..=10).map(|k| k as f64 * 0.1).collect::<Vec<_>>()
    );
}

/// Median over steps of (copy error, extrapolation error), both ‖·‖∞.
fn seed_errors(dt: f64) -> (f64, f64) {
    let traj =
        evolve_exact_from(&quench(0.2, dt, 2.0), ground8(), &ExactOptions::default()).unwrap();
    let inf = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max)
    };
    let (mut copy, mut extrap): (Vec<f64>, Vec<f64>) = (1..traj.points.len() - 1)
        .map(|k| {
            let (prev, cur, next) = (
                &traj.points[k - 1].params,
                &traj.points[k].params,
                &traj.points[k + 1].params,
            );
            let seed = extrapolate(prev, cur).unwrap();
            (
                inf(cur.angles(), next.angles()),
                inf(seed.angles(), next.angles()),
            )
        })
        .unzip();
    copy.sort_by(f64::total_cmp);
    extrap.sort_by(f64::total_cmp);
    (copy[copy.len() / 2], extrap[extrap.len() / 2])
}

#[test]
fn extrapolation_beats_copy_on_exact_trajectory() {
    let (copy_coarse, extrap_coarse) = seed_errors(0.1);
    let (copy_fine, extrap_fine) = seed_errors(0.05);
    // Copy error is first order in dt, extrapolation error second order.
    assert!(
        copy_coarse / copy_fine > 1.6 && copy_coarse / copy_fine < 2.5,
        "copy {copy_coarse} -> {copy_fine}"
    );
    assert!(
        extrap_coarse / extrap_fine > 3.0,
        "extrapolation {extrap_coarse} -> {extrap_fine}"
    );
    assert!(
        copy_coarse / extrap_coarse > 5.0,
        "ratio at dt = 0.1: {}",
        copy_coarse / extrap_coarse
    );
    assert!(
        copy_fine / extrap_fine >= 10.0,
        "ratio at dt = 0.05: {}",
        copy_fine / extrap_fine
    );
}

#[test]
fn boundary_choice_does_not_move_the_optimum() {
    let spec = quench(0.2, 0.1, 1.0);
    let reference = evolve_exact_from(&spec, ground8(), &ExactOptions::default())
        .unwrap()
        .echoes();
    for boundary in [Boundary::Current, Boundary::Candidate] {
        let opts = ExactOptions {
            objective: ExactObjective::PowerMethod { order: 3, boundary },
            ..Default::default()
        };
        let traj = evolve_exact_from(&spec, ground8(), &opts).unwrap();
        assert!(traj.is_complete(), "{boundary:?}: {:?}", traj.failure);
        let worst = traj
            .echoes()
            .iter()
            .zip(&reference)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(
            worst < 1e-3,
            "{boundary:?} boundary moved the echo by {worst}"
        );
    }
    let second = QuenchSpec {
        trotter_order: TrotterOrder::Second,
        ..spec
    };
    let opts = ExactOptions {
        objective: ExactObjective::PowerMethod {
            order: 3,
            boundary: Boundary::Current,
        },
        ..Default::default()
    };
    assert!(evolve_exact_from(&second, ground8(), &opts).is_err());
}

fn small_run(init: InitScheme, shots: Option<u64>, seed: u64) -> StochasticOptions {
    let mut o = StochasticOptions::new(init, 6, shots, seed);
    o.calibrate_move = None;
    o.schedule.a = 0.2;
    o
}

#[test]
fn stochastic_runs_are_deterministic_and_count_shots() {
    let spec = quench(0.2, 0.1, 0.5);
    let mut opts = small_run(InitScheme::Extrapolate, Some(1000), 4);
    opts.calibrate_move = Some(0.1);
    let a = evolve_stochastic(&spec, ground8(), &opts).unwrap();
    let b = evolve_stochastic(&spec, ground8(), &opts).unwrap();
    assert_eq!(a, b);
    assert!(a.is_complete());
    // Calibration probes, two bootstrap steps at 4x, then 6 iterations.
    let evals = 2 * 4 + 2 * 24 + 2 * 24 + 3 * 2 * 6;
    assert_eq!(a.total_shots(), evals as u64 * 1000);
    let c = evolve_stochastic(&spec, ground8(), &StochasticOptions { seed: 5, ..opts }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn stochastic_trivial_quench_stays_put() {
    let spec = quench(1.5, 0.1, 1.0);
    for init in [InitScheme::Copy, InitScheme::Extrapolate] {
        let traj = evolve_stochastic(&spec, ground8(), &small_run(init, Some(100_000), 1)).unwrap();
        let worst = traj.echoes().into_iter().fold(0.0f64, f64::max);
        assert!(worst < 0.02, "{init:?}: echo {worst}");
    }
}

#[test]
fn exact_cost_ensemble_has_no_spread() {
    let spec = quench(0.2, 0.1, 0.5);
    let mut opts = small_run(InitScheme::Extrapolate, None, 0);
    opts.optimizer_seed = Some(11);
    let stats = ensemble_run(&spec, ground8(), &opts, &[1, 2, 3]).unwrap();
    assert!(stats.variance.iter().all(|v| *v < 1e-8));
    assert_eq!(stats.times.len(), 6);
    assert!(ensemble_run(&spec, ground8(), &opts, &[1]).is_err());
}

#[test]
fn init_scheme_names_round_trip() {
    for s in [
        InitScheme::Random,
        InitScheme::Copy,
        InitScheme::Extrapolate,
    ] {
        assert_eq!(InitScheme::from_name(s.name()), Some(s));
    }
    assert_eq!(InitScheme::from_name("linear"), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn echo_is_gauge_invariant_and_nonnegative(
        angles in proptest::collection::vec(-3.2f64..3.2, 8),
        other in proptest::collection::vec(-3.2f64..3.2, 8),
        theta in -3.2f64..3.2,
    ) {
        let p = AnsatzParams::new(Template::Reduced8, angles).unwrap();
        let q = AnsatzParams::new(Template::Reduced8, other).unwrap();
        let e = echo_density(&p, &q).unwrap();
        prop_assert!(e > -1e-9);
        let e_rot = echo_density(&p, &x_gauge_rotate(&q, theta).unwrap()).unwrap();
        prop_assert!((e - e_rot).abs() < 1e-8);
    }
}
