use super::spsa::{calibrate_gain, spsa_optimize, SpsaSchedule};
use super::{echo_density, extrapolate, unwrap_to, InitScheme, Trajectory, TrajectoryPoint};
use crate::ansatz::AnsatzParams;
use crate::circuits::{build_cost_circuit, exact_success_probability, sample_probability};
use crate::error::{invalid, Result};
use crate::tfim::QuenchSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Default SPSA gain `a` before calibration. Larger gains overshoot the
/// stiff directions of the cost at six iterations per step.
pub const DEFAULT_GAIN: f64 = 0.2;

/// Settings for [`evolve_stochastic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticOptions {
    pub init: InitScheme,
    pub schedule: SpsaSchedule,
    /// `None` uses the exact success probability (no shot noise).
    pub shots_per_eval: Option<u64>,
    /// Seeds the shot sampling.
    pub seed: u64,
    /// Seeds perturbation directions and random initial angles. `None`
    /// derives them from `seed`; a fixed value makes runs differ only
    /// through sampling noise.
    pub optimizer_seed: Option<u64>,
    /// Budget multiplier for the first two steps of an extrapolating run,
    /// which have no history to extrapolate from.
    pub bootstrap_factor: usize,
    /// When set, `schedule.a` is lowered before the first step if needed so
    /// that the first iteration moves each angle at most about this far.
    pub calibrate_move: Option<f64>,
    pub calibration_samples: usize,
}

impl StochasticOptions {
    pub fn new(init: InitScheme, steps: usize, shots_per_eval: Option<u64>, seed: u64) -> Self {
        Self {
            init,
            schedule: SpsaSchedule::standard(DEFAULT_GAIN, steps),
            shots_per_eval,
            seed,
            optimizer_seed: None,
            bootstrap_factor: 4,
            calibrate_move: Some(0.1),
            calibration_samples: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.shots_per_eval == Some(0) {
            return invalid("shots_per_eval must be positive");
        }
        if self.bootstrap_factor == 0 {
            return invalid("bootstrap_factor must be at least 1");
        }
        if let Some(m) = self.calibrate_move {
            if !(m > 0.0 && m.is_finite()) || self.calibration_samples == 0 {
                return invalid("calibration needs a positive move and at least one sample");
            }
        }
        Ok(())
    }
}

struct RunRngs {
    sampling: ChaCha8Rng,
    optimizer: ChaCha8Rng,
}

/// Sampled `1 − p̂` of the cost circuit for one candidate.
fn sampled_cost(
    current: &AnsatzParams,
    spec: &QuenchSpec,
    shots: Option<u64>,
    x: &[f64],
    seed: u64,
) -> Result<f64> {
    let candidate = current.with_angles(x.to_vec())?;
    let p = exact_success_probability(&build_cost_circuit(current, &candidate, spec)?)?;
    Ok(match shots {
        Some(n) => 1.0 - sample_probability(p, n, seed)?.p_hat,
        None => 1.0 - p,
    })
}

/// Stochastic evolution from `ground`. Each step seeds the candidate by
/// the chosen scheme and refines it with SPSA on the sampled circuit cost.
/// A failing step ends the run and is recorded in the trajectory.
pub fn evolve_stochastic(
    spec: &QuenchSpec,
    ground: &AnsatzParams,
    opts: &StochasticOptions,
) -> Result<Trajectory> {
    spec.validate()?;
    opts.validate()?;
    let mut rngs = RunRngs {
        sampling: ChaCha8Rng::seed_from_u64(opts.seed),
        optimizer: ChaCha8Rng::seed_from_u64(
            opts.optimizer_seed
                .unwrap_or(opts.seed ^ 0x9e37_79b9_7f4a_7c15),
        ),
    };
    let mut schedule = opts.schedule;
    let mut traj = Trajectory {
        spec: *spec,
        seed: opts.seed,
        init: Some(opts.init),
        points: vec![TrajectoryPoint {
            step: 0,
            time: 0.0,
            params: ground.clone(),
            echo: echo_density(ground, ground)?,
            cumulative_shots: 0,
            cost: 0.0,
            converged: true,
        }],
        failure: None,
    };
    let shots_per_eval = opts.shots_per_eval.unwrap_or(0);
    for step in 1..=spec.n_steps() {
        match stochastic_step(spec, &traj, opts, &mut schedule, &mut rngs, step) {
            Ok((params, cost, evaluations)) => {
                let echo = match echo_density(ground, &params) {
                    Ok(e) => e,
                    Err(e) => {
                        traj.failure = Some(format!("step {step}: {e}"));
                        break;
                    }
                };
                let cumulative_shots = traj.total_shots() + evaluations as u64 * shots_per_eval;
                traj.points.push(TrajectoryPoint {
                    step,
                    time: spec.time(step),
                    params,
                    echo,
                    cumulative_shots,
                    cost,
                    converged: true,
                });
            }
            Err(e) => {
                traj.failure = Some(format!("step {step}: {e}"));
                break;
            }
        }
    }
    Ok(traj)
}

fn stochastic_step(
    spec: &QuenchSpec,
    traj: &Trajectory,
    opts: &StochasticOptions,
    schedule: &mut SpsaSchedule,
    rngs: &mut RunRngs,
    step: usize,
) -> Result<(AnsatzParams, f64, usize)> {
    let n = traj.points.len();
    let current = traj.points[n - 1].params.clone();
    let bootstrap = opts.init == InitScheme::Extrapolate && n < 3;
    let seed = match opts.init {
        InitScheme::Random => current.with_angles(
            (0..current.angles().len())
                .map(|_| rngs.optimizer.random_range(-PI..PI))
                .collect(),
        )?,
        InitScheme::Copy => current.clone(),
        InitScheme::Extrapolate if bootstrap => current.clone(),
        InitScheme::Extrapolate => extrapolate(&traj.points[n - 2].params, &current)?,
    };
    // SPSA hands each evaluation a seed from the optimizer stream; the shot
    // draw itself uses the next value of the sampling stream instead, so
    // sampling noise and perturbation directions vary independently.
    let sampling = std::cell::RefCell::new(&mut rngs.sampling);
    let cost = |x: &[f64], _: u64| {
        let s = sampling.borrow_mut().random();
        sampled_cost(&current, spec, opts.shots_per_eval, x, s)
    };
    let mut evaluations = 0;
    if step == 1 {
        if let Some(max_move) = opts.calibrate_move {
            let (a, used) = calibrate_gain(
                cost,
                seed.angles(),
                schedule,
                opts.calibration_samples,
                max_move,
                rngs.optimizer.random(),
            )?;
            schedule.a = a;
            evaluations += used;
        }
    }
    let this_schedule = if bootstrap {
        schedule.scaled(opts.bootstrap_factor)
    } else {
        *schedule
    };
    let result = spsa_optimize(cost, seed.angles(), &this_schedule, rngs.optimizer.random())?;
    evaluations += result.evaluations;
    let params = unwrap_to(&current.with_angles(result.x)?, &current)?;
    let final_cost = result.history.last().copied().unwrap_or(f64::NAN);
    Ok((params, final_cost, evaluations))
}

/// Per-time statistics over independent stochastic runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// Unbiased sample variance of the echo.
    pub variance: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub runs: Vec<Trajectory>,
}

impl EnsembleStats {
    /// `max − min` of the echo at each time.
    pub fn envelope_width(&self) -> Vec<f64> {
        self.max
            .iter()
            .zip(&self.min)
            .map(|(hi, lo)| hi - lo)
            .collect()
    }
}

/// Runs [`evolve_stochastic`] once per seed (in parallel) and aggregates
/// the echo. Statistics stop at the shortest run.
pub fn ensemble_run(
    spec: &QuenchSpec,
    ground: &AnsatzParams,
    opts: &StochasticOptions,
    seeds: &[u64],
) -> Result<EnsembleStats> {
    if seeds.len() < 2 {
        return invalid("an ensemble needs at least two runs");
    }
    let runs = seeds
        .par_iter()
        .map(|&seed| evolve_stochastic(spec, ground, &StochasticOptions { seed, ..*opts }))
        .collect::<Result<Vec<_>>>()?;
    let len = runs.iter().map(|r| r.points.len()).min().unwrap_or(0);
    let m = runs.len() as f64;
    let (mut mean, mut variance, mut min, mut max) = (vec![], vec![], vec![], vec![]);
    for i in 0..len {
        let xs: Vec<f64> = runs.iter().map(|r| r.points[i].echo).collect();
        let mu = xs.iter().sum::<f64>() / m;
        mean.push(mu);
        variance.push(xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (m - 1.0));
        min.push(xs.iter().copied().fold(f64::INFINITY, f64::min));
        max.push(xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    let times = runs[0].points[..len].iter().map(|p| p.time).collect();
    Ok(EnsembleStats {
        times,
        mean,
        variance,
        min,
        max,
        runs,
    })
}
