//! Simultaneous-perturbation stochastic approximation.

use crate::error::{invalid, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gain sequences `a_k = a/(k + 1 + A)^alpha`, `c_k = c/(k + 1)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpsaSchedule {
    pub a: f64,
    pub c: f64,
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub steps: usize,
}

impl SpsaSchedule {
    /// Standard exponents, `A` at a tenth of the budget, `c = 0.1`.
    pub fn standard(a: f64, steps: usize) -> Self {
        Self {
            a,
            c: 0.1,
            big_a: 0.1 * steps as f64,
            alpha: 0.602,
            gamma: 0.101,
            steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return invalid(format!("spsa alpha {} outside (0.5, 1]", self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma <= 0.5) {
            return invalid(format!("spsa gamma {} outside (0, 0.5]", self.gamma));
        }
        for (name, v) in [("a", self.a), ("c", self.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("spsa {name} must be positive, got {v}"));
            }
        }
        if !(self.big_a >= 0.0 && self.big_a.is_finite()) {
            return invalid(format!("spsa A must be non-negative, got {}", self.big_a));
        }
        Ok(())
    }

    /// Same gains over `factor` times as many iterations.
    pub fn scaled(&self, factor: usize) -> Self {
        Self {
            steps: self.steps * factor,
            big_a: self.big_a * factor as f64,
            ..*self
        }
    }

    pub fn a_k(&self, k: usize) -> f64 {
        self.a / (k as f64 + 1.0 + self.big_a).powf(self.alpha)
    }

    pub fn c_k(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpsaResult {
    /// Final iterate.
    pub x: Vec<f64>,
    /// Mean of the two perturbed evaluations at each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

fn rademacher(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Minimises a noisy cost. `cost(x, seed)` receives a fresh seed for every
/// evaluation, drawn from a generator seeded with `rng_seed`.
///
/// Returns the final iterate: the perturbed evaluations never sample the
/// iterate itself, and picking the lowest noisy value would select noise.
pub fn spsa_optimize<F>(
    mut cost: F,
    seed_params: &[f64],
    schedule: &SpsaSchedule,
    rng_seed: u64,
) -> Result<SpsaResult>
where
    F: FnMut(&[f64], u64) -> Result<f64>,
{
    schedule.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = seed_params.len();
    let mut x = seed_params.to_vec();
    let mut history = Vec::with_capacity(schedule.steps);
    let mut probe = vec![0.0; n];
    for k in 0..schedule.steps {
        let (ak, ck) = (schedule.a_k(k), schedule.c_k(k));
        let delta = rademacher(&mut rng, n);
        for i in 0..n {
            probe[i] = x[i] + ck * delta[i];
        }
        let plus = cost(&probe, rng.random())?;
        for i in 0..n {
            probe[i] = x[i] - ck * delta[i];
        }
        let minus = cost(&probe, rng.random())?;
        let slope = (plus - minus) / (2.0 * ck);
        for i in 0..n {
            x[i] -= ak * slope * delta[i];
        }
        history.push(0.5 * (plus + minus));
    }
    Ok(SpsaResult {
        x,
        history,
        evaluations: 2 * schedule.steps,
    })
}

/// Caps `schedule.a` so that the first iteration moves each angle by at
/// most about `max_move` radians, judged from `samples` gradient probes at `x`.
///
/// Returns the gain and the number of cost evaluations spent.
pub fn calibrate_gain<F>(
    mut cost: F,
    x: &[f64],
    schedule: &SpsaSchedule,
    samples: usize,
    max_move: f64,
    rng_seed: u64,
) -> Result<(f64, usize)>
where
    F: FnMut(&[f64], u64) -> Result<f64>,
{
    if samples == 0 || !(max_move > 0.0) {
        return invalid("calibration needs samples ≥ 1 and a positive move");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let c0 = schedule.c_k(0);
    let mut mean_slope = 0.0;
    let mut probe = x.to_vec();
    for _ in 0..samples {
        let delta = rademacher(&mut rng, x.len());
        probe
            .iter_mut()
            .zip(x)
            .zip(&delta)
            .for_each(|((p, xi), d)| *p = xi + c0 * d);
        let plus = cost(&probe, rng.random())?;
        probe
            .iter_mut()
            .zip(x)
            .zip(&delta)
            .for_each(|((p, xi), d)| *p = xi - c0 * d);
        let minus = cost(&probe, rng.random())?;
        mean_slope += ((plus - minus) / (2.0 * c0)).abs() / samples as f64;
    }
    let a = if mean_slope > 0.0 {
        (max_move * (1.0 + schedule.big_a).powf(schedule.alpha) / mean_slope).min(schedule.a)
    } else {
        schedule.a
    };
    Ok((a, 2 * samples))
}
