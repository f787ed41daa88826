//! Time evolution drivers: ground-state preparation, the exact-in-ansatz
//! reference, and stochastic SPSA evolution on sampled circuit costs.
//!
//! Each time step maximises the overlap between a candidate state and one
//! Trotter step applied to the current state. The exact reference does this
//! with the dense leading eigenvalue and BFGS; the stochastic driver only
//! sees binomially sampled success probabilities of the cost circuit and
//! refines a seed (random, copy or linear extrapolation) with a handful of
//! SPSA iterations.

mod exact;
mod spsa;
mod stochastic;

pub use exact::{
    energy_density, evolve_exact_from, evolve_exact_in_ansatz, ground_state_optimize,
    ground_state_optimize_seeded, Boundary, ExactObjective, ExactOptions,
};
pub use spsa::{calibrate_gain, spsa_optimize, SpsaResult, SpsaSchedule};
pub use stochastic::{
    ensemble_run, evolve_stochastic, EnsembleStats, StochasticOptions, DEFAULT_GAIN,
};

use crate::ansatz::{nearest_branch, params_tensor, AnsatzParams};
use crate::error::{invalid, Error, Result};
use crate::tfim::QuenchSpec;
use crate::transfer::overlap_density;

/// `−log|λ|²` of the plain mixed transfer matrix: the per-site Loschmidt
/// rate between the initial and the evolved state.
pub fn echo_density(params_0: &AnsatzParams, params_t: &AnsatzParams) -> Result<f64> {
    let lambda = overlap_density(&params_tensor(params_0), &params_tensor(params_t))?;
    if !(lambda > 0.0) {
        return Err(Error::DegenerateEstimate(
            "states are orthogonal per site".into(),
        ));
    }
    Ok(-2.0 * lambda.ln())
}

/// `2·curr − prev`, componentwise on unwrapped angles.
pub fn extrapolate(theta_prev: &AnsatzParams, theta_curr: &AnsatzParams) -> Result<AnsatzParams> {
    if theta_prev.template() != theta_curr.template() {
        return invalid("cannot extrapolate between different templates");
    }
    let next = theta_prev
        .angles()
        .iter()
        .zip(theta_curr.angles())
        .map(|(p, c)| 2.0 * c - p)
        .collect();
    theta_curr.with_angles(next)
}

/// Moves every angle onto the `2π` branch nearest to `reference`.
pub fn unwrap_to(params: &AnsatzParams, reference: &AnsatzParams) -> Result<AnsatzParams> {
    if params.template() != reference.template() {
        return invalid("cannot unwrap between different templates");
    }
    params.with_angles(
        params
            .angles()
            .iter()
            .zip(reference.angles())
            .map(|(a, r)| nearest_branch(*a, *r))
            .collect(),
    )
}

/// Root-mean-square difference of two equally long series.
pub fn rms_deviation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return invalid(format!(
            "series lengths {} and {} differ or are empty",
            a.len(),
            b.len()
        ));
    }
    Ok((a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt())
}

/// How the seed for each time step is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitScheme {
    /// Uniform random angles every step.
    Random,
    /// The current parameters.
    Copy,
    /// Linear extrapolation from the last two steps.
    Extrapolate,
}

impl InitScheme {
    pub fn name(self) -> &'static str {
        match self {
            InitScheme::Random => "random",
            InitScheme::Copy => "copy",
            InitScheme::Extrapolate => "extrapolate",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            InitScheme::Random,
            InitScheme::Copy,
            InitScheme::Extrapolate,
        ]
        .into_iter()
        .find(|s| s.name() == name)
    }
}

/// One recorded time step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub time: f64,
    pub params: AnsatzParams,
    pub echo: f64,
    pub cumulative_shots: u64,
    /// `1 − |λ|` for the exact driver, final sampled `1 − p̂` otherwise.
    pub cost: f64,
    pub converged: bool,
}

/// A time series of states starting from the prepared ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub spec: QuenchSpec,
    pub seed: u64,
    pub init: Option<InitScheme>,
    pub points: Vec<TrajectoryPoint>,
    /// Set when a step failed and the run stopped early.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none() && self.points.len() == self.spec.n_steps() + 1
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.time).collect()
    }

    pub fn echoes(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.echo).collect()
    }

    pub fn total_shots(&self) -> u64 {
        self.points.last().map_or(0, |p| p.cumulative_shots)
    }
}

#[cfg(test)]
mod tests;
