use super::{exact_success_probability, CostCircuit, Op};
use crate::error::{invalid, Result};
use crate::qcore::StateVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// Shot-noise estimate of a success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotEstimate {
    pub p_hat: f64,
    pub shots: u64,
    pub successes: u64,
    /// `sqrt(p̂(1 − p̂)/shots)`.
    pub std_err: f64,
    pub seed: u64,
}

impl ShotEstimate {
    fn new(successes: u64, shots: u64, seed: u64) -> Self {
        let p_hat = successes as f64 / shots as f64;
        Self {
            p_hat,
            shots,
            successes,
            std_err: (p_hat * (1.0 - p_hat) / shots as f64).sqrt(),
            seed,
        }
    }
}

/// Draws `Binomial(shots, p)` with a seeded generator.
pub fn sample_probability(p: f64, shots: u64, seed: u64) -> Result<ShotEstimate> {
    if shots == 0 {
        return invalid("shots must be positive");
    }
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("probability {p} outside [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successes = Binomial::new(shots, p)
        .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?
        .sample(&mut rng);
    Ok(ShotEstimate::new(successes, shots, seed))
}

/// Exact simulation followed by one binomial draw. Statistically identical
/// to running the circuit `shots` times.
pub fn sample(circ: &CostCircuit, shots: u64, seed: u64) -> Result<ShotEstimate> {
    sample_probability(exact_success_probability(circ)?, shots, seed)
}

/// Runs every shot separately with sampled mid-circuit measurements and
/// resets. Slow; used to audit [`sample`].
pub fn sample_per_shot(circ: &CostCircuit, shots: u64, seed: u64) -> Result<ShotEstimate> {
    if shots == 0 {
        return invalid("shots must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut successes = 0;
    for _ in 0..shots {
        let mut state = StateVector::zero(circ.qubit_count())?;
        let mut ok = true;
        for op in circ.ops() {
            match op {
                Op::Gate {
                    matrix, targets, ..
                } => state.apply_gate_in_place(matrix, targets)?,
                Op::MeasureReset { qubit } => {
                    let outcome = state.measure(*qubit, &mut rng)?;
                    ok &= outcome == 0;
                    state.reset_from(*qubit, outcome)?;
                }
            }
        }
        for &q in circ.measured_qubits() {
            ok &= state.measure(q, &mut rng)? == 0;
        }
        successes += u64::from(ok);
    }
    Ok(ShotEstimate::new(successes, shots, seed))
}
