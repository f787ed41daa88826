use rand::Rng;

use super::{c, CMatrix, C64};
use crate::error::{invalid, Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 16;

/// Pure state of `n_qubits` qubits, qubit 0 most significant.
///
/// Gate application preserves the norm. [`StateVector::project`] does not:
/// it keeps the unnormalised branch so that its squared norm is the
/// probability of the outcomes selected so far.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let mut amps = vec![c(0.0, 0.0); 1 << n_qubits];
        amps[0] = c(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Normalised state from raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return invalid(format!("amplitude count {len} is not a power of two"));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_size(n_qubits)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return invalid("amplitudes must have finite nonzero norm");
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns a copy with `gate` applied to `targets`; `targets[0]` is the
    /// most significant qubit of the gate's own index.
    pub fn apply_gate(&self, gate: &CMatrix, targets: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_in_place(gate, targets)?;
        Ok(out)
    }

    pub fn apply_gate_in_place(&mut self, gate: &CMatrix, targets: &[usize]) -> Result<()> {
        let k = targets.len();
        let dim = 1usize << k;
        if k == 0 || gate.nrows() != dim || gate.ncols() != dim {
            return invalid(format!(
                "gate of size {}x{} does not match {} target(s)",
                gate.nrows(),
                gate.ncols(),
                k
            ));
        }
        for (i, &q) in targets.iter().enumerate() {
            self.check_qubit(q)?;
            if targets[..i].contains(&q) {
                return invalid(format!("duplicate target qubit {q}"));
            }
        }
        let masks: Vec<usize> = targets.iter().map(|&q| self.bit(q)).collect();
        let target_mask: usize = masks.iter().sum();
        // Offset of each gate basis state inside the full index.
        let offsets: Vec<usize> = (0..dim)
            .map(|j| {
                (0..k)
                    .filter(|&t| j >> (k - 1 - t) & 1 == 1)
                    .map(|t| masks[t])
                    .sum()
            })
            .collect();
        let mut local = vec![c(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & target_mask != 0 {
                continue;
            }
            for (j, off) in offsets.iter().enumerate() {
                local[j] = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = c(0.0, 0.0);
                for (col, l) in local.iter().enumerate() {
                    acc += gate[(r, col)] * l;
                }
                self.amps[base + off] = acc;
            }
        }
        Ok(())
    }

    /// Probability that measuring `qubit` yields `outcome`, relative to the
    /// current norm.
    pub fn outcome_probability(&self, qubit: usize, outcome: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        let total = self.norm_sqr();
        if !(total > 0.0) {
            return Err(Error::DegenerateEstimate("state has zero norm".into()));
        }
        Ok(self.branch_weight(qubit, outcome) / total)
    }

    /// Zeroes every amplitude inconsistent with `qubit = outcome` and returns
    /// the squared norm of what remains. No renormalisation.
    pub fn project(&mut self, qubit: usize, outcome: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = self.bit(qubit);
        let want = outcome_bit(outcome)?;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) != want {
                *a = c(0.0, 0.0);
            }
        }
        Ok(self.norm_sqr())
    }

    /// Samples a projective measurement of `qubit`, collapses and
    /// renormalises the state, and returns the outcome.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<u8> {
        let p1 = self.outcome_probability(qubit, 1)?;
        let outcome = u8::from(rng.random::<f64>() < p1);
        let kept = self.project(qubit, outcome)?;
        let scale = 1.0 / kept.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(outcome)
    }

    /// Maps a qubit known to be in a definite state back to `|0⟩`.
    pub fn reset_from(&mut self, qubit: usize, outcome: u8) -> Result<()> {
        self.check_qubit(qubit)?;
        if outcome_bit(outcome)? {
            let bit = self.bit(qubit);
            for i in 0..self.amps.len() {
                if i & bit == 0 {
                    self.amps.swap(i, i | bit);
                }
            }
        }
        Ok(())
    }

    fn branch_weight(&self, qubit: usize, outcome: u8) -> f64 {
        let bit = self.bit(qubit);
        let want = outcome != 0;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & bit != 0) == want)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return invalid(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            ));
        }
        Ok(())
    }
}

fn outcome_bit(outcome: u8) -> Result<bool> {
    match outcome {
        0 => Ok(false),
        1 => Ok(true),
        _ => invalid(format!("measurement outcome must be 0 or 1, got {outcome}")),
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return invalid("register needs at least one qubit");
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "{n_qubits} qubits exceeds the limit of {MAX_QUBITS}"
        )));
    }
    Ok(())
}
