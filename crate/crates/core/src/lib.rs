//! Variational time evolution of a two-qubit circuit iMPS through the
//! dynamical phase transition of the transverse-field Ising chain.
//!
//! Modules, bottom up:
//!
//! * [`qcore`]: complex linear algebra and a statevector simulator.
//! * [`ansatz`]: parameter templates, MPS tensors, gauge tools.
//! * [`tfim`]: Hamiltonian, Trotter gates, exact echo oracles.
//! * [`transfer`]: mixed transfer matrices and power-method estimates.
//! * [`circuits`]: the sequential cost circuit and its sampling.
//! * [`evolve`]: optimizers and time-evolution drivers.

// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod circuits;
pub mod error;
pub mod evolve;
mod optim;
pub mod qcore;
pub mod tfim;
pub mod transfer;

pub use error::{Error, Result};
pub use qcore::{CMatrix, CVector, C64};
