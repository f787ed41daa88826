//! Dense complex linear algebra and a small statevector simulator.
//!
//! Everything here works on [`CMatrix`] (a dynamically sized complex matrix)
//! and is sized for the tiny objects of this crate: 2×2 and 4×4 gates,
//! 4×4 and 16×16 transfer matrices, registers of at most [`MAX_QUBITS`]
//! qubits.
//!
//! Qubit ordering is fixed crate-wide: qubit 0 is the most significant bit
//! of a basis-state index, so `|q0 q1 … q(n-1)⟩` has index
//! `q0·2^(n-1) + … + q(n-1)`. Kronecker products follow the same order,
//! `A ⊗ B` acts with `A` on the lower-numbered qubit.

mod eig;
mod gates;
mod linalg;
mod statevector;

pub use eig::{eigenvalues, leading_eig, Eigenpair};
pub(crate) use gates::rot;
pub use gates::{pauli, rot_gate, Axis};
pub(crate) use linalg::expm_hermitian;
pub use linalg::{
    hermitian_error, identity, kron, max_abs, polar_unitary, two_site_exp, unitarity_error,
    HERMITIAN_TOL, UNITARY_TOL,
};
pub use statevector::{StateVector, MAX_QUBITS};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
