//! Mixed transfer matrices, fidelity densities and power-method estimates.
//!
//! Bond operators are vectorised row-major, `vec(M)[2i + j] = M[i][j]`, so
//! that `(A ⊗ conj(B))·vec(M) = vec(A·M·B†)`. Acting on column vectors, a
//! transfer matrix is therefore the channel `M ↦ Σ_s A^s M B^s†`, which
//! carries the auxiliary state from one site to the next:
//!
//! ```text
//!        ┌───┐        ┌───┐
//!  out ──┤ A ├── in   │   │      column side: incoming bond (burn-in end)
//!        └─┬─┘        │ E │      row side:    outgoing bond (open end)
//!          s          │   │
//!        ┌─┴─┐        │   │
//!  out ──┤ B*├── in   └───┘
//!        └───┘
//! ```
//!
//! For a left-isometric tensor the identity is a row (left) fixed point of
//! `E_{A,A}`: tracing out the final auxiliary state is what the open,
//! unmeasured auxiliary legs of the cost circuit do.
//!
//! With an evolution gate the unit cell is two sites `(s1, s2)`, cell index
//! `2·s1 + s2`, and cell matrix `K^{s1 s2} = A^{s2}·A^{s1}` (site 1 acts
//! first). A first-order gate `W` sits on the cell:
//! `E_W = Σ_{t,s} W[t][s] K^s ⊗ conj(K_B^t)`, a 4×4 matrix whose
//! eigenvalues are per two sites.
//!
//! For second order the cell carries `W_o` on ket and `W_o†` on bra, and the
//! even gate straddling neighbouring cells is split as
//! `W_e = Σ_m P_m ⊗ Q_m` with `P_m = |a⟩⟨a'|`, `m = 2a + a'`. The MPO index
//! `m` becomes a fourth-dimensional factor in front of the bond space,
//! giving a 16×16 matrix.

use crate::ansatz::{params_tensor, AnsatzParams, MpsTensor};
use crate::error::{invalid, Error, Result};
use crate::qcore::{c, leading_eig, CMatrix, CVector, C64};

/// Evolution gate inserted between ket and bra.
#[derive(Debug, Clone, PartialEq)]
pub enum Insertion {
    /// Plain overlap, one site per application.
    None,
    /// One 4×4 gate per two-site cell.
    FirstOrder(CMatrix),
    /// `W_o` inside each cell and `W_e` straddling neighbouring cells.
    SecondOrder { w_odd: CMatrix, w_even: CMatrix },
}

impl Insertion {
    pub fn label(&self) -> &'static str {
        match self {
            Insertion::None => "identity",
            Insertion::FirstOrder(_) => "first-order",
            Insertion::SecondOrder { .. } => "second-order",
        }
    }

    /// Sites covered by one application of the transfer matrix.
    pub fn sites_per_application(&self) -> usize {
        match self {
            Insertion::None => 1,
            _ => 2,
        }
    }
}

/// A transfer matrix and the gate it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTransfer {
    pub matrix: CMatrix,
    pub insertion: Insertion,
}

/// Boundary vectors for the power method: the open end is used as a row
/// vector, the burn-in end as a column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointPair {
    pub open_end: CVector,
    pub burn_in: CVector,
}

/// `vec(I₂)`.
pub fn vec_identity() -> CVector {
    CVector::from_vec(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
}

/// Two-site cell matrices `K^{s1 s2} = A^{s2} A^{s1}`.
pub fn cell_matrices(a: &MpsTensor) -> [CMatrix; 4] {
    let s = a.slices();
    [&s[0] * &s[0], &s[1] * &s[0], &s[0] * &s[1], &s[1] * &s[1]]
}

fn check_gate(name: &str, g: &CMatrix) -> Result<()> {
    if g.nrows() != 4 || g.ncols() != 4 {
        return invalid(format!(
            "{name} must be 4x4, got {}x{}",
            g.nrows(),
            g.ncols()
        ));
    }
    Ok(())
}

/// Transfer matrix between ket `a` and bra `b` with an optional gate.
pub fn transfer_matrix(
    a: &MpsTensor,
    b: &MpsTensor,
    insertion: &Insertion,
) -> Result<MixedTransfer> {
    let matrix = match insertion {
        Insertion::None => plain(a, b),
        Insertion::FirstOrder(w) => {
            check_gate("first-order gate", w)?;
            gated_cell(&cell_matrices(a), &cell_matrices(b), w)
        }
        Insertion::SecondOrder { w_odd, w_even } => {
            check_gate("odd gate", w_odd)?;
            check_gate("even gate", w_even)?;
            second_order(a, b, w_odd, w_even)
        }
    };
    Ok(MixedTransfer {
        matrix,
        insertion: insertion.clone(),
    })
}

fn plain(a: &MpsTensor, b: &MpsTensor) -> CMatrix {
    let (sa, sb) = (a.slices(), b.slices());
    sa[0].kronecker(&sb[0].conjugate()) + sa[1].kronecker(&sb[1].conjugate())
}

fn gated_cell(ka: &[CMatrix; 4], kb: &[CMatrix; 4], w: &CMatrix) -> CMatrix {
    let kb_conj: Vec<CMatrix> = kb.iter().map(|k| k.conjugate()).collect();
    let mut e = CMatrix::zeros(4, 4);
    for s in 0..4 {
        let mut bra = CMatrix::zeros(2, 2);
        for (t, kbt) in kb_conj.iter().enumerate() {
            bra += kbt * w[(t, s)];
        }
        e += ka[s].kronecker(&bra);
    }
    e
}

/// Cell matrices with a 4×4 gate applied: `Σ_s G[t][s] K^s`.
fn gate_cells(k: &[CMatrix; 4], g: &CMatrix) -> [CMatrix; 4] {
    std::array::from_fn(|t| (0..4).fold(CMatrix::zeros(2, 2), |acc, s| acc + &k[s] * g[(t, s)]))
}

fn second_order(a: &MpsTensor, b: &MpsTensor, w_odd: &CMatrix, w_even: &CMatrix) -> CMatrix {
    let ka = gate_cells(&cell_matrices(a), w_odd);
    let kb = gate_cells(&cell_matrices(b), &w_odd.adjoint());
    // Split W_e[(a b),(a' b')] = Σ_m P_m[a][a'] Q_m[b][b'] with P_m = |a⟩⟨a'|.
    let q: Vec<CMatrix> = (0..4)
        .map(|m| {
            let (x, xp) = (m / 2, m % 2);
            CMatrix::from_fn(2, 2, |bb, bp| w_even[(2 * x + bb, 2 * xp + bp)])
        })
        .collect();
    let p: Vec<CMatrix> = (0..4)
        .map(|m| {
            let mut pm = CMatrix::zeros(2, 2);
            pm[(m / 2, m % 2)] = c(1., 0.);
            pm
        })
        .collect();
    let mut e = CMatrix::zeros(16, 16);
    for (m_in, q_m) in q.iter().enumerate() {
        for (n_out, p_n) in p.iter().enumerate() {
            // Q_{m_in} acts on site 1 of this cell, P_{n_out} on site 2.
            let g = q_m.kronecker(p_n);
            let block = gated_cell(&ka, &kb, &g);
            e.view_mut((4 * n_out, 4 * m_in), (4, 4)).copy_from(&block);
        }
    }
    e
}

/// Leading eigenvalue of a transfer matrix.
pub fn fidelity_density(e: &MixedTransfer) -> Result<C64> {
    Ok(leading_eig(&e.matrix)?.value)
}

/// `|λ|` of the plain mixed transfer matrix between two tensors.
pub fn overlap_density(a: &MpsTensor, b: &MpsTensor) -> Result<f64> {
    Ok(leading_eig(&plain(a, b))?.value.norm())
}

/// Boundary vectors built from the current state: the open end is
/// `vec(I)`, the burn-in end two applications of `E_{U,U}` to `vec(I)`.
pub fn approx_fixed_points(params_t: &AnsatzParams) -> FixedPointPair {
    let a = params_tensor(params_t);
    let e = plain(&a, &a);
    let burn_in = &e * (&e * vec_identity());
    FixedPointPair {
        open_end: vec_identity(),
        burn_in,
    }
}

/// `C_n / C_{n−1}` with `C_n = open_endᵀ·Eⁿ·burn_in` (no conjugation).
pub fn power_method_ratio(e: &MixedTransfer, fp: &FixedPointPair, n: usize) -> Result<C64> {
    let (prev, next) = power_method_terms(e, fp, n)?;
    Ok(next / prev)
}

/// `(C_{n−1}, C_n)` with `C_k = lᵀ E^k r`; errors if `C_{n−1}` vanishes.
pub fn power_method_terms(e: &MixedTransfer, fp: &FixedPointPair, n: usize) -> Result<(C64, C64)> {
    if n == 0 {
        return invalid("power-method order must be at least 1");
    }
    let dim = e.matrix.nrows();
    if fp.open_end.len() != dim || fp.burn_in.len() != dim {
        return invalid(format!(
            "fixed points of length {}/{} do not match a {dim}x{dim} transfer matrix",
            fp.open_end.len(),
            fp.burn_in.len()
        ));
    }
    let mut v = fp.burn_in.clone();
    for _ in 0..n - 1 {
        v = &e.matrix * v;
    }
    let prev = fp.open_end.transpose() * &v;
    let next = fp.open_end.transpose() * (&e.matrix * &v);
    let (prev, next) = (prev[(0, 0)], next[(0, 0)]);
    let scale = fp.open_end.norm()
        * fp.burn_in.norm()
        * crate::qcore::max_abs(&e.matrix).max(1.0).powi(n as i32 - 1);
    if !(prev.norm() > 1e-14 * scale) {
        return Err(Error::DegenerateEstimate(format!(
            "boundary overlap at order {} vanishes ({:.3e})",
            n - 1,
            prev.norm()
        )));
    }
    Ok((prev, next))
}

#[cfg(test)]
mod tests;
