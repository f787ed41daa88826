use super::{c, CMatrix};
use crate::error::{invalid, Result};

/// Tolerance for a matrix to count as unitary, `‖U†U − I‖_max`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for a matrix to count as Hermitian, `‖H − H†‖_max`.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖U†U − I‖_max`, or infinity for a non-square input.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

/// `‖H − H†‖_max`, or infinity for a non-square input.
pub fn hermitian_error(h: &CMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(h - h.adjoint()))
}

/// `exp(−i·h·tau)` for a Hermitian 4×4 two-site generator.
pub fn two_site_exp(h: &CMatrix, tau: f64) -> Result<CMatrix> {
    if h.nrows() != 4 || h.ncols() != 4 {
        return invalid(format!(
            "two-site generator must be 4x4, got {}x{}",
            h.nrows(),
            h.ncols()
        ));
    }
    let herr = hermitian_error(h);
    if herr > HERMITIAN_TOL {
        return invalid(format!(
            "two-site generator is not Hermitian (deviation {herr:.2e})"
        ));
    }
    if !tau.is_finite() {
        return invalid("evolution time must be finite");
    }
    Ok(expm_hermitian(h, tau))
}

/// `exp(−i·h·tau)` for any Hermitian `h` (not re-validated).
pub(crate) fn expm_hermitian(h: &CMatrix, tau: f64) -> CMatrix {
    (h * c(0.0, -tau)).exp()
}

/// Unitary factor `W` of the polar decomposition `M = W·P`.
///
/// Returns `None` when `M` is singular to working precision.
pub fn polar_unitary(m: &CMatrix) -> Option<CMatrix> {
    let svd = m.clone().svd(true, true);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if !(smax > 0.0) || smin < 1e-13 * smax {
        return None;
    }
    Some(svd.u? * svd.v_t?)
}
