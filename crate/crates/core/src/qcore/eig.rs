use nalgebra::Schur;

use super::{c, CMatrix, CVector, C64};
use crate::error::{invalid, Error, Result};

/// Relative residual accepted by [`leading_eig`], `‖m·v − λv‖ / ‖m‖`.
const RESIDUAL_TOL: f64 = 1e-11;
const POWER_SWEEPS: usize = 8;
const SQUARINGS: usize = 11;

/// Eigenvalue, unit eigenvector and absolute residual `‖m·v − λv‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: C64,
    pub vector: CVector,
    pub residual: f64,
}

/// All eigenvalues, sorted by decreasing modulus.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    check_square(m)?;
    let n = m.nrows();
    let schur =
        Schur::try_new(m.clone(), 1e-15, 10_000 * n).ok_or_else(|| Error::NumericFailure {
            message: "Schur iteration did not converge".into(),
            residual: f64::NAN,
        })?;
    let (_, t) = schur.unpack();
    let mut vals: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    vals.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(vals)
}

/// Eigenpair of largest eigenvalue modulus.
///
/// Power iteration, accelerated by repeated squaring, does the work when the
/// spectral gap allows; otherwise the eigenvalue comes from a Schur
/// decomposition and the vector from inverse iteration. Ties in modulus are
/// resolved towards the first eigenvalue in Schur order.
pub fn leading_eig(m: &CMatrix) -> Result<Eigenpair> {
    check_square(m)?;
    let scale = frobenius(m);
    if !scale.is_finite() {
        return invalid("matrix has non-finite entries");
    }
    if scale == 0.0 {
        return invalid("leading eigenpair of the zero matrix is undefined");
    }
    if let Some(pair) = power_iteration(m, scale) {
        return Ok(pair);
    }
    let lambda = eigenvalues(m)?[0];
    let pair = inverse_iteration(m, lambda, scale);
    if pair.residual <= 1e-9 * scale {
        Ok(pair)
    } else {
        Err(Error::NumericFailure {
            message: "leading eigenvector did not converge".into(),
            residual: pair.residual,
        })
    }
}

fn check_square(m: &CMatrix) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return invalid(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        ));
    }
    Ok(())
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn rayleigh(m: &CMatrix, v: &CVector) -> (C64, f64) {
    let mv = m * v;
    let lambda = v.dotc(&mv) / v.dotc(v);
    let residual = (mv - v * lambda).norm();
    (lambda, residual)
}

/// Generic start vector with no special alignment to any basis direction.
fn start_vector(n: usize) -> CVector {
    let v = CVector::from_fn(n, |i, _| {
        c(1.0 + 0.37 * i as f64, 0.21 * (i as f64 + 1.0).sqrt())
    });
    v.normalize()
}

fn power_iteration(m: &CMatrix, scale: f64) -> Option<Eigenpair> {
    let mut p = m / c(scale, 0.0);
    let mut v = start_vector(m.nrows());
    for _ in 0..=SQUARINGS {
        for _ in 0..POWER_SWEEPS {
            let w = &p * &v;
            let norm = w.norm();
            if !(norm > 1e-300) || !norm.is_finite() {
                return None;
            }
            v = w / c(norm, 0.0);
        }
        let (value, residual) = rayleigh(m, &v);
        if residual <= RESIDUAL_TOL * scale {
            return Some(Eigenpair {
                value,
                vector: v,
                residual,
            });
        }
        p = &p * &p;
        let pmax = super::max_abs(&p);
        if !(pmax > 1e-300) {
            return None;
        }
        p /= c(pmax, 0.0);
    }
    None
}

fn inverse_iteration(m: &CMatrix, lambda: C64, scale: f64) -> Eigenpair {
    let n = m.nrows();
    let shift = lambda + c(1e-10 * scale, 1e-10 * scale);
    let shifted = m - CMatrix::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut v = start_vector(n);
    let mut best = {
        let (value, residual) = rayleigh(m, &v);
        Eigenpair {
            value,
            vector: v.clone(),
            residual,
        }
    };
    for _ in 0..6 {
        let Some(w) = lu.solve(&v) else { break };
        let norm = w.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            break;
        }
        v = w / c(norm, 0.0);
        let (value, residual) = rayleigh(m, &v);
        if residual < best.residual {
            best = Eigenpair {
                value,
                vector: v.clone(),
                residual,
            };
        }
    }
    best
}
