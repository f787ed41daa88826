use super::{c, CMatrix};
use crate::error::{invalid, Result};

/// Rotation axis of a single-qubit gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

/// Pauli matrix for the given axis.
pub fn pauli(axis: Axis) -> CMatrix {
    let (a, b, cc, d) = match axis {
        Axis::X => (c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
        Axis::Y => (c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
        Axis::Z => (c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
    };
    CMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

/// `exp(-i·angle·P/2)` for the Pauli `P` along `axis`.
pub fn rot_gate(axis: Axis, angle: f64) -> Result<CMatrix> {
    if !angle.is_finite() {
        return invalid(format!("rotation angle must be finite, got {angle}"));
    }
    let (s, co) = (angle / 2.0).sin_cos();
    let m = match axis {
        Axis::X => [c(co, 0.), c(0., -s), c(0., -s), c(co, 0.)],
        Axis::Y => [c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)],
        Axis::Z => [c(co, -s), c(0., 0.), c(0., 0.), c(co, s)],
    };
    Ok(CMatrix::from_row_slice(2, 2, &m))
}

/// Infallible rotation for angles already known to be finite.
pub(crate) fn rot(axis: Axis, angle: f64) -> CMatrix {
    let (s, co) = (angle / 2.0).sin_cos();
    let m = match axis {
        Axis::X => [c(co, 0.), c(0., -s), c(0., -s), c(co, 0.)],
        Axis::Y => [c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)],
        Axis::Z => [c(co, -s), c(0., 0.), c(0., 0.), c(co, s)],
    };
    CMatrix::from_row_slice(2, 2, &m)
}
