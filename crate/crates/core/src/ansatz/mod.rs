//! Parameter templates for the two-qubit iMPS unitary, MPS tensors, and the
//! gauge and reparametrisation tools.
//!
//! The unitary `U` acts on `physical ⊗ auxiliary`. With the physical input
//! fixed to `|0⟩` it defines the bond-dimension-2 tensor
//! `A^s_{ab} = ⟨s, a| U |0, b⟩`, where `b` is the incoming and `a` the
//! outgoing auxiliary index.
//!
//! ## Reduced8 layout
//!
//! Gates in time order (left to right), entanglers are `exp(−iπ/4 Z⊗Z)`:
//!
//! ```text
//! phys: ─Rx(φ6)────────────────────■─Ry(φ2)─■─Ry(φ3)─
//! aux:  ─Rz(φ0)─Rx(φ1)─Rz(φ4)──────■─Rx(φ5)─■─Rx(φ7)─
//! ```
//!
//! The auxiliary leg opens with a ZXZ Euler chain and closes with `Rx(φ7)`,
//! so a bond rotation `Rx(θ)` can be absorbed exactly by shifting `φ7` and
//! re-decomposing the chain ([`x_gauge_rotate`]).
//!
//! ## Full15 layout
//!
//! A generic two-qubit unitary: ZXZ Euler blocks on both legs, the entangler
//! `exp(i(a·X⊗X + b·Y⊗Y + c·Z⊗Z))`, then another pair of Euler blocks.
//! Angles `0..3` and `3..6` are the input blocks (physical, auxiliary),
//! `6..9` the entangler, `9..12` and `12..15` the output blocks.

mod gauge;

pub use gauge::{
    align, angle_distance, match_gauge, match_gauge_tensors, reparametrise,
    reparametrise_best_effort, x_gauge_rotate, Alignment, GaugeMatch, Reparametrisation,
    ALIGN_MAX_DEFECT,
};

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::qcore::{c, kron, rot, unitarity_error, Axis, CMatrix, UNITARY_TOL};

/// Which gate layout the angles parametrise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    Reduced8,
    Full15,
}

impl Template {
    pub fn n_params(self) -> usize {
        match self {
            Template::Reduced8 => 8,
            Template::Full15 => 15,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Template::Reduced8 => "reduced8",
            Template::Full15 => "full15",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "reduced8" => Some(Template::Reduced8),
            "full15" => Some(Template::Full15),
            _ => None,
        }
    }
}

/// Angles (radians, unwrapped) for one template.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzParams {
    template: Template,
    angles: Vec<f64>,
}

impl AnsatzParams {
    pub fn new(template: Template, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != template.n_params() {
            return invalid(format!(
                "{} expects {} angles, got {}",
                template.name(),
                template.n_params(),
                angles.len()
            ));
        }
        if let Some(bad) = angles.iter().find(|a| !a.is_finite()) {
            return invalid(format!("angles must be finite, got {bad}"));
        }
        Ok(Self { template, angles })
    }

    pub fn zeros(template: Template) -> Self {
        Self {
            template,
            angles: vec![0.0; template.n_params()],
        }
    }

    pub fn template(&self) -> Template {
        self.template
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn into_angles(self) -> Vec<f64> {
        self.angles
    }

    /// Same template with new angles (length checked).
    pub fn with_angles(&self, angles: Vec<f64>) -> Result<Self> {
        Self::new(self.template, angles)
    }

    /// Angles mapped to `(−π, π]`, for output only.
    pub fn wrapped(&self) -> Vec<f64> {
        self.angles.iter().map(|&a| wrap_angle(a)).collect()
    }
}

/// Maps an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a - 2.0 * PI * (a / (2.0 * PI)).round();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Shifts `a` by a multiple of 2π to lie closest to `reference`.
pub fn nearest_branch(a: f64, reference: f64) -> f64 {
    a - 2.0 * PI * ((a - reference) / (2.0 * PI)).round()
}

/// Rank-3 tensor `A^s` stored as two 2×2 bond matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsTensor {
    a: [CMatrix; 2],
}

impl MpsTensor {
    /// Bond matrix for physical index `s`.
    pub fn slice(&self, s: usize) -> &CMatrix {
        &self.a[s]
    }

    pub fn slices(&self) -> &[CMatrix; 2] {
        &self.a
    }

    /// `‖Σ_s A^s† A^s − I‖_max`.
    pub fn isometry_error(&self) -> f64 {
        let m = self
            .a
            .iter()
            .map(|a| a.adjoint() * a)
            .fold(CMatrix::zeros(2, 2), |acc, x| acc + x);
        crate::qcore::max_abs(&(m - CMatrix::identity(2, 2)))
    }

    pub(crate) fn from_unitary_unchecked(u: &CMatrix) -> Self {
        let a0 = u.view((0, 0), (2, 2)).into_owned();
        let a1 = u.view((2, 0), (2, 2)).into_owned();
        Self { a: [a0, a1] }
    }
}

/// Builds the template's 4×4 unitary.
pub fn build_unitary(params: &AnsatzParams) -> CMatrix {
    let p = &params.angles;
    match params.template {
        Template::Reduced8 => {
            let chain = rot(Axis::Z, p[4]) * rot(Axis::X, p[1]) * rot(Axis::Z, p[0]);
            let zz = zz_quarter();
            kron(&rot(Axis::Y, p[3]), &rot(Axis::X, p[7]))
                * &zz
                * kron(&rot(Axis::Y, p[2]), &rot(Axis::X, p[5]))
                * &zz
                * kron(&rot(Axis::X, p[6]), &chain)
        }
        Template::Full15 => {
            let euler =
                |k: usize| rot(Axis::Z, p[k]) * rot(Axis::X, p[k + 1]) * rot(Axis::Z, p[k + 2]);
            kron(&euler(9), &euler(12))
                * canonical_entangler(p[6], p[7], p[8])
                * kron(&euler(0), &euler(3))
        }
    }
}

/// Tensor of a template, `mps_tensor(build_unitary(params))` without the
/// unitarity re-check.
pub fn params_tensor(params: &AnsatzParams) -> MpsTensor {
    MpsTensor::from_unitary_unchecked(&build_unitary(params))
}

/// `A^s_{ab} = ⟨s, a| U |0, b⟩`.
pub fn mps_tensor(u: &CMatrix) -> Result<MpsTensor> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return invalid(format!(
            "expected a 4x4 unitary, got {}x{}",
            u.nrows(),
            u.ncols()
        ));
    }
    let err = unitarity_error(u);
    if !(err < UNITARY_TOL) {
        return invalid(format!("matrix is not unitary (deviation {err:.2e})"));
    }
    Ok(MpsTensor::from_unitary_unchecked(u))
}

/// `exp(−iπ/4 Z⊗Z)`.
fn zz_quarter() -> CMatrix {
    let (s, co) = (PI / 4.0).sin_cos();
    let m = c(co, -s);
    let p = c(co, s);
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![m, p, p, m]))
}

/// `exp(i(a·XX + b·YY + c·ZZ))`; the three terms commute.
fn canonical_entangler(a: f64, b: f64, cz: f64) -> CMatrix {
    use crate::qcore::pauli;
    let term = |axis: Axis, angle: f64| {
        let p = pauli(axis);
        CMatrix::identity(4, 4) * c(angle.cos(), 0.0) + kron(&p, &p) * c(0.0, angle.sin())
    };
    term(Axis::X, a) * term(Axis::Y, b) * term(Axis::Z, cz)
}

#[cfg(test)]
mod tests;
