use std::f64::consts::PI;

use super::{nearest_branch, params_tensor, AnsatzParams, MpsTensor, Template};
use crate::error::{invalid, Error, Result};
use crate::qcore::{eigenvalues, leading_eig, polar_unitary, rot, Axis, CMatrix, C64};
use crate::transfer::overlap_density;

/// Bond unitary relating two states and how well it does so.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeMatch {
    /// `G` with `B^s ≈ G† A^s G`, defined up to a global phase.
    pub gauge: CMatrix,
    /// `1 − |λ|` of the mixed transfer matrix.
    pub residual: f64,
}

/// Result of moving `φ7` while holding the state fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparametrisation {
    pub params: AnsatzParams,
    /// `1 − |λ|` between the original and reparametrised states.
    pub defect: f64,
    /// Largest violation of the diagonal conditions at the returned point.
    pub condition_residual: f64,
    pub iterations: usize,
}

const REPARAM_TOL: f64 = 1e-10;
const REPARAM_MAX_ITER: usize = 200;
/// Angles adjusted by [`reparametrise`].
const FREE: [usize; 3] = [3, 4, 6];

fn require_reduced8(params: &AnsatzParams, what: &str) -> Result<()> {
    if params.template() != Template::Reduced8 {
        return invalid(format!("{what} needs the reduced8 template"));
    }
    Ok(())
}

/// Absorbs the bond rotation `Rx(θ)` into the angles: `φ7 → φ7 − θ` and the
/// auxiliary input chain `Rz(φ4)Rx(φ1)Rz(φ0)` becomes that chain times
/// `Rx(θ)`, re-expanded on the branch closest to the old angles.
///
/// The tensor transforms as `A^s → Rx(θ)† A^s Rx(θ)`, so the state is
/// unchanged.
pub fn x_gauge_rotate(params: &AnsatzParams, theta: f64) -> Result<AnsatzParams> {
    require_reduced8(params, "x-gauge rotation")?;
    if !theta.is_finite() {
        return invalid("gauge angle must be finite");
    }
    let p = params.angles();
    let chain = rot(Axis::Z, p[4]) * rot(Axis::X, p[1]) * rot(Axis::Z, p[0]) * rot(Axis::X, theta);
    let (outer, mid, inner) = zxz_nearest(&chain, (p[4], p[1], p[0]));
    let mut q = p.to_vec();
    q[4] = outer;
    q[1] = mid;
    q[0] = inner;
    q[7] = p[7] - theta;
    params.with_angles(q)
}

/// ZXZ angles `(α, β, γ)` with `m ∝ Rz(α)Rx(β)Rz(γ)`, choosing among the
/// equivalent branches the one nearest to `reference`.
pub(crate) fn zxz_nearest(m: &CMatrix, reference: (f64, f64, f64)) -> (f64, f64, f64) {
    // Rz(α)Rx(β)Rz(γ) = [[cos(β/2) e^{−i(α+γ)/2}, −i sin(β/2) e^{−i(α−γ)/2}],
    //                    [−i sin(β/2) e^{i(α−γ)/2},  cos(β/2) e^{i(α+γ)/2}]]
    let (ra, rb, rc) = reference;
    let beta = 2.0 * m[(1, 0)].norm().atan2(m[(0, 0)].norm());
    let small = 1e-12;
    let sum = if m[(0, 0)].norm() > small {
        (m[(1, 1)] / m[(0, 0)]).arg()
    } else {
        ra + rc
    };
    let diff = if m[(1, 0)].norm() > small {
        (m[(1, 0)] / m[(0, 1)]).arg()
    } else {
        ra - rc
    };
    let (alpha, gamma) = (0.5 * (sum + diff), 0.5 * (sum - diff));
    // Phases fix α and γ only modulo π and β only up to sign; keep the
    // combinations that reproduce m and move each angle to its nearest
    // 2π branch.
    let mut best = (alpha, beta, gamma);
    let mut best_dist = f64::INFINITY;
    for k in 0..2 {
        for l in 0..2 {
            for sign in [1.0, -1.0] {
                let (a, b, g) = (alpha + PI * k as f64, sign * beta, gamma + PI * l as f64);
                let rebuilt = rot(Axis::Z, a) * rot(Axis::X, b) * rot(Axis::Z, g);
                if phase_free_distance(&rebuilt, m) > 1e-8 {
                    continue;
                }
                let cand = (
                    nearest_branch(a, ra),
                    nearest_branch(b, rb),
                    nearest_branch(g, rc),
                );
                let dist = (cand.0 - ra).powi(2) + (cand.1 - rb).powi(2) + (cand.2 - rc).powi(2);
                if dist < best_dist {
                    best = cand;
                    best_dist = dist;
                }
            }
        }
    }
    best
}

/// `max |a − e^{iφ} b|` for the best global phase `φ`.
pub(crate) fn phase_free_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    crate::qcore::max_abs(&(a - b * phase))
}

/// Bond unitary `G` relating `a` to `b`, read off the open-end fixed point
/// of the mixed transfer matrix `E_{A,B}` and projected onto the unitaries.
pub fn match_gauge(a: &AnsatzParams, b: &AnsatzParams) -> Result<GaugeMatch> {
    match_gauge_tensors(&params_tensor(a), &params_tensor(b))
}

pub fn match_gauge_tensors(a: &MpsTensor, b: &MpsTensor) -> Result<GaugeMatch> {
    let e = a.slice(0).kronecker(&b.slice(0).conjugate())
        + a.slice(1).kronecker(&b.slice(1).conjugate());
    let et = e.transpose();
    let vals = eigenvalues(&et)?;
    if (vals[0].norm() - vals[1].norm()).abs() <= 1e-9 * vals[0].norm().max(1e-300) {
        return Err(Error::Ambiguous {
            first: vals[0],
            second: vals[1],
        });
    }
    let pair = leading_eig(&et)?;
    // A row vector x with xᵀE = λxᵀ is conj(vec(X)) for Σ_s A^s† X B^s = λX.
    let x = CMatrix::from_fn(2, 2, |i, j| pair.vector[2 * i + j].conj());
    let gauge = polar_unitary(&x).ok_or_else(|| Error::NumericFailure {
        message: "open-end fixed point is singular".into(),
        residual: 1.0 - pair.value.norm(),
    })?;
    Ok(GaugeMatch {
        gauge: fix_phase(gauge),
        residual: 1.0 - pair.value.norm(),
    })
}

/// Removes the global phase so that the largest-modulus entry of the first
/// column is real and positive.
fn fix_phase(g: CMatrix) -> CMatrix {
    let pivot = if g[(0, 0)].norm() >= g[(1, 0)].norm() {
        g[(0, 0)]
    } else {
        g[(1, 0)]
    };
    if pivot.norm() == 0.0 {
        return g;
    }
    let phase = pivot.conj() / pivot.norm();
    g * phase
}

/// `Re diag(Σ_s A^s B^s†)`.
fn channel_diagonal(a: &MpsTensor, b: &MpsTensor) -> [f64; 2] {
    let n: CMatrix = a.slice(0) * b.slice(0).adjoint() + a.slice(1) * b.slice(1).adjoint();
    [n[(0, 0)].re, n[(1, 1)].re]
}

/// Moves `φ7` to `phi7_new` and re-solves `(φ3, φ4, φ6)` so that the real
/// parts of the diagonal of `Σ_s A^s A'^s†` keep their values at the
/// original angles; for the reduced8 layout those values are 1, the
/// condition for the identity to remain a fixed point.
///
/// Damped Gauss–Newton with minimum-norm steps, seeded at the current
/// angles. The invariance is approximate, so the achieved fidelity defect is
/// reported rather than assumed.
pub fn reparametrise(params: &AnsatzParams, phi7_new: f64) -> Result<Reparametrisation> {
    require_reduced8(params, "reparametrisation")?;
    if !phi7_new.is_finite() {
        return invalid("target angle must be finite");
    }
    let a = params_tensor(params);
    let target = channel_diagonal(&a, &a);
    let with = |x: &[f64; 3]| {
        let mut q = params.angles().to_vec();
        for (k, &i) in FREE.iter().enumerate() {
            q[i] = x[k];
        }
        q[7] = phi7_new;
        params.with_angles(q)
    };
    let residual = |x: &[f64; 3]| -> Result<[f64; 2]> {
        let d = channel_diagonal(&a, &params_tensor(&with(x)?));
        Ok([d[0] - target[0], d[1] - target[1]])
    };
    let norm = |r: &[f64; 2]| r[0].abs().max(r[1].abs());

    let p = params.angles();
    let mut x = [p[FREE[0]], p[FREE[1]], p[FREE[2]]];
    let mut r = residual(&x)?;
    let mut damping = 1e-6;
    let mut iterations = 0;
    while norm(&r) >= REPARAM_TOL && iterations < REPARAM_MAX_ITER {
        iterations += 1;
        let jac = jacobian(&residual, &x)?;
        let mut improved = false;
        for _ in 0..30 {
            let step = min_norm_step(&jac, &r, damping);
            let trial = [x[0] - step[0], x[1] - step[1], x[2] - step[2]];
            let rt = residual(&trial)?;
            if rt[0].hypot(rt[1]) < r[0].hypot(r[1]) {
                x = trial;
                r = rt;
                damping = (damping * 0.3).max(1e-12);
                improved = true;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let out = with(&x)?;
    let defect = 1.0 - overlap_density(&a, &params_tensor(&out))?;
    let condition_residual = norm(&r);
    if condition_residual >= REPARAM_TOL {
        return Err(Error::NumericFailure {
            message: format!(
                "diagonal conditions not met after {iterations} iterations; best fidelity defect {defect:.3e}"
            ),
            residual: defect,
        });
    }
    Ok(Reparametrisation {
        params: out,
        defect,
        condition_residual,
        iterations,
    })
}

/// Best effort version of [`reparametrise`] that returns the least-squares
/// point even when the conditions cannot be met exactly.
pub fn reparametrise_best_effort(
    params: &AnsatzParams,
    phi7_new: f64,
) -> Result<Reparametrisation> {
    match reparametrise(params, phi7_new) {
        Err(Error::NumericFailure { .. }) => {}
        other => return other,
    }
    // Re-run and keep the stationary point.
    let a = params_tensor(params);
    let target = channel_diagonal(&a, &a);
    let p = params.angles();
    let with = |x: &[f64]| {
        let mut q = p.to_vec();
        for (k, &i) in FREE.iter().enumerate() {
            q[i] = x[k];
        }
        q[7] = phi7_new;
        params.with_angles(q)
    };
    let cost = |x: &[f64]| match with(x) {
        Ok(q) => {
            let d = channel_diagonal(&a, &params_tensor(&q));
            (d[0] - target[0]).powi(2) + (d[1] - target[1]).powi(2)
        }
        Err(_) => f64::INFINITY,
    };
    let seed = [p[FREE[0]], p[FREE[1]], p[FREE[2]]];
    let m = crate::optim::bfgs(
        cost,
        &seed,
        crate::optim::BfgsOptions {
            grad_tol: 1e-12,
            ..Default::default()
        },
    );
    let out = with(&m.x)?;
    let d = channel_diagonal(&a, &params_tensor(&out));
    let condition_residual = (d[0] - target[0]).abs().max((d[1] - target[1]).abs());
    let defect = 1.0 - overlap_density(&a, &params_tensor(&out))?;
    Ok(Reparametrisation {
        params: out,
        defect,
        condition_residual,
        iterations: m.iterations,
    })
}

fn jacobian<F>(f: &F, x: &[f64; 3]) -> Result<[[f64; 3]; 2]>
where
    F: Fn(&[f64; 3]) -> Result<[f64; 2]>,
{
    let h = 1e-7;
    let mut jac = [[0.0; 3]; 2];
    for k in 0..3 {
        let mut up = *x;
        let mut down = *x;
        up[k] += h;
        down[k] -= h;
        let (fu, fd) = (f(&up)?, f(&down)?);
        for row in 0..2 {
            jac[row][k] = (fu[row] - fd[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `Jᵀ(JJᵀ + μI)⁻¹ r`, the damped minimum-norm Gauss–Newton step.
fn min_norm_step(jac: &[[f64; 3]; 2], r: &[f64; 2], mu: f64) -> [f64; 3] {
    let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let (a, b, d) = (
        dot(&jac[0], &jac[0]) + mu,
        dot(&jac[0], &jac[1]),
        dot(&jac[1], &jac[1]) + mu,
    );
    let det = a * d - b * b;
    let y = [(d * r[0] - b * r[1]) / det, (a * r[1] - b * r[0]) / det];
    [0, 1, 2].map(|k| jac[0][k] * y[0] + jac[1][k] * y[1])
}

/// Largest fidelity defect accepted for a reparametrisation step in [`align`].
pub const ALIGN_MAX_DEFECT: f64 = 0.015;

/// Parameter distances between two reduced8 states, before alignment, after
/// the best x-gauge rotation, and after a further reparametrisation.
///
/// Distances are Euclidean over angles taken on their nearest branches, so
/// the three values are non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub raw: f64,
    pub gauge_angle: f64,
    pub after_gauge: f64,
    /// `φ7` chosen by the reparametrisation step.
    pub phi7: f64,
    pub reparam_defect: f64,
    pub after_reparam: f64,
    pub aligned: AnsatzParams,
}

impl Alignment {
    pub fn gauge_component(&self) -> f64 {
        self.raw - self.after_gauge
    }

    pub fn reparam_component(&self) -> f64 {
        self.after_gauge - self.after_reparam
    }
}

/// Branch-aware Euclidean distance between two angle vectors.
pub fn angle_distance(a: &AnsatzParams, b: &AnsatzParams) -> f64 {
    a.angles()
        .iter()
        .zip(b.angles())
        .map(|(&x, &y)| (nearest_branch(x, y) - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Aligns `other` to `reference`: first the x-gauge angle minimising the
/// parameter distance, then the `φ7` whose reparametrisation does, among
/// those with defect at most [`ALIGN_MAX_DEFECT`].
pub fn align(reference: &AnsatzParams, other: &AnsatzParams) -> Result<Alignment> {
    require_reduced8(reference, "alignment")?;
    require_reduced8(other, "alignment")?;
    let raw = angle_distance(other, reference);
    let gauged = |theta: f64| {
        x_gauge_rotate(other, theta).map_or(f64::INFINITY, |q| angle_distance(&q, reference))
    };
    let (mut gauge_angle, mut after_gauge) = crate::optim::minimize_periodic(gauged, 64, 1e-9);
    if !(after_gauge < raw) {
        (gauge_angle, after_gauge) = (0.0, raw);
    }
    let gauged = if gauge_angle == 0.0 {
        other.clone()
    } else {
        x_gauge_rotate(other, gauge_angle)?
    };
    let phi7_now = gauged.angles()[7];
    let reparam = |phi7: f64| match reparametrise_best_effort(&gauged, phi7) {
        Ok(r) if r.defect <= ALIGN_MAX_DEFECT => angle_distance(&r.params, reference),
        _ => f64::INFINITY,
    };
    let (offset, after) = crate::optim::minimize_periodic(|d| reparam(phi7_now + d), 32, 1e-7);
    let (aligned, phi7, reparam_defect, after_reparam) = if after < after_gauge {
        let r = reparametrise_best_effort(&gauged, phi7_now + offset)?;
        (r.params, phi7_now + offset, r.defect, after)
    } else {
        (gauged.clone(), phi7_now, 0.0, after_gauge)
    };
    Ok(Alignment {
        raw,
        gauge_angle,
        after_gauge,
        phi7,
        reparam_defect,
        after_reparam,
        aligned,
    })
}
