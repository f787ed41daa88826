use super::{echo_density, extrapolate, unwrap_to, Trajectory, TrajectoryPoint};
use crate::ansatz::{params_tensor, AnsatzParams, Template};
use crate::error::{invalid, Error, Result};
use crate::optim::{bfgs, BfgsOptions};
use crate::qcore::{c, eigenvalues, CMatrix, CVector, C64};
use crate::tfim::{
    bond_hamiltonian, trotter_gate_first_order, trotter_gates_second_order, QuenchSpec,
    TrotterOrder,
};
use crate::transfer::{
    approx_fixed_points, cell_matrices, power_method_terms, transfer_matrix, Insertion,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Energy per site `⟨h₂⟩`, contracted with the right fixed point `ρ` of
/// the state's transfer matrix (the left one is the identity).
pub fn energy_density(j: f64, g: f64, params: &AnsatzParams) -> Result<f64> {
    let a = params_tensor(params);
    let e = transfer_matrix(&a, &a, &Insertion::None)?.matrix;
    let v = null_vector(&e)?;
    let mut rho = CMatrix::from_fn(2, 2, |i, k| v[2 * i + k]);
    let tr = rho.trace();
    // A positive ρ has |Tr ρ| ≥ ‖ρ‖_F; anything else means the leading
    // eigenvalue is degenerate and the fixed point is not unique.
    if !(tr.norm() >= 0.999 * rho.norm()) {
        return Err(Error::NumericFailure {
            message: "right fixed point is not a density matrix".into(),
            residual: tr.norm() / rho.norm(),
        });
    }
    rho /= tr;
    rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
    let h = bond_hamiltonian(j, g);
    let k = cell_matrices(&a);
    let mut energy = C64::new(0.0, 0.0);
    for s in 0..4 {
        let krho = &k[s] * &rho;
        for t in 0..4 {
            if h[(t, s)] != c(0.0, 0.0) {
                energy += h[(t, s)] * (&krho * k[t].adjoint()).trace();
            }
        }
    }
    Ok(energy.re)
}

/// Eigenvector of the leading eigenvalue to machine precision: the right
/// singular vector of `E − λ·I` with the smallest singular value.
fn null_vector(e: &CMatrix) -> Result<CVector> {
    let lambda = eigenvalues(e)?[0];
    let shifted = e - CMatrix::identity(e.nrows(), e.ncols()) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::NumericFailure {
        message: "SVD failed".into(),
        residual: f64::NAN,
    })?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    Ok(v_t.row(k).adjoint())
}

/// Lowest-energy state of the template at couplings `(J, g)`, from the
/// default set of restarts.
pub fn ground_state_optimize(j: f64, g: f64, template: Template) -> Result<AnsatzParams> {
    ground_state_optimize_seeded(j, g, template, 0)
}

/// As [`ground_state_optimize`] with a chosen restart seed. BFGS runs from
/// a zero start and several random starts; the lowest energy wins.
pub fn ground_state_optimize_seeded(
    j: f64,
    g: f64,
    template: Template,
    seed: u64,
) -> Result<AnsatzParams> {
    if !(j.is_finite() && g.is_finite()) {
        return invalid("couplings must be finite");
    }
    let n = template.n_params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![vec![0.1; n]];
    for _ in 0..12 {
        starts.push(
            (0..n)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect(),
        );
    }
    let energy = |x: &[f64]| {
        AnsatzParams::new(template, x.to_vec())
            .and_then(|p| energy_density(j, g, &p))
            .unwrap_or(f64::INFINITY)
    };
    let opts = BfgsOptions {
        grad_tol: 1e-8,
        max_iter: 2000,
        fd_step: 1e-6,
        max_step: None,
    };
    let best = starts
        .par_iter()
        .map(|x0| bfgs(energy, x0, opts))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");
    if !best.value.is_finite() {
        return Err(Error::NumericFailure {
            message: "energy minimisation diverged".into(),
            residual: best.value,
        });
    }
    // Polish the winner so the energy is converged well below 1e-6.
    let polished = bfgs(
        energy,
        &best.x,
        BfgsOptions {
            grad_tol: 1e-10,
            ..opts
        },
    );
    let winner = if polished.value <= best.value {
        polished
    } else {
        best
    };
    if !winner.converged && winner.grad_norm > 1e-5 {
        return Err(Error::NumericFailure {
            message: format!("ground-state search stalled at energy {}", winner.value),
            residual: winner.grad_norm,
        });
    }
    AnsatzParams::new(template, winner.x)
}

/// Which fixed points the power-method objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Built from the current state `U(t)`.
    Current,
    /// Built from the candidate.
    Candidate,
}

/// Quantity maximised at each exact step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactObjective {
    /// `|λ|` of the gate-inserted transfer matrix.
    Eigenvalue,
    /// `|C_n / C_{n−1}|` with approximate boundary vectors (first order only).
    PowerMethod { order: usize, boundary: Boundary },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    pub objective: ExactObjective,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            objective: ExactObjective::Eigenvalue,
            grad_tol: 1e-8,
            max_iter: 1000,
        }
    }
}

pub(crate) fn insertion_for(spec: &QuenchSpec) -> Result<Insertion> {
    Ok(match spec.trotter_order {
        TrotterOrder::First => {
            Insertion::FirstOrder(trotter_gate_first_order(spec.j, spec.g1, spec.dt)?)
        }
        TrotterOrder::Second => {
            let (w_odd, w_even) = trotter_gates_second_order(spec.j, spec.g1, spec.dt)?;
            Insertion::SecondOrder { w_odd, w_even }
        }
    })
}

/// Fraction of the reference boundary overlap a candidate must retain.
/// Far from the seed `C_{n−1}` can collapse together with `C_n`, leaving a
/// ratio near 1 that says nothing about the fidelity.
const OVERLAP_FLOOR: f64 = 0.5;

fn objective_value(
    current: &AnsatzParams,
    candidate: &AnsatzParams,
    insertion: &Insertion,
    objective: ExactObjective,
    reference_overlap: f64,
) -> Result<f64> {
    let e = transfer_matrix(
        &params_tensor(current),
        &params_tensor(candidate),
        insertion,
    )?;
    match objective {
        // Schur eigenvalues are accurate to rounding, which keeps the
        // finite-difference gradients clean.
        ExactObjective::Eigenvalue => Ok(eigenvalues(&e.matrix)?[0].norm()),
        ExactObjective::PowerMethod { order, boundary } => {
            let fp = approx_fixed_points(match boundary {
                Boundary::Current => current,
                Boundary::Candidate => candidate,
            });
            let (prev, next) = power_method_terms(&e, &fp, order)?;
            if prev.norm() < OVERLAP_FLOOR * reference_overlap {
                return Err(Error::DegenerateEstimate(format!(
                    "boundary overlap {:.3e} below {OVERLAP_FLOOR} of its reference {reference_overlap:.3e}",
                    prev.norm()
                )));
            }
            Ok((next / prev).norm())
        }
    }
}

/// `|C_{n−1}|` with the candidate equal to the current state.
fn reference_overlap(
    current: &AnsatzParams,
    insertion: &Insertion,
    objective: ExactObjective,
) -> Result<f64> {
    match objective {
        ExactObjective::Eigenvalue => Ok(0.0),
        ExactObjective::PowerMethod { order, .. } => {
            let e = transfer_matrix(&params_tensor(current), &params_tensor(current), insertion)?;
            Ok(
                power_method_terms(&e, &approx_fixed_points(current), order)?
                    .0
                    .norm(),
            )
        }
    }
}

/// Exact-in-ansatz reference from the template's ground state at `g0`.
pub fn evolve_exact_in_ansatz(spec: &QuenchSpec, template: Template) -> Result<Trajectory> {
    spec.validate()?;
    let ground = ground_state_optimize(spec.j, spec.g0, template)?;
    evolve_exact_from(spec, &ground, &ExactOptions::default())
}

/// Deterministic evolution from `ground`: each step maximises the chosen
/// objective with BFGS, seeded by linear extrapolation. A failed step ends
/// the run and is reported in [`Trajectory::failure`].
pub fn evolve_exact_from(
    spec: &QuenchSpec,
    ground: &AnsatzParams,
    opts: &ExactOptions,
) -> Result<Trajectory> {
    spec.validate()?;
    if let ExactObjective::PowerMethod { order, .. } = opts.objective {
        if spec.trotter_order != TrotterOrder::First || order == 0 {
            return invalid("the power-method objective needs first-order gates and order ≥ 1");
        }
    }
    let insertion = insertion_for(spec)?;
    let mut traj = Trajectory {
        spec: *spec,
        seed: 0,
        init: None,
        points: vec![TrajectoryPoint {
            step: 0,
            time: 0.0,
            params: ground.clone(),
            echo: echo_density(ground, ground)?,
            cumulative_shots: 0,
            cost: 0.0,
            converged: true,
        }],
        failure: None,
    };
    // The step cap keeps each update in the basin of the seed: per-step
    // parameter changes are a few tenths of a radian at most.
    let bfgs_opts = BfgsOptions {
        grad_tol: opts.grad_tol,
        max_iter: opts.max_iter,
        fd_step: 1e-6,
        max_step: Some(0.1),
    };
    for step in 1..=spec.n_steps() {
        let n = traj.points.len();
        let current = traj.points[n - 1].params.clone();
        let seed = if n >= 2 {
            extrapolate(&traj.points[n - 2].params, &current)?
        } else {
            current.clone()
        };
        let floor = match reference_overlap(&current, &insertion, opts.objective) {
            Ok(v) => v,
            Err(e) => {
                traj.failure = Some(format!("step {step}: {e}"));
                break;
            }
        };
        let f = |x: &[f64]| {
            AnsatzParams::new(current.template(), x.to_vec())
                .and_then(|cand| {
                    objective_value(&current, &cand, &insertion, opts.objective, floor)
                })
                .map_or(f64::INFINITY, |v| -v)
        };
        // An extrapolated seed outside the feasible region falls back to
        // the current angles.
        let seed = if f(seed.angles()).is_finite() {
            seed
        } else {
            current.clone()
        };
        let min = bfgs(f, seed.angles(), bfgs_opts);
        if !min.value.is_finite() {
            let why = objective_value(&current, &seed, &insertion, opts.objective, floor)
                .err()
                .map_or_else(|| "objective not finite".to_string(), |e| e.to_string());
            traj.failure = Some(format!("step {step}: {why}"));
            break;
        }
        let params = unwrap_to(&current.with_angles(min.x)?, &current)?;
        let echo = match echo_density(ground, &params) {
            Ok(e) => e,
            Err(e) => {
                traj.failure = Some(format!("step {step}: {e}"));
                break;
            }
        };
        traj.points.push(TrajectoryPoint {
            step,
            time: spec.time(step),
            params,
            echo,
            cumulative_shots: 0,
            cost: 1.0 + min.value,
            converged: min.converged,
        });
    }
    Ok(traj)
}
