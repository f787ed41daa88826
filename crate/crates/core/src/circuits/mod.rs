//! The sequential cost circuit, its exact success probability, and shot
//! sampling.
//!
//! Register: qubit 0 is the auxiliary (bond) qubit, qubits `1..=2` are the
//! burn-in sites and qubits `3..=6` the evolution window of two unit cells.
//!
//! ```text
//! aux ─U(t)─U(t)─U′…U′ ·············· U′†…U′†─U(t)†─U(t)†─  (never measured)
//!      b1   b2   w1..w4   W on window  w4..w1  b2    b1
//! ```
//!
//! The ket half prepares the current state `U(t)` on all six sites and
//! applies the evolution gate on the window; the bra half undoes the
//! candidate `U′` on the window and `U(t)` on the burn-in sites. Success
//! means every physical qubit reads 0. Each physical qubit is measured as
//! soon as its last gate has acted. The auxiliary qubit enters in `|0⟩` and
//! is traced out at the end, so the success probability is
//! `p = Σ_a |vec(I)ᵀ · E_win² · E_{U,U}² · vec(|0⟩⟨a|)|²` with `E_win` the
//! gate-inserted transfer matrix of one cell. The window approximates the
//! order-2 power method, `p ≈ |λ|⁴`.
//!
//! With second-order gates the window carries `W_o` on both cells, `W_e` on
//! the bond between them, then `W_o` again; the even bonds that would cross
//! the window edges are omitted.

mod gatelist;
mod sampling;

pub use gatelist::{parse_gate_list, write_gate_list};
pub use sampling::{sample, sample_per_shot, sample_probability, ShotEstimate};

use crate::ansatz::{build_unitary, params_tensor, AnsatzParams, Template};
use crate::error::{invalid, Error, Result};
use crate::qcore::{c, expm_hermitian, kron, pauli, Axis, CMatrix, StateVector, C64, MAX_QUBITS};
use crate::tfim::{bond_hamiltonian, QuenchSpec, TrotterOrder};
use crate::transfer::cell_matrices;

/// Qubit index of the auxiliary leg.
pub const AUX: usize = 0;
/// Physical qubits of the burn-in sites.
pub const BURN_IN: [usize; 2] = [1, 2];
/// Physical qubits of the evolution window.
pub const WINDOW: [usize; 4] = [3, 4, 5, 6];
/// Power-method order realised by the circuit.
pub const POWER_ORDER: usize = 2;

/// A gate that can be rebuilt from its name and angles.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    /// Template unitary on `(physical, auxiliary)`, or its adjoint.
    Ansatz {
        template: Template,
        angles: Vec<f64>,
        adjoint: bool,
    },
    /// `exp(−i·tau·h₂(J, g))` on two neighbouring sites.
    Bond {
        j: f64,
        g: f64,
        tau: f64,
    },
    Rot {
        axis: Axis,
        angle: f64,
    },
    X,
}

impl GateSpec {
    pub fn matrix(&self) -> Result<CMatrix> {
        match self {
            GateSpec::Ansatz {
                template,
                angles,
                adjoint,
            } => {
                let u = build_unitary(&AnsatzParams::new(*template, angles.clone())?);
                Ok(if *adjoint { u.adjoint() } else { u })
            }
            GateSpec::Bond { j, g, tau } => {
                if !(j.is_finite() && g.is_finite() && tau.is_finite()) {
                    return invalid("bond gate parameters must be finite");
                }
                Ok(expm_hermitian(&bond_hamiltonian(*j, *g), *tau))
            }
            GateSpec::Rot { axis, angle } => crate::qcore::rot_gate(*axis, *angle),
            GateSpec::X => Ok(pauli(Axis::X)),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateSpec::Ansatz { .. } | GateSpec::Bond { .. } => 2,
            GateSpec::Rot { .. } | GateSpec::X => 1,
        }
    }
}

/// One circuit instruction.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Gate {
        spec: GateSpec,
        matrix: CMatrix,
        targets: Vec<usize>,
    },
    /// Measure the qubit, then reset it to `|0⟩`; success needs outcome 0.
    MeasureReset { qubit: usize },
}

/// Gate sequence with the set of qubits whose all-zero outcome is success.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCircuit {
    qubit_count: usize,
    ops: Vec<Op>,
    measured: Vec<usize>,
    auxiliary: Vec<usize>,
    trotter_order: Option<TrotterOrder>,
}

impl CostCircuit {
    /// Empty circuit on `qubit_count` qubits.
    pub fn new(qubit_count: usize) -> Result<Self> {
        if qubit_count == 0 || qubit_count > MAX_QUBITS {
            return Err(Error::ResourceLimit(format!(
                "circuit width {qubit_count} outside 1..={MAX_QUBITS}"
            )));
        }
        Ok(Self {
            qubit_count,
            ops: vec![],
            measured: vec![],
            auxiliary: vec![],
            trotter_order: None,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn measured_qubits(&self) -> &[usize] {
        &self.measured
    }

    pub fn auxiliary_qubits(&self) -> &[usize] {
        &self.auxiliary
    }

    pub fn trotter_order(&self) -> Option<TrotterOrder> {
        self.trotter_order
    }

    pub fn power_order(&self) -> usize {
        POWER_ORDER
    }

    pub fn push_gate(&mut self, spec: GateSpec, targets: &[usize]) -> Result<()> {
        if targets.len() != spec.arity() {
            return invalid(format!(
                "gate needs {} target(s), got {}",
                spec.arity(),
                targets.len()
            ));
        }
        for (i, &q) in targets.iter().enumerate() {
            self.check_qubit(q)?;
            if targets[..i].contains(&q) {
                return invalid(format!("duplicate target {q}"));
            }
        }
        let matrix = spec.matrix()?;
        self.ops.push(Op::Gate {
            spec,
            matrix,
            targets: targets.to_vec(),
        });
        Ok(())
    }

    pub fn push_measure_reset(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        self.ops.push(Op::MeasureReset { qubit });
        Ok(())
    }

    /// Declares the qubits read at the end; auxiliary qubits may not be
    /// among them.
    pub fn set_measured(&mut self, measured: Vec<usize>) -> Result<()> {
        for &q in &measured {
            self.check_qubit(q)?;
            if self.auxiliary.contains(&q) {
                return invalid(format!("qubit {q} is auxiliary and cannot be measured"));
            }
        }
        self.measured = measured;
        Ok(())
    }

    pub fn set_auxiliary(&mut self, auxiliary: Vec<usize>) -> Result<()> {
        for &q in &auxiliary {
            self.check_qubit(q)?;
            if self.measured.contains(&q) {
                return invalid(format!("qubit {q} is measured and cannot be auxiliary"));
            }
        }
        self.auxiliary = auxiliary;
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubit_count {
            return invalid(format!(
                "qubit {q} out of range for {} qubits",
                self.qubit_count
            ));
        }
        Ok(())
    }
}

/// Evolution gates for the window and their circuit placement.
fn window_gates(spec: &QuenchSpec) -> Vec<(GateSpec, [usize; 2])> {
    let (j, g) = (spec.j, spec.g1);
    let bond = |tau: f64| GateSpec::Bond { j, g, tau };
    let [w1, w2, w3, w4] = WINDOW;
    match spec.trotter_order {
        TrotterOrder::First => vec![
            (bond(2.0 * spec.dt), [w1, w2]),
            (bond(2.0 * spec.dt), [w3, w4]),
        ],
        TrotterOrder::Second => vec![
            (bond(spec.dt / 2.0), [w1, w2]),
            (bond(spec.dt / 2.0), [w3, w4]),
            (bond(spec.dt), [w2, w3]),
            (bond(spec.dt / 2.0), [w1, w2]),
            (bond(spec.dt / 2.0), [w3, w4]),
        ],
    }
}

/// Builds the cost circuit comparing `params_candidate` with one evolution
/// step of `params_t`. `dt = 0` gives the plain overlap circuit.
pub fn build_cost_circuit(
    params_t: &AnsatzParams,
    params_candidate: &AnsatzParams,
    spec: &QuenchSpec,
) -> Result<CostCircuit> {
    if !(spec.dt >= 0.0) || !spec.dt.is_finite() || !spec.j.is_finite() || !spec.g1.is_finite() {
        return invalid("evolution step needs finite J, g1 and dt ≥ 0");
    }
    let ket = |params: &AnsatzParams, adjoint: bool| GateSpec::Ansatz {
        template: params.template(),
        angles: params.angles().to_vec(),
        adjoint,
    };
    let mut circ = CostCircuit::new(1 + BURN_IN.len() + WINDOW.len())?;
    circ.trotter_order = Some(spec.trotter_order);
    circ.set_auxiliary(vec![AUX])?;
    for &q in BURN_IN.iter().chain(&WINDOW) {
        circ.push_gate(ket(params_t, false), &[q, AUX])?;
    }
    for (gate, targets) in window_gates(spec) {
        circ.push_gate(gate, &targets)?;
    }
    for &q in WINDOW.iter().rev() {
        circ.push_gate(ket(params_candidate, true), &[q, AUX])?;
        circ.push_measure_reset(q)?;
    }
    for &q in BURN_IN.iter().rev() {
        circ.push_gate(ket(params_t, true), &[q, AUX])?;
        circ.push_measure_reset(q)?;
    }
    let mut measured: Vec<usize> = BURN_IN.iter().chain(&WINDOW).copied().collect();
    measured.sort_unstable();
    circ.set_measured(measured)?;
    Ok(circ)
}

/// Probability that every measured qubit (mid-circuit and final) reads 0.
///
/// Only the all-zero branch contributes, so each measurement is an
/// unnormalised projection onto `|0⟩` and the reset that follows it is the
/// identity on that branch.
pub fn exact_success_probability(circ: &CostCircuit) -> Result<f64> {
    let mut state = StateVector::zero(circ.qubit_count)?;
    for op in &circ.ops {
        match op {
            Op::Gate {
                matrix, targets, ..
            } => state.apply_gate_in_place(matrix, targets)?,
            Op::MeasureReset { qubit } => {
                state.project(*qubit, 0)?;
            }
        }
    }
    let mut p = state.norm_sqr();
    for &q in &circ.measured {
        p = state.project(q, 0)?;
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Window gate as a 16×16 matrix on sites `w1..w4` (w1 most significant).
fn window_operator(spec: &QuenchSpec) -> CMatrix {
    let i2 = CMatrix::identity(2, 2);
    let mut g = CMatrix::identity(16, 16);
    for (gate, targets) in window_gates(spec) {
        let m = gate.matrix().expect("window gates are finite");
        let full = match targets[0] - WINDOW[0] {
            0 => kron(&m, &CMatrix::identity(4, 4)),
            1 => kron(&kron(&i2, &m), &i2),
            _ => kron(&CMatrix::identity(4, 4), &m),
        };
        g = full * g;
    }
    g
}

/// The same diagram contracted with transfer-matrix algebra instead of a
/// statevector:
/// `p = Σ_a |Σ_{s,t} G[t][s]·Tr(K_s X_a K′_t†)|²`, where `K_s` are the
/// four-site window products, `G` the window gate, and `X_a` the burn-in
/// channel applied twice to `|0⟩⟨a|`.
pub fn dense_success_probability(
    params_t: &AnsatzParams,
    params_candidate: &AnsatzParams,
    spec: &QuenchSpec,
) -> Result<f64> {
    let a = params_tensor(params_t);
    let b = params_tensor(params_candidate);
    let g = window_operator(spec);
    let (ka, kb) = (cell_matrices(&a), cell_matrices(&b));
    // Window index s = 4·s_cell1 + s_cell2, with the second cell acting later.
    let window =
        |k: &[CMatrix; 4]| -> Vec<CMatrix> { (0..16).map(|s| &k[s % 4] * &k[s / 4]).collect() };
    let (wa, wb) = (window(&ka), window(&kb));
    let channel =
        |m: &CMatrix| a.slice(0) * m * a.slice(0).adjoint() + a.slice(1) * m * a.slice(1).adjoint();
    let mut p = 0.0;
    for aux_out in 0..2 {
        let mut start = CMatrix::zeros(2, 2);
        start[(0, aux_out)] = c(1.0, 0.0);
        let x = channel(&channel(&start));
        let mut amp = C64::new(0.0, 0.0);
        for s in 0..16 {
            let kx = &wa[s] * &x;
            for t in 0..16 {
                if g[(t, s)] != c(0.0, 0.0) {
                    amp += g[(t, s)] * (&kx * wb[t].adjoint()).trace();
                }
            }
        }
        p += amp.norm_sqr();
    }
    Ok(p)
}
