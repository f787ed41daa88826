//! Transverse-field Ising chain `H = Σ_i J·Z_i Z_{i+1} + g·X_i`: Trotter
//! gates and exact Loschmidt-echo references.
//!
//! Echoes are rate functions per site of the squared overlap,
//! `−(1/N)·log|⟨ψ(0)|ψ(t)⟩|²`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::qcore::{c, expm_hermitian, kron, pauli, Axis, CMatrix, C64};

/// Largest chain for the dense full-space Hamiltonian.
pub const DENSE_MAX_SITES: usize = 12;
/// Largest chain for the momentum-sector exact diagonalisation.
pub const ED_MAX_SITES: usize = 14;
/// Default momentum grid for the free-fermion echo.
pub const DEFAULT_K_POINTS: usize = 2048;

/// Trotter order of the evolution gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrotterOrder {
    First,
    Second,
}

impl TrotterOrder {
    pub fn from_int(order: u32) -> Result<Self> {
        match order {
            1 => Ok(TrotterOrder::First),
            2 => Ok(TrotterOrder::Second),
            _ => invalid(format!("trotter order must be 1 or 2, got {order}")),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            TrotterOrder::First => 1,
            TrotterOrder::Second => 2,
        }
    }
}

/// A quench from the ground state of `H(g0)` evolved under `H(g1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchSpec {
    pub j: f64,
    pub g0: f64,
    pub g1: f64,
    pub dt: f64,
    pub t_max: f64,
    pub trotter_order: TrotterOrder,
}

impl QuenchSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("J", self.j),
            ("g0", self.g0),
            ("g1", self.g1),
            ("dt", self.dt),
            ("t_max", self.t_max),
        ] {
            if !v.is_finite() {
                return invalid(format!("{name} must be finite"));
            }
        }
        if self.j == 0.0 {
            return invalid("J must be nonzero");
        }
        if !(self.dt > 0.0) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if self.t_max < self.dt {
            return invalid(format!(
                "t_max ({}) must be at least dt ({})",
                self.t_max, self.dt
            ));
        }
        Ok(())
    }

    /// Number of evolution steps, `round(t_max / dt)`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt + 1e-9).floor() as usize
    }

    /// Time after `step` steps.
    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

/// `h₂ = J·Z⊗Z + (g/2)(X⊗I + I⊗X)`, one bond with its share of the field.
pub fn bond_hamiltonian(j: f64, g: f64) -> CMatrix {
    let (x, z, i2) = (pauli(Axis::X), pauli(Axis::Z), CMatrix::identity(2, 2));
    kron(&z, &z) * c(j, 0.0) + (kron(&x, &i2) + kron(&i2, &x)) * c(g / 2.0, 0.0)
}

/// Dense Hamiltonian on `n_sites` qubits, open or periodic.
pub fn tfim_hamiltonian(j: f64, g: f64, n_sites: usize, periodic: bool) -> Result<CMatrix> {
    if n_sites == 0 {
        return invalid("chain needs at least one site");
    }
    if n_sites > DENSE_MAX_SITES {
        return Err(Error::ResourceLimit(format!(
            "dense Hamiltonian limited to {DENSE_MAX_SITES} sites, got {n_sites}"
        )));
    }
    let dim = 1usize << n_sites;
    let bit = |i: usize| 1usize << (n_sites - 1 - i);
    let mut h = CMatrix::zeros(dim, dim);
    let bonds: Vec<(usize, usize)> = (0..n_sites - 1)
        .map(|i| (i, i + 1))
        .chain((periodic && n_sites > 1).then_some((n_sites - 1, 0)))
        .collect();
    for s in 0..dim {
        let zz: f64 = bonds
            .iter()
            .map(|&(a, b)| {
                if (s & bit(a) == 0) == (s & bit(b) == 0) {
                    j
                } else {
                    -j
                }
            })
            .sum();
        h[(s, s)] += c(zz, 0.0);
        for i in 0..n_sites {
            h[(s ^ bit(i), s)] += c(g, 0.0);
        }
    }
    Ok(h)
}

/// First-order update for translation-invariant states: a single bond gate
/// `exp(−i·2dt·h₂)` applied per two-site cell.
pub fn trotter_gate_first_order(j: f64, g: f64, dt: f64) -> Result<CMatrix> {
    check_step(j, g, dt)?;
    Ok(expm_hermitian(&bond_hamiltonian(j, g), 2.0 * dt))
}

/// Symmetric split gates `(W_o(dt/2), W_e(dt))` for `W_o W_e W_o`.
pub fn trotter_gates_second_order(j: f64, g: f64, dt: f64) -> Result<(CMatrix, CMatrix)> {
    check_step(j, g, dt)?;
    let h = bond_hamiltonian(j, g);
    Ok((expm_hermitian(&h, dt / 2.0), expm_hermitian(&h, dt)))
}

fn check_step(j: f64, g: f64, dt: f64) -> Result<()> {
    if !(j.is_finite() && g.is_finite()) {
        return invalid("couplings must be finite");
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return invalid(format!("dt must be positive and finite, got {dt}"));
    }
    Ok(())
}

/// Single-particle energy `ε_k = 2√(J² + g² − 2Jg·cos k)`.
pub fn dispersion(j: f64, g: f64, k: f64) -> f64 {
    2.0 * (j * j + g * g - 2.0 * j * g * k.cos()).max(0.0).sqrt()
}

fn bogoliubov_angle(j: f64, g: f64, k: f64) -> f64 {
    (j * k.sin()).atan2(g - j * k.cos())
}

/// Ground-state energy per site of the infinite chain.
pub fn ground_energy_density(j: f64, g: f64) -> f64 {
    let n = 20_000;
    let h = PI / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * dispersion(j, g, i as f64 * h);
    }
    -sum * h / (2.0 * PI)
}

/// Ground-state energy per site of the periodic `n`-site chain (even `n`),
/// from the antiperiodic fermion momenta `(2m+1)π/n`.
pub fn ground_energy_density_finite(j: f64, g: f64, n: usize) -> f64 {
    let s: f64 = (0..n)
        .map(|m| dispersion(j, g, (2 * m + 1) as f64 * PI / n as f64))
        .sum();
    -0.5 * s / n as f64
}

/// Thermodynamic-limit echo from the momentum integral, trapezoidal rule on
/// `k_points` uniform momenta in `[0, π]`, with `J = 1`.
pub fn loschmidt_exact_ff(g0: f64, g1: f64, t: f64, k_points: usize) -> Result<f64> {
    loschmidt_ff(1.0, g0, g1, t, k_points)
}

/// [`loschmidt_exact_ff`] for general `J`.
pub fn loschmidt_ff(j: f64, g0: f64, g1: f64, t: f64, k_points: usize) -> Result<f64> {
    if k_points < 64 {
        return invalid(format!("need at least 64 momenta, got {k_points}"));
    }
    if !(j.is_finite() && g0.is_finite() && g1.is_finite() && t.is_finite()) {
        return invalid("echo arguments must be finite");
    }
    let h = PI / (k_points - 1) as f64;
    let mut sum = 0.0;
    for i in 0..k_points {
        let k = i as f64 * h;
        let phi = 0.5 * (bogoliubov_angle(j, g0, k) - bogoliubov_angle(j, g1, k));
        let (s, co) = phi.sin_cos();
        let amp = c(co * co, 0.0) + C64::from_polar(s * s, -2.0 * dispersion(j, g1, k) * t);
        let w = if i == 0 || i == k_points - 1 {
            0.5
        } else {
            1.0
        };
        sum -= w * amp.norm().max(1e-300).ln();
    }
    Ok(sum * h / PI)
}

/// Free-fermion echo on a grid of times.
pub fn loschmidt_ff_curve(
    j: f64,
    g0: f64,
    g1: f64,
    times: &[f64],
    k_points: usize,
) -> Result<Vec<f64>> {
    times
        .par_iter()
        .map(|&t| loschmidt_ff(j, g0, g1, t, k_points))
        .collect()
}

/// Critical times `t*_n = π(2n+1) / (2ε_{k*})` of a quench across the
/// critical point, with `cos k* = (J² + g0·g1) / (J(g0 + g1))`. Returns
/// `None` when the quench does not cross.
pub fn critical_times(j: f64, g0: f64, g1: f64, count: usize) -> Option<Vec<f64>> {
    let cos_k = (j * j + g0 * g1) / (j * (g0 + g1));
    if !cos_k.is_finite() || cos_k.abs() > 1.0 {
        return None;
    }
    let e = dispersion(j, g1, cos_k.acos());
    Some(
        (0..count)
            .map(|n| PI * (2 * n + 1) as f64 / (2.0 * e))
            .collect(),
    )
}

/// Echo of the periodic `n_sites` chain by exact diagonalisation.
pub fn loschmidt_exact_ed(spec: &QuenchSpec, n_sites: usize, t: f64) -> Result<f64> {
    Ok(loschmidt_ed_curve(spec.j, spec.g0, spec.g1, n_sites, &[t])?[0])
}

/// Exact-diagonalisation echo at several times.
///
/// The initial ground state and the dynamics both live in the
/// translation-invariant (zero-momentum) sector, which is diagonalised
/// densely.
pub fn loschmidt_ed_curve(
    j: f64,
    g0: f64,
    g1: f64,
    n_sites: usize,
    times: &[f64],
) -> Result<Vec<f64>> {
    if n_sites < 2 {
        return invalid("periodic chain needs at least two sites");
    }
    if n_sites > ED_MAX_SITES {
        return Err(Error::ResourceLimit(format!(
            "exact diagonalisation limited to {ED_MAX_SITES} sites, got {n_sites}"
        )));
    }
    let sector = MomentumSector::new(n_sites);
    let h0 = SymmetricEigen::new(sector.hamiltonian(j, g0));
    let ground = (0..h0.eigenvalues.len())
        .min_by(|&a, &b| h0.eigenvalues[a].total_cmp(&h0.eigenvalues[b]))
        .unwrap_or(0);
    let psi0: DVector<f64> = h0.eigenvectors.column(ground).into_owned();
    let h1 = SymmetricEigen::new(sector.hamiltonian(j, g1));
    let weights: Vec<f64> = (0..h1.eigenvalues.len())
        .map(|i| h1.eigenvectors.column(i).dot(&psi0).powi(2))
        .collect();
    let energies: Vec<f64> = h1.eigenvalues.iter().copied().collect();
    Ok(times
        .par_iter()
        .map(|&t| {
            let amp: C64 = weights
                .iter()
                .zip(&energies)
                .map(|(w, e)| C64::from_polar(*w, -e * t))
                .sum();
            -amp.norm_sqr().max(1e-300).ln() / n_sites as f64
        })
        .collect())
}

/// Zero-momentum basis: one normalised orbit sum per cyclic class of bit
/// strings.
struct MomentumSector {
    n: usize,
    reps: Vec<usize>,
    orbit: Vec<usize>,
    index: std::collections::HashMap<usize, usize>,
}

impl MomentumSector {
    fn new(n: usize) -> Self {
        let mask = (1usize << n) - 1;
        let rotate = |s: usize| ((s << 1) | (s >> (n - 1))) & mask;
        let mut reps = vec![];
        let mut orbit = vec![];
        let mut index = std::collections::HashMap::new();
        for s in 0..=mask {
            let mut r = s;
            let mut min = s;
            let mut len = 0;
            loop {
                r = rotate(r);
                len += 1;
                min = min.min(r);
                if r == s {
                    break;
                }
            }
            if min == s {
                index.insert(s, reps.len());
                reps.push(s);
                orbit.push(len);
            }
        }
        Self {
            n,
            reps,
            orbit,
            index,
        }
    }

    fn representative(&self, s: usize) -> usize {
        let mask = (1usize << self.n) - 1;
        let mut r = s;
        let mut min = s;
        for _ in 0..self.n {
            r = ((r << 1) | (r >> (self.n - 1))) & mask;
            min = min.min(r);
        }
        min
    }

    fn hamiltonian(&self, j: f64, g: f64) -> DMatrix<f64> {
        let n = self.n;
        let dim = self.reps.len();
        let mut h = DMatrix::zeros(dim, dim);
        for (a, &s) in self.reps.iter().enumerate() {
            let aligned = (0..n)
                .filter(|&i| (s >> i & 1) == (s >> ((i + 1) % n) & 1))
                .count();
            h[(a, a)] = j * (2.0 * aligned as f64 - n as f64);
            for i in 0..n {
                let flipped = s ^ (1 << i);
                let b = self.index[&self.representative(flipped)];
                h[(b, a)] += g * (self.orbit[a] as f64 / self.orbit[b] as f64).sqrt();
            }
        }
        h
    }
}
