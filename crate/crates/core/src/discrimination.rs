//! Distinguishability of reservoir phases through the qubits they prepare.
//!
//! If every qubit really left in `ρ(θ)`, then `N` copies would have
//! fidelity `F^N → 0`, and two overlapping reservoir states could be told
//! apart almost perfectly. The exact correlated states cannot do better than
//! the reservoir states themselves, which is what [`exact_report`] checks.

use serde::Serialize;

use crate::channels::{sequential_prepare, QubitGate, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, C64};
use crate::reservoir::{reservoir_overlap, ReservoirState};

const DATA_PROCESSING_TOL: f64 = 1e-9;

fn check_pair(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    rho.check_density()?;
    sigma.check_density()
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    Ok((0.5 * rho.sub(sigma)?.trace_norm()).clamp(0.0, 1.0))
}

/// Uhlmann fidelity `tr √(√ρ σ √ρ)` (square-root convention), evaluated as
/// the nuclear norm `‖√ρ √σ‖₁`.
pub fn fidelity(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    let product = rho.sqrt_psd().into_matrix() * sigma.sqrt_psd().into_matrix();
    let f: f64 = product.singular_values().iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Minimum error probability for deciding between `ρ` (prior `p`) and `σ`.
pub fn helstrom_error(rho: &HermitianMatrix, sigma: &HermitianMatrix, prior: f64) -> Result<f64> {
    if !(prior > 0.0 && prior < 1.0) {
        return Err(Error::InvalidParameter(format!("prior {prior} not in (0, 1)")));
    }
    check_pair(rho, sigma)?;
    let weighted = rho.scale(prior).sub(&sigma.scale(1.0 - prior))?;
    Ok((0.5 * (1.0 - weighted.trace_norm())).clamp(0.0, 0.5))
}

/// Single-use qubit state for reservoir phase `θ`:
/// `½[[1, (1−1/L)e^{−iθ}], [(1−1/L)e^{iθ}, 1]]`.
pub fn rho_theta(theta: f64, length: usize) -> Result<HermitianMatrix> {
    if length == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    let r = 1.0 - 1.0 / length as f64;
    Ok(HermitianMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => C64::from_polar(0.5 * r, -theta),
        (1, 0) => C64::from_polar(0.5 * r, theta),
        _ => C64::new(0.5, 0.0),
    }))
}

/// Closed-form fidelity of `ρ(θ1)` and `ρ(θ2)`.
pub fn per_copy_fidelity(theta1: f64, theta2: f64, length: usize) -> f64 {
    let r = 1.0 - 1.0 / length as f64;
    (1.0 - 0.5 * r * r * (1.0 - (theta1 - theta2).cos())).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscriminationReport {
    pub theta1: f64,
    pub theta2: f64,
    pub length: usize,
    pub n_qubits: usize,
    pub naive_fidelity_per_copy: f64,
    pub naive_fidelity_n: f64,
    /// `F^N / 2`, the error bound for the uncorrelated product states.
    pub naive_error_bound: f64,
    pub exact_trace_distance: Option<f64>,
    pub exact_helstrom_error: Option<f64>,
    pub reservoir_overlap_magnitude: f64,
    /// Helstrom error for the two pure reservoir states; no measurement on
    /// the qubits can go below it.
    pub reservoir_error_floor: f64,
    /// The product-state bound beats the reservoir floor.
    pub paradox: bool,
}

/// Product-state (counterfactual) side of the comparison; closed forms only.
pub fn naive_report(theta1: f64, theta2: f64, length: usize, n_qubits: usize) -> Result<DiscriminationReport> {
    if n_qubits == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let overlap = reservoir_overlap(theta1, theta2, length)?.norm().min(1.0);
    let floor = 0.5 * (1.0 - (1.0 - overlap * overlap).max(0.0).sqrt());
    let f1 = per_copy_fidelity(theta1, theta2, length);
    let f_n = f1.powi(n_qubits as i32);
    let bound = 0.5 * f_n;
    Ok(DiscriminationReport {
        theta1,
        theta2,
        length,
        n_qubits,
        naive_fidelity_per_copy: f1,
        naive_fidelity_n: f_n,
        naive_error_bound: bound,
        exact_trace_distance: None,
        exact_helstrom_error: None,
        reservoir_overlap_magnitude: overlap,
        reservoir_error_floor: floor,
        paradox: bound < floor,
    })
}

/// Exact `N`-qubit joint state prepared by `η_{L,0}` with phase `θ`.
pub fn exact_joint_state(theta: f64, length: usize, n_qubits: usize) -> Result<HermitianMatrix> {
    if n_qubits > DEFAULT_DENSE_CAP {
        return Err(Error::Capacity {
            what: "qubits in dense joint state",
            requested: n_qubits,
            cap: DEFAULT_DENSE_CAP,
        });
    }
    let eta = ReservoirState::eta(length, 0, theta, n_qubits)?;
    sequential_prepare(n_qubits, &QubitGate::hadamard_like(), &eta)?.joint_qubit_state()
}

/// Naive report plus the exact correlated-state trace distance and error.
pub fn exact_report(theta1: f64, theta2: f64, length: usize, n_qubits: usize) -> Result<DiscriminationReport> {
    let mut report = naive_report(theta1, theta2, length, n_qubits)?;
    let a = exact_joint_state(theta1, length, n_qubits)?;
    let b = exact_joint_state(theta2, length, n_qubits)?;
    let d = trace_distance(&a, &b)?;
    let err = 0.5 * (1.0 - d);
    if err < report.reservoir_error_floor - DATA_PROCESSING_TOL {
        return Err(Error::Consistency(format!(
            "qubit error {err} below reservoir floor {}",
            report.reservoir_error_floor
        )));
    }
    report.exact_trace_distance = Some(d);
    report.exact_helstrom_error = Some(err);
    Ok(report)
}
