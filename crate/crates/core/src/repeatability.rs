//! Repeatability error `ξ_N = ρ_N − ρ^{⊗N}`: the exact state of `N` qubits
//! prepared from one reservoir minus `N` independent single-use outputs.

use crate::channels::{ground_projector, phi_channel, sequential_prepare, QubitGate, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::linalg::{hamming_weight, HermitianMatrix, C64};
use crate::reservoir::ReservoirState;

fn check_args(n: usize, length: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if length <= n {
        return Err(Error::InvalidParameter(format!("need L > N, got L = {length}, N = {n}")));
    }
    if n > DEFAULT_DENSE_CAP {
        return Err(Error::Capacity {
            what: "qubits in repeatability error",
            requested: n,
            cap: DEFAULT_DENSE_CAP,
        });
    }
    Ok(())
}

/// Reservoir `|η_{L,0}, 0⟩` with room for `n` downward shifts.
fn reservoir(n: usize, length: usize) -> Result<ReservoirState> {
    ReservoirState::eta(length, 0, 0.0, n)
}

/// Closed form for the Hadamard-like gate:
/// `2^{-N}[(1 − |h−h'|/L) − Π_i (1 − |z_i − z'_i|/L)]`.
fn xi_closed_form(n: usize, length: usize) -> HermitianMatrix {
    let l = length as f64;
    let scale = 0.5f64.powi(n as i32);
    let correlated: Vec<f64> = (0..=n).map(|d| 1.0 - d.min(length) as f64 / l).collect();
    let product: Vec<f64> = (0..=n).map(|flips| (1.0 - 1.0 / l).powi(flips as i32)).collect();
    HermitianMatrix::from_fn(1usize << n, |z, zp| {
        let dh = hamming_weight(z).abs_diff(hamming_weight(zp));
        let flips = hamming_weight(z ^ zp);
        C64::new(scale * (correlated[dh] - product[flips]), 0.0)
    })
}

/// `ξ_N` built from the joint state and `N` copies of the single-use channel.
pub fn xi_matrix_via_channels(n: usize, length: usize, gate: &QubitGate) -> Result<HermitianMatrix> {
    check_args(n, length)?;
    let eta = reservoir(n, length)?;
    let joint = sequential_prepare(n, gate, &eta)?.joint_qubit_state()?;
    let single = phi_channel(&eta, gate, &ground_projector())?;
    joint.sub(&single.tensor_power(n))
}

/// `ξ_N`; closed form for the Hadamard-like gate, channel pipeline otherwise.
pub fn xi_matrix(n: usize, length: usize, gate: &QubitGate) -> Result<HermitianMatrix> {
    check_args(n, length)?;
    if gate.prepares_plus() {
        Ok(xi_closed_form(n, length))
    } else {
        xi_matrix_via_channels(n, length, gate)
    }
}

/// `‖ξ_N‖₁`.
pub fn xi_trace_norm(n: usize, length: usize, gate: &QubitGate) -> Result<f64> {
    Ok(xi_matrix(n, length, gate)?.trace_norm())
}

/// `(N − 1)/L`.
pub fn xi_trace_norm_approx(n: usize, length: usize) -> Result<f64> {
    if n == 0 || length == 0 {
        return Err(Error::InvalidParameter("N and L must be at least 1".into()));
    }
    Ok((n - 1) as f64 / length as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatabilityResult {
    pub n_qubits: usize,
    pub length: usize,
    pub xi: Option<HermitianMatrix>,
    pub trace_norm_exact: f64,
    pub trace_norm_approx: f64,
}

impl RepeatabilityResult {
    pub fn compute(n: usize, length: usize, gate: &QubitGate, keep_matrix: bool) -> Result<Self> {
        let xi = xi_matrix(n, length, gate)?;
        Ok(Self {
            n_qubits: n,
            length,
            trace_norm_exact: xi.trace_norm(),
            trace_norm_approx: xi_trace_norm_approx(n, length)?,
            xi: keep_matrix.then_some(xi),
        })
    }
}
