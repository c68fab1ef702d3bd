//! Energy-conserving qubit/reservoir interaction and its reduced channels.
//!
//! `V(U) = Σ_{n,n'} |ψ_n⟩⟨ψ_n|U|ψ_{n'}⟩⟨ψ_{n'}| ⊗ Δ^{n'-n}`: every qubit
//! excitation is paid for by moving the reservoir one level down.
//!
//! Joint qubit–reservoir pure states are kept as a [`BranchState`]: one
//! reservoir ket per qubit bitstring. Bitstrings are big-endian, qubit 0
//! being the most significant bit, and `|ψ0⟩` is basis index 0.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::RangeInclusive;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{hamming_weight, HermitianMatrix, C64};
use crate::reservoir::{shift_ket, ReservoirState};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Largest register for which dense `2^N` objects are built by default.
pub const DEFAULT_DENSE_CAP: usize = 12;
/// Hard limit on dense branch storage regardless of the requested cap.
pub const MAX_DENSE_QUBITS: usize = 16;

pub const UNITARITY_TOL: f64 = 1e-12;

/// 2×2 unitary in the `{|ψ0⟩, |ψ1⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitGate {
    pub u00: C64,
    pub u01: C64,
    pub u10: C64,
    pub u11: C64,
}

impl QubitGate {
    pub fn new(u00: C64, u01: C64, u10: C64, u11: C64) -> Result<Self> {
        let g = Self { u00, u01, u10, u11 };
        let m = g.matrix();
        let err = (m.adjoint() * &m - DMatrix::<C64>::identity(2, 2))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if err > UNITARITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "gate is not unitary (deviation {err:e})"
            )));
        }
        Ok(g)
    }

    /// The unitary with `U|ψ0⟩ = a|ψ0⟩ + b|ψ1⟩`, completed as
    /// `[[a, -b*], [b, a*]]`.
    pub fn from_column(a: C64, b: C64) -> Result<Self> {
        Self::new(a, -b.conj(), b, a.conj())
    }

    /// `|ψ0⟩ → |+⟩`, `|ψ1⟩ → |−⟩`.
    pub fn hadamard_like() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            u00: h,
            u01: h,
            u10: h,
            u11: -h,
        }
    }

    pub fn identity() -> Self {
        Self {
            u00: ONE,
            u01: ZERO,
            u10: ZERO,
            u11: ONE,
        }
    }

    /// True when `U|ψ0⟩ = |+⟩` to machine precision; the closed forms for
    /// correlated statistics assume this.
    pub fn prepares_plus(&self) -> bool {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        (self.u00 - h).norm() < 1e-15 && (self.u10 - h).norm() < 1e-15
    }

    pub fn entry(&self, n: usize, m: usize) -> C64 {
        match (n, m) {
            (0, 0) => self.u00,
            (0, 1) => self.u01,
            (1, 0) => self.u10,
            _ => self.u11,
        }
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[self.u00, self.u01, self.u10, self.u11])
    }
}

/// `|ψ0⟩⟨ψ0|`.
pub fn ground_projector() -> HermitianMatrix {
    HermitianMatrix::diagonal(&[1.0, 0.0])
}

/// Mixed reservoir state on a ladder window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirDensity {
    window_min: i64,
    matrix: HermitianMatrix,
}

impl ReservoirDensity {
    pub fn new(window_min: i64, matrix: HermitianMatrix) -> Self {
        Self { window_min, matrix }
    }

    pub fn from_pure(state: &ReservoirState) -> Self {
        Self {
            window_min: state.window_min(),
            matrix: HermitianMatrix::projector(state.amplitudes()),
        }
    }

    pub fn window_min(&self) -> i64 {
        self.window_min
    }

    pub fn width(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `tr(Δ^a σ) = Σ_j σ_{j-a, j}`.
    pub fn delta_expectation(&self, a: i64) -> C64 {
        let w = self.width() as i64;
        (0..w)
            .filter(|j| (0..w).contains(&(j - a)))
            .map(|j| self.matrix.get((j - a) as usize, j as usize))
            .sum()
    }

    /// `⟨ψ|σ|ψ⟩` with windows aligned by ladder level.
    pub fn fidelity_with(&self, state: &ReservoirState) -> f64 {
        let ket: Vec<C64> = (0..self.width())
            .map(|i| state.amplitude_at(self.window_min + i as i64))
            .collect();
        self.matrix.expectation(&ket).expect("dimensions agree by construction")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// `rows[z]` is the (unnormalized) reservoir ket attached to bitstring `z`.
    Dense { window_min: i64, rows: DMatrix<C64> },
    /// All qubits started in `|ψ0⟩` and went through the same gate once:
    /// branch `z` carries `u00^{N-h} u10^h Δ^{-h}|η⟩`, `h = weight(z)`.
    Uniform { gate: QubitGate, eta: ReservoirState },
}

/// Joint pure state of `N` qubits and the reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    n_qubits: usize,
    repr: Repr,
}

impl BranchState {
    /// Qubits in the given pure input states (amplitudes on `|ψ0⟩, |ψ1⟩`),
    /// none processed yet.
    pub fn product(inputs: &[[C64; 2]], reservoir: &ReservoirState) -> Result<Self> {
        let n = inputs.len();
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity {
                what: "dense branch qubits",
                requested: n,
                cap: MAX_DENSE_QUBITS,
            });
        }
        let w = reservoir.width();
        let mut rows = DMatrix::zeros(1usize << n, w);
        for z in 0..(1usize << n) {
            let mut amp = ONE;
            for (q, input) in inputs.iter().enumerate() {
                amp *= input[(z >> (n - 1 - q)) & 1];
            }
            if amp == ZERO {
                continue;
            }
            for (j, a) in reservoir.amplitudes().iter().enumerate() {
                rows[(z, j)] = amp * a;
            }
        }
        Ok(Self {
            n_qubits: n,
            repr: Repr::Dense {
                window_min: reservoir.window_min(),
                rows,
            },
        })
    }

    /// `N` qubits in `|ψ0⟩`, none processed.
    pub fn ground(n: usize, reservoir: &ReservoirState) -> Result<Self> {
        Self::product(&vec![[ONE, ZERO]; n], reservoir)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.repr, Repr::Uniform { .. })
    }

    /// Dense form; for compact states this materializes `2^N` kets.
    pub fn to_dense(&self) -> Result<Self> {
        match &self.repr {
            Repr::Dense { .. } => Ok(self.clone()),
            Repr::Uniform { gate, eta } => {
                let n = self.n_qubits;
                if n > MAX_DENSE_QUBITS {
                    return Err(Error::Capacity {
                        what: "dense branch qubits",
                        requested: n,
                        cap: MAX_DENSE_QUBITS,
                    });
                }
                let shifted: Vec<ReservoirState> = (0..=n)
                    .map(|h| eta.apply_shift(-(h as i64)))
                    .collect::<Result<_>>()?;
                let amps = weight_amplitudes(gate, n);
                let mut rows = DMatrix::zeros(1usize << n, eta.width());
                for z in 0..(1usize << n) {
                    let h = hamming_weight(z);
                    for (j, a) in shifted[h].amplitudes().iter().enumerate() {
                        rows[(z, j)] = amps[h] * a;
                    }
                }
                Ok(Self {
                    n_qubits: n,
                    repr: Repr::Dense {
                        window_min: eta.window_min(),
                        rows,
                    },
                })
            }
        }
    }

    /// Branch ket for bitstring `z` (amplitude folded in) and its window start.
    pub fn branch(&self, z: usize) -> Result<(i64, Vec<C64>)> {
        if z >= 1usize << self.n_qubits {
            return Err(Error::InvalidParameter(format!("bitstring {z} out of range")));
        }
        match &self.repr {
            Repr::Dense { window_min, rows } => {
                Ok((*window_min, rows.row(z).iter().copied().collect()))
            }
            Repr::Uniform { gate, eta } => {
                let h = hamming_weight(z);
                let amp = weight_amplitudes(gate, self.n_qubits)[h];
                let s = eta.apply_shift(-(h as i64))?;
                Ok((eta.window_min(), s.amplitudes().iter().map(|a| amp * a).collect()))
            }
        }
    }

    /// `Σ_z ‖branch_z‖²`.
    pub fn norm_sqr(&self) -> f64 {
        match &self.repr {
            Repr::Dense { rows, .. } => rows.iter().map(|a| a.norm_sqr()).sum(),
            Repr::Uniform { gate, eta } => {
                let n = self.n_qubits;
                let p0 = gate.u00.norm_sqr();
                let p1 = gate.u10.norm_sqr();
                let binom: f64 = (0..=n)
                    .map(|h| {
                        statrs::function::factorial::binomial(n as u64, h as u64)
                            * p0.powi((n - h) as i32)
                            * p1.powi(h as i32)
                    })
                    .sum();
                binom * eta.norm_sqr()
            }
        }
    }

    /// Applies `V(U)` to qubit `q`.
    pub fn apply_vu(&self, q: usize, gate: &QubitGate) -> Result<Self> {
        let n = self.n_qubits;
        if q >= n {
            return Err(Error::InvalidParameter(format!(
                "qubit index {q} out of range for {n} qubits"
            )));
        }
        let dense = self.to_dense()?;
        let Repr::Dense { window_min, rows } = dense.repr else {
            unreachable!("to_dense returns the dense form")
        };
        let mask = 1usize << (n - 1 - q);
        let mut out = DMatrix::zeros(rows.nrows(), rows.ncols());
        for z0 in (0..rows.nrows()).filter(|z| z & mask == 0) {
            let z1 = z0 | mask;
            let old0: Vec<C64> = rows.row(z0).iter().copied().collect();
            let old1: Vec<C64> = rows.row(z1).iter().copied().collect();
            // |ψ_{n'}⟩ → |ψ_n⟩ moves the reservoir by n' - n.
            let up1 = if gate.u01 != ZERO { shift_ket(window_min, &old1, 1)? } else { vec![ZERO; old1.len()] };
            let down0 = if gate.u10 != ZERO { shift_ket(window_min, &old0, -1)? } else { vec![ZERO; old0.len()] };
            for j in 0..rows.ncols() {
                out[(z0, j)] = gate.u00 * old0[j] + gate.u01 * up1[j];
                out[(z1, j)] = gate.u10 * down0[j] + gate.u11 * old1[j];
            }
        }
        Ok(Self {
            n_qubits: n,
            repr: Repr::Dense {
                window_min,
                rows: out,
            },
        })
    }

    /// Largest entrywise difference between the branch kets of two states
    /// on the same window.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let a = self.to_dense()?;
        let b = other.to_dense()?;
        match (&a.repr, &b.repr) {
            (Repr::Dense { window_min: wa, rows: ra }, Repr::Dense { window_min: wb, rows: rb }) => {
                if wa != wb || ra.shape() != rb.shape() {
                    return Err(Error::DimensionMismatch(ra.ncols(), rb.ncols()));
                }
                Ok(ra.iter().zip(rb.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
            }
            _ => unreachable!(),
        }
    }

    /// Reduced qubit state `tr_E |Ψ⟩⟨Ψ|` with the default dense cap.
    pub fn joint_qubit_state(&self) -> Result<HermitianMatrix> {
        self.joint_qubit_state_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn joint_qubit_state_with_cap(&self, cap: usize) -> Result<HermitianMatrix> {
        let n = self.n_qubits;
        if n > cap {
            return Err(Error::Capacity {
                what: "qubits in dense joint state",
                requested: n,
                cap,
            });
        }
        match &self.repr {
            Repr::Dense { rows, .. } => Ok(HermitianMatrix::symmetrized(rows * rows.adjoint())),
            Repr::Uniform { gate, eta } => {
                let amps = weight_amplitudes(gate, n);
                let ni = n as i64;
                let overlaps: Vec<C64> = (-ni..=ni).map(|d| eta.shift_overlap(d)).collect();
                // ⟨Δ^{-h'}η|Δ^{-h}η⟩ = ⟨η|Δ^{h'-h}|η⟩
                Ok(HermitianMatrix::from_fn(1usize << n, |z, zp| {
                    let h = hamming_weight(z);
                    let hp = hamming_weight(zp);
                    amps[h] * amps[hp].conj() * overlaps[(hp as i64 - h as i64 + ni) as usize]
                }))
            }
        }
    }

    /// Reduced reservoir state `tr_S |Ψ⟩⟨Ψ|`.
    pub fn reservoir_density(&self) -> Result<ReservoirDensity> {
        match &self.repr {
            Repr::Dense { window_min, rows } => Ok(ReservoirDensity::new(
                *window_min,
                HermitianMatrix::symmetrized(rows.transpose() * rows.map(|z| z.conj())),
            )),
            Repr::Uniform { gate, eta } => {
                let n = self.n_qubits;
                let p0 = gate.u00.norm_sqr();
                let p1 = gate.u10.norm_sqr();
                let w = eta.width();
                let mut acc = DMatrix::zeros(w, w);
                for h in 0..=n {
                    let weight = statrs::function::factorial::binomial(n as u64, h as u64)
                        * p0.powi((n - h) as i32)
                        * p1.powi(h as i32);
                    if weight == 0.0 {
                        continue;
                    }
                    let s = eta.apply_shift(-(h as i64))?;
                    let proj = HermitianMatrix::projector(s.amplitudes());
                    acc += proj.as_matrix() * C64::new(weight, 0.0);
                }
                Ok(ReservoirDensity::new(eta.window_min(), HermitianMatrix::symmetrized(acc)))
            }
        }
    }

    /// Single-qubit reduced state of qubit `q`.
    pub fn qubit_marginal(&self, q: usize) -> Result<HermitianMatrix> {
        self.joint_qubit_state()?.reduce_to_qubits(self.n_qubits, &[q])
    }
}

/// `u00^{N-h} u10^h` for `h = 0..=N`.
fn weight_amplitudes(gate: &QubitGate, n: usize) -> Vec<C64> {
    (0..=n)
        .map(|h| gate.u00.powu((n - h) as u32) * gate.u10.powu(h as u32))
        .collect()
}

/// `V(U)` on qubit `qubit_index` of `joint`.
pub fn apply_vu(qubit_index: usize, gate: &QubitGate, joint: &BranchState) -> Result<BranchState> {
    joint.apply_vu(qubit_index, gate)
}

/// Exact joint state after `N` qubits, each starting in `|ψ0⟩`, are
/// processed in turn by `V(U)` against `eta`. Returned in compact
/// per-Hamming-weight form, so any `N` is representable.
pub fn sequential_prepare(n: usize, gate: &QubitGate, eta: &ReservoirState) -> Result<BranchState> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one qubit".into()));
    }
    // Branches reach Δ^{-N}|η⟩ when u10 ≠ 0.
    if gate.u10 != ZERO {
        eta.apply_shift(-(n as i64))?;
    }
    Ok(BranchState {
        n_qubits: n,
        repr: Repr::Uniform { gate: *gate, eta: eta.clone() },
    })
}

/// Dense reference path for [`sequential_prepare`]: applies `V(U)` qubit by
/// qubit in the given order.
pub fn sequential_prepare_in_order(
    order: &[usize],
    gate: &QubitGate,
    eta: &ReservoirState,
) -> Result<BranchState> {
    let mut state = BranchState::ground(order.len(), eta)?;
    for &q in order {
        state = state.apply_vu(q, gate)?;
    }
    Ok(state)
}

/// `tr_E` of the joint pure state.
pub fn joint_qubit_state(branches: &BranchState) -> Result<HermitianMatrix> {
    branches.joint_qubit_state()
}

fn check_qubit_density(rho0: &HermitianMatrix) -> Result<()> {
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch(rho0.dim(), 2));
    }
    rho0.check_density()
}

/// `Φ_{σ,U}(ρ0) = tr_E[V(U)(ρ0 ⊗ |σ⟩⟨σ|)V(U)†]`.
pub fn phi_channel(
    sigma: &ReservoirState,
    gate: &QubitGate,
    rho0: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    check_qubit_density(rho0)?;
    // r[n'] holds V(U)|ψ_{n'}⟩|σ⟩ as branch kets per output n.
    let mut r: Vec<[Vec<C64>; 2]> = Vec::with_capacity(2);
    for input in [[ONE, ZERO], [ZERO, ONE]] {
        let out = BranchState::product(&[input], sigma)?.apply_vu(0, gate)?;
        r.push([out.branch(0)?.1, out.branch(1)?.1]);
    }
    let inner = |x: &[C64], y: &[C64]| -> C64 { x.iter().zip(y).map(|(a, b)| a.conj() * b).sum() };
    Ok(HermitianMatrix::from_fn(2, |n, m| {
        let mut acc = ZERO;
        for np in 0..2 {
            for mp in 0..2 {
                let c = rho0.get(np, mp);
                if c != ZERO {
                    acc += c * inner(&r[mp][m], &r[np][n]);
                }
            }
        }
        acc
    }))
}

/// `Δ^a σ (Δ^b)†` on a window: entry `(j, k)` is `σ_{j-a, k-b}`.
fn shift_two_sided(window_min: i64, sigma: &DMatrix<C64>, a: i64, b: i64) -> Result<DMatrix<C64>> {
    let w = sigma.nrows() as i64;
    let mut row_lo = i64::MAX;
    let mut row_hi = i64::MIN;
    let mut col_lo = i64::MAX;
    let mut col_hi = i64::MIN;
    for j in 0..w {
        for k in 0..w {
            if sigma[(j as usize, k as usize)] != ZERO {
                row_lo = row_lo.min(j);
                row_hi = row_hi.max(j);
                col_lo = col_lo.min(k);
                col_hi = col_hi.max(k);
            }
        }
    }
    let mut out = DMatrix::zeros(w as usize, w as usize);
    if row_lo == i64::MAX {
        return Ok(out);
    }
    for (lo, hi, s) in [(row_lo, row_hi, a), (col_lo, col_hi, b)] {
        if lo + s < 0 || hi + s >= w {
            return Err(Error::WindowOverflow {
                shift: s,
                support_min: window_min + lo,
                support_max: window_min + hi,
                window_min,
                window_max: window_min + w - 1,
            });
        }
    }
    for j in row_lo..=row_hi {
        for k in col_lo..=col_hi {
            out[((j + a) as usize, (k + b) as usize)] = sigma[(j as usize, k as usize)];
        }
    }
    Ok(out)
}

/// `Λ_{ρ0,U}(σ)` for a possibly mixed reservoir state:
/// `Σ_n Σ_{n',m'} ρ0_{n'm'} U_{nn'} conj(U_{nm'}) Δ^{n'-n} σ Δ^{n-m'}`.
pub fn lambda_on_density(
    sigma: &ReservoirDensity,
    gate: &QubitGate,
    rho0: &HermitianMatrix,
) -> Result<ReservoirDensity> {
    check_qubit_density(rho0)?;
    let w = sigma.width();
    let mut acc = DMatrix::zeros(w, w);
    for n in 0..2usize {
        for np in 0..2usize {
            for mp in 0..2usize {
                let c = rho0.get(np, mp) * gate.entry(n, np) * gate.entry(n, mp).conj();
                if c == ZERO {
                    continue;
                }
                let shifted = shift_two_sided(
                    sigma.window_min(),
                    sigma.matrix().as_matrix(),
                    np as i64 - n as i64,
                    mp as i64 - n as i64,
                )?;
                acc += shifted * c;
            }
        }
    }
    Ok(ReservoirDensity::new(sigma.window_min(), HermitianMatrix::symmetrized(acc)))
}

/// `Λ_{ρ0,U}(|σ⟩⟨σ|) = tr_S[V(U)(ρ0 ⊗ |σ⟩⟨σ|)V(U)†]`.
pub fn lambda_channel(
    sigma: &ReservoirState,
    gate: &QubitGate,
    rho0: &HermitianMatrix,
) -> Result<ReservoirDensity> {
    lambda_on_density(&ReservoirDensity::from_pure(sigma), gate, rho0)
}

/// One row of [`delta_expectation_invariance_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaInvariance {
    pub a: i64,
    pub before: C64,
    pub after: C64,
}

/// `tr(Δ^a σ)` and `tr(Δ^a Λ(σ))` for each `a` in `a_range`.
pub fn delta_expectation_invariance_check(
    sigma: &ReservoirDensity,
    gate: &QubitGate,
    rho0: &HermitianMatrix,
    a_range: RangeInclusive<i64>,
) -> Result<Vec<DeltaInvariance>> {
    let after = lambda_on_density(sigma, gate, rho0)?;
    Ok(a_range
        .map(|a| DeltaInvariance {
            a,
            before: sigma.delta_expectation(a),
            after: after.delta_expectation(a),
        })
        .collect())
}

/// Single-qubit marginals of the first and second processed qubits after
/// two uses of the same reservoir.
pub fn second_use_marginal_check(
    eta: &ReservoirState,
    gate: &QubitGate,
) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let joint = sequential_prepare_in_order(&[0, 1], gate, eta)?;
    Ok((joint.qubit_marginal(0)?, joint.qubit_marginal(1)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus_expectation(rho: &HermitianMatrix) -> f64 {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        rho.expectation(&[h, h]).unwrap()
    }

    /// `(1 - 1/(2L))|+⟩⟨+| + (1/(2L))|−⟩⟨−|` written out in the energy basis.
    fn rho_s_closed(l: usize) -> HermitianMatrix {
        let off = 0.5 * (1.0 - 1.0 / l as f64);
        HermitianMatrix::from_fn(2, |i, j| if i == j { C64::new(0.5, 0.0) } else { C64::new(off, 0.0) })
    }

    fn eta(l: usize, guard: usize) -> ReservoirState {
        ReservoirState::eta(l, 50, 0.0, guard).unwrap()
    }

    #[test]
    fn gate_validation() {
        assert!(QubitGate::new(ONE, ONE, ZERO, ONE).is_err());
        let g = QubitGate::from_column(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        assert!(!g.prepares_plus());
        assert!(QubitGate::hadamard_like().prepares_plus());
    }

    #[test]
    fn single_use_branches() {
        let e = eta(5, 2);
        let s = BranchState::ground(1, &e).unwrap().apply_vu(0, &QubitGate::hadamard_like()).unwrap();
        let (_, b0) = s.branch(0).unwrap();
        let (_, b1) = s.branch(1).unwrap();
        let down = e.apply_shift(-1).unwrap();
        for j in 0..e.width() {
            assert!((b0[j] - e.amplitudes()[j] * FRAC_1_SQRT_2).norm() < 1e-15);
            assert!((b1[j] - down.amplitudes()[j] * FRAC_1_SQRT_2).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_gate_leaves_joint_unchanged() {
        let e = eta(4, 0);
        let s = BranchState::ground(3, &e).unwrap();
        let t = s.apply_vu(1, &QubitGate::identity()).unwrap();
        assert_eq!(s.max_abs_diff(&t).unwrap(), 0.0);
    }

    #[test]
    fn sequential_matches_stepwise_and_order() {
        let e = eta(6, 5);
        let g = QubitGate::from_column(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let compact = sequential_prepare(4, &g, &e).unwrap();
        let a = sequential_prepare_in_order(&[0, 1, 2, 3], &g, &e).unwrap();
        let b = sequential_prepare_in_order(&[2, 0, 3, 1], &g, &e).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-15);
        assert!(compact.max_abs_diff(&a).unwrap() < 1e-15);
    }

    #[test]
    fn sequential_prepare_needs_headroom() {
        let e = eta(6, 2);
        assert!(matches!(
            sequential_prepare(3, &QubitGate::hadamard_like(), &e),
            Err(Error::WindowOverflow { .. })
        ));
        assert!(sequential_prepare(3, &QubitGate::identity(), &e).is_ok());
    }

    #[test]
    fn phi_channel_examples() {
        let rho0 = ground_projector();
        let h = QubitGate::hadamard_like();
        let r2 = phi_channel(&eta(2, 1), &h, &rho0).unwrap();
        assert!((plus_expectation(&r2) - 0.75).abs() < 1e-15);
        let r100 = phi_channel(&eta(100, 1), &h, &rho0).unwrap();
        assert!((r100.get(1, 0).re - 0.495).abs() < 1e-15);
        let id = phi_channel(&eta(7, 0), &QubitGate::identity(), &rho0).unwrap();
        assert!(id.max_abs_diff(&rho0).unwrap() < 1e-15);
    }

    #[test]
    fn phi_channel_rejects_bad_input() {
        let not_density = HermitianMatrix::diagonal(&[1.0, 1.0]);
        assert!(matches!(
            phi_channel(&eta(3, 1), &QubitGate::hadamard_like(), &not_density),
            Err(Error::NotDensityMatrix(_))
        ));
        assert!(matches!(
            phi_channel(&eta(3, 0), &QubitGate::hadamard_like(), &ground_projector()),
            Err(Error::WindowOverflow { .. })
        ));
    }

    #[test]
    fn phi_channel_mixed_input_is_linear() {
        let e = eta(5, 2);
        let g = QubitGate::from_column(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let p = 0.3;
        let mixed = HermitianMatrix::diagonal(&[p, 1.0 - p]);
        let lhs = phi_channel(&e, &g, &mixed).unwrap();
        let a = phi_channel(&e, &g, &HermitianMatrix::diagonal(&[1.0, 0.0])).unwrap();
        let b = phi_channel(&e, &g, &HermitianMatrix::diagonal(&[0.0, 1.0])).unwrap();
        let rhs = a.scale(p).add(&b.scale(1.0 - p)).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);
    }

    #[test]
    fn lambda_channel_examples() {
        let rho0 = ground_projector();
        let h = QubitGate::hadamard_like();
        let e10 = eta(10, 1);
        let out = lambda_channel(&e10, &h, &rho0).unwrap();
        assert!((out.fidelity_with(&e10) - 0.905).abs() < 1e-15);
        let id = lambda_channel(&e10, &QubitGate::identity(), &rho0).unwrap();
        assert!((id.fidelity_with(&e10) - 1.0).abs() < 1e-15);
        let spec = lambda_channel(&eta(2, 1), &h, &rho0).unwrap().matrix().eigenvalues();
        let top: Vec<f64> = spec.iter().rev().take(2).copied().collect();
        assert!((top[0] - 0.75).abs() < 1e-14 && (top[1] - 0.25).abs() < 1e-14);
        assert!(spec.iter().rev().skip(2).all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn lambda_matches_branch_partial_trace() {
        let e = eta(7, 3);
        let g = QubitGate::from_column(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let via_lambda = lambda_channel(&e, &g, &ground_projector()).unwrap();
        let via_branch = sequential_prepare(1, &g, &e).unwrap().reservoir_density().unwrap();
        assert!(via_lambda.matrix().max_abs_diff(via_branch.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn invariance_examples() {
        let h = QubitGate::hadamard_like();
        let rho0 = ground_projector();
        let sigma = ReservoirDensity::from_pure(&eta(4, 3));
        let rows = delta_expectation_invariance_check(&sigma, &h, &rho0, 0..=1).unwrap();
        assert!((rows[0].before.re - 1.0).abs() < 1e-15 && (rows[0].after.re - 1.0).abs() < 1e-15);
        assert!((rows[1].before.re - 0.75).abs() < 1e-15 && (rows[1].after.re - 0.75).abs() < 1e-15);
        let twice = lambda_on_density(&lambda_on_density(&sigma, &h, &rho0).unwrap(), &h, &rho0).unwrap();
        let rows = delta_expectation_invariance_check(&twice, &h, &rho0, 2..=2).unwrap();
        assert!((rows[0].before.re - 0.5).abs() < 1e-15);
        assert!((rows[0].after.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn second_use_examples() {
        let h = QubitGate::hadamard_like();
        let (a, b) = second_use_marginal_check(&eta(4, 2), &h).unwrap();
        assert!((plus_expectation(&a) - 0.875).abs() < 1e-15);
        assert!((plus_expectation(&b) - 0.875).abs() < 1e-15);
        let (a, b) = second_use_marginal_check(&eta(12, 2), &h).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        assert!(a.max_abs_diff(&rho_s_closed(12)).unwrap() < 1e-12);
        let (a, b) = second_use_marginal_check(&eta(5, 0), &QubitGate::identity()).unwrap();
        assert!(a.max_abs_diff(&ground_projector()).unwrap() < 1e-15);
        assert!(b.max_abs_diff(&ground_projector()).unwrap() < 1e-15);
    }

    #[test]
    fn joint_state_closed_form_entries() {
        let l = 50;
        let joint = sequential_prepare(2, &QubitGate::hadamard_like(), &eta(l, 3))
            .unwrap()
            .joint_qubit_state()
            .unwrap();
        assert!((joint.get(0b00, 0b11).re - 0.24).abs() < 1e-15);
        assert!((joint.get(0b01, 0b10).re - 0.25).abs() < 1e-15);
        let dense = sequential_prepare_in_order(&[0, 1], &QubitGate::hadamard_like(), &eta(l, 3))
            .unwrap()
            .joint_qubit_state()
            .unwrap();
        assert!(joint.max_abs_diff(&dense).unwrap() < 1e-15);
    }

    #[test]
    fn joint_state_cap() {
        let s = sequential_prepare(13, &QubitGate::hadamard_like(), &eta(20, 14)).unwrap();
        assert!(matches!(s.joint_qubit_state(), Err(Error::Capacity { .. })));
        assert!(s.joint_qubit_state_with_cap(4).is_err());
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_trace_distance_is_one_over_two_l() {
        let h = QubitGate::hadamard_like();
        for l in [1usize, 2, 5, 40] {
            let out = phi_channel(&eta(l, 1), &h, &ground_projector()).unwrap();
            let target = ground_projector().conjugate(&h.matrix()).unwrap();
            let d = 0.5 * out.sub(&target).unwrap().trace_norm();
            assert!((d - 0.5 / l as f64).abs() < 1e-15, "L={l}");
        }
    }

    #[test]
    fn marginals_stable_in_n() {
        let l = 9;
        let h = QubitGate::hadamard_like();
        for n in 1..=6 {
            let s = sequential_prepare(n, &h, &eta(l, n + 2)).unwrap();
            for q in 0..n {
                let m = s.qubit_marginal(q).unwrap();
                assert!(m.max_abs_diff(&rho_s_closed(l)).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn complementarity_with_iterated_lambda() {
        let h = QubitGate::hadamard_like();
        let e = eta(6, 6);
        let mut sigma = ReservoirDensity::from_pure(&e);
        for n in 1..=5 {
            sigma = lambda_on_density(&sigma, &h, &ground_projector()).unwrap();
            let joint = sequential_prepare(n, &h, &e).unwrap().reservoir_density().unwrap();
            let dense = sequential_prepare_in_order(&(0..n).collect::<Vec<_>>(), &h, &e)
                .unwrap()
                .reservoir_density()
                .unwrap();
            assert!(sigma.matrix().max_abs_diff(joint.matrix()).unwrap() < 1e-12);
            assert!(sigma.matrix().max_abs_diff(dense.matrix()).unwrap() < 1e-12);
        }
    }
}
