//! Measurement statistics of the correlated qubits in the `{|+⟩, |−⟩}` basis.
//!
//! Every qubit prepared from `|ψ0⟩` with the Hadamard-like gate sits in
//! branch `(1 + Δ⁻¹)/2 |η⟩` after a `+` outcome and `(1 − Δ⁻¹)/2 |η⟩` after
//! a `−`. A sequence with `n` pluses therefore has probability
//! `‖((1+Δ⁻¹)/2)^n ((1−Δ⁻¹)/2)^{N−n} η‖²`, which only needs the shift
//! overlaps `⟨η|Δ^a|η⟩` and no `2^N` state.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, C64};
use crate::reservoir::{LaurentCoeffs, ReservoirState};

/// Exact and product-state statistics for one `(N, L)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceStats {
    pub n_qubits: usize,
    pub length: usize,
    pub p_seq: Vec<f64>,
    pub p_count: Vec<f64>,
    pub product_p_seq: Vec<f64>,
    pub product_p_count: Vec<f64>,
}

impl SequenceStats {
    pub fn compute(n_qubits: usize, length: usize) -> Result<Self> {
        check_sizes(n_qubits, length)?;
        let eta = reference_eta(length)?;
        let p_seq: Vec<f64> = (0..=n_qubits).map(|n| seq_probability(&eta, n, n_qubits)).collect();
        let p_count = p_seq
            .iter()
            .enumerate()
            .map(|(n, p)| binomial_f64(n_qubits, n) * p)
            .collect();
        let (product_p_seq, product_p_count) = product_state_stats(n_qubits, length)?;
        Ok(Self {
            n_qubits,
            length,
            p_seq,
            p_count,
            product_p_seq,
            product_p_count,
        })
    }
}

fn check_sizes(n_qubits: usize, length: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if length == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    Ok(())
}

fn check_count(n: usize, n_qubits: usize) -> Result<()> {
    if n > n_qubits {
        return Err(Error::InvalidParameter(format!("n = {n} exceeds N = {n_qubits}")));
    }
    Ok(())
}

/// `C(N, n)` via the log-gamma route, exact enough for any `N` we handle.
pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    ln_binomial(n as u64, k as u64).exp()
}

/// `|η_{L,0},0⟩` without guard band; `⟨η|Δ^a|η⟩` vanishes for `|a| ≥ L`
/// so no shifted copy is ever needed.
fn reference_eta(length: usize) -> Result<ReservoirState> {
    ReservoirState::eta(length, 0, 0.0, 0)
}

/// `((1+Δ⁻¹)/2)^n ((1−Δ⁻¹)/2)^{N−n}`.
pub fn sequence_operator(n: usize, n_qubits: usize) -> LaurentCoeffs {
    let plus = LaurentCoeffs::binomial(0.5, 0.5, -1);
    let minus = LaurentCoeffs::binomial(0.5, -0.5, -1);
    &plus.pow(n) * &minus.pow(n_qubits - n)
}

fn seq_probability(eta: &ReservoirState, n: usize, n_qubits: usize) -> f64 {
    let q = sequence_operator(n, n_qubits);
    let gram = &q.adjoint() * &q;
    eta.laurent_expectation(&gram).re.clamp(0.0, 1.0)
}

/// Probability of one fixed outcome sequence containing `n` pluses.
pub fn p_seq_exact(n: usize, n_qubits: usize, length: usize) -> Result<f64> {
    check_sizes(n_qubits, length)?;
    check_count(n, n_qubits)?;
    Ok(seq_probability(&reference_eta(length)?, n, n_qubits))
}

/// Probability of `n` pluses in any order.
pub fn p_count_exact(n: usize, n_qubits: usize, length: usize) -> Result<f64> {
    Ok(binomial_f64(n_qubits, n) * p_seq_exact(n, n_qubits, length)?)
}

/// Large-`N` closed forms for `n ∈ {N, N−1, N−2, N−3}` and, through the
/// mirror identity `P_seq(k) = P_seq(N−1−k)`, for `n ∈ {0, 1, 2}`.
pub fn p_seq_approx(n: usize, n_qubits: usize, length: usize) -> Result<f64> {
    check_sizes(n_qubits, length)?;
    check_count(n, n_qubits)?;
    let big_n = n_qubits as f64;
    let l = length as f64;
    let from_top = n_qubits - n;
    let k = if from_top <= 3 {
        from_top
    } else if n <= 2 {
        n + 1
    } else {
        return Err(Error::Domain(format!(
            "no closed form for n = {n} with N = {n_qubits}"
        )));
    };
    if k == 0 {
        return Ok(1.0 - (big_n / PI).sqrt() / l);
    }
    let m = big_n - k as f64;
    if m <= 0.0 {
        return Err(Error::Domain(format!(
            "closed form for N - {k} pluses needs N > {k}"
        )));
    }
    Ok(match k {
        1 => 1.0 / (2.0 * (PI * m).sqrt() * l),
        2 => 1.0 / (4.0 * (PI * m.powi(3)).sqrt() * l),
        _ => 3.0 / (8.0 * (PI * m.powi(5)).sqrt() * l),
    })
}

/// Sequence and count probabilities for `ρ_S^{⊗N}` with
/// `⟨+|ρ_S|+⟩ = 1 − 1/(2L)`.
pub fn product_state_stats(n_qubits: usize, length: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_sizes(n_qubits, length)?;
    let q = 1.0 / (2.0 * length as f64);
    let ln_p = (1.0 - q).ln();
    let ln_q = q.ln();
    let seq: Vec<f64> = (0..=n_qubits)
        .map(|n| (n as f64 * ln_p + (n_qubits - n) as f64 * ln_q).exp())
        .collect();
    let count = (0..=n_qubits)
        .map(|n| (ln_binomial(n_qubits as u64, n as u64) + n as f64 * ln_p + (n_qubits - n) as f64 * ln_q).exp())
        .collect();
    Ok((seq, count))
}

/// What a single `−` outcome does to the reservoir, and the exact
/// `P_seq(N−1) = P(0)` coincidence.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseReport {
    /// `(1 − Δ⁻¹)|η⟩`, normalized.
    pub post_minus: ReservoirState,
    /// Levels carrying nonzero amplitude in `post_minus`.
    pub support: Vec<i64>,
    pub p_seq_one_minus: f64,
    pub p_all_minus: f64,
}

impl CollapseReport {
    pub fn symmetry_gap(&self) -> f64 {
        (self.p_seq_one_minus - self.p_all_minus).abs()
    }
}

pub fn conditional_collapse_demo(n_qubits: usize, length: usize, base_level: i64) -> Result<CollapseReport> {
    if n_qubits < 2 {
        return Err(Error::InvalidParameter("N must be at least 2".into()));
    }
    if length <= n_qubits {
        return Err(Error::InvalidParameter(format!("need L > N, got L = {length}, N = {n_qubits}")));
    }
    let eta = ReservoirState::eta(length, base_level, 0.0, 1)?;
    let (_, post_minus) = eta.apply_polynomial(&LaurentCoeffs::binomial(1.0, -1.0, -1))?;
    let support = post_minus.support_levels();
    Ok(CollapseReport {
        post_minus,
        support,
        p_seq_one_minus: p_seq_exact(n_qubits - 1, n_qubits, length)?,
        p_all_minus: p_count_exact(0, n_qubits, length)?,
    })
}

/// `⟨s|ρ|s⟩` for the product ket `|s⟩ = ⊗_q |±⟩`, `pluses[q]` choosing `+`.
pub fn sequence_probability(joint: &HermitianMatrix, pluses: &[bool]) -> Result<f64> {
    let n = pluses.len();
    if joint.dim() != 1usize << n {
        return Err(Error::DimensionMismatch(joint.dim(), 1usize << n));
    }
    let ket: Vec<C64> = (0..1usize << n)
        .map(|z| {
            let mut amp = 1.0;
            for (q, &plus) in pluses.iter().enumerate() {
                let bit = (z >> (n - 1 - q)) & 1;
                amp *= if bit == 1 && !plus { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
            }
            C64::new(amp, 0.0)
        })
        .collect();
    joint.expectation(&ket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{sequential_prepare, QubitGate};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn two_qubit_table() {
        assert!(close(p_seq_exact(0, 2, 50).unwrap(), 0.005, 1e-15));
        assert!(close(p_seq_exact(2, 2, 50).unwrap(), 0.985, 1e-15));
        assert!(close(p_seq_exact(1, 1, 50).unwrap(), 0.99, 1e-15));
        assert!(close(p_count_exact(1, 2, 50).unwrap(), 0.01, 1e-15));
        assert!(close(p_count_exact(1, 1, 2).unwrap(), 0.75, 1e-15));
    }

    #[test]
    fn count_vector_normalized() {
        let s = SequenceStats::compute(6, 20).unwrap();
        assert!(close(s.p_count.iter().sum(), 1.0, 1e-10));
        for (n, (pc, ps)) in s.p_count.iter().zip(&s.p_seq).enumerate() {
            assert!(close(*pc, binomial_f64(6, n) * ps, 1e-12));
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(p_seq_exact(3, 2, 10).is_err());
        assert!(p_seq_exact(0, 0, 10).is_err());
        assert!(matches!(p_seq_approx(5, 10, 100), Err(Error::Domain(_))));
        assert!(matches!(p_seq_approx(0, 2, 100), Err(Error::Domain(_))));
    }

    #[test]
    fn approx_formula_values() {
        assert!(close(p_seq_approx(100, 100, 1000).unwrap(), 1.0 - (100.0 / PI).sqrt() / 1000.0, 1e-15));
        assert!(close(p_seq_approx(100, 100, 1000).unwrap(), 0.994358, 5e-7));
        assert!(close(p_seq_approx(100, 101, 1000).unwrap(), 2.8209e-5, 1e-9));
        // The mirror branch reuses the N-1-n formula.
        assert_eq!(p_seq_approx(0, 40, 1000).unwrap(), p_seq_approx(39, 40, 1000).unwrap());
        assert_eq!(p_seq_approx(2, 40, 1000).unwrap(), p_seq_approx(37, 40, 1000).unwrap());
    }

    #[test]
    fn approx_tracks_exact_where_asymptotic() {
        for (n_back, big_n) in [(0usize, 64usize), (0, 256), (1, 64), (1, 256)] {
            let n = big_n - n_back;
            let e = p_seq_exact(n, big_n, 1000).unwrap();
            let a = p_seq_approx(n, big_n, 1000).unwrap();
            assert!((a - e).abs() / e <= 0.05, "N={big_n} n={n}: {a} vs {e}");
        }
    }

    #[test]
    fn frozen_large_n_values() {
        // Independent rational-arithmetic expansion.
        let cases = [
            (4usize, [0.99890625, 1.5625e-4, 3.125e-5, 3.125e-5], 1e-12),
            (64, [0.995495290, 3.547e-5, 2.8376e-7, 6.921e-9], 2e-3),
            (256, [0.99097737, 1.76568e-5, 3.4689e-8, 2.0526e-10], 2e-3),
        ];
        for (big_n, want, rel) in cases {
            for (k, w) in want.iter().enumerate() {
                let got = p_seq_exact(big_n - k, big_n, 1000).unwrap();
                assert!((got - w).abs() <= rel * w, "N={big_n} k={k}: {got} vs {w}");
            }
        }
    }

    #[test]
    fn product_examples() {
        let (seq, count) = product_state_stats(3, 10).unwrap();
        assert!(close(seq[0], 1.25e-4, 1e-18));
        assert!(close(count.iter().sum(), 1.0, 1e-12));
        let (seq, _) = product_state_stats(2, 50).unwrap();
        assert!(close(seq[1], 0.0099, 1e-15));
    }

    #[test]
    fn collapse_examples() {
        let r = conditional_collapse_demo(2, 4, 10).unwrap();
        assert_eq!(r.support, vec![9, 13]);
        assert!(close(r.post_minus.amplitude_at(9).re, -FRAC_1_SQRT_2, 1e-15));
        assert!(close(r.post_minus.amplitude_at(13).re, FRAC_1_SQRT_2, 1e-15));
        let r = conditional_collapse_demo(2, 50, 0).unwrap();
        assert!(close(r.p_seq_one_minus, 0.005, 1e-15) && close(r.p_all_minus, 0.005, 1e-15));
        let r = conditional_collapse_demo(5, 20, 0).unwrap();
        assert!(r.symmetry_gap() <= 1e-14);
        assert!(conditional_collapse_demo(5, 5, 0).is_err());
    }

    #[test]
    fn normalization_sweep() {
        for big_n in [1usize, 2, 5, 13, 30] {
            for l in [big_n + 1, 10 * big_n, 1000] {
                let s = SequenceStats::compute(big_n, l).unwrap();
                assert!(close(s.p_count.iter().sum(), 1.0, 1e-10), "N={big_n} L={l}");
                assert!(s.p_seq.iter().chain(&s.p_count).all(|p| (0.0..=1.0).contains(p)));
            }
        }
    }

    #[test]
    fn mirror_identity_is_exact() {
        for big_n in 2..=12usize {
            for l in [big_n + 1, 3 * big_n + 2, 97] {
                for k in 0..big_n {
                    let a = p_seq_exact(k, big_n, l).unwrap();
                    let b = p_seq_exact(big_n - 1 - k, big_n, l).unwrap();
                    assert!(close(a, b, 1e-12), "N={big_n} L={l} k={k}");
                }
            }
        }
    }

    #[test]
    fn dense_oracle_agrees() {
        let h = QubitGate::hadamard_like();
        for big_n in 1..=10usize {
            let l = 3 * big_n + 1;
            let eta = ReservoirState::eta(l, 0, 0.0, big_n).unwrap();
            let joint = sequential_prepare(big_n, &h, &eta).unwrap().joint_qubit_state().unwrap();
            for n in 0..=big_n {
                // Pluses scattered rather than contiguous.
                let mut order: Vec<usize> = (0..big_n).collect();
                order.sort_by_key(|q| (q % 2, *q));
                let mut pluses = vec![false; big_n];
                for &q in &order[..n] {
                    pluses[q] = true;
                }
                let dense = sequence_probability(&joint, &pluses).unwrap();
                assert!(close(dense, p_seq_exact(n, big_n, l).unwrap(), 1e-12), "N={big_n} n={n}");
            }
        }
    }

    #[test]
    fn one_over_l_scaling() {
        for big_n in [3usize, 8] {
            for n in 0..big_n {
                let l = 100 * big_n;
                let r = p_seq_exact(n, big_n, 2 * l).unwrap() / p_seq_exact(n, big_n, l).unwrap();
                assert!((r - 0.5).abs() <= 0.01, "N={big_n} n={n}: {r}");
            }
        }
    }

    proptest! {
        #[test]
        fn p_count_is_binomial_times_p_seq(big_n in 1usize..24, l in 1usize..200, frac in 0.0f64..1.0) {
            let n = ((big_n as f64) * frac) as usize;
            let ps = p_seq_exact(n, big_n, l).unwrap();
            let pc = p_count_exact(n, big_n, l).unwrap();
            prop_assert!((pc - binomial_f64(big_n, n) * ps).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&ps) && (0.0..=1.0).contains(&pc));
        }
    }
}
