//! Exact twirled spectrum of `ρ^{⊗N}` through the Schur–Weyl decomposition.
//!
//! In the `{|+⟩, |−⟩}` basis `ρ^{⊗N}` is diagonal, weight `λ₊^{N-k} λ₋^k`
//! for `k` minuses, i.e. diagonal in the total-`J_x` basis with
//! `M_x = k − N/2`. The twirl keeps only the `J_z` blocks, and inside spin
//! `J` (multiplicity `Γ_J`) the block for `M` is a multiple of the identity
//! with eigenvalue
//!
//! `μ_{J,M} = Σ_k λ₊^{N-k} λ₋^k |d^J_{M,k-N/2}(π/2)|²`.
//!
//! Each `μ_{J,M}` is a single eigenvalue of the twirled state repeated `Γ_J`
//! times, so the entropy is `−Σ_{J,M} Γ_J μ ln μ`.

use num_bigint::BigUint;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use super::wigner::WignerCache;
use crate::error::{Error, Result};

/// Largest register handled by the sector formulas.
pub const MAX_FORMULA_QUBITS: usize = 512;

const DECOMPOSITION_TOL: f64 = 1e-9;

fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * (n - i) / (i + 1))
}

fn check_parity(n: usize, two_j: u32) -> Result<()> {
    if two_j as usize > n || !(n - two_j as usize).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "2J = {two_j} is not a valid total spin for {n} qubits"
        )));
    }
    Ok(())
}

/// Number of spin-`J` irreps in `N` qubits: `C(N, λ₂) − C(N, λ₂−1)` with
/// `λ₂ = N/2 − J`.
pub fn gamma_multiplicity(n: usize, two_j: u32) -> Result<BigUint> {
    check_parity(n, two_j)?;
    let lambda2 = ((n - two_j as usize) / 2) as u64;
    let n = n as u64;
    if lambda2 == 0 {
        return Ok(BigUint::from(1u32));
    }
    Ok(binomial_big(n, lambda2) - binomial_big(n, lambda2 - 1))
}

/// Floating-point `Γ_J = C(N, λ₂)(N − 2λ₂ + 1)/(N − λ₂ + 1)`.
pub fn gamma_multiplicity_f64(n: usize, two_j: u32) -> Result<f64> {
    check_parity(n, two_j)?;
    let lambda2 = (n - two_j as usize) / 2;
    let ratio = (n - 2 * lambda2 + 1) as f64 / (n - lambda2 + 1) as f64;
    Ok(ln_binomial(n as u64, lambda2 as u64).exp() * ratio)
}

/// Weight of charge sector `M`: `2^{-N} C(N, N/2 + M)`.
pub fn sector_weight(n: usize, two_m: i64) -> f64 {
    let k = (n as i64 + two_m) / 2;
    if k < 0 || k > n as i64 || (n as i64 + two_m) % 2 != 0 {
        return 0.0;
    }
    (ln_binomial(n as u64, k as u64) - n as f64 * std::f64::consts::LN_2).exp()
}

pub(crate) fn check_spectrum(lambda_plus: f64, lambda_minus: f64) -> Result<()> {
    if !(lambda_plus >= 0.0 && lambda_minus >= 0.0) || (lambda_plus + lambda_minus - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "({lambda_plus}, {lambda_minus}) is not a qubit spectrum"
        )));
    }
    Ok(())
}

fn check_size(n: usize, cache: &WignerCache) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if n > MAX_FORMULA_QUBITS {
        return Err(Error::Capacity {
            what: "qubits in sector formula",
            requested: n,
            cap: MAX_FORMULA_QUBITS,
        });
    }
    if n > cache.max_two_j() as usize {
        return Err(Error::Capacity {
            what: "2J in cache",
            requested: n,
            cap: cache.max_two_j() as usize,
        });
    }
    Ok(())
}

/// Distinct eigenvalues of one spin block.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBlock {
    pub two_j: u32,
    pub multiplicity: f64,
    /// `μ_{J,M}` for `2M = -2J, -2J+2, …, 2J`.
    pub mu: Vec<f64>,
}

impl SpinBlock {
    pub fn mu_at(&self, two_m: i64) -> f64 {
        let tj = i64::from(self.two_j);
        if two_m.abs() > tj {
            return 0.0;
        }
        self.mu[((two_m + tj) / 2) as usize]
    }
}

/// `μ_{J,M}` for every spin `J` of an `N`-qubit register.
pub fn spin_blocks(n: usize, lambda_plus: f64, lambda_minus: f64, cache: &WignerCache) -> Result<Vec<SpinBlock>> {
    check_spectrum(lambda_plus, lambda_minus)?;
    check_size(n, cache)?;
    // λ₊^{N-k} λ₋^k, with 0^0 = 1
    let weights: Vec<f64> = (0..=n)
        .map(|k| lambda_plus.powi((n - k) as i32) * lambda_minus.powi(k as i32))
        .collect();
    let ni = n as i64;
    (n as u32 % 2..=n as u32)
        .step_by(2)
        .map(|two_j| {
            let table = cache.table(two_j)?;
            let tj = i64::from(two_j);
            let mut mu = vec![0.0; two_j as usize + 1];
            // 2M_x = 2k − N must lie in [−2J, 2J].
            let k_lo = ((ni - tj) / 2) as usize;
            let k_hi = ((ni + tj) / 2) as usize;
            for (k, w) in weights.iter().enumerate().take(k_hi + 1).skip(k_lo) {
                if *w == 0.0 {
                    continue;
                }
                let col = table.column(2 * k as i64 - ni);
                for (m, d) in mu.iter_mut().zip(col) {
                    *m += w * d * d;
                }
            }
            Ok(SpinBlock {
                two_j,
                multiplicity: gamma_multiplicity_f64(n, two_j)?,
                mu,
            })
        })
        .collect()
}

/// Per-sector diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorTerm {
    pub two_m: i64,
    pub p_m: f64,
    /// Entropy of the normalized sector state `Q_M`.
    pub sector_entropy: f64,
    /// `S(Q_M) − S(ρ^{⊗N})`.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyDecomposition {
    pub n_qubits: usize,
    /// `H({p_M})`.
    pub shannon_h: f64,
    /// `Σ_M p_M S(Q_M)`.
    pub mean_sector_entropy: f64,
    /// `S(G[ρ^{⊗N}])` from the full spectrum.
    pub twirled_entropy: f64,
    /// `S(ρ^{⊗N}) = N S(ρ)`.
    pub product_entropy: f64,
    pub sectors: Vec<SectorTerm>,
}

impl EntropyDecomposition {
    /// `S(G[ρ^{⊗N}]) − S(ρ^{⊗N})`.
    pub fn asymmetry(&self) -> f64 {
        self.twirled_entropy - self.product_entropy
    }
}

fn xlnx(x: f64) -> f64 {
    if x > 0.0 { x * x.ln() } else { 0.0 }
}

/// Splits `S(G[ρ^{⊗N}])` into the sector Shannon entropy and the mean
/// in-sector entropy, and checks both the sector weights and the split.
pub fn entropy_decomposition_with(
    n: usize,
    lambda_plus: f64,
    lambda_minus: f64,
    cache: &WignerCache,
) -> Result<EntropyDecomposition> {
    let blocks = spin_blocks(n, lambda_plus, lambda_minus, cache)?;
    let twirled_entropy: f64 = -blocks
        .iter()
        .map(|b| b.multiplicity * b.mu.iter().map(|&m| xlnx(m)).sum::<f64>())
        .sum::<f64>();
    let product_entropy = -(n as f64) * (xlnx(lambda_plus) + xlnx(lambda_minus));

    let ni = n as i64;
    let mut sectors = Vec::with_capacity(n + 1);
    for two_m in (-ni..=ni).step_by(2) {
        let p_m = sector_weight(n, two_m);
        let summed: f64 = blocks.iter().map(|b| b.multiplicity * b.mu_at(two_m)).sum();
        if (summed - p_m).abs() > DECOMPOSITION_TOL * p_m {
            return Err(Error::Consistency(format!(
                "sector 2M = {two_m}: eigenvalues sum to {summed}, expected {p_m}"
            )));
        }
        let sector_entropy = -blocks
            .iter()
            .map(|b| b.multiplicity * xlnx(b.mu_at(two_m) / p_m))
            .sum::<f64>();
        sectors.push(SectorTerm {
            two_m,
            p_m,
            sector_entropy,
            epsilon: sector_entropy - product_entropy,
        });
    }
    let shannon_h = -sectors.iter().map(|s| xlnx(s.p_m)).sum::<f64>();
    let mean_sector_entropy: f64 = sectors.iter().map(|s| s.p_m * s.sector_entropy).sum();
    let gap = (shannon_h + mean_sector_entropy - twirled_entropy).abs();
    if gap > DECOMPOSITION_TOL * twirled_entropy.max(1.0) {
        return Err(Error::Consistency(format!("entropy decomposition off by {gap:e}")));
    }
    Ok(EntropyDecomposition {
        n_qubits: n,
        shannon_h,
        mean_sector_entropy,
        twirled_entropy,
        product_entropy,
        sectors,
    })
}

/// [`entropy_decomposition_with`] using a private table cache.
pub fn entropy_decomposition(n: usize, lambda_plus: f64, lambda_minus: f64) -> Result<EntropyDecomposition> {
    let cache = WignerCache::new(n.min(MAX_FORMULA_QUBITS) as u32)?;
    entropy_decomposition_with(n, lambda_plus, lambda_minus, &cache)
}
