//! U(1) asymmetry `A(ρ) = S(G[ρ]) − S(ρ)`, where `G` averages over all
//! phase rotations generated by the free Hamiltonian.
//!
//! For `ρ^{⊗N}` the twirled spectrum is computed sector by sector (see
//! [`dicke`]); small states can also go through an explicit dense twirl,
//! which serves as the reference.

pub mod dicke;
pub mod wigner;

use std::f64::consts::{E, PI};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{entropy_of_spectrum, hamming_weight, HermitianMatrix, C64};

pub use dicke::{
    entropy_decomposition, entropy_decomposition_with, gamma_multiplicity, gamma_multiplicity_f64,
    sector_weight, spin_blocks, EntropyDecomposition, SectorTerm, SpinBlock, MAX_FORMULA_QUBITS,
};
pub use wigner::{wigner_d_half_pi, WignerCache, WignerTable};

/// Largest matrix handed to [`asymmetry_dense`].
pub const DENSE_ASYMMETRY_CAP: usize = 1024;

/// Charge of every basis state under `H0 = s·charge + s0`.
///
/// The energy scale `s` and offset `s0` only enter [`TwirlSpec::phase_rotation`];
/// the twirl depends on the charges alone.
#[derive(Debug, Clone, PartialEq)]
pub struct TwirlSpec {
    pub charges: Vec<i64>,
    pub energy_gap: f64,
    pub vacuum_energy: f64,
}

impl TwirlSpec {
    pub fn new(charges: Vec<i64>) -> Self {
        Self {
            charges,
            energy_gap: 1.0,
            vacuum_energy: 0.0,
        }
    }

    /// `N` qubits: charge is the number of excitations.
    pub fn qubits(n: usize) -> Self {
        Self::new((0..1usize << n).map(|z| hamming_weight(z) as i64).collect())
    }

    /// Reservoir window: charge is the ladder level.
    pub fn ladder(window_min: i64, width: usize) -> Self {
        Self::new((0..width as i64).map(|i| window_min + i).collect())
    }

    pub fn dim(&self) -> usize {
        self.charges.len()
    }

    /// `T(φ) = exp(−iφ H0)`.
    pub fn phase_rotation(&self, phi: f64) -> DMatrix<C64> {
        let diag = self
            .charges
            .iter()
            .map(|&q| C64::from_polar(1.0, -phi * (self.energy_gap * q as f64 + self.vacuum_energy)));
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(self.dim(), diag))
    }
}

/// `Σ_q Π_q ρ Π_q`: drops every coherence between different charges.
pub fn twirl_dense(rho: &HermitianMatrix, spec: &TwirlSpec) -> Result<HermitianMatrix> {
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), spec.dim()));
    }
    Ok(HermitianMatrix::from_fn(rho.dim(), |i, j| {
        if spec.charges[i] == spec.charges[j] {
            rho.get(i, j)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// `−tr ρ ln ρ` in nats.
pub fn von_neumann_entropy(rho: &HermitianMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// `S(G[ρ]) − S(ρ)` by explicit diagonalization.
pub fn asymmetry_dense(rho: &HermitianMatrix, spec: &TwirlSpec) -> Result<f64> {
    if rho.dim() > DENSE_ASYMMETRY_CAP {
        return Err(Error::Capacity {
            what: "dense asymmetry dimension",
            requested: rho.dim(),
            cap: DENSE_ASYMMETRY_CAP,
        });
    }
    rho.check_density()?;
    Ok(von_neumann_entropy(&twirl_dense(rho, spec)?) - von_neumann_entropy(rho))
}

/// Exact `A(ρ^{⊗N})` for a qubit whose spectrum `(λ₊, λ₋)` sits on `|±⟩`.
pub fn asymmetry_exact_formula(n: usize, lambda_plus: f64, lambda_minus: f64) -> Result<f64> {
    Ok(entropy_decomposition(n, lambda_plus, lambda_minus)?.asymmetry())
}

/// As [`asymmetry_exact_formula`], reusing prebuilt Wigner tables.
pub fn asymmetry_exact_with(n: usize, lambda_plus: f64, lambda_minus: f64, cache: &WignerCache) -> Result<f64> {
    Ok(entropy_decomposition_with(n, lambda_plus, lambda_minus, cache)?.asymmetry())
}

/// Large-`N` Gaussian estimate `½ ln(Nπe/2)`.
pub fn asymmetry_approx(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    Ok(0.5 * (n as f64 * PI * E / 2.0).ln())
}

/// `ln L`, the asymmetry of the fresh reservoir.
pub fn asymmetry_upper_bound(length: usize) -> Result<f64> {
    if length == 0 {
        return Err(Error::InvalidParameter("L must be at least 1".into()));
    }
    Ok((length as f64).ln())
}

/// Which single-qubit spectrum to attach to reservoir length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenConvention {
    /// `(1 − 1/(2L), 1/(2L))`, the spectrum of the single-use output state.
    #[default]
    SingleUse,
    /// `(1 − 1/L, 1/L)`.
    InverseLength,
}

impl EigenConvention {
    pub fn spectrum(self, length: usize) -> Result<(f64, f64)> {
        if length == 0 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        let minus = match self {
            Self::SingleUse => 0.5 / length as f64,
            Self::InverseLength => 1.0 / length as f64,
        };
        Ok((1.0 - minus, minus))
    }
}

/// One point of the asymmetry-versus-`N` comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryReport {
    pub n_qubits: usize,
    pub length: usize,
    pub convention: EigenConvention,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub a_exact: f64,
    pub a_approx: f64,
    pub a_bound: f64,
    pub shannon_h_pm: f64,
    pub epsilon_terms: Option<Vec<SectorTerm>>,
}

impl AsymmetryReport {
    pub fn compute(
        n: usize,
        length: usize,
        convention: EigenConvention,
        cache: &WignerCache,
        with_terms: bool,
    ) -> Result<Self> {
        let (lambda_plus, lambda_minus) = convention.spectrum(length)?;
        let d = entropy_decomposition_with(n, lambda_plus, lambda_minus, cache)?;
        Ok(Self {
            n_qubits: n,
            length,
            convention,
            lambda_plus,
            lambda_minus,
            a_exact: d.asymmetry(),
            a_approx: asymmetry_approx(n)?,
            a_bound: asymmetry_upper_bound(length)?,
            shannon_h_pm: d.shannon_h,
            epsilon_terms: with_terms.then_some(d.sectors),
        })
    }

    /// `A_exact − ln L`; positive when the product-state asymmetry exceeds
    /// what the reservoir could have supplied.
    pub fn bound_excess(&self) -> f64 {
        self.a_exact - self.a_bound
    }
}
