//! Dense Hermitian matrices.
//!
//! Everything downstream (qubit registers, reservoir windows, error
//! operators) is stored as a [`HermitianMatrix`]. Eigendecompositions go
//! through nalgebra; when every entry is real the cheaper real-symmetric
//! solver is used.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute Hermiticity tolerance, scaled by the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated in a density matrix.
pub const NEGATIVITY_TOL: f64 = 1e-10;

/// Dense complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
}

/// Eigenvalues (ascending) with matching column eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Wraps `data` after checking it is square and Hermitian. The stored
    /// matrix is the exact Hermitian part `(A + A†)/2`.
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch(data.nrows(), data.ncols()));
        }
        let scale = data.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let mut worst = 0.0_f64;
        let n = data.nrows();
        for i in 0..n {
            for j in i..n {
                worst = worst.max((data[(i, j)] - data[(j, i)].conj()).norm());
            }
        }
        if worst > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(worst));
        }
        Ok(Self::symmetrized(data))
    }

    /// Builds from an entry function that is Hermitian by construction.
    /// Only the upper triangle is evaluated.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = if i == j { C64::new(f(i, i).re, 0.0) } else { f(i, j) };
                data[(i, j)] = v;
                data[(j, i)] = v.conj();
            }
        }
        Self { data }
    }

    pub(crate) fn symmetrized(data: DMatrix<C64>) -> Self {
        let adj = data.adjoint();
        Self {
            data: (data + adj) * C64::new(0.5, 0.0),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: DMatrix::identity(dim, dim),
        }
    }

    /// `|ψ⟩⟨ψ|` for an arbitrary (not necessarily normalized) ket.
    pub fn projector(ket: &[C64]) -> Self {
        Self::from_fn(ket.len(), |i, j| ket[i] * ket[j].conj())
    }

    /// Diagonal matrix with the given real entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            data[(i, i)] = C64::new(d, 0.0);
        }
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    /// True when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            data: &self.data * C64::new(s, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            data: &self.data - &other.data,
        })
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            data: self.data.kronecker(&other.data),
        }
    }

    /// `U ρ U†` for a square `unitary` of matching dimension.
    pub fn conjugate(&self, unitary: &DMatrix<C64>) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(unitary.nrows(), self.dim()));
        }
        Ok(Self::symmetrized(unitary * &self.data * unitary.adjoint()))
    }

    /// `⟨ψ|A|ψ⟩`, real for Hermitian `A`.
    pub fn expectation(&self, ket: &[C64]) -> Result<f64> {
        if ket.len() != self.dim() {
            return Err(Error::DimensionMismatch(ket.len(), self.dim()));
        }
        let n = ket.len();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            if ket[i] == C64::new(0.0, 0.0) {
                continue;
            }
            let row: C64 = ket.iter().enumerate().map(|(j, k)| self.data[(i, j)] * k).sum();
            acc += ket[i].conj() * row;
        }
        Ok(acc.re)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = if self.is_real() {
            let re = self.data.map(|z| z.re);
            SymmetricEigen::new(re).eigenvalues.iter().copied().collect()
        } else {
            SymmetricEigen::new(self.data.clone())
                .eigenvalues
                .iter()
                .copied()
                .collect()
        };
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Full eigendecomposition, eigenvalues ascending.
    pub fn eigh(&self) -> Eigh {
        let n = self.dim();
        let (raw_vals, raw_vecs): (Vec<f64>, DMatrix<C64>) = if self.is_real() {
            let eig = SymmetricEigen::new(self.data.map(|z| z.re));
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|x| C64::new(x, 0.0)),
            )
        } else {
            let eig = SymmetricEigen::new(self.data.clone());
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| raw_vals[a].total_cmp(&raw_vals[b]));
        let values = order.iter().map(|&k| raw_vals[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| raw_vecs[(i, order[j])]);
        Eigh { values, vectors }
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|v| v.abs()).sum()
    }

    /// Applies `f` to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let Eigh { values, vectors } = self.eigh();
        let n = self.dim();
        let mut scaled = vectors.clone();
        for (j, &v) in values.iter().enumerate() {
            let fv = C64::new(f(v), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= fv;
            }
        }
        Self::symmetrized(scaled * vectors.adjoint())
    }

    /// Positive square root, eigenvalues below zero clamped to zero.
    pub fn sqrt_psd(&self) -> Self {
        self.map_spectrum(|v| v.max(0.0).sqrt())
    }

    /// Checks unit trace and positivity within the module tolerances.
    pub fn check_density(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensityMatrix(format!("trace {tr}")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -NEGATIVITY_TOL {
            return Err(Error::NotDensityMatrix(format!("eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Reduced matrix on the `keep` qubits of an `n_qubits` register.
    ///
    /// Basis index bits are big-endian: qubit 0 is the most significant bit.
    /// The kept qubits appear in the output in the order given.
    pub fn reduce_to_qubits(&self, n_qubits: usize, keep: &[usize]) -> Result<Self> {
        if self.dim() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch(self.dim(), 1usize << n_qubits));
        }
        let mut seen = vec![false; n_qubits];
        for &q in keep {
            if q >= n_qubits || seen[q] {
                return Err(Error::InvalidParameter(format!(
                    "qubit {q} invalid or repeated for a {n_qubits}-qubit register"
                )));
            }
            seen[q] = true;
        }
        let traced: Vec<usize> = (0..n_qubits).filter(|q| !seen[*q]).collect();
        let compose = |kept: usize, rest: usize| -> usize {
            let mut z = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                let bit = (kept >> (keep.len() - 1 - pos)) & 1;
                z |= bit << (n_qubits - 1 - q);
            }
            for (pos, &q) in traced.iter().enumerate() {
                let bit = (rest >> (traced.len() - 1 - pos)) & 1;
                z |= bit << (n_qubits - 1 - q);
            }
            z
        };
        let dk = 1usize << keep.len();
        let dt = 1usize << traced.len();
        let mut out = DMatrix::zeros(dk, dk);
        for t in 0..dt {
            for a in 0..dk {
                let za = compose(a, t);
                for b in 0..dk {
                    out[(a, b)] += self.data[(za, compose(b, t))];
                }
            }
        }
        Ok(Self::symmetrized(out))
    }

    /// `ρ^{⊗n}`.
    pub fn tensor_power(&self, n: usize) -> Self {
        let mut out = Self::identity(1);
        for _ in 0..n {
            out = out.kron(self);
        }
        out
    }
}

/// `-Σ λ ln λ` over a spectrum, with `0 ln 0 = 0` and negatives ignored.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

/// Number of ones in `z`.
pub fn hamming_weight(z: usize) -> usize {
    z.count_ones() as usize
}

/// Bit of qubit `q` in basis index `z` of an `n`-qubit register.
pub fn qubit_bit(z: usize, q: usize, n: usize) -> usize {
    (z >> (n - 1 - q)) & 1
}
