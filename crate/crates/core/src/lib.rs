//! Exact simulation of a coherent energy reservoir that is used again and
//! again to rotate qubits, and of the correlations this leaves behind.
//!
//! The reservoir lives on an integer energy ladder ([`reservoir`]). Each use
//! couples one qubit to it through an energy-conserving unitary
//! ([`channels`]). The remaining modules compute measurement statistics,
//! discrimination bounds, asymmetry and the repeatability error of the
//! resulting multi-qubit states.

pub mod asymmetry;
pub mod channels;
pub mod correlations;
pub mod discrimination;
pub mod error;
pub mod linalg;
pub mod repeatability;
pub mod reservoir;

pub use channels::{BranchState, QubitGate, ReservoirDensity};
pub use error::{Error, Result};
pub use linalg::{HermitianMatrix, C64};
pub use reservoir::{LaurentCoeffs, ReservoirState};
