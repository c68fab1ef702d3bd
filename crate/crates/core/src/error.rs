use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A shift would move populated amplitude outside the reservoir window.
    /// Usually means the guard band is smaller than the number of uses.
    #[error("window overflow: shift by {shift} moves support [{support_min}, {support_max}] outside window [{window_min}, {window_max}]")]
    WindowOverflow {
        shift: i64,
        support_min: i64,
        support_max: i64,
        window_min: i64,
        window_max: i64,
    },

    #[error("capacity exceeded: {what} = {requested} exceeds cap {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("outside supported domain: {0}")]
    Domain(String),

    /// An internal consistency identity failed beyond its tolerance.
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
