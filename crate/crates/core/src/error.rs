use thiserror::Error;

/// Failure modes of the numerical operations.
///
/// Every message names the module and operation that raised it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },
    #[error("{op}: iteration did not converge: {msg}")]
    Convergence { op: &'static str, msg: String },
    #[error("{op}: degree error: {msg}")]
    Degree { op: &'static str, msg: String },
    #[error("{op}: root on or near the unit circle: {msg}")]
    UnitCircleRoot { op: &'static str, msg: String },
    #[error("{op}: reality pairing of roots failed: {msg}")]
    Pairing { op: &'static str, msg: String },
    #[error("{op}: degenerate divisor: {msg}")]
    DegenerateDivisor { op: &'static str, msg: String },
    #[error("{op}: phase condition violated: {msg}")]
    Phase { op: &'static str, msg: String },
    #[error("{op}: inconsistent divisor: {msg}")]
    InconsistentDivisor { op: &'static str, msg: String },
    #[error("{op}: solution blew up: {msg}")]
    Blowup { op: &'static str, msg: String },
    #[error("{op}: factorization failed: {msg}")]
    Factorization { op: &'static str, msg: String },
    #[error("{op}: insufficient resolution: {msg}")]
    Resolution { op: &'static str, msg: String },
    #[error("{op}: loop outside the big cell: {msg}")]
    BigCell { op: &'static str, msg: String },
    #[error("{op}: Sym point not on the unit circle: {msg}")]
    NonUnitSymPoint { op: &'static str, msg: String },
    #[error("{op}: degenerate input: {msg}")]
    Degenerate { op: &'static str, msg: String },
    #[error("{op}: residue above threshold: {msg}")]
    Residue { op: &'static str, msg: String },
    #[error("{op}: sequence not converging: {msg}")]
    NonConvergence { op: &'static str, msg: String },
    #[error("{op}: invalid input: {msg}")]
    Invalid { op: &'static str, msg: String },
    #[error("{op}: i/o error: {msg}")]
    Io { op: &'static str, msg: String },
}

impl Error {
    /// Whether the failure is an input-validation problem rather than a numerical one.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid { .. } | Error::Phase { .. } | Error::Domain { .. })
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
