use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CeslabError {
    #[error("no geometric certificate: ratio bound {0} is not below 1")]
    NoGeometricCertificate(f64),

    #[error("no summable certificate: {0}")]
    NoSummableCertificate(String),

    #[error("truncation index {index} is below the certificate start {start}")]
    CertificateStart { index: usize, start: usize },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("weight violates 1 <= d_0 <= d_1 <= ... at index {index} (d = {value})")]
    WeightViolation { index: usize, value: f64 },

    #[error("dense mode is limited to N <= {max}, got N = {n}")]
    DenseTooLarge { n: usize, max: usize },

    #[error("singular at index {index}")]
    Singular { index: usize },

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("{0}")]
    NotExistent(String),

    #[error("exact mode unsupported: {0}")]
    ExactUnsupported(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CeslabError>;
