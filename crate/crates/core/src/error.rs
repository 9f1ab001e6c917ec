use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NonHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("vector norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("dimension {0} exceeds the supported maximum of 64")]
    DimTooLarge(usize),
    #[error("expectation has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error("Bloch vector norm {0} exceeds 1")]
    BlochNormExceeded(f64),
    #[error("POVM elements do not sum to the identity (deviation {0:e})")]
    NotResolution(f64),
    #[error("Naimark dilation failed verification (deviation {0:e})")]
    DilationFailure(f64),
    #[error("instrument Kraus operators are not normalized (deviation {0:e})")]
    KrausNotNormalized(f64),
    #[error("SLD residual {0:e} too large; derivative leaves the support of the state")]
    SldResidual(f64),
    #[error("quantum Fisher information is singular")]
    SingularInformation,
    #[error("generators do not commute (max commutator norm {0:e})")]
    NonCommuting(f64),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("master equation step too large: trace drift {0:e}")]
    StepTooLarge(f64),
    #[error("quadrature density is negative ({0:e}); truncation too small")]
    NegativeDensity(f64),
    #[error("not enough samples: {0}")]
    TooFewSamples(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
