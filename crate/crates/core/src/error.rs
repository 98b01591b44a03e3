use thiserror::Error;

pub type Result<T> = std::result::Result<T, SogError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SogError {
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },
    #[error("matrix is indefinite (pivot {pivot:.3e} at step {step})")]
    IndefiniteMatrix { pivot: f64, step: usize },
    #[error("{stage} did not converge after {iterations} iterations (working precision may be too low)")]
    ConvergenceFailure { stage: &'static str, iterations: usize },
    #[error("eigenvector matrix is numerically singular; the matrix looks defective")]
    DefectiveMatrix,
    #[error("argument outside the domain of {0}")]
    DomainError(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel '{0}' does not decay to zero at infinity; localize it first")]
    NonDecayingKernel(String),
    #[error("Fourier coefficient quadrature did not stabilise (last change {last_change:.3e} after {nodes} nodes)")]
    QuadratureNotConverged { last_change: f64, nodes: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no reduced order meets the requested Hankel tolerance {0:.3e}")]
    TargetUnreachable(f64),
    #[error("reduction produced an unstable exponent (real part {0:.3e})")]
    UnstablePole(f64),
    #[error("weights reach 2^{weight_exponent}, which leaves fewer than 64 correct bits at {precision} bits; raise the precision")]
    PrecisionTooLow { weight_exponent: i32, precision: u32 },
    #[error("not a ladder approximant: {0}")]
    NotLadder(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed approximant file: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl SogError {
    /// True for failures of the numerical pipeline, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SogError::NotSymmetric { .. }
                | SogError::IndefiniteMatrix { .. }
                | SogError::ConvergenceFailure { .. }
                | SogError::DefectiveMatrix
                | SogError::QuadratureNotConverged { .. }
                | SogError::TargetUnreachable(_)
                | SogError::UnstablePole(_)
                | SogError::PrecisionTooLow { .. }
        )
    }
}

impl From<std::io::Error> for SogError {
    fn from(e: std::io::Error) -> Self {
        SogError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SogError {
    fn from(e: serde_json::Error) -> Self {
        SogError::Format(e.to_string())
    }
}
