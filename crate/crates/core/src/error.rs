use thiserror::Error;

/// Failures shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A scheme definition violates its structural invariants.
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    /// A field handed to a step function breaks its contract.
    #[error("contract violation: {0}")]
    Contract(String),
    /// The root finder did not converge. `trace` holds the largest
    /// correction of the last iterations.
    #[error("root finder did not converge after {iterations} iterations (last corrections {trace:?})")]
    RootConvergence { iterations: usize, trace: Vec<f64> },
    /// `z` sits too close to the essential spectrum for the requested classification.
    #[error("classification error: {0}")]
    Classification(String),
    /// Two stable eigenvalues are too close to build a Vandermonde basis.
    #[error("unsupported multiplicity: {0}")]
    Multiplicity(String),
    /// The eigenvector matrix is too ill-conditioned.
    #[error("eigenvector matrix condition number {0:e} exceeds the limit")]
    Conditioning(f64),
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Roots could not be matched unambiguously across a small step in `z`.
    #[error("root tracking failed: {0}")]
    Tracking(String),
    /// `z` is an eigenvalue of the operator or too close to its spectrum.
    #[error("z too close to the spectrum: {0}")]
    NearSpectrum(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
