use thiserror::Error;

/// Error type shared by every operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a structural invariant (non-finite entries, bad shapes).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter is out of range for the given input.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input is structurally valid but carries no usable signal
    /// (all-duplicate clouds, all-zero spectra, empty content-word sets).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A least-squares fit has no unique solution.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A document lacks the annotation layer an operation needs.
    #[error("missing annotation: {0}")]
    MissingAnnotation(String),

    /// A file or byte stream does not conform to its declared format.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
