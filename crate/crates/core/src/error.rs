use thiserror::Error;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input or a violated argument contract.
    InvalidInput,
    /// A numerical routine failed (singular factorization, no convergence).
    Numerical,
    /// A mathematical hypothesis or precondition of a construction is not met.
    Precondition,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate simplex at cell {cell} (volume {volume:e})")]
    DegenerateCell { cell: usize, volume: f64 },

    #[error("mesh resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("test function vanishes on the Steklov boundary")]
    VanishingBoundaryTrace,

    #[error("plane is not transverse to the mesh: {0}")]
    NonTransverse(String),

    #[error("codimension mismatch: plane codim {plane_codim} but mesh intrinsic dimension {mesh_dim}")]
    CodimMismatch { plane_codim: usize, mesh_dim: usize },

    #[error("all plane samples were degenerate ({rejections} rejections)")]
    AllSamplesDegenerate { rejections: usize },

    #[error("truncation not certified: {0}")]
    TruncationNotCertified(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("packing construction failed: achieved set measures {achieved:?}, target {target:e}")]
    PackingFailed { achieved: Vec<f64>, target: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("document error: {0}")]
    Document(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_)
            | Error::InvalidMesh(_)
            | Error::Unsupported(_)
            | Error::CodimMismatch { .. }
            | Error::Io(_)
            | Error::Document(_) => ErrorKind::InvalidInput,
            Error::DegenerateCell { .. }
            | Error::Factorization(_)
            | Error::NoConvergence { .. }
            | Error::VanishingBoundaryTrace
            | Error::NonTransverse(_)
            | Error::AllSamplesDegenerate { .. } => ErrorKind::Numerical,
            Error::ResolutionTooCoarse(_)
            | Error::TruncationNotCertified(_)
            | Error::HypothesisViolated(_)
            | Error::PackingFailed { .. } => ErrorKind::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
