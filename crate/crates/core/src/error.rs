//! Crate-wide error type.

/// Errors surfaced by series arithmetic, factorization, and sampling.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two objects with different ambient dimensions were combined.
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A letter fell outside the alphabet `1..=d`.
    #[error("letter {letter} outside the alphabet 1..={d}")]
    LetterOutOfRange { letter: u8, d: usize },

    /// A matrix tuple was empty, non-square, or of mixed sizes.
    #[error("matrix tuple entries must be square and share one size")]
    MatrixShapeMismatch,

    /// Inversion was requested for a series with zero constant term.
    #[error("series has zero constant term and is not invertible")]
    ZeroConstantTerm,

    /// A degree-1 trigonometric polynomial was not strictly positive on the
    /// circle, so no spectral factor exists.
    #[error(
        "not strictly positive on the circle: need r0 > 2|r1| (r0 = {r0}, 2|r1| = {two_abs_r1})"
    )]
    NotStrictlyPositive { r0: f64, two_abs_r1: f64 },

    /// A sample point lay on or outside the open unit ball.
    #[error("point lies on or outside the open unit ball (|u|^2 = {norm_sq})")]
    PointOutsideBall { norm_sq: f64 },

    /// An input series exceeded the truncation degree of the operation.
    #[error("series degree {degree} exceeds the truncation degree {max_degree}")]
    DegreeTooLarge { degree: usize, max_degree: usize },

    /// A sparse support closure outgrew the desk-scale cap.
    #[error("sparse support exceeded {max} words at truncation degree {degree}")]
    SupportTooLarge { degree: usize, max: usize },

    /// The defect Gram matrix failed its positive-definite factorization.
    /// The Gram matrix is >= I by construction, so this indicates a
    /// malformed input or an internal fault, never a near-singular problem.
    #[error("positive-definite solve of the defect Gram matrix failed")]
    GramSolveFailed,

    /// A point sample with no points.
    #[error("a sample needs at least one point")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;
