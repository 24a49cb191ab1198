use thiserror::Error;

use crate::groups::Element;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown group spec `{0}`")]
    UnknownGroup(String),

    #[error("invalid group parameter: {0}")]
    InvalidGroupParameter(String),

    #[error("cannot form product: {0}")]
    IncompatibleProduct(String),

    #[error("group `{0}` is not finite; supply a window index")]
    NotEnumerable(String),

    #[error("element {0} does not belong to the group")]
    ForeignElement(String),

    #[error("empty window at index {0}")]
    EmptyWindow(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not a probability vector: {0}")]
    NotProbability(String),

    #[error("representation is not a homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("singular representation table for element {0}")]
    SingularTable(String),

    #[error("operation requires an orthogonal action")]
    NotOrthogonal,

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("no convergence within {n_max} windows (distance {distance:e})")]
    NotConverged { n_max: usize, distance: f64 },

    #[error("objective is not invariant: element {element} moves point {point} by {deviation:e}")]
    NonInvariantObjective {
        element: Element,
        point: usize,
        deviation: f64,
    },

    #[error("kernel is not diagonally invariant at ({row}, {col}) under {element}")]
    NotDiagonallyInvariant {
        element: Element,
        row: usize,
        col: usize,
    },

    #[error("kernel table is invalid: {0}")]
    InvalidKernel(String),

    #[error("input is not invariant: {0}")]
    NotInvariant(String),

    #[error("marginal masses differ: {0} vs {1}")]
    MassMismatch(f64, f64),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("unbounded problem: {0}")]
    Unbounded(String),

    #[error("numeric breakdown: {0}")]
    NumericBreakdown(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cocycle identity violated: {0}")]
    CocycleViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
