use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("covariance not positive definite")]
    NotPositiveDefinite,

    #[error("degenerate responsibility row {0}")]
    DegenerateResponsibilityRow(usize),

    #[error("empty component {0}")]
    EmptyComponent(usize),

    #[error("k > n: cannot fit {k} components to {n} samples")]
    TooManyComponents { k: usize, n: usize },

    #[error("invalid Dirichlet prior for empty component {0}")]
    InvalidDirichletPrior(usize),

    #[error("noise destroys simplex")]
    NoiseDestroysSimplex,

    #[error("zero-norm sample at row {0}")]
    ZeroNormSample(usize),

    #[error("singular within tolerance")]
    SingularWithinTolerance,

    #[error("no singular value above threshold {0}")]
    NoSingularValueAboveThreshold(f64),

    #[error("all-zero matrix")]
    ZeroMatrix,

    #[error("memory budget exceeded: {needed} entries requested, budget is {budget}")]
    MemoryBudget { needed: usize, budget: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
