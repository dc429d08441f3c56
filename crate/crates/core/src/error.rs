use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is numerically rank deficient (pivot {pivot} has norm {norm:.3e})")]
    RankDeficient { pivot: usize, norm: f64 },
    #[error("SVD did not converge within {sweeps} iterations")]
    NoConvergence { sweeps: usize },
    #[error("operation undefined for the zero matrix")]
    ZeroMatrix,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("signed pattern needs at least 2r columns (n={n}, r={r})")]
    PatternOverflow { n: usize, r: usize },
    #[error("no real root for the singularity condition")]
    NoRealRoot,
    #[error("gave up after {0} attempts")]
    MaxRetries(usize),
    #[error("shift search could not reach the target range (best beta {best_beta:.3e}, kappa {kappa:.3e})")]
    BisectFail { best_beta: f64, kappa: f64 },
    #[error("sketch collapsed to rank {got}, expected {expected}")]
    RankCollapse { got: usize, expected: usize },
    #[error("no spectral gap meets the tolerance")]
    NoGap,
    #[error("residual monitor rejected the output (residual {residual:.3e})")]
    Failure { residual: f64 },
    #[error("pivot block is singular (cond {0:.3e})")]
    SingularPivotBlock(f64),
    #[error("small pivot at elimination step {0}")]
    SmallPivot(usize),
    #[error("augmentation size exceeded n/2 without a safe elimination")]
    Exhausted,
    #[error("capacitance matrix is singular")]
    CapacitanceSingular,
    #[error("initial residual {0:.3e} is not below 1")]
    NotContractive(f64),
    #[error("iteration stagnated")]
    Stagnated,
    #[error("expectation is undefined at this boundary")]
    NoExpectation,
    #[error("unsupported preprocessor for this operation: {0}")]
    Unsupported(String),
    #[error("invalid configuration for `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
