use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("target {target} is outside the bracket [{lo_value}, {hi_value}]")]
    Bracket {
        target: f64,
        lo_value: f64,
        hi_value: f64,
    },

    #[error("matrix is singular (pivot {pivot:e} below tolerance)")]
    Singular { pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero denominator in {0}")]
    ZeroDenominator(String),

    #[error("group {group} has {count} node(s); at least {required} are needed")]
    DegenerateBlock {
        group: u8,
        count: usize,
        required: usize,
    },

    #[error("label vectors of the two networks differ")]
    LabelMismatch,

    #[error("block {0} has no observed edges")]
    InsufficientEdges(&'static str),

    #[error("estimated error rate for block {block} is {value} (must be < 1)")]
    DegenerateRate { block: &'static str, value: f64 },

    #[error("infeasible parameter: {0}")]
    InfeasibleParameter(String),

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("quadratic form is not strictly convex in beta (theta[0][0] = {0})")]
    NonConvex(f64),

    #[error("estimated variance is not positive ({0})")]
    DegenerateVariance(f64),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no records: {0}")]
    EmptyInput(String),

    #[error("missing labels for node(s): {}", .0.join(", "))]
    MissingLabels(Vec<String>),

    #[error("line {line}: unknown group tag '{tag}' (expected 1 or 2)")]
    UnknownGroup { line: usize, tag: String },

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by a degenerate sample rather than bad input.
    pub fn is_degenerate_statistics(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::ZeroDenominator(_)
                | Error::DegenerateBlock { .. }
                | Error::InsufficientEdges(_)
                | Error::DegenerateRate { .. }
                | Error::NotPositiveDefinite(_)
                | Error::NonConvex(_)
                | Error::DegenerateVariance(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
