use thiserror::Error;

/// Errors raised by the certification toolkit.
///
/// Verification *failures* (a net that does not separate, a lattice snap with
/// violating edges, a curvature check outside its hypothesis) are reported through the
/// corresponding report types, not through this enum. `Error` is reserved for
/// inputs and states that make an operation meaningless.
#[derive(Debug, Error)]
pub enum Error {
    /// A point does not satisfy the chart-domain constraints of its model.
    #[error("invalid point for {model}: {reason}")]
    Domain { model: String, reason: String },

    /// A query left the region where the operation is defined
    /// (for example a log map outside the injectivity radius).
    #[error("out of range for {op}: {reason}")]
    Range { op: String, reason: String },

    /// A structural precondition was violated; `detail` names the witness.
    #[error("precondition violated in {op}: {detail}")]
    Precondition { op: String, detail: String },

    /// The requested computation exceeds the configured budget.
    #[error("resource budget exceeded in {op}: requires an estimated {required} units (budget {budget})")]
    Resource {
        op: String,
        required: u128,
        budget: u128,
    },

    /// Required configuration is missing or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numeric procedure degenerated (zero directions, rank-deficient frame,
    /// underflowing step size).
    #[error("numeric failure in {op}: {reason}")]
    Numeric { op: String, reason: String },

    /// Evaluation outside every chart of the covering.
    #[error("coverage failure: point {point:?} is outside every support ball")]
    Coverage { point: Vec<f64> },

    /// Malformed external input (serialized graph, map outside vertex set, ...).
    #[error("input error: {0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(model: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            model: model.into(),
            reason: reason.into(),
        }
    }

    pub fn range(op: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Range {
            op: op.into(),
            reason: reason.into(),
        }
    }

    pub fn precondition(op: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precondition {
            op: op.into(),
            detail: detail.into(),
        }
    }

    pub fn numeric(op: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Numeric {
            op: op.into(),
            reason: reason.into(),
        }
    }
}
