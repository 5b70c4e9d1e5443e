use thiserror::Error;

/// Errors raised by model ingestion and the analysis pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The model file does not follow the schema; `path` locates the field.
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("unknown unit `{unit}` for {family} at `{path}`")]
    UnknownUnit {
        family: &'static str,
        unit: String,
        path: String,
    },

    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: String },

    /// A domain invariant does not hold (bad section, bad material, ...).
    #[error("invalid {what}: {message}")]
    Invalid { what: String, message: String },

    #[error("model failed validation: {0}")]
    Validation(String),

    #[error("member {0} has zero length")]
    ZeroLength(u32),

    #[error("member {0}: orientation vector is parallel to the member axis")]
    SingularOrientation(u32),

    #[error("missing node group `{0}`")]
    MissingGroup(String),

    #[error("unknown node {0}")]
    UnknownNode(u32),

    #[error("insufficiently constrained: stiffness matrix is singular or indefinite (pivot {pivot})")]
    InsufficientlyConstrained { pivot: usize },

    #[error("mass matrix is not positive definite on the free degrees of freedom")]
    MassNotPositiveDefinite,

    #[error("eigensolver did not converge within {iterations} block iterations")]
    NoConvergence { iterations: usize },

    /// Zero deflection in a stiffness test means the ratio is unbounded.
    #[error("infinite stiffness: zero deflection at the measurement points")]
    InfiniteStiffness,

    #[error("explicit integration unstable: energy grew by {growth:.3}% at t = {time:.6} s")]
    Unstable { growth: f64, time: f64 },

    #[error("no feasible design candidate for module {0} within the mass budget")]
    NoFeasibleCandidate(String),

    #[error("missing metric `{0}` for gate evaluation")]
    MissingMetric(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            what: what.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the input rather than by the analysis.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::UnknownUnit { .. }
                | Error::DuplicateId { .. }
                | Error::Invalid { .. }
                | Error::Validation(_)
                | Error::MissingGroup(_)
                | Error::UnknownNode(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
