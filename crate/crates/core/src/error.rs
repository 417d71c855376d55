use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("label {label} out of range for degree {degree}")]
    LabelOutOfRange { label: u64, degree: u64 },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("{what} is {value}, above the limit {limit}")]
    TooLarge {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("graph is not regular (degrees range over {min}..={max}); regularize it first")]
    NotRegular { min: u64, max: u64 },

    #[error("graph is not 1/2-lazy (vertex {vertex} has self-loop weight {loops}/{degree})")]
    NotLazy { vertex: usize, loops: u64, degree: u64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("graph is periodic (bipartite component); add self loops first")]
    Periodic,

    #[error("vertices {u} and {v} lie in different components")]
    DifferentComponents { u: usize, v: usize },

    #[error("query needs two distinct vertices, got {u} twice")]
    SameVertex { u: usize },

    #[error("right-hand side is not in the image of the Laplacian (|<b,1>|/|b| = {ratio:e}); pass --project to project it")]
    NotInImage { ratio: f64 },

    #[error("approximation parameter {alpha} is not below 1/2; Richardson boosting needs alpha < 1/2")]
    CertificateTooWeak { alpha: f64 },

    #[error("no {t}-bit generator multiset with bias <= {mu} within degree cap {cap}")]
    ExpanderInfeasible { t: u32, mu: f64, cap: u64 },

    #[error("lifted dimension {dim} exceeds the dense cap {cap}; use the entrywise backend")]
    DenseCapExceeded { dim: u128, cap: usize },

    #[error("product of an empty factor list")]
    EmptyFactors,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors that mean the input is well-formed but violates a mathematical
    /// precondition of the requested operation.
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            Error::NotInImage { .. }
                | Error::Disconnected { .. }
                | Error::DifferentComponents { .. }
                | Error::Periodic
                | Error::NotLazy { .. }
                | Error::NotRegular { .. }
                | Error::ExpanderInfeasible { .. }
                | Error::CertificateTooWeak { .. }
                | Error::DenseCapExceeded { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
