use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("convexity violated at nodes {nodes:?} (defect {defect:.3e})")]
    Convexity { nodes: Vec<usize>, defect: f64 },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("singular value at node {node}: |v| = {value:.3e}")]
    Singularity { node: usize, value: f64 },
    #[error("mixed measure negative at node {node}: {value:.3e}")]
    NegativeMixed { node: usize, value: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    IterationLimit {
        iterations: usize,
        residual: f64,
        ledger: Vec<crate::eigen::LedgerRow>,
    },
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("unknown oracle: {0}")]
    Lookup(String),
    #[error("truncation required: {0}")]
    TruncationRequired(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, MaError>;
