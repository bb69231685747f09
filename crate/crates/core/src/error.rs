use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: weight {weight} outside [0, 1]")]
    WeightRange { line: usize, weight: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unknown node id `{0}`")]
    UnknownNode(String),

    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("edge {source_node}->{target_node} has no weight assigned")]
    UnweightedEdge { source_node: usize, target_node: usize },

    #[error("linear threshold model requires in-weights of node {node} to sum to at most 1, got {sum}")]
    ThresholdWeights { node: usize, sum: f64 },

    #[error("exact enumeration over {edges} uncertain edges exceeds the cap of {cap}")]
    EnumerationCap { edges: usize, cap: usize },

    #[error("invalid solution: {0}")]
    Solution(String),

    #[error("linear program: {0}")]
    Lp(#[from] crate::lp::LpError),

    #[error("configuration: {0}")]
    Config(String),

    #[error("fixture `{fixture}` failed self-check `{fact}`: expected {expected}, got {actual}")]
    FixtureCheck {
        fixture: String,
        fact: String,
        expected: f64,
        actual: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
