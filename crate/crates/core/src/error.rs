use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("port numbering is not proper at node {node}: {detail}")]
    ImproperNumbering { node: String, detail: String },

    #[error("node {node} has degree {degree}, exceeding the machine bound {delta}")]
    DegreeExceeded {
        node: String,
        degree: usize,
        delta: usize,
    },

    #[error("local input {input} at node {node} is outside the machine's input alphabet")]
    InputOutOfAlphabet { node: String, input: String },

    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(String, String),

    #[error("node {0} is not part of the graph")]
    UnknownNode(String),

    #[error("execution did not halt within {0} rounds")]
    DidNotHalt(usize),

    #[error("resource cap exceeded: {what} (limit {limit})")]
    ResourceCap { what: String, limit: usize },

    #[error("query needs the full neighbourhood of {node}, which lies on the boundary of a truncated ball")]
    TruncatedBall { node: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("port collapse is undefined for label {0}")]
    CollapseUndefined(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("signature collision at node {node}: two neighbours share (view, out-port) after {rounds} rounds")]
    SignatureCollision { node: String, rounds: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by a configured size guard rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceCap { .. } | Error::TruncatedBall { .. })
    }
}
