//! Feed-forward Boolean networks: truth tables, validated DAGs, forward
//! evaluation and the `bn v1` file format.

mod bits;
mod format;
mod function;
mod network;

pub use bits::{InputVector, OutputVector};
pub use format::{parse_network, serialize_network};
pub use function::{pack_index, split_at, BooleanFunction, DEFAULT_UNATE_LIMIT, K_MAX};
pub use network::{Network, Node, NodeKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BnError {
    #[error("arity {arity} outside 1..={max}")]
    Arity { arity: usize, max: usize },
    #[error("truth table for arity {arity} needs {expected} entries, found {found}")]
    TableLength {
        arity: usize,
        expected: usize,
        found: usize,
    },
    #[error("malformed hex truth table `{0}`")]
    BadHex(String),
    #[error("malformed bit string `{0}`")]
    BadBitString(String),
    #[error("assignment has {found} values, expected {expected}")]
    AssignmentLength { expected: usize, found: usize },
    #[error("input position {position} out of range for arity {arity}")]
    PositionOutOfRange { position: usize, arity: usize },
    #[error("unate check refused: arity {arity} exceeds limit {limit} (cost 2^k*k)")]
    UnateLimit { arity: usize, limit: usize },

    #[error("node listed at position {position} has id {id}")]
    NodeOrder { position: usize, id: usize },
    #[error("node {node} is listed more than once")]
    DuplicateNode { node: usize },
    #[error("node {node} is never defined")]
    MissingNode { node: usize },
    #[error("node id {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("in-node {node} has arguments")]
    InputWithArgs { node: usize },
    #[error("node {node} has a function of arity {arity} but {args} arguments")]
    ArityMismatch { node: usize, arity: usize, args: usize },
    #[error("node {node} references undefined node {input}")]
    DanglingInput { node: usize, input: usize },
    #[error("node {node} references node {input}, which is not earlier in topological order")]
    Cycle { node: usize, input: usize },
    #[error("node {node} lists argument {input} twice")]
    RepeatedArg { node: usize, input: usize },
    #[error("network has no in-nodes")]
    NoInputs,
    #[error("network has no out-nodes")]
    NoOutputs,
    #[error("out-node {node} does not exist")]
    DanglingOutput { node: usize },
    #[error("out-node {node} listed twice")]
    DuplicateOutput { node: usize },
    #[error("out-node {node} is an in-node")]
    OutputIsInput { node: usize },
    #[error("out-node {node} feeds other nodes")]
    OutputHasFanout { node: usize },
    #[error("header declares {declared_in} in / {declared_out} out, network has {found_in} / {found_out}")]
    HeaderMismatch {
        declared_in: usize,
        declared_out: usize,
        found_in: usize,
        found_out: usize,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<BnError>,
    },

    #[error("input vector has {found} bits, network has {expected} in-nodes")]
    InputLength { expected: usize, found: usize },
    #[error("output vector has {found} bits, network has {expected} out-nodes")]
    OutputLength { expected: usize, found: usize },
}

impl BnError {
    fn at(self, line: usize) -> Self {
        match self {
            e @ (BnError::Syntax { .. } | BnError::AtLine { .. }) => e,
            e => BnError::AtLine {
                line,
                source: Box::new(e),
            },
        }
    }

    /// The underlying error with any line annotation removed.
    pub fn root(&self) -> &BnError {
        match self {
            BnError::AtLine { source, .. } => source.root(),
            e => e,
        }
    }
}
