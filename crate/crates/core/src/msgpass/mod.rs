//! LLR-domain sum-product message passing for preimage marginals.

mod inference;
mod llr;
mod messages;

pub use inference::{
    hard_decision, run_inference, run_inference_observed, similarity, variable_update, Inference,
    InferenceParams, MarginalSet, MessageBuffer,
};
pub use llr::{llr_to_probs, probs_to_llr, Llr, DEFAULT_CLAMP};
pub use messages::{function_to_variable, output_distribution};

use thiserror::Error;

use crate::bn::BnError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MsgError {
    #[error("both probability masses are zero")]
    ZeroMass,
    #[error("invalid probability masses ({p0}, {p1})")]
    InvalidMass { p0: f64, p1: f64 },
    #[error("expected {expected} incoming LLRs, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("vectors differ in length: {expected} vs {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid inference parameters: {0}")]
    Params(String),
    #[error("non-finite message at node {node}, iteration {iteration}")]
    NonFinite { node: usize, iteration: usize },
    #[error(transparent)]
    Network(#[from] BnError),
}
