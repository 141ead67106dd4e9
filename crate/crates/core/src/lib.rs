//! Preimage search for feed-forward Boolean networks.
//!
//! Given a network `f` and a target output `y`, [`msgpass::run_inference`]
//! estimates per-input marginals of the inputs that map to `y` by LLR-domain
//! sum-product message passing. [`sampler::collect_preimages`] then draws
//! candidates from the product of those marginals and keeps the ones that
//! forward-evaluate to `y`. [`oracle`] provides exhaustive ground truth for
//! small networks, and [`netgen`] the random network ensembles used in
//! experiments.

pub mod bn;
pub mod harness;
pub mod msgpass;
pub mod netgen;
pub mod oracle;
pub mod registry;
pub mod rng;
pub mod sampler;
pub mod strategy;

pub use bn::{BooleanFunction, InputVector, Network, Node, OutputVector};
pub use msgpass::{run_inference, InferenceParams, Llr, MarginalSet};
pub use sampler::{collect_preimages, PreimageReport};
