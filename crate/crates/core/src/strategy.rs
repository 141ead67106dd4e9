//! Interchangeable sources of in-node marginals for the sampler.

use std::sync::Arc;

use thiserror::Error;

use crate::bn::{Network, OutputVector};
use crate::msgpass::{run_inference, InferenceParams, Llr, MsgError};
use crate::oracle::{enumerate_preimages, exact_marginals, OracleError, DEFAULT_LIMIT_N};
use crate::registry::Registry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Inference(#[from] MsgError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Produces one LLR per in-node describing where preimages of `y` lie.
pub trait MarginalEstimator: Send + Sync {
    fn name(&self) -> &'static str;

    fn estimate(&self, net: &Network, y: &OutputVector, params: &InferenceParams) -> Result<Vec<Llr>, EstimateError>;
}

/// Message passing from the pinned outputs back to the inputs.
#[derive(Debug, Clone, Copy, Default)]
pub struct BeliefPropagation;

/// Ignores the network: every input is a fair coin.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

/// Exact marginals of the uniform distribution over all preimages.
#[derive(Debug, Clone, Copy)]
pub struct Exact {
    pub limit_n: usize,
}

impl Default for Exact {
    fn default() -> Self {
        Self {
            limit_n: DEFAULT_LIMIT_N,
        }
    }
}

impl MarginalEstimator for BeliefPropagation {
    fn name(&self) -> &'static str {
        "bp"
    }

    fn estimate(&self, net: &Network, y: &OutputVector, params: &InferenceParams) -> Result<Vec<Llr>, EstimateError> {
        Ok(run_inference(net, y, *params)?.inputs(net))
    }
}

impl MarginalEstimator for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn estimate(&self, net: &Network, y: &OutputVector, _: &InferenceParams) -> Result<Vec<Llr>, EstimateError> {
        net.check_output(y).map_err(OracleError::from)?;
        Ok(vec![Llr::UNIFORM; net.n_inputs()])
    }
}

impl MarginalEstimator for Exact {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn estimate(&self, net: &Network, y: &OutputVector, params: &InferenceParams) -> Result<Vec<Llr>, EstimateError> {
        let set = enumerate_preimages(net, y, self.limit_n)?;
        Ok(exact_marginals(&set, net.n_inputs())?.to_llrs(params.clamp))
    }
}

/// The built-in estimators: `bp` (alias `sum-product`), `uniform`, `exact`.
pub fn marginal_estimators() -> Registry<dyn MarginalEstimator> {
    let mut reg: Registry<dyn MarginalEstimator> = Registry::new("marginal estimator");
    reg.register("bp", Arc::new(BeliefPropagation))
        .register("uniform", Arc::new(Uniform))
        .register("exact", Arc::new(Exact::default()))
        .alias("sum-product", "bp");
    reg
}
