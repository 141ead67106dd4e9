//! Exact preimage sets and marginals by exhaustive enumeration.

use rayon::prelude::*;
use thiserror::Error;

use crate::bn::{BnError, InputVector, Network, OutputVector};
use crate::msgpass::Llr;

/// Largest in-node count the oracle enumerates by default.
pub const DEFAULT_LIMIT_N: usize = 24;

/// Inputs per enumeration block.
const BLOCK: u64 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{n} in-nodes exceed the enumeration limit {limit} ({evaluations} evaluations)")]
    TooLarge {
        n: usize,
        limit: usize,
        evaluations: u128,
    },
    #[error("the preimage set is empty; marginals are undefined")]
    EmptyPreimage,
    #[error("marginal vectors differ in length: {exact} exact vs {estimated} estimated")]
    LengthMismatch { exact: usize, estimated: usize },
    #[error(transparent)]
    Network(#[from] BnError),
}

/// Every input that maps to `y`, in ascending integer encoding
/// (in-node 0 as the least significant bit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPreimageSet {
    pub y: OutputVector,
    pub members: Vec<InputVector>,
}

impl ExactPreimageSet {
    pub fn cardinality(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, x: &InputVector) -> bool {
        self.members
            .binary_search_by_key(&x.to_index(), InputVector::to_index)
            .is_ok()
    }
}

/// Exact per-input probabilities `p_i(x_i = 0)` under the uniform
/// distribution over a preimage set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMarginals {
    pub p0: Vec<f64>,
}

impl ExactMarginals {
    /// The marginals as LLRs, clamped at `clamp` where a bit is certain.
    pub fn to_llrs(&self, clamp: f64) -> Vec<Llr> {
        self.p0
            .iter()
            .map(|&p| crate::msgpass::probs_to_llr(p, 1.0 - p, clamp).expect("p in [0, 1]"))
            .collect()
    }
}

/// Enumerates all `2^N` inputs of `net` and collects those mapping to `y`.
pub fn enumerate_preimages(net: &Network, y: &OutputVector, limit_n: usize) -> Result<ExactPreimageSet, OracleError> {
    net.check_output(y)?;
    let n = net.n_inputs();
    if n > limit_n || n >= 64 {
        return Err(OracleError::TooLarge {
            n,
            limit: limit_n,
            evaluations: 1u128 << n.min(127),
        });
    }
    let total = 1u64 << n;
    let blocks = total.div_ceil(BLOCK);
    let members: Vec<Vec<InputVector>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let (mut x, mut state) = (Vec::with_capacity(n), Vec::new());
            let mut found = Vec::new();
            for m in b * BLOCK..((b + 1) * BLOCK).min(total) {
                x.clear();
                x.extend((0..n).map(|i| m >> i & 1 == 1));
                if net.maps_to(&x, y.bits(), &mut state).expect("lengths checked") {
                    found.push(InputVector(x.clone()));
                }
            }
            found
        })
        .collect();
    Ok(ExactPreimageSet {
        y: y.clone(),
        members: members.into_iter().flatten().collect(),
    })
}

/// Fraction of preimages with each input equal to 0.
pub fn exact_marginals(set: &ExactPreimageSet, n_inputs: usize) -> Result<ExactMarginals, OracleError> {
    if set.members.is_empty() {
        return Err(OracleError::EmptyPreimage);
    }
    let mut zeros = vec![0usize; n_inputs];
    for x in &set.members {
        for (z, &b) in zeros.iter_mut().zip(x.bits()) {
            *z += usize::from(!b);
        }
    }
    let total = set.members.len() as f64;
    Ok(ExactMarginals {
        p0: zeros.into_iter().map(|z| z as f64 / total).collect(),
    })
}

/// Mean over inputs of `|p_i(0) - p_hat_i(0)|`, where the estimate comes from
/// in-node LLRs.
pub fn marginal_distance(exact: &ExactMarginals, estimated: &[Llr]) -> Result<f64, OracleError> {
    if exact.p0.is_empty() {
        return Err(OracleError::EmptyPreimage);
    }
    if exact.p0.len() != estimated.len() {
        return Err(OracleError::LengthMismatch {
            exact: exact.p0.len(),
            estimated: estimated.len(),
        });
    }
    let total: f64 = exact
        .p0
        .iter()
        .zip(estimated)
        .map(|(&p, l)| (p - l.p0()).abs())
        .sum();
    Ok(total / exact.p0.len() as f64)
}
