//! Flooding-schedule message passing over a whole network.
//!
//! Every iteration first computes all function-to-argument messages from the
//! marginals left by the previous iteration, then adds each node's incoming
//! messages onto its marginal. Out-node marginals are pinned to the target
//! output for the whole run.

use rayon::prelude::*;

use super::messages::argument_masses;
use super::{probs_to_llr, Llr, MsgError, DEFAULT_CLAMP};
use crate::bn::{InputVector, Network, NodeKind, OutputVector};

/// Work (summed `k * 2^k` over function nodes) above which phase one runs on
/// the rayon pool.
const PARALLEL_WORK: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceParams {
    /// Number of iterations.
    pub t_max: usize,
    /// Magnitude standing in for an infinite LLR.
    pub clamp: f64,
}

impl Default for InferenceParams {
    fn default() -> Self {
        Self {
            t_max: 14,
            clamp: DEFAULT_CLAMP,
        }
    }
}

impl InferenceParams {
    pub fn with_t_max(t_max: usize) -> Self {
        Self {
            t_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), MsgError> {
        if self.t_max == 0 {
            return Err(MsgError::Params("t_max must be at least 1".into()));
        }
        if !(self.clamp.is_finite() && self.clamp > 0.0) {
            return Err(MsgError::Params(format!("clamp must be positive and finite, got {}", self.clamp)));
        }
        Ok(())
    }
}

/// Per-node marginals after some number of iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSet {
    llrs: Vec<Llr>,
    iteration: usize,
}

impl MarginalSet {
    /// The iteration-zero state: uniform everywhere, out-nodes pinned to `y`.
    pub fn initial(net: &Network, y: &OutputVector, clamp: f64) -> Result<Self, MsgError> {
        net.check_output(y)?;
        let mut llrs = vec![Llr::UNIFORM; net.len()];
        for (&o, &bit) in net.out_nodes().iter().zip(y.bits()) {
            llrs[o] = Llr::certain(bit, clamp);
        }
        Ok(Self { llrs, iteration: 0 })
    }

    pub fn from_llrs(llrs: Vec<Llr>, iteration: usize) -> Self {
        Self { llrs, iteration }
    }

    pub fn llr(&self, node: usize) -> Llr {
        self.llrs[node]
    }

    pub fn llrs(&self) -> &[Llr] {
        &self.llrs
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// LLRs of the in-nodes, in network in-node order.
    pub fn inputs(&self, net: &Network) -> Vec<Llr> {
        net.in_nodes().iter().map(|&i| self.llrs[i]).collect()
    }
}

/// The current function-to-argument messages, `sum_j k_j` entries laid out
/// node by node in argument order.
#[derive(Debug, Clone)]
pub struct MessageBuffer {
    offsets: Vec<usize>,
    messages: Vec<Llr>,
}

impl MessageBuffer {
    fn new(net: &Network) -> Self {
        let mut offsets = Vec::with_capacity(net.len() + 1);
        let mut total = 0;
        for node in net.nodes() {
            offsets.push(total);
            total += node.inputs.len();
        }
        offsets.push(total);
        Self {
            offsets,
            messages: vec![Llr::UNIFORM; total],
        }
    }

    /// Messages sent by function node `node`, one per argument.
    pub fn from_node(&self, node: usize) -> &[Llr] {
        &self.messages[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

/// Iterative state for one `(network, y)` query.
///
/// The network is copied into flat arrays up front so the per-iteration loops
/// walk contiguous memory.
pub struct Inference<'a> {
    net: &'a Network,
    params: InferenceParams,
    marginals: MarginalSet,
    buffer: MessageBuffer,
    /// Argument node ids, laid out like the message buffer.
    args: Vec<u32>,
    /// Packed truth tables of all nodes back to back; node `j` owns
    /// `tables[table_offsets[j]..table_offsets[j + 1]]`.
    table_offsets: Vec<usize>,
    tables: Vec<u64>,
    /// CSR: buffer slots of the messages node `j` receives are
    /// `incoming_slots[incoming_offsets[j]..incoming_offsets[j + 1]]`.
    incoming_offsets: Vec<usize>,
    incoming_slots: Vec<u32>,
    pinned: Vec<bool>,
    function_nodes: Vec<usize>,
    probs: Vec<(f64, f64)>,
    parallel: bool,
}

impl<'a> Inference<'a> {
    pub fn new(net: &'a Network, y: &OutputVector, params: InferenceParams) -> Result<Self, MsgError> {
        params.validate()?;
        let marginals = MarginalSet::initial(net, y, params.clamp)?;
        let buffer = MessageBuffer::new(net);
        let n = net.len();

        let mut args = Vec::with_capacity(buffer.len());
        let mut table_offsets = Vec::with_capacity(n + 1);
        let mut tables = Vec::new();
        let mut counts = vec![0usize; n + 1];
        for node in net.nodes() {
            table_offsets.push(tables.len());
            if let Some(f) = &node.function {
                tables.extend_from_slice(f.words());
            }
            for &a in &node.inputs {
                args.push(a as u32);
                counts[a + 1] += 1;
            }
        }
        table_offsets.push(tables.len());

        let mut incoming_offsets = counts;
        for j in 0..n {
            incoming_offsets[j + 1] += incoming_offsets[j];
        }
        let mut fill = incoming_offsets.clone();
        let mut incoming_slots = vec![0u32; buffer.len()];
        for (slot, &a) in args.iter().enumerate() {
            let a = a as usize;
            incoming_slots[fill[a]] = slot as u32;
            fill[a] += 1;
        }

        let pinned = (0..n).map(|j| net.kind(j) == NodeKind::Output).collect();
        let function_nodes: Vec<usize> = net.nodes().iter().filter(|v| !v.is_input()).map(|v| v.id).collect();
        let work: usize = net.nodes().iter().map(|v| v.inputs.len() << v.inputs.len()).sum();
        Ok(Self {
            net,
            params,
            marginals,
            buffer,
            args,
            table_offsets,
            tables,
            incoming_offsets,
            incoming_slots,
            pinned,
            function_nodes,
            probs: Vec::with_capacity(n),
            parallel: work >= PARALLEL_WORK,
        })
    }

    pub fn marginals(&self) -> &MarginalSet {
        &self.marginals
    }

    pub fn messages(&self) -> &MessageBuffer {
        &self.buffer
    }

    pub fn into_marginals(self) -> MarginalSet {
        self.marginals
    }

    /// Runs one full iteration (both phases).
    pub fn step(&mut self) -> Result<(), MsgError> {
        let clamp = self.params.clamp;
        let iteration = self.marginals.iteration + 1;
        self.probs.clear();
        self.probs.extend(self.marginals.llrs.iter().map(|l| l.probs()));

        let probs = &self.probs;
        let offsets = &self.buffer.offsets;
        let all_args = &self.args;
        let tables = &self.tables;
        let table_offsets = &self.table_offsets;
        let node_messages = |j: usize, out: &mut [Llr], weights: &mut Vec<f64>, args: &mut Vec<(f64, f64)>| {
            let table = &tables[table_offsets[j]..table_offsets[j + 1]];
            args.clear();
            args.extend(all_args[offsets[j]..offsets[j + 1]].iter().map(|&a| probs[a as usize]));
            for (pos, slot) in out.iter_mut().enumerate() {
                let (mu0, mu1) = argument_masses(table, pos, args, probs[j], weights);
                *slot = probs_to_llr(mu0, mu1, clamp).map_err(|_| MsgError::NonFinite {
                    node: j,
                    iteration,
                })?;
            }
            Ok::<(), MsgError>(())
        };

        if self.parallel {
            let computed: Vec<Vec<Llr>> = self
                .function_nodes
                .par_iter()
                .map_init(
                    || (Vec::new(), Vec::new()),
                    |(weights, args), &j| {
                        let mut out = vec![Llr::UNIFORM; offsets[j + 1] - offsets[j]];
                        node_messages(j, &mut out, weights, args).map(|()| out)
                    },
                )
                .collect::<Result<_, _>>()?;
            for (&j, msgs) in self.function_nodes.iter().zip(computed) {
                let start = self.buffer.offsets[j];
                self.buffer.messages[start..start + msgs.len()].copy_from_slice(&msgs);
            }
        } else {
            let (mut weights, mut args) = (Vec::new(), Vec::new());
            for &j in &self.function_nodes {
                let range = offsets[j]..offsets[j + 1];
                node_messages(j, &mut self.buffer.messages[range], &mut weights, &mut args)?;
            }
        }

        for j in 0..self.net.len() {
            if self.pinned[j] {
                continue;
            }
            let slots = &self.incoming_slots[self.incoming_offsets[j]..self.incoming_offsets[j + 1]];
            let sum: f64 = slots.iter().map(|&s| self.buffer.messages[s as usize].0).sum();
            let updated = accumulate(self.marginals.llrs[j], sum, clamp);
            if !updated.0.is_finite() {
                return Err(MsgError::NonFinite { node: j, iteration });
            }
            self.marginals.llrs[j] = updated;
        }
        self.marginals.iteration = iteration;
        Ok(())
    }
}

fn accumulate(prev: Llr, message_sum: f64, clamp: f64) -> Llr {
    Llr(prev.0 + message_sum).clamp(clamp)
}

/// New marginal of a non-out node: the previous value plus every message it
/// receives, clamped.
pub fn variable_update(prev: Llr, incoming: &[Llr], clamp: f64) -> Llr {
    accumulate(prev, incoming.iter().map(|l| l.0).sum(), clamp)
}

/// Runs `params.t_max` iterations for target output `y`.
pub fn run_inference(net: &Network, y: &OutputVector, params: InferenceParams) -> Result<MarginalSet, MsgError> {
    run_inference_observed(net, y, params, |_| {})
}

/// Like [`run_inference`], calling `observe` after every iteration. Since
/// iteration `t` does not depend on `t_max`, one run observes the results for
/// every shorter horizon as well.
pub fn run_inference_observed(
    net: &Network,
    y: &OutputVector,
    params: InferenceParams,
    mut observe: impl FnMut(&MarginalSet),
) -> Result<MarginalSet, MsgError> {
    let mut inference = Inference::new(net, y, params)?;
    for _ in 0..params.t_max {
        inference.step()?;
        observe(inference.marginals());
    }
    Ok(inference.into_marginals())
}

/// Thresholds each in-node LLR at zero; ties go to 0.
pub fn hard_decision(m: &MarginalSet, net: &Network) -> InputVector {
    InputVector(net.in_nodes().iter().map(|&i| m.llr(i).0 < 0.0).collect())
}

/// Fraction of positions where `y` and `y_hat` agree.
pub fn similarity(y: &OutputVector, y_hat: &OutputVector) -> Result<f64, MsgError> {
    if y.len() != y_hat.len() || y.is_empty() {
        return Err(MsgError::LengthMismatch {
            expected: y.len(),
            found: y_hat.len(),
        });
    }
    let equal = y.bits().iter().zip(y_hat.bits()).filter(|(a, b)| a == b).count();
    Ok(equal as f64 / y.len() as f64)
}
