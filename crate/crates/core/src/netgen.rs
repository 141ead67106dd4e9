//! Random layered feed-forward network ensembles.
//!
//! Layer 0 holds the in-nodes, `depth` interior layers share the interior
//! nodes evenly, and the last layer holds the out-nodes. Each function node
//! draws its in-degree uniformly from `1..=k_max` and its distinct arguments
//! uniformly from all earlier layers.

use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::bn::{BnError, BooleanFunction, Network, Node, K_MAX};
use crate::registry::{Registry, UnknownStrategy};
use crate::rng::SeededRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetgenError {
    #[error("infeasible ensemble configuration: {0}")]
    Config(String),
    #[error("could not attach dangling node {node} to any later node")]
    Rewire { node: usize },
    #[error(transparent)]
    Unknown(#[from] UnknownStrategy),
    #[error(transparent)]
    Network(#[from] BnError),
}

/// A family of random local functions.
pub trait FunctionEnsemble: Send + Sync {
    fn name(&self) -> &'static str;

    /// Draws a function of arity `k`.
    fn sample(&self, k: usize, rng: &mut SeededRng) -> BooleanFunction;
}

/// Uniform over all `2^(2^k)` truth tables.
#[derive(Debug, Clone, Copy, Default)]
pub struct TypeA;

/// Unate functions: an OR of random AND-terms over literals of fixed polarity.
#[derive(Debug, Clone, Copy, Default)]
pub struct TypeB;

impl FunctionEnsemble for TypeA {
    fn name(&self) -> &'static str {
        "A"
    }

    fn sample(&self, k: usize, rng: &mut SeededRng) -> BooleanFunction {
        random_function_type_a(k, rng)
    }
}

impl FunctionEnsemble for TypeB {
    fn name(&self) -> &'static str {
        "B"
    }

    fn sample(&self, k: usize, rng: &mut SeededRng) -> BooleanFunction {
        random_function_type_b(k, rng)
    }
}

pub fn random_function_type_a(k: usize, rng: &mut SeededRng) -> BooleanFunction {
    let len = 1usize << k;
    let mut words: Vec<u64> = (0..len.div_ceil(64)).map(|_| rng.gen()).collect();
    if len < 64 {
        words[0] &= (1u64 << len) - 1;
    }
    BooleanFunction::from_words(k, words).expect("arity checked by caller")
}

pub fn random_function_type_b(k: usize, rng: &mut SeededRng) -> BooleanFunction {
    let all = (1usize << k) - 1;
    let polarity = rng.gen_range(0..=all);
    let n_terms = rng.gen_range(1..=k);
    let terms: Vec<usize> = (0..n_terms).map(|_| rng.gen_range(1..=all)).collect();
    // literal i is x_i when its polarity bit is 0 and !x_i when it is 1
    BooleanFunction::from_fn(k, |m| {
        let literals = m ^ polarity;
        terms.iter().any(|&t| t & !literals == 0)
    })
    .expect("arity checked by caller")
}

/// The built-in function ensembles: `A` (alias `type-a`) and `B` (aliases
/// `type-b`, `unate`).
pub fn function_ensembles() -> Registry<dyn FunctionEnsemble> {
    let mut reg: Registry<dyn FunctionEnsemble> = Registry::new("function ensemble");
    reg.register("A", Arc::new(TypeA))
        .register("B", Arc::new(TypeB))
        .alias("type-a", "A")
        .alias("type-b", "B")
        .alias("unate", "B");
    reg
}

/// Shape and seed of a random network ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub n_total: usize,
    pub n_in: usize,
    pub n_out: usize,
    /// Number of interior layers.
    pub depth: usize,
    pub k_max: usize,
    /// Name of a registered [`FunctionEnsemble`].
    pub function_type: String,
    pub seed: u64,
}

impl EnsembleConfig {
    /// 2400 nodes, 200 in, 1200 out, in-degree up to 15.
    pub fn paper(function_type: &str, seed: u64) -> Self {
        Self {
            n_total: 2400,
            n_in: 200,
            n_out: 1200,
            depth: 7,
            k_max: 15,
            function_type: function_type.into(),
            seed,
        }
    }

    /// The `paper` preset scaled down tenfold, in-degree up to 5.
    pub fn desk(function_type: &str, seed: u64) -> Self {
        Self {
            n_total: 240,
            n_in: 20,
            n_out: 120,
            depth: 7,
            k_max: 5,
            function_type: function_type.into(),
            seed,
        }
    }

    /// Small enough for exhaustive enumeration: 40 nodes, 8 in, 16 out.
    pub fn small(function_type: &str, seed: u64) -> Self {
        Self {
            n_total: 40,
            n_in: 8,
            n_out: 16,
            depth: 3,
            k_max: 3,
            function_type: function_type.into(),
            seed,
        }
    }

    pub fn preset(name: &str, function_type: &str, seed: u64) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "paper" => Some(Self::paper(function_type, seed)),
            "desk" => Some(Self::desk(function_type, seed)),
            "small" => Some(Self::small(function_type, seed)),
            _ => None,
        }
    }

    pub fn n_interior(&self) -> usize {
        self.n_total.saturating_sub(self.n_in + self.n_out)
    }

    pub fn validate(&self) -> Result<(), NetgenError> {
        let err = |m: String| Err(NetgenError::Config(m));
        if self.n_in + self.n_out > self.n_total {
            return err(format!(
                "{} in + {} out exceed {} nodes",
                self.n_in, self.n_out, self.n_total
            ));
        }
        if self.n_in == 0 || self.n_out == 0 {
            return err("need at least one in-node and one out-node".into());
        }
        if self.depth == 0 {
            return err("depth must be at least 1".into());
        }
        if self.n_interior() < self.depth {
            return err(format!(
                "{} interior nodes cannot fill {} layers",
                self.n_interior(),
                self.depth
            ));
        }
        if self.k_max == 0 || self.k_max > K_MAX {
            return err(format!("k_max {} outside 1..={K_MAX}", self.k_max));
        }
        if self.k_max > self.n_in {
            return err(format!(
                "k_max {} exceeds the {} nodes available to the first layer",
                self.k_max, self.n_in
            ));
        }
        Ok(())
    }

    /// Node-id ranges `[start, end)` of every layer, in-nodes first.
    fn layers(&self) -> Vec<(usize, usize)> {
        let interior = self.n_interior();
        let mut layers = vec![(0, self.n_in)];
        let mut start = self.n_in;
        for l in 0..self.depth {
            let size = interior / self.depth + usize::from(l < interior % self.depth);
            layers.push((start, start + size));
            start += size;
        }
        layers.push((start, start + self.n_out));
        layers
    }
}

/// Generates one network from `cfg`, drawing everything from `cfg.seed`.
pub fn generate(cfg: &EnsembleConfig) -> Result<Network, NetgenError> {
    let ensemble = function_ensembles().get(&cfg.function_type)?;
    random_network(cfg, ensemble.as_ref(), &mut SeededRng::new(cfg.seed))
}

pub fn random_network(
    cfg: &EnsembleConfig,
    ensemble: &dyn FunctionEnsemble,
    rng: &mut SeededRng,
) -> Result<Network, NetgenError> {
    cfg.validate()?;
    let layers = cfg.layers();
    let mut args: Vec<Vec<usize>> = vec![Vec::new(); cfg.n_total];
    let mut layer_of = vec![0usize; cfg.n_total];
    for (l, &(start, end)) in layers.iter().enumerate().skip(1) {
        for v in start..end {
            layer_of[v] = l;
            let k = rng.gen_range(1..=cfg.k_max);
            let mut chosen = index::sample(rng, start, k).into_vec();
            chosen.sort_unstable();
            args[v] = chosen;
        }
    }

    let mut fanout = vec![0usize; cfg.n_total];
    for a in args.iter().flatten() {
        fanout[*a] += 1;
    }
    let first_out = layers.last().expect("output layer").0;
    for d in 0..first_out {
        if fanout[d] > 0 {
            continue;
        }
        // replace an argument that has other consumers, so nothing new dangles
        let later = layers[layer_of[d] + 1].0;
        let slots: Vec<(usize, usize)> = (later..cfg.n_total)
            .flat_map(|v| args[v].iter().enumerate().map(move |(s, &a)| (v, s, a)))
            .filter(|&(v, _, a)| fanout[a] > 1 && !args[v].contains(&d))
            .map(|(v, s, _)| (v, s))
            .collect();
        if slots.is_empty() {
            return Err(NetgenError::Rewire { node: d });
        }
        let (v, s) = slots[rng.gen_range(0..slots.len())];
        fanout[args[v][s]] -= 1;
        args[v][s] = d;
        args[v].sort_unstable();
        fanout[d] += 1;
    }

    let nodes = args
        .into_iter()
        .enumerate()
        .map(|(id, inputs)| {
            if id < cfg.n_in {
                Node::input(id)
            } else {
                let f = ensemble.sample(inputs.len(), rng);
                Node::function(id, f, inputs)
            }
        })
        .collect();
    Ok(Network::new(nodes, (first_out..cfg.n_total).collect())?)
}

/// A single chain of 1-input functions from one in-node to one out-node;
/// `negate[i]` picks NOT over a wire for the `i`-th function.
pub fn wire_chain(negate: &[bool]) -> Result<Network, NetgenError> {
    if negate.is_empty() {
        return Err(NetgenError::Config("a chain needs at least one function".into()));
    }
    let mut nodes = vec![Node::input(0)];
    for (i, &neg) in negate.iter().enumerate() {
        let f = if neg { BooleanFunction::not() } else { BooleanFunction::identity() };
        nodes.push(Node::function(i + 1, f, vec![i]));
    }
    Ok(Network::new(nodes, vec![negate.len()])?)
}

/// A random forest of NOT/wire nodes of depth at most `max_depth`, one tree
/// per in-node (1 to 3 of them); the leaves are the out-nodes.
pub fn random_wire_tree(max_depth: usize, rng: &mut SeededRng) -> Result<Network, NetgenError> {
    if max_depth == 0 {
        return Err(NetgenError::Config("tree depth must be at least 1".into()));
    }
    let depth = rng.gen_range(1..=max_depth);
    let n_in = rng.gen_range(1..=3);
    let mut nodes: Vec<Node> = (0..n_in).map(Node::input).collect();
    let mut frontier: Vec<usize> = (0..n_in).collect();
    let mut outs = Vec::new();
    for level in 1..=depth {
        let mut next = Vec::new();
        for &parent in &frontier {
            let min_children = usize::from(parent < n_in);
            let children = if level == depth { 1 } else { rng.gen_range(min_children..=2) };
            for _ in 0..children {
                let f = if rng.gen() { BooleanFunction::not() } else { BooleanFunction::identity() };
                let id = nodes.len();
                nodes.push(Node::function(id, f, vec![parent]));
                next.push(id);
            }
            if children == 0 {
                outs.push(parent);
            }
        }
        frontier = next;
    }
    outs.extend(frontier);
    outs.sort_unstable();
    Ok(Network::new(nodes, outs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{parse_network, serialize_network, DEFAULT_UNATE_LIMIT};

    #[test]
    fn type_a_k1_tables_are_uniform() {
        let mut rng = SeededRng::new(1);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[random_function_type_a(1, &mut rng).words()[0] as usize] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 4.0).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn type_a_k2_bits_are_unbiased() {
        let mut rng = SeededRng::new(2);
        let n = 100_000;
        let mut ones = [0usize; 4];
        for _ in 0..n {
            let f = random_function_type_a(2, &mut rng);
            for (m, o) in ones.iter_mut().enumerate() {
                *o += usize::from(f.eval_index(m));
            }
        }
        let sigma = (n as f64 * 0.25).sqrt();
        for o in ones {
            assert!((o as f64 - n as f64 / 2.0).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn type_b_is_unate() {
        let mut rng = SeededRng::new(3);
        for i in 0..10_000 {
            let k = 1 + i % 8;
            let f = random_function_type_b(k, &mut rng);
            assert!(f.is_unate(DEFAULT_UNATE_LIMIT).unwrap(), "{f:?}");
        }
    }

    #[test]
    fn fixed_seed_functions_repeat() {
        for ens in [&TypeA as &dyn FunctionEnsemble, &TypeB] {
            let a = ens.sample(6, &mut SeededRng::new(9));
            let b = ens.sample(6, &mut SeededRng::new(9));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn registry_names() {
        let reg = function_ensembles();
        assert_eq!(reg.names().collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(reg.get("unate").unwrap().name(), "B");
        assert!(reg.get("C").is_err());
    }

    #[test]
    fn desk_preset_network() {
        for ty in ["A", "B"] {
            let net = generate(&EnsembleConfig::desk(ty, 5)).unwrap();
            assert_eq!(net.len(), 240);
            assert_eq!(net.n_inputs(), 20);
            assert_eq!(net.n_outputs(), 120);
            assert!(net.depth() <= 8);
            assert!(net.max_arity() <= 5);
            for v in 0..net.len() - 120 {
                assert!(!net.fanout(v).is_empty(), "node {v} dangles");
            }
            let text = serialize_network(&net);
            assert_eq!(parse_network(&text).unwrap(), net);
            assert_eq!(serialize_network(&generate(&EnsembleConfig::desk(ty, 5)).unwrap()), text);
        }
    }

    #[test]
    fn paper_preset_counts() {
        let cfg = EnsembleConfig::paper("A", 0);
        assert_eq!(cfg.n_interior(), 1000);
        cfg.validate().unwrap();
    }

    #[test]
    fn infeasible_configs() {
        let mut cfg = EnsembleConfig::small("A", 0);
        cfg.k_max = 9;
        assert!(matches!(generate(&cfg), Err(NetgenError::Config(_))));
        let mut cfg = EnsembleConfig::small("A", 0);
        cfg.n_total = 20;
        assert!(generate(&cfg).is_err());
        let mut cfg = EnsembleConfig::small("A", 0);
        cfg.depth = 0;
        assert!(generate(&cfg).is_err());
        assert!(matches!(
            generate(&EnsembleConfig::small("Z", 0)),
            Err(NetgenError::Unknown(_))
        ));
    }

    #[test]
    fn chains_and_trees() {
        let chain = wire_chain(&[true, false, true]).unwrap();
        assert_eq!(chain.depth(), 3);
        assert_eq!(chain.eval(&"1".parse().unwrap()).unwrap().to_string(), "1");
        let mut rng = SeededRng::new(4);
        for _ in 0..50 {
            let tree = random_wire_tree(8, &mut rng).unwrap();
            assert!(tree.depth() <= 8);
            assert!(tree.max_arity() == 1);
        }
    }
}
