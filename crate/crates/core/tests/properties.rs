use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use bnpre::bn::{parse_network, serialize_network, NodeKind};
use bnpre::msgpass::{function_to_variable, hard_decision, run_inference, DEFAULT_CLAMP};
use bnpre::netgen::{generate, random_function_type_b, random_wire_tree, EnsembleConfig};
use bnpre::oracle::{enumerate_preimages, exact_marginals, DEFAULT_LIMIT_N};
use bnpre::rng::SeededRng;
use bnpre::{collect_preimages, BooleanFunction, InferenceParams, InputVector, Llr, Network, Node, OutputVector};

const C: f64 = DEFAULT_CLAMP;

fn tiny(function_type: &str, seed: u64) -> EnsembleConfig {
    EnsembleConfig {
        n_total: 20,
        n_in: 6,
        n_out: 6,
        depth: 3,
        k_max: 3,
        function_type: function_type.into(),
        seed,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Reference message by explicit enumeration of full assignments.
fn brute_message(f: &BooleanFunction, position: usize, others: &[Llr], target: Llr) -> f64 {
    let k = f.arity();
    let (t0, t1) = target.probs();
    let (mut mu0, mut mu1) = (0.0, 0.0);
    for co in 0..1usize << (k - 1) {
        let mut a = vec![false; k];
        let mut w = 1.0;
        let mut bit = 0;
        for (l, slot) in a.iter_mut().enumerate() {
            if l == position {
                continue;
            }
            *slot = co >> bit & 1 == 1;
            let (p0, p1) = others[bit].probs();
            w *= if *slot { p1 } else { p0 };
            bit += 1;
        }
        a[position] = false;
        let out0 = f.eval(&a).unwrap();
        a[position] = true;
        let out1 = f.eval(&a).unwrap();
        let t = |b: bool| if b { t1 } else { t0 };
        if out0 == out1 {
            mu0 += w / 2.0;
            mu1 += w / 2.0;
        } else {
            mu0 += w * t(out0);
            mu1 += w * t(out1);
        }
    }
    if mu1 == 0.0 {
        return C;
    }
    if mu0 == 0.0 {
        return -C;
    }
    (mu0.ln() - mu1.ln()).clamp(-C, C)
}

fn function_strategy(max_k: usize) -> impl Strategy<Value = BooleanFunction> {
    (1..=max_k).prop_flat_map(|k| {
        prop::collection::vec(any::<bool>(), 1 << k).prop_map(move |t| BooleanFunction::from_table(k, &t).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn message_matches_enumeration(
        f in function_strategy(6),
        pos_seed in any::<usize>(),
        llrs in prop::collection::vec(-8.0f64..8.0, 6),
        target in -8.0f64..8.0,
    ) {
        let position = pos_seed % f.arity();
        let others: Vec<Llr> = llrs[..f.arity() - 1].iter().map(|&v| Llr(v)).collect();
        let got = function_to_variable(&f, position, &others, Llr(target), C).unwrap();
        let want = brute_message(&f, position, &others, Llr(target));
        prop_assert!(close(got.0, want, 1e-9), "{} vs {}", got.0, want);
    }

    #[test]
    fn uniform_inputs_give_zero(f in function_strategy(10), pos_seed in any::<usize>()) {
        let position = pos_seed % f.arity();
        let others = vec![Llr::UNIFORM; f.arity() - 1];
        let got = function_to_variable(&f, position, &others, Llr::UNIFORM, C).unwrap();
        prop_assert!(got.0.abs() < 1e-12);
    }

    #[test]
    fn insensitivity_agrees_with_eval(f in function_strategy(10), pos_seed in any::<usize>(), bits in any::<u64>()) {
        let position = pos_seed % f.arity();
        let others: Vec<bool> = (0..f.arity() - 1).map(|i| bits >> i & 1 == 1).collect();
        let mut a = others.clone();
        a.insert(position, false);
        let out0 = f.eval(&a).unwrap();
        a[position] = true;
        let out1 = f.eval(&a).unwrap();
        prop_assert_eq!(f.is_insensitive(&others, position).unwrap(), out0 == out1);
    }

    #[test]
    fn hex_round_trip(f in function_strategy(12)) {
        let back = BooleanFunction::from_hex(f.arity(), &f.to_hex()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn generated_networks_round_trip(seed in any::<u64>(), b in any::<bool>()) {
        let net = generate(&EnsembleConfig::small(if b { "B" } else { "A" }, seed)).unwrap();
        let text = serialize_network(&net);
        let back = parse_network(&text).unwrap();
        prop_assert_eq!(serialize_network(&back), text);
    }

    #[test]
    fn llrs_bounded_and_outputs_pinned(seed in any::<u64>(), b in any::<bool>(), ybits in any::<u64>(), t in 1usize..12) {
        let net = generate(&EnsembleConfig::small(if b { "B" } else { "A" }, seed)).unwrap();
        let y = OutputVector::from_index(ybits, net.n_outputs());
        let m = run_inference(&net, &y, InferenceParams::with_t_max(t)).unwrap();
        for l in m.llrs() {
            prop_assert!(l.0.is_finite() && l.0.abs() <= C);
        }
        for (&o, &bit) in net.out_nodes().iter().zip(y.bits()) {
            prop_assert_eq!(m.llr(o).0.to_bits(), Llr::certain(bit, C).0.to_bits());
        }
    }

    #[test]
    fn topological_relabeling_preserves_outputs(seed in any::<u64>(), xbits in any::<u64>()) {
        let net = generate(&tiny("A", seed)).unwrap();
        let relabeled = random_relabel(&net, seed);
        let x = InputVector::from_index(xbits, net.n_inputs());
        let y = net.eval(&x).unwrap();
        prop_assert_eq!(relabeled.eval(&x).unwrap(), y);
    }
}

/// Renumbers `net` along a random topological order, keeping the relative
/// order of the in-nodes so input vectors stay aligned.
fn random_relabel(net: &Network, seed: u64) -> Network {
    let mut rng = SeededRng::new(seed);
    let n = net.len();
    let mut pending: Vec<usize> = net.nodes().iter().map(|v| v.inputs.len()).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&j| pending[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    let mut next_input = net.in_nodes().iter().copied().peekable();
    while !ready.is_empty() {
        // an in-node may only be taken when it is the next in in-node order
        let choices: Vec<usize> = (0..ready.len())
            .filter(|&i| net.kind(ready[i]) != NodeKind::Input || Some(&ready[i]) == next_input.peek())
            .collect();
        let i = *choices.choose(&mut rng).unwrap();
        let j = ready.swap_remove(i);
        if net.kind(j) == NodeKind::Input {
            next_input.next();
        }
        order.push(j);
        for &c in net.fanout(j) {
            pending[c] -= net.node(c).inputs.iter().filter(|&&a| a == j).count();
            if pending[c] == 0 {
                ready.push(c);
            }
        }
    }
    let mut new_id = vec![0; n];
    for (k, &j) in order.iter().enumerate() {
        new_id[j] = k;
    }
    let nodes = order
        .iter()
        .enumerate()
        .map(|(k, &j)| match &net.node(j).function {
            None => Node::input(k),
            Some(f) => Node::function(k, f.clone(), net.node(j).inputs.iter().map(|&a| new_id[a]).collect()),
        })
        .collect();
    Network::new(nodes, net.out_nodes().iter().map(|&o| new_id[o]).collect()).unwrap()
}

#[test]
fn type_b_functions_are_unate() {
    let mut rng = SeededRng::new(0xb);
    for i in 0..10_000 {
        let k = 1 + i % 10;
        let f = random_function_type_b(k, &mut rng);
        assert!(f.is_unate(10).unwrap(), "k={k} {}", f.to_hex());
    }
}

#[test]
fn preimage_sets_partition_the_input_space() {
    for seed in 0..5 {
        let net = generate(&tiny(if seed % 2 == 0 { "A" } else { "B" }, seed)).unwrap();
        let total: usize = (0..1u64 << net.n_outputs())
            .map(|y| {
                let y = OutputVector::from_index(y, net.n_outputs());
                let set = enumerate_preimages(&net, &y, DEFAULT_LIMIT_N).unwrap();
                for x in &set.members {
                    assert_eq!(net.eval(x).unwrap(), y);
                }
                set.cardinality()
            })
            .sum();
        assert_eq!(total, 1 << net.n_inputs());
    }
}

#[test]
fn uniform_sampling_estimates_preimage_fraction() {
    let n_samples = 4000;
    for seed in 0..20u64 {
        let net = generate(&EnsembleConfig::small("A", seed)).unwrap();
        let mut rng = SeededRng::new(seed);
        let x = InputVector::from_index(rng.gen(), net.n_inputs());
        let y = net.eval(&x).unwrap();
        let set = enumerate_preimages(&net, &y, DEFAULT_LIMIT_N).unwrap();
        let p = set.cardinality() as f64 / (1u64 << net.n_inputs()) as f64;
        let uniform = vec![Llr::UNIFORM; net.n_inputs()];
        let report = collect_preimages(&net, &y, &uniform, n_samples, seed).unwrap();
        let sigma = (p * (1.0 - p) / n_samples as f64).sqrt();
        assert!(
            (report.valid_rate() - p).abs() <= 3.0 * sigma + 1e-12,
            "seed {seed}: rate {} vs {p}",
            report.valid_rate()
        );
    }
}

#[test]
fn exact_marginal_sampling_accepts_product_mass() {
    let n_samples = 4000;
    for seed in 0..10u64 {
        let net = generate(&tiny("B", seed)).unwrap();
        let y = net.eval(&InputVector::from_index(seed * 7, net.n_inputs())).unwrap();
        let set = enumerate_preimages(&net, &y, DEFAULT_LIMIT_N).unwrap();
        let exact = exact_marginals(&set, net.n_inputs()).unwrap();
        let mass: f64 = set
            .members
            .iter()
            .map(|x| {
                x.bits()
                    .iter()
                    .zip(&exact.p0)
                    .map(|(&b, &p0)| if b { 1.0 - p0 } else { p0 })
                    .product::<f64>()
            })
            .sum();
        let report = collect_preimages(&net, &y, &exact.to_llrs(C), n_samples, seed).unwrap();
        for x in &report.unique_preimages {
            assert!(set.contains(x));
        }
        let sigma = (mass * (1.0 - mass) / n_samples as f64).sqrt();
        assert!(
            (report.valid_rate() - mass).abs() <= 3.0 * sigma + 1e-9,
            "seed {seed}: rate {} vs {mass}",
            report.valid_rate()
        );
    }
}

#[test]
fn inference_and_sampling_are_deterministic() {
    let net = generate(&EnsembleConfig::desk("A", 3)).unwrap();
    let y = net.eval(&InputVector::from_index(12345, net.n_inputs())).unwrap();
    let params = InferenceParams::with_t_max(14);
    let a = run_inference(&net, &y, params).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let b = pool.install(|| run_inference(&net, &y, params).unwrap());
    assert_eq!(a, b);
    let ra = collect_preimages(&net, &y, &a.inputs(&net), 1000, 9).unwrap();
    let rb = pool.install(|| collect_preimages(&net, &y, &b.inputs(&net), 1000, 9).unwrap());
    assert_eq!(ra, rb);
}

fn in_arg_mask(net: &Network, node: &Node, want: NodeKind) -> usize {
    node.inputs
        .iter()
        .enumerate()
        .filter(|&(_, &a)| net.kind(a) == want)
        .fold(0, |m, (l, _)| m | 1 << l)
}

#[test]
fn flipping_input_arguments_negates_input_llrs() {
    for seed in 0..20 {
        let net = generate(&EnsembleConfig::small("A", seed)).unwrap();
        let flipped = net
            .map_functions(|v, f| f.with_inputs_flipped(in_arg_mask(&net, v, NodeKind::Input)))
            .unwrap();
        let y = net.eval(&InputVector::from_index(seed, net.n_inputs())).unwrap();
        let params = InferenceParams::with_t_max(6);
        let a = run_inference(&net, &y, params).unwrap();
        let b = run_inference(&flipped, &y, params).unwrap();
        for j in 0..net.len() {
            let (la, lb) = (a.llr(j).0, b.llr(j).0);
            let want = if net.kind(j) == NodeKind::Input { -la } else { la };
            assert!(close(lb, want, 1e-9), "seed {seed} node {j}: {lb} vs {want}");
        }
    }
}

#[test]
fn complementing_outputs_with_relabeled_interior_keeps_input_llrs() {
    for seed in 0..20 {
        let net = generate(&EnsembleConfig::small("B", seed)).unwrap();
        let dual = net
            .map_functions(|v, f| {
                f.with_inputs_flipped(in_arg_mask(&net, v, NodeKind::Interior))
                    .complement()
            })
            .unwrap();
        let y = net.eval(&InputVector::from_index(seed * 3, net.n_inputs())).unwrap();
        let params = InferenceParams::with_t_max(6);
        let a = run_inference(&net, &y, params).unwrap();
        let b = run_inference(&dual, &y.complement(), params).unwrap();
        for j in 0..net.len() {
            let (la, lb) = (a.llr(j).0, b.llr(j).0);
            let want = if net.kind(j) == NodeKind::Input { la } else { -la };
            assert!(close(lb, want, 1e-9), "seed {seed} node {j}: {lb} vs {want}");
        }
    }
}

#[test]
fn complementing_outputs_alone_does_not_negate_input_llrs() {
    // AND with y = 1 and NAND with y = 0 have the same single preimage 11
    let and = Network::new(
        vec![Node::input(0), Node::input(1), Node::function(2, BooleanFunction::and2(), vec![0, 1])],
        vec![2],
    )
    .unwrap();
    let nand = and.map_functions(|_, f| f.complement()).unwrap();
    let params = InferenceParams::with_t_max(1);
    let a = run_inference(&and, &OutputVector(vec![true]), params).unwrap();
    let b = run_inference(&nand, &OutputVector(vec![false]), params).unwrap();
    assert_eq!(a.inputs(&and), b.inputs(&nand));
    assert!(a.llr(0).0 < 0.0);
}

#[test]
fn wire_trees_are_recovered() {
    let mut rng = SeededRng::new(0x7ee);
    for _ in 0..50 {
        let tree = random_wire_tree(6, &mut rng).unwrap();
        let params = InferenceParams::with_t_max(2 * tree.depth().max(1));
        for xi in 0..1u64 << tree.n_inputs() {
            let x = InputVector::from_index(xi, tree.n_inputs());
            let y = tree.eval(&x).unwrap();
            let m = run_inference(&tree, &y, params).unwrap();
            assert_eq!(tree.eval(&hard_decision(&m, &tree)).unwrap(), y);
        }
    }
}
