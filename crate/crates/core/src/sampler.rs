//! Drawing candidate preimages from a product of per-input marginals.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;

use crate::bn::{BnError, InputVector, Network, OutputVector};
use crate::msgpass::Llr;
use crate::rng::SeededRng;

/// Default number of candidate draws per query.
pub const DEFAULT_SAMPLES: usize = 1000;

/// Draws per independent seed stream. Fixed so reports do not depend on the
/// number of worker threads.
const CHUNK: usize = 256;

/// Outcome of sampling candidates for one target output.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PreimageReport {
    pub samples_drawn: usize,
    /// Draws that mapped to the target, counted with multiplicity.
    pub valid_count: usize,
    /// Distinct valid draws.
    pub unique_preimages: BTreeSet<InputVector>,
}

impl PreimageReport {
    pub fn solved(&self) -> bool {
        !self.unique_preimages.is_empty()
    }

    pub fn unique_count(&self) -> usize {
        self.unique_preimages.len()
    }

    pub fn valid_rate(&self) -> f64 {
        if self.samples_drawn == 0 {
            0.0
        } else {
            self.valid_count as f64 / self.samples_drawn as f64
        }
    }

    /// Combines two reports; associative, and order-insensitive in its result.
    pub fn merge(mut self, other: PreimageReport) -> Self {
        self.samples_drawn += other.samples_drawn;
        self.valid_count += other.valid_count;
        self.unique_preimages.extend(other.unique_preimages);
        self
    }
}

/// Draws one input vector with `p(x_j = 0) = 1 / (1 + e^{-L_j})` independently
/// per in-node. `inputs` holds one LLR per in-node.
pub fn sample_input(inputs: &[Llr], rng: &mut SeededRng) -> InputVector {
    let mut x = Vec::with_capacity(inputs.len());
    sample_into(inputs, rng, &mut x);
    InputVector(x)
}

fn sample_into(inputs: &[Llr], rng: &mut SeededRng, x: &mut Vec<bool>) {
    x.clear();
    x.extend(inputs.iter().map(|l| rng.gen::<f64>() >= l.p0()));
}

/// Draws `n_samples` candidates from the product of `inputs` marginals and
/// keeps those with `f(x) = y`. Deterministic for a given `seed` regardless
/// of thread count.
pub fn collect_preimages(
    net: &Network,
    y: &OutputVector,
    inputs: &[Llr],
    n_samples: usize,
    seed: u64,
) -> Result<PreimageReport, BnError> {
    net.check_output(y)?;
    if inputs.len() != net.n_inputs() {
        return Err(BnError::InputLength {
            expected: net.n_inputs(),
            found: inputs.len(),
        });
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let reports: Vec<PreimageReport> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let draws = CHUNK.min(n_samples - c * CHUNK);
            let mut rng = SeededRng::derived(seed, c as u64);
            let mut report = PreimageReport {
                samples_drawn: draws,
                ..Default::default()
            };
            let (mut x, mut state) = (Vec::new(), Vec::new());
            for _ in 0..draws {
                sample_into(inputs, &mut rng, &mut x);
                if net.maps_to(&x, y.bits(), &mut state).expect("lengths checked") {
                    report.valid_count += 1;
                    if !report.unique_preimages.contains(x.as_slice()) {
                        report.unique_preimages.insert(InputVector(x.clone()));
                    }
                }
            }
            report
        })
        .collect();
    Ok(reports.into_iter().fold(PreimageReport::default(), PreimageReport::merge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::{BooleanFunction, Node};
    use crate::msgpass::DEFAULT_CLAMP;

    fn gate(f: BooleanFunction) -> Network {
        let k = f.arity();
        let mut nodes: Vec<Node> = (0..k).map(Node::input).collect();
        nodes.push(Node::function(k, f, (0..k).collect()));
        Network::new(nodes, vec![k]).unwrap()
    }

    #[test]
    fn clamped_marginals_draw_all_zero() {
        let mut rng = SeededRng::new(3);
        let inputs = vec![Llr(DEFAULT_CLAMP); 16];
        for _ in 0..1000 {
            assert!(sample_input(&inputs, &mut rng).bits().iter().all(|b| !b));
        }
    }

    #[test]
    fn biased_bit_frequency() {
        let mut rng = SeededRng::new(11);
        let inputs = [Llr(3f64.ln()), Llr(0.0)];
        let n = 100_000;
        let mut zeros = [0usize; 2];
        for _ in 0..n {
            let x = sample_input(&inputs, &mut rng);
            for (z, &b) in zeros.iter_mut().zip(x.bits()) {
                *z += usize::from(!b);
            }
        }
        for (z, p) in zeros.iter().zip([0.75, 0.5]) {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*z as f64 / n as f64 - p).abs() < 3.0 * sigma, "{z} vs {p}");
        }
    }

    #[test]
    fn xor_uniform() {
        let net = gate(BooleanFunction::xor2());
        let report = collect_preimages(&net, &"1".parse().unwrap(), &[Llr(0.0); 2], 1000, 5).unwrap();
        let sigma = (1000.0f64 * 0.25).sqrt();
        assert!((report.valid_count as f64 - 500.0).abs() < 3.0 * sigma);
        let unique: Vec<String> = report.unique_preimages.iter().map(|x| x.to_string()).collect();
        assert_eq!(unique, ["01", "10"]);
        assert!(report.solved());
    }

    #[test]
    fn unsatisfiable_target() {
        let net = gate(BooleanFunction::constant(1, false).unwrap());
        let report = collect_preimages(&net, &"1".parse().unwrap(), &[Llr(0.0)], 500, 1).unwrap();
        assert_eq!(report.valid_count, 0);
        assert!(!report.solved());
        assert_eq!(report.samples_drawn, 500);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let net = gate(BooleanFunction::or2());
        let y = "1".parse().unwrap();
        let a = collect_preimages(&net, &y, &[Llr(0.3), Llr(-0.2)], 999, 42).unwrap();
        let b = collect_preimages(&net, &y, &[Llr(0.3), Llr(-0.2)], 999, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.unique_count() <= a.valid_count && a.valid_count <= a.samples_drawn);
    }

    #[test]
    fn length_checks() {
        let net = gate(BooleanFunction::or2());
        assert!(collect_preimages(&net, &"1".parse().unwrap(), &[Llr(0.0)], 10, 0).is_err());
        assert!(collect_preimages(&net, &"11".parse().unwrap(), &[Llr(0.0); 2], 10, 0).is_err());
    }
}
