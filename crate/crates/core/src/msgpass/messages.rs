//! Local message rules for one function node.

use super::{probs_to_llr, Llr, MsgError};
use crate::bn::{split_at, BooleanFunction};

/// Fills `weights` with the product of the argument probabilities for every
/// joint assignment of `probs` (entry 0 as the least significant bit).
pub(crate) fn joint_weights<'a>(
    probs: impl Iterator<Item = &'a (f64, f64)>,
    weights: &mut Vec<f64>,
) {
    weights.clear();
    weights.push(1.0);
    for &(p0, p1) in probs {
        let len = weights.len();
        weights.extend_from_within(..len);
        for w in &mut weights[..len] {
            *w *= p0;
        }
        for w in &mut weights[len..] {
            *w *= p1;
        }
    }
}

#[inline]
fn table_bit(table: &[u64], index: usize) -> bool {
    (table[index / 64] >> (index % 64)) & 1 == 1
}

/// Unnormalized function-to-argument masses `(mu(0), mu(1))` for argument
/// `position` of the function with packed truth table `table`.
///
/// `args` holds `(p0, p1)` for every argument (the entry at `position` is
/// ignored) and `target` the distribution of the node computing `f`. A
/// co-assignment under which the argument cannot change the output
/// contributes half its weight to each side; otherwise each side is weighted
/// by the target's probability of the output it forces.
pub(crate) fn argument_masses(
    table: &[u64],
    position: usize,
    args: &[(f64, f64)],
    target: (f64, f64),
    weights: &mut Vec<f64>,
) -> (f64, f64) {
    debug_assert!(table.len() * 64 >= 1 << args.len());
    joint_weights(
        args.iter()
            .enumerate()
            .filter(|&(l, _)| l != position)
            .map(|(_, p)| p),
        weights,
    );
    // indexed by out0 | out1 << 1; a lookup instead of a branch keeps the
    // loop free of data-dependent jumps
    let (t0, t1) = target;
    let coef0 = [0.5, t1, t0, 0.5];
    let coef1 = [0.5, t0, t1, 0.5];
    let (mut mu0, mut mu1) = (0.0, 0.0);
    for (co, &w) in weights.iter().enumerate() {
        let (lo, hi) = split_at(co, position);
        let case = usize::from(table_bit(table, lo)) | usize::from(table_bit(table, hi)) << 1;
        mu0 += coef0[case] * w;
        mu1 += coef1[case] * w;
    }
    (mu0, mu1)
}

/// Message from function node `f` to its argument `position`.
///
/// `incoming` holds the LLRs of the other `k - 1` arguments in input order
/// (skipping `position`); `target` is the LLR of the node that `f` defines.
pub fn function_to_variable(
    f: &BooleanFunction,
    position: usize,
    incoming: &[Llr],
    target: Llr,
    clamp: f64,
) -> Result<Llr, MsgError> {
    if position >= f.arity() || incoming.len() + 1 != f.arity() {
        return Err(MsgError::ArityMismatch {
            expected: f.arity() - 1,
            found: incoming.len(),
        });
    }
    let mut args: Vec<(f64, f64)> = incoming.iter().map(|l| l.probs()).collect();
    args.insert(position, (0.5, 0.5));
    let (mu0, mu1) = argument_masses(f.words(), position, &args, target.probs(), &mut Vec::new());
    probs_to_llr(mu0, mu1, clamp)
}

/// Distribution of the output of `f` when its arguments are independent with
/// the given LLRs.
pub fn output_distribution(f: &BooleanFunction, incoming: &[Llr], clamp: f64) -> Result<Llr, MsgError> {
    if incoming.len() != f.arity() {
        return Err(MsgError::ArityMismatch {
            expected: f.arity(),
            found: incoming.len(),
        });
    }
    let probs: Vec<(f64, f64)> = incoming.iter().map(|l| l.probs()).collect();
    let mut weights = Vec::new();
    joint_weights(probs.iter(), &mut weights);
    let (mut mu0, mut mu1) = (0.0, 0.0);
    for (m, &w) in weights.iter().enumerate() {
        if f.eval_index(m) {
            mu1 += w;
        } else {
            mu0 += w;
        }
    }
    probs_to_llr(mu0, mu1, clamp)
}
