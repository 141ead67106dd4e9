//! Experiment drivers behind the `sweep`, `table` and `validate` commands.
//!
//! All drivers parallelize over networks on the current rayon pool and emit
//! rows in (network, y, t) order, so output depends only on the seed and
//! configuration. Network `i` of an ensemble is generated from
//! `derive_seed(seed, i)`; its `j`-th target comes from forward-evaluating a
//! uniform input drawn from `derive_seed(network_seed, j)`.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bn::{BnError, InputVector, Network, OutputVector};
use crate::msgpass::{hard_decision, run_inference_observed, similarity, InferenceParams, MarginalSet, MsgError};
use crate::netgen::{generate, EnsembleConfig, NetgenError};
use crate::oracle::{enumerate_preimages, exact_marginals, marginal_distance, OracleError};
use crate::rng::{derive_seed, SeededRng};
use crate::sampler::{collect_preimages, PreimageReport};
use crate::strategy::{EstimateError, MarginalEstimator};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Netgen(#[from] NetgenError),
    #[error(transparent)]
    Inference(#[from] MsgError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Network(#[from] BnError),
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

/// Where the networks of an experiment come from.
#[derive(Debug, Clone)]
pub enum NetworkSource {
    /// `count` networks drawn from an ensemble; `config.seed` is replaced by
    /// the per-network derived seed.
    Ensemble { config: EnsembleConfig, count: usize },
    /// Explicit networks, used as given.
    Fixed(Vec<Network>),
}

impl NetworkSource {
    pub fn len(&self) -> usize {
        match self {
            NetworkSource::Ensemble { count, .. } => *count,
            NetworkSource::Fixed(nets) => nets.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self) -> String {
        match self {
            NetworkSource::Ensemble { config, .. } => config.function_type.clone(),
            NetworkSource::Fixed(_) => "file".into(),
        }
    }

    /// Default iteration count: twice the interior layer count of an
    /// ensemble, or twice the longest path of fixed networks.
    pub fn default_t_max(&self) -> usize {
        match self {
            NetworkSource::Ensemble { config, .. } => 2 * config.depth,
            NetworkSource::Fixed(nets) => 2 * nets.iter().map(Network::depth).max().unwrap_or(1).max(1),
        }
    }

    fn network(&self, index: usize, seed: u64) -> Result<Network, HarnessError> {
        match self {
            NetworkSource::Ensemble { config, .. } => {
                let cfg = EnsembleConfig {
                    seed: derive_seed(seed, index as u64),
                    ..config.clone()
                };
                Ok(generate(&cfg)?)
            }
            NetworkSource::Fixed(nets) => Ok(nets[index].clone()),
        }
    }
}

/// Seed governing everything drawn for network `index`.
fn network_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, index as u64)
}

/// The `j`-th random target for a network: `f(x)` for a uniform `x`.
pub fn random_target(net: &Network, net_seed: u64, j: usize) -> Result<(InputVector, OutputVector), BnError> {
    let mut rng = SeededRng::derived(net_seed, j as u64);
    let x = InputVector((0..net.n_inputs()).map(|_| rng.gen()).collect());
    let y = net.eval(&x)?;
    Ok((x, y))
}

fn sampling_seed(net_seed: u64, j: usize) -> u64 {
    derive_seed(net_seed ^ 0x5a5a_5a5a_5a5a_5a5a, j as u64)
}

fn per_network<T: Send>(
    source: &NetworkSource,
    seed: u64,
    run: impl Fn(usize, &Network, u64) -> Result<Vec<T>, HarnessError> + Sync,
) -> Result<Vec<T>, HarnessError> {
    let chunks: Vec<Vec<T>> = (0..source.len())
        .into_par_iter()
        .map(|i| {
            let net = source.network(i, seed)?;
            run(i, &net, network_seed(seed, i))
        })
        .collect::<Result<_, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub source: NetworkSource,
    pub t_list: Vec<usize>,
    pub ys_per_net: usize,
    pub clamp: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityRecord {
    pub network: usize,
    pub y_index: usize,
    pub t_max: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ensemble: String,
    pub t_max: usize,
    pub networks: usize,
    pub ys_per_net: usize,
    pub mean_similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<SimilarityRecord>,
    pub rows: Vec<SweepRow>,
}

/// Mean hard-decision similarity for every horizon in `t_list`.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepResult, HarnessError> {
    if cfg.t_list.is_empty() || cfg.t_list.contains(&0) {
        return Err(HarnessError::Config("t list must be non-empty and positive".into()));
    }
    if cfg.ys_per_net == 0 || cfg.source.is_empty() {
        return Err(HarnessError::Config("need at least one network and one target".into()));
    }
    let ts: BTreeSet<usize> = cfg.t_list.iter().copied().collect();
    let t_top = *ts.iter().next_back().expect("non-empty");
    let params = InferenceParams {
        t_max: t_top,
        clamp: cfg.clamp,
    };
    let records = per_network(&cfg.source, cfg.seed, |i, net, net_seed| {
        let mut out = Vec::with_capacity(cfg.ys_per_net * ts.len());
        let mut state = Vec::new();
        for j in 0..cfg.ys_per_net {
            let (_, y) = random_target(net, net_seed, j)?;
            let mut failure = None;
            run_inference_observed(net, &y, params, |m: &MarginalSet| {
                if failure.is_some() || !ts.contains(&m.iteration()) {
                    return;
                }
                let x = hard_decision(m, net);
                match similarity_of(net, &x, &y, &mut state) {
                    Ok(s) => out.push(SimilarityRecord {
                        network: i,
                        y_index: j,
                        t_max: m.iteration(),
                        similarity: s,
                    }),
                    Err(e) => failure = Some(e),
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
        }
        Ok(out)
    })?;

    let per_t = cfg.source.len() * cfg.ys_per_net;
    let rows = ts
        .iter()
        .map(|&t| {
            let total: f64 = records.iter().filter(|r| r.t_max == t).map(|r| r.similarity).sum();
            SweepRow {
                ensemble: cfg.source.label(),
                t_max: t,
                networks: cfg.source.len(),
                ys_per_net: cfg.ys_per_net,
                mean_similarity: total / per_t as f64,
            }
        })
        .collect();
    Ok(SweepResult { records, rows })
}

fn similarity_of(net: &Network, x: &InputVector, y: &OutputVector, state: &mut Vec<bool>) -> Result<f64, HarnessError> {
    net.evaluate_state(x.bits(), state)?;
    let y_hat = OutputVector(net.out_nodes().iter().map(|&o| state[o]).collect());
    Ok(similarity(y, &y_hat)?)
}

pub const SWEEP_HEADER: [&str; 5] = ["ensemble", "t_max", "networks", "ys_per_net", "mean_similarity"];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.ensemble.clone(),
            r.t_max.to_string(),
            r.networks.to_string(),
            r.ys_per_net.to_string(),
            fmt_f64(r.mean_similarity),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// table

#[derive(Debug, Clone)]
pub struct TableConfig {
    pub source: NetworkSource,
    pub ys_per_net: usize,
    pub n_samples: usize,
    /// Defaults to [`NetworkSource::default_t_max`].
    pub t_max: Option<usize>,
    pub clamp: f64,
    pub seed: u64,
}

/// One `(network, y)` run: inference, hard decision, then sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub network: usize,
    pub y_index: usize,
    pub t_max: usize,
    pub similarity: f64,
    pub solved: bool,
    pub valid_count: usize,
    pub unique_count: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSummary {
    pub ensemble: String,
    pub networks: usize,
    pub ys_per_net: usize,
    pub n_samples: usize,
    pub t_max: usize,
    /// Percentage of `(network, y)` runs with at least one preimage found.
    pub solved_pct: f64,
    /// Percentage of networks solved for every one of their targets.
    pub networks_all_solved_pct: f64,
    pub mean_valid: f64,
    pub mean_unique: f64,
    pub mean_similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub summary: TableSummary,
}

pub fn table(cfg: &TableConfig) -> Result<ExperimentResult, HarnessError> {
    if cfg.ys_per_net == 0 || cfg.source.is_empty() || cfg.n_samples == 0 {
        return Err(HarnessError::Config(
            "need at least one network, one target and one sample".into(),
        ));
    }
    let t_max = cfg.t_max.unwrap_or_else(|| cfg.source.default_t_max());
    let params = InferenceParams { t_max, clamp: cfg.clamp };
    params.validate()?;
    let records = per_network(&cfg.source, cfg.seed, |i, net, net_seed| {
        let mut state = Vec::new();
        (0..cfg.ys_per_net)
            .map(|j| {
                let (_, y) = random_target(net, net_seed, j)?;
                let start = Instant::now();
                let marginals = crate::msgpass::run_inference(net, &y, params)?;
                let inputs = marginals.inputs(net);
                let report = collect_preimages(net, &y, &inputs, cfg.n_samples, sampling_seed(net_seed, j))?;
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let x = hard_decision(&marginals, net);
                Ok(RunRecord {
                    network: i,
                    y_index: j,
                    t_max,
                    similarity: similarity_of(net, &x, &y, &mut state)?,
                    solved: report.solved(),
                    valid_count: report.valid_count,
                    unique_count: report.unique_count(),
                    wall_ms,
                })
            })
            .collect()
    })?;
    let summary = summarize(&cfg.source, cfg.ys_per_net, cfg.n_samples, t_max, &records);
    Ok(ExperimentResult { records, summary })
}

fn summarize(source: &NetworkSource, ys: usize, n_samples: usize, t_max: usize, records: &[RunRecord]) -> TableSummary {
    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&RunRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let all_solved = (0..source.len())
        .filter(|&i| records.iter().filter(|r| r.network == i).all(|r| r.solved))
        .count();
    TableSummary {
        ensemble: source.label(),
        networks: source.len(),
        ys_per_net: ys,
        n_samples,
        t_max,
        solved_pct: 100.0 * mean(&|r| f64::from(u8::from(r.solved))),
        networks_all_solved_pct: 100.0 * all_solved as f64 / source.len() as f64,
        mean_valid: mean(&|r| r.valid_count as f64),
        mean_unique: mean(&|r| r.unique_count as f64),
        mean_similarity: mean(&|r| r.similarity),
    }
}

pub const TABLE_HEADER: [&str; 10] = [
    "ensemble",
    "networks",
    "ys_per_net",
    "n_samples",
    "t_max",
    "solved_pct",
    "networks_all_solved_pct",
    "mean_valid",
    "mean_unique",
    "mean_similarity",
];

pub fn write_table_csv<W: Write>(summaries: &[TableSummary], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    for s in summaries {
        w.write_record([
            s.ensemble.clone(),
            s.networks.to_string(),
            s.ys_per_net.to_string(),
            s.n_samples.to_string(),
            s.t_max.to_string(),
            fmt_f64(s.solved_pct),
            fmt_f64(s.networks_all_solved_pct),
            fmt_f64(s.mean_valid),
            fmt_f64(s.mean_unique),
            fmt_f64(s.mean_similarity),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Per-run rows of one or more ensembles under a single header. The wall-time
/// column is only written when `timing` is set, since it is the one value
/// that differs between identical runs.
pub fn write_runs_csv<W: Write>(runs: &[(&str, &[RunRecord])], timing: bool, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "ensemble",
        "network",
        "y_index",
        "t_max",
        "similarity",
        "solved",
        "valid",
        "unique",
    ];
    if timing {
        header.push("wall_ms");
    }
    w.write_record(&header)?;
    for (ensemble, r) in runs.iter().flat_map(|&(e, rs)| rs.iter().map(move |r| (e, r))) {
        let mut row = vec![
            ensemble.to_string(),
            r.network.to_string(),
            r.y_index.to_string(),
            r.t_max.to_string(),
            fmt_f64(r.similarity),
            u8::from(r.solved).to_string(),
            r.valid_count.to_string(),
            r.unique_count.to_string(),
        ];
        if timing {
            row.push(format!("{:.3}", r.wall_ms));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// validate

#[derive(Debug, Clone)]
pub struct ValidateConfig {
    pub source: NetworkSource,
    /// Explicit target for every network; random targets when `None`.
    pub target: Option<OutputVector>,
    pub ys_per_net: usize,
    pub n_samples: usize,
    pub t_max: Option<usize>,
    pub clamp: f64,
    pub limit_n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateRecord {
    pub network: usize,
    pub y_index: usize,
    pub y: OutputVector,
    /// `|Omega_y|`
    pub omega: usize,
    pub n_inputs: usize,
    /// `None` when the preimage set is empty.
    pub marginal_distance: Option<f64>,
    pub estimated_valid_rate: f64,
    pub uniform_valid_rate: f64,
    /// `|Omega_y| / 2^N`
    pub exact_uniform_rate: f64,
    /// Distinct sampled preimages outside the exact set; always zero for a
    /// correct sampler.
    pub false_positives: usize,
    pub estimated_report: PreimageReport,
}

/// Cross-checks an estimator against exhaustive enumeration.
pub fn validate(cfg: &ValidateConfig, estimator: &dyn MarginalEstimator) -> Result<Vec<ValidateRecord>, HarnessError> {
    if cfg.source.is_empty() || cfg.n_samples == 0 || (cfg.target.is_none() && cfg.ys_per_net == 0) {
        return Err(HarnessError::Config(
            "need at least one network, one target and one sample".into(),
        ));
    }
    let params = InferenceParams {
        t_max: cfg.t_max.unwrap_or_else(|| cfg.source.default_t_max()),
        clamp: cfg.clamp,
    };
    params.validate()?;
    per_network(&cfg.source, cfg.seed, |i, net, net_seed| {
        let targets: Vec<OutputVector> = match &cfg.target {
            Some(y) => vec![y.clone()],
            None => (0..cfg.ys_per_net)
                .map(|j| random_target(net, net_seed, j).map(|(_, y)| y))
                .collect::<Result<_, _>>()?,
        };
        targets
            .into_iter()
            .enumerate()
            .map(|(j, y)| validate_one(net, i, j, y, cfg, &params, estimator, net_seed))
            .collect()
    })
}

#[allow(clippy::too_many_arguments)]
fn validate_one(
    net: &Network,
    network: usize,
    y_index: usize,
    y: OutputVector,
    cfg: &ValidateConfig,
    params: &InferenceParams,
    estimator: &dyn MarginalEstimator,
    net_seed: u64,
) -> Result<ValidateRecord, HarnessError> {
    let set = enumerate_preimages(net, &y, cfg.limit_n)?;
    let n = net.n_inputs();
    let seed = sampling_seed(net_seed, y_index);
    let uniform = vec![crate::msgpass::Llr::UNIFORM; n];
    let uniform_report = collect_preimages(net, &y, &uniform, cfg.n_samples, seed ^ 1)?;
    let (marginal_distance, estimated_report) = if set.cardinality() == 0 {
        // no preimage: every draw fails, whatever the marginals
        let report = match estimator.estimate(net, &y, params) {
            Ok(inputs) => collect_preimages(net, &y, &inputs, cfg.n_samples, seed)?,
            Err(EstimateError::Oracle(OracleError::EmptyPreimage)) => PreimageReport {
                samples_drawn: cfg.n_samples,
                ..Default::default()
            },
            Err(e) => return Err(e.into()),
        };
        (None, report)
    } else {
        let inputs = estimator.estimate(net, &y, params)?;
        let exact = exact_marginals(&set, n)?;
        (
            Some(marginal_distance(&exact, &inputs)?),
            collect_preimages(net, &y, &inputs, cfg.n_samples, seed)?,
        )
    };
    let false_positives = estimated_report
        .unique_preimages
        .iter()
        .filter(|x| !set.contains(x))
        .count();
    Ok(ValidateRecord {
        network,
        y_index,
        omega: set.cardinality(),
        n_inputs: n,
        marginal_distance,
        estimated_valid_rate: estimated_report.valid_rate(),
        uniform_valid_rate: uniform_report.valid_rate(),
        exact_uniform_rate: set.cardinality() as f64 / (1u64 << n) as f64,
        false_positives,
        estimated_report,
        y,
    })
}

pub const VALIDATE_HEADER: [&str; 10] = [
    "estimator",
    "network",
    "y_index",
    "y",
    "omega",
    "marginal_distance",
    "estimated_valid_rate",
    "uniform_valid_rate",
    "exact_uniform_rate",
    "false_positives",
];

pub fn write_validate_csv<W: Write>(estimator: &str, records: &[ValidateRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VALIDATE_HEADER)?;
    for r in records {
        w.write_record([
            estimator.to_string(),
            r.network.to_string(),
            r.y_index.to_string(),
            r.y.to_string(),
            r.omega.to_string(),
            r.marginal_distance.map_or_else(|| "undefined".to_string(), fmt_f64),
            fmt_f64(r.estimated_valid_rate),
            fmt_f64(r.uniform_valid_rate),
            fmt_f64(r.exact_uniform_rate),
            r.false_positives.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
