//! `bnpre`: preimage queries and ensemble experiments on Boolean networks.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bnpre::bn::{parse_network, serialize_network, BnError};
use bnpre::harness::{
    self, write_runs_csv, write_sweep_csv, write_table_csv, write_validate_csv, HarnessError, NetworkSource,
    SweepConfig, TableConfig, ValidateConfig,
};
use bnpre::msgpass::DEFAULT_CLAMP;
use bnpre::netgen::{function_ensembles, generate, EnsembleConfig, NetgenError};
use bnpre::oracle::DEFAULT_LIMIT_N;
use bnpre::sampler::{collect_preimages, DEFAULT_SAMPLES};
use bnpre::strategy::marginal_estimators;
use bnpre::{InferenceParams, Network, OutputVector};

const EXIT_UNSOLVED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "bnpre", version, about = "Preimage search for feed-forward Boolean networks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed; every random draw is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Network file in bn v1 format.
    #[arg(long, global = true)]
    net: Option<PathBuf>,
    /// Ensemble size preset.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    /// 2400 nodes, 200 inputs, 1200 outputs, depth 7, k_max 15
    Paper,
    /// 240 nodes, 20 inputs, 120 outputs, depth 7, k_max 5
    Desk,
    /// 40 nodes, 8 inputs, 16 outputs, depth 3, k_max 3
    Small,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
            Preset::Small => "small",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search preimages of one target output of `--net`.
    Solve {
        /// Target output as a bit string in out-node order.
        #[arg(long)]
        y: String,
        /// Iterations (default: twice the network depth).
        #[arg(long)]
        t_max: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Marginal estimator: bp, uniform or exact.
        #[arg(long, default_value = "bp")]
        estimator: String,
    },
    /// Mean hard-decision similarity against the iteration count.
    Sweep {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Iteration counts, e.g. `1..30` or `1,7,14` (default: 1..4*depth).
        #[arg(long)]
        t_list: Option<String>,
    },
    /// Solved / valid / unique statistics per ensemble.
    Table {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Iterations (default: twice the depth).
        #[arg(long)]
        t_max: Option<usize>,
        /// Also write one row per (network, target) here.
        #[arg(long)]
        runs: Option<PathBuf>,
        /// Add a wall-clock column to the per-run rows.
        #[arg(long)]
        timing: bool,
    },
    /// Cross-check an estimator against exhaustive enumeration.
    Validate {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Fixed target instead of random ones.
        #[arg(long)]
        y: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        t_max: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_LIMIT_N)]
        limit_n: usize,
        #[arg(long, default_value = "bp")]
        estimator: String,
    },
    /// Emit one random network in bn v1 format.
    Gen {
        /// Function ensemble: A (uniform tables) or B (unate).
        #[arg(long = "type", default_value = "A")]
        function_type: String,
    },
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    /// Function ensembles, comma separated (ignored with --net).
    #[arg(long, default_value = "A,B", value_delimiter = ',')]
    types: Vec<String>,
    /// Networks per ensemble (ignored with --net).
    #[arg(long)]
    nets: Option<usize>,
    /// Random targets per network.
    #[arg(long)]
    ys: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) | HarnessError::Netgen(NetgenError::Config(_) | NetgenError::Unknown(_)) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Input(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let c = &cli.common;
    match &cli.command {
        Command::Solve {
            y,
            t_max,
            samples,
            estimator,
        } => solve(c, y, *t_max, *samples, estimator),
        Command::Sweep { ensemble, t_list } => {
            let mut rows = Vec::new();
            for source in sources(c, ensemble, Preset::Desk)? {
                let t_list = match t_list {
                    Some(spec) => parse_t_list(spec)?,
                    None => (1..=2 * source.default_t_max()).collect(),
                };
                let cfg = SweepConfig {
                    ys_per_net: ensemble.ys.unwrap_or(100),
                    source,
                    t_list,
                    clamp: DEFAULT_CLAMP,
                    seed: c.seed,
                };
                rows.extend(harness::sweep(&cfg)?.rows);
            }
            emit(c.out.as_deref(), |w| write_sweep_csv(&rows, w))?;
            Ok(0)
        }
        Command::Table {
            ensemble,
            samples,
            t_max,
            runs,
            timing,
        } => {
            let mut results = Vec::new();
            for source in sources(c, ensemble, Preset::Desk)? {
                let cfg = TableConfig {
                    ys_per_net: ensemble.ys.unwrap_or(100),
                    source,
                    n_samples: *samples,
                    t_max: *t_max,
                    clamp: DEFAULT_CLAMP,
                    seed: c.seed,
                };
                results.push(harness::table(&cfg)?);
            }
            let summaries: Vec<_> = results.iter().map(|r| r.summary.clone()).collect();
            emit(c.out.as_deref(), |w| write_table_csv(&summaries, w))?;
            if let Some(path) = runs {
                let grouped: Vec<(&str, &[_])> = results
                    .iter()
                    .map(|r| (r.summary.ensemble.as_str(), r.records.as_slice()))
                    .collect();
                emit(Some(path), |w| write_runs_csv(&grouped, *timing, w))?;
            }
            Ok(0)
        }
        Command::Validate {
            ensemble,
            y,
            samples,
            t_max,
            limit_n,
            estimator,
        } => {
            let est = marginal_estimators()
                .get(estimator)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let target = y.as_deref().map(parse_bits).transpose()?;
            let mut records = Vec::new();
            let mut net_offset = 0;
            for source in sources(c, ensemble, Preset::Small)? {
                let cfg = ValidateConfig {
                    source,
                    target: target.clone(),
                    ys_per_net: ensemble.ys.unwrap_or(10),
                    n_samples: *samples,
                    t_max: *t_max,
                    clamp: DEFAULT_CLAMP,
                    limit_n: *limit_n,
                    seed: c.seed,
                };
                let mut rs = match harness::validate(&cfg, est.as_ref()) {
                    Err(HarnessError::Network(e)) if matches!(e.root(), BnError::OutputLength { .. }) => {
                        return Err(Failure::Usage(e.to_string()))
                    }
                    other => other?,
                };
                // number networks consecutively across ensembles
                rs.iter_mut().for_each(|r| r.network += net_offset);
                net_offset += cfg.source.len();
                records.extend(rs);
            }
            emit(c.out.as_deref(), |w| write_validate_csv(est.name(), &records, w))?;
            Ok(0)
        }
        Command::Gen { function_type } => {
            let cfg = ensemble_config(c.preset.unwrap_or(Preset::Desk), function_type, c.seed)?;
            let net = generate(&cfg).map_err(|e| Failure::from(HarnessError::from(e)))?;
            let text = serialize_network(&net);
            emit(c.out.as_deref(), |w| w.write_all(text.as_bytes()))?;
            Ok(0)
        }
    }
}

fn solve(c: &Common, y: &str, t_max: Option<usize>, samples: usize, estimator: &str) -> Result<u8, Failure> {
    let Some(path) = &c.net else {
        return Err(Failure::Usage("solve needs --net <file>".into()));
    };
    let est = marginal_estimators()
        .get(estimator)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let net = load_network(path)?;
    let y = parse_bits(y)?;
    if y.len() != net.n_outputs() {
        return Err(Failure::Usage(format!(
            "target has {} bits but the network has {} out-nodes",
            y.len(),
            net.n_outputs()
        )));
    }
    if samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let params = InferenceParams {
        t_max: t_max.unwrap_or(2 * net.depth().max(1)),
        clamp: DEFAULT_CLAMP,
    };
    params.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let inputs = est
        .estimate(&net, &y, &params)
        .map_err(|e| Failure::Input(e.to_string()))?;
    let report = collect_preimages(&net, &y, &inputs, samples, c.seed).map_err(|e| Failure::Input(e.to_string()))?;

    let mut text = String::new();
    let _ = writeln!(text, "estimator: {}", est.name());
    let _ = writeln!(text, "t_max: {}", params.t_max);
    let _ = writeln!(text, "in-node marginals (node llr p0):");
    for (&node, l) in net.in_nodes().iter().zip(&inputs) {
        let _ = writeln!(text, "  {node} {:.6} {:.6}", l.0, l.p0());
    }
    let _ = writeln!(text, "samples: {}", report.samples_drawn);
    let _ = writeln!(text, "valid: {}", report.valid_count);
    let _ = writeln!(text, "unique: {}", report.unique_count());
    let _ = writeln!(text, "solved: {}", if report.solved() { "yes" } else { "no" });
    for x in &report.unique_preimages {
        let _ = writeln!(text, "preimage: {x}");
    }
    emit(c.out.as_deref(), |w| w.write_all(text.as_bytes()))?;
    Ok(if report.solved() { 0 } else { EXIT_UNSOLVED })
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_network(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_bits(s: &str) -> Result<OutputVector, Failure> {
    s.parse()
        .map_err(|e: BnError| Failure::Usage(format!("bad target `{s}`: {e}")))
}

/// `a..b` (inclusive), or a comma-separated list.
fn parse_t_list(spec: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("bad t list `{spec}`"));
    if let Some((a, b)) = spec.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a == 0 || a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    spec.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}

fn ensemble_config(preset: Preset, function_type: &str, seed: u64) -> Result<EnsembleConfig, Failure> {
    let kind = function_ensembles()
        .get(function_type)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    EnsembleConfig::preset(preset.name(), kind.name(), seed)
        .ok_or_else(|| Failure::Usage(format!("unknown preset `{}`", preset.name())))
}

/// One source per requested ensemble, or the single `--net` file.
fn sources(c: &Common, args: &EnsembleArgs, default: Preset) -> Result<Vec<NetworkSource>, Failure> {
    if let Some(path) = &c.net {
        return Ok(vec![NetworkSource::Fixed(vec![load_network(path)?])]);
    }
    let preset = c.preset.unwrap_or(default);
    let count = args.nets.unwrap_or(match default {
        Preset::Small => 10,
        _ => 100,
    });
    args.types
        .iter()
        .map(|t| {
            Ok(NetworkSource::Ensemble {
                config: ensemble_config(preset, t, c.seed)?,
                count,
            })
        })
        .collect()
}

fn emit<E, F>(path: Option<&Path>, write: F) -> Result<(), Failure>
where
    E: std::fmt::Display,
    F: FnOnce(&mut dyn Write) -> Result<(), E>,
{
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| Failure::Input(e.to_string()))?;
    match path {
        Some(p) => fs::write(p, &buf).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&buf)?;
            out.flush()?;
            Ok(())
        }
    }
}
