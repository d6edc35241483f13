//! Command-line front end.
//!
//! Every flag can also come from a JSON config file (`--config`) whose keys
//! are the flag names (`-` or `_` both accepted); flags given on the command
//! line win. Defaults are applied after merging.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::distributions::TailFamily;
use crate::error::{Error, Result};
use crate::estimation::{estimate_alpha_from_data, AlphaEstimate};
use crate::lln::{replicated_trajectories, scaling_exponent_experiment, DEFAULT_CHECKPOINTS};
use crate::outlier::{is_outlier, ksigma_outliers, population_mean_std};
use crate::output::{
    read_values, write_record, AlphaRecord, ConditionRecord, DetectRecord, Format, KSigmaRecord, ProbabilityRecord,
    Record, ScalingRecord, TrajectoryRecord,
};
use crate::probability::{
    check_theorem_conditions, exact_probability, joint_oracle_probability, limit_probability, mc_probability,
};
use crate::rng::Seed;

pub const DEFAULT_KAPPA: f64 = 0.5;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;
pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_K: f64 = 3.0;

#[derive(Debug, Parser)]
#[command(name = "outlier-order", version, about = "Outliers of order 1/kappa under heavy tails")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format: json or csv [default: json]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write output to this path instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// JSON file supplying flag values; command-line flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for Monte Carlo work; never changes numeric output [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the largest |x| is an outlier of order 1/kappa
    Detect(DetectArgs),
    /// Baseline k-sigma rule |x_j - mean| > k s with population s
    Ksigma(KSigmaArgs),
    /// Limiting outlier probability kappa^alpha
    ProbLimit(LimitArgs),
    /// Finite-n outlier probability by quadrature
    ProbExact(ExactArgs),
    /// Finite-n outlier probability by Monte Carlo with a Wilson interval
    ProbMc(McArgs),
    /// Finite-n outlier probability from the joint density of the top two (n <= 8)
    ProbOracle(ExactArgs),
    /// Numerical probes of the conditions behind the kappa^alpha limit
    CheckConditions(ConditionArgs),
    /// Estimate the stability index from block outlier frequencies
    EstimateAlpha(EstimateArgs),
    /// Running-mean trajectories or the |mean| scaling experiment
    LlnDemo(LlnArgs),
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct DetectArgs {
    /// Ratio threshold in (0, 1) [default: 0.5]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Input file, one number per line, `#` comments [default: stdin]
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct KSigmaArgs {
    /// Multiple of the population standard deviation, > 0 [default: 3]
    #[arg(long)]
    pub k: Option<f64>,
    /// Input file, one number per line, `#` comments [default: stdin]
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct LimitArgs {
    /// Ratio threshold in (0, 1] [default: 0.5]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Tail index alpha > 0 (required)
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct ExactArgs {
    /// Family spec, e.g. pareto:alpha=1.5,xm=1 (required)
    #[arg(long)]
    pub dist: Option<String>,
    /// Sample size n >= 2 (required)
    #[arg(long)]
    pub n: Option<usize>,
    /// Ratio threshold in (0, 1) [default: 0.5]
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct McArgs {
    /// Family spec, e.g. stable:alpha=0.6,scale=1 (required)
    #[arg(long)]
    pub dist: Option<String>,
    /// Sample size n >= 2 per trial (required)
    #[arg(long)]
    pub n: Option<usize>,
    /// Ratio threshold in (0, 1) [default: 0.5]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of independent samples of size n [default: 100000]
    #[arg(long)]
    pub trials: Option<usize>,
    /// 64-bit seed (required)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence level of the Wilson interval, in (0, 1) [default: 0.95]
    #[arg(long)]
    pub confidence: Option<f64>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct ConditionArgs {
    /// Family spec with closed-form density (required)
    #[arg(long)]
    pub dist: Option<String>,
    /// Ratio threshold in (0, 1) [default: 0.5]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Sample size n used in the lower-edge probe [default: 100]
    #[arg(long)]
    pub n: Option<usize>,
    /// Lower end of the probe range, same units as x [default: 0]
    #[arg(long)]
    pub probe_lo: Option<f64>,
    /// Upper end of the probe range, where the boundary ratio is read [default: 1000]
    #[arg(long)]
    pub probe_hi: Option<f64>,
    /// Number of grid points for the max |g| scan [default: 1000]
    #[arg(long)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    /// Block size n >= 2 (required)
    #[arg(long)]
    pub n: Option<usize>,
    /// Ratio threshold in (0, 1) [default: 0.5]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Confidence level of the interval, in (0, 1) [default: 0.95]
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Input file, one number per line [default: stdin unless --dist is given]
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Simulate the data from this family instead of reading it
    #[arg(long)]
    pub dist: Option<String>,
    /// Number of simulated values (with --dist) [default: 100000]
    #[arg(long)]
    pub total: Option<usize>,
    /// 64-bit seed (required with --dist)
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LlnMode {
    Trajectory,
    Experiment,
}

#[derive(Debug, Args, Serialize, Deserialize)]
pub struct LlnArgs {
    /// Family spec with a sampler, e.g. stable:alpha=0.6 (required)
    #[arg(long)]
    pub dist: Option<String>,
    /// 64-bit seed (required)
    #[arg(long)]
    pub seed: Option<u64>,
    /// trajectory: running means per replication; experiment: scaling slope [default: trajectory]
    #[arg(long, value_enum)]
    pub mode: Option<LlnMode>,
    /// Sample counts at which running means are reported, comma separated [default: 100,1000,10000,100000]
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<usize>>,
    /// Sample sizes for the experiment, comma separated [default: 1000,10000,100000]
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Replications [default: 1 for trajectory, 200 for experiment]
    #[arg(long)]
    pub replications: Option<usize>,
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::domain(format!("missing required --{flag}")))
}

fn required_seed(v: Option<u64>) -> Result<Seed> {
    v.map(Seed).ok_or_else(|| Error::domain("missing required --seed (Monte Carlo runs are never seeded implicitly)"))
}

fn parse_family(spec: Option<String>) -> Result<TailFamily> {
    required(spec, "dist")?.parse()
}

/// Fills fields that were not given on the command line from `config`.
/// Keys in `config` that `T` does not know are rejected.
fn merge_config<T: Serialize + DeserializeOwned>(args: T, config: &Map<String, Value>, extra_keys: &[&str]) -> Result<T> {
    let bad = |detail: String| Error::Parse { what: "config", detail };
    let mut obj = match serde_json::to_value(&args).map_err(|e| bad(e.to_string()))? {
        Value::Object(m) => m,
        _ => unreachable!("argument structs serialize to objects"),
    };
    for (key, value) in config {
        let key = key.replace('-', "_");
        if extra_keys.contains(&key.as_str()) {
            continue;
        }
        match obj.get_mut(&key) {
            Some(slot) if slot.is_null() => *slot = value.clone(),
            Some(_) => {}
            None => return Err(bad(format!("unknown key `{key}` for this subcommand"))),
        }
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| bad(e.to_string()))
}

const GLOBAL_KEYS: [&str; 3] = ["format", "output", "threads"];

/// Prefixes an I/O error with the offending path.
fn at(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn load_config(path: &Option<PathBuf>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let file = File::open(path).map_err(at(path))?;
    match serde_json::from_reader(BufReader::new(file)) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Error::Parse {
            what: "config",
            detail: "top level must be a JSON object".into(),
        }),
        Err(e) => Err(Error::Parse {
            what: "config",
            detail: e.to_string(),
        }),
    }
}

fn read_input(path: &Option<PathBuf>, stdin: &mut (dyn BufRead + Send)) -> Result<Vec<f64>> {
    match path {
        Some(p) => read_values(BufReader::new(File::open(p).map_err(at(p))?)),
        None => read_values(stdin),
    }
}

struct Sink {
    format: Format,
    output: Option<PathBuf>,
}

impl Sink {
    fn emit<R: Record>(&self, record: &R, stdout: &mut (dyn Write + Send)) -> Result<()> {
        match &self.output {
            Some(p) => write_record(record, self.format, File::create(p).map_err(at(p))?),
            None => write_record(record, self.format, stdout),
        }
    }
}

/// Parses `argv` and runs the subcommand.
pub fn run<I, S>(argv: I, stdin: &mut (dyn BufRead + Send), stdout: &mut (dyn Write + Send)) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Parse {
        what: "arguments",
        detail: e.to_string(),
    })?;
    execute(cli, stdin, stdout)
}

pub fn execute(cli: Cli, stdin: &mut (dyn BufRead + Send), stdout: &mut (dyn Write + Send)) -> Result<()> {
    let config = load_config(&cli.config)?;
    let global = |key: &str| config.get(key).or_else(|| config.get(&key.replace('_', "-")));
    let format = match cli.format {
        Some(f) => f,
        None => match global("format") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Parse {
                what: "config",
                detail: format!("format: {e}"),
            })?,
            None => Format::Json,
        },
    };
    let output = cli
        .output
        .clone()
        .or_else(|| global("output").and_then(Value::as_str).map(PathBuf::from));
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => global("threads").and_then(Value::as_u64).map(|t| t as usize),
    };
    let sink = Sink { format, output };

    let body = move || dispatch(cli.command, &config, &sink, stdin, stdout);
    match threads {
        Some(0) => Err(Error::domain("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::domain(format!("cannot build thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

fn dispatch(
    command: Command,
    config: &Map<String, Value>,
    sink: &Sink,
    stdin: &mut (dyn BufRead + Send),
    stdout: &mut (dyn Write + Send),
) -> Result<()> {
    match command {
        Command::Detect(a) => {
            let a = merge_config(a, config, &GLOBAL_KEYS)?;
            let data = read_input(&a.input, stdin)?;
            let verdict = is_outlier(&data, a.kappa.unwrap_or(DEFAULT_KAPPA))?;
            sink.emit(&DetectRecord::new(&verdict, data.len()), stdout)
        }
        Command::Ksigma(a) => {
            let a = merge_config(a, config, &GLOBAL_KEYS)?;
            let data = read_input(&a.input, stdin)?;
            let k = a.k.unwrap_or(DEFAULT_K);
            let outliers = ksigma_outliers(&data, k)?;
            let (mean, std_dev) = population_mean_std(&data);
            sink.emit(
                &KSigmaRecord {
                    k,
                    mean,
                    std_dev,
                    threshold: k * std_dev,
                    outliers,
                    count: data.len(),
                },
                stdout,
            )
        }
        Command::ProbLimit(a) => {
            let a = merge_config(a, config, &GLOBAL_KEYS)?;
            let kappa = a.kappa.unwrap_or(DEFAULT_KAPPA);
            let alpha = required(a.alpha, "alpha")?;
            let value = limit_probability(kappa, alpha)?;
            sink.emit(&ProbabilityRecord::limit(kappa, alpha, value), stdout)
        }
        Command::ProbExact(a) => {
            let a = merge_config(a, config, &GLOBAL_KEYS)?;
            let family = parse_family(a.dist)?;
            let r = exact_probability(&family, required(a.n, "n")?, a.kappa.unwrap_or(DEFAULT_KAPPA))?;
            sink.emit(&ProbabilityRecord::new(&r, Some(&family)), stdout)
        }
        Command::ProbOracle(a) => {
            let a = merge_config(a, config, &GLOBAL_KEYS)?;
            let family = parse_family(a.dist)?;
            let r = joint_oracle_probability(&family, required(a.n, "n")?, a.kappa.unwrap_or(DEFAULT_KAPPA))?;
            sink.emit(&ProbabilityRecord::new(&r, Some(&family)), stdout)
        }
        Command::ProbMc(a) => {
            let a = merge_config(a, config, &GLOBAL_KEYS)?;
            let family = parse_family(a.dist)?;
            let r = mc_probability(
                &family,
                required(a.n, "n")?,
                a.kappa.unwrap_or(DEFAULT_KAPPA),
                a.trials.unwrap_or(DEFAULT_TRIALS),
                required_seed(a.seed)?,
                a.confidence.unwrap_or(DEFAULT_CONFIDENCE),
            )?;
            sink.emit(&ProbabilityRecord::new(&r, Some(&family)), stdout)
        }
        Command::CheckConditions(a) => {
            let a = merge_config(a, config, &GLOBAL_KEYS)?;
            let family = parse_family(a.dist)?;
            let report = check_theorem_conditions(
                &family,
                a.kappa.unwrap_or(DEFAULT_KAPPA),
                a.n.unwrap_or(100),
                (a.probe_lo.unwrap_or(0.0), a.probe_hi.unwrap_or(1e3)),
                a.grid_points.unwrap_or(1000),
            )?;
            sink.emit(&ConditionRecord::new(&report, &family), stdout)
        }
        Command::EstimateAlpha(a) => {
            let a = merge_config(a, config, &GLOBAL_KEYS)?;
            let data = match (&a.dist, &a.input) {
                (Some(_), Some(_)) => return Err(Error::domain("give either --dist or --input, not both")),
                (Some(spec), None) => {
                    let family: TailFamily = spec.parse()?;
                    family.sample(a.total.unwrap_or(100_000), required_seed(a.seed)?)?
                }
                (None, _) => read_input(&a.input, stdin)?,
            };
            let est: AlphaEstimate = estimate_alpha_from_data(
                &data,
                required(a.n, "n")?,
                a.kappa.unwrap_or(DEFAULT_KAPPA),
                a.confidence.unwrap_or(DEFAULT_CONFIDENCE),
            )?;
            sink.emit(&AlphaRecord::from(&est), stdout)
        }
        Command::LlnDemo(a) => {
            let a = merge_config(a, config, &GLOBAL_KEYS)?;
            let family = parse_family(a.dist)?;
            let seed = required_seed(a.seed)?;
            match a.mode.unwrap_or(LlnMode::Trajectory) {
                LlnMode::Trajectory => {
                    let checkpoints = a.checkpoints.unwrap_or_else(|| DEFAULT_CHECKPOINTS.to_vec());
                    let runs = replicated_trajectories(&family, &checkpoints, a.replications.unwrap_or(1), seed)?;
                    sink.emit(&TrajectoryRecord::new(&family, seed.0, &runs), stdout)
                }
                LlnMode::Experiment => {
                    let ns = a.ns.unwrap_or_else(|| vec![1_000, 10_000, 100_000]);
                    let exp = scaling_exponent_experiment(&family, &ns, a.replications.unwrap_or(200), seed)?;
                    sink.emit(&ScalingRecord::from(&exp), stdout)
                }
            }
        }
    }
}
