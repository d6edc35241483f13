//! Flat result records, JSON/CSV emission and numeric input parsing.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::distributions::TailFamily;
use crate::error::{Error, Result};
use crate::estimation::AlphaEstimate;
use crate::lln::{ScalingExperiment, TrajectorySeries};
use crate::outlier::OutlierVerdict;
use crate::probability::{ConditionReport, ProbabilityResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// `%.17g`: 17 significant digits, `.` separator, exponent only outside
/// `[1e-5, 1e17)`. Enough digits to round-trip any f64.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_g17).unwrap_or_default()
}

fn opt_int<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// A record that can be written as one JSON object or a CSV table.
pub trait Record: Serialize {
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_rows(&self) -> Vec<Vec<String>>;

    /// Extra CSV tables appended after a blank line.
    fn csv_trailer(&self) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
        None
    }
}

pub fn write_record<R: Record, W: Write>(record: &R, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            let s = serde_json::to_string_pretty(record).map_err(|e| Error::Io(e.into()))?;
            writeln!(out, "{s}")?;
        }
        Format::Csv => {
            write_table(&mut out, &record.csv_header(), &record.csv_rows())?;
            if let Some((header, rows)) = record.csv_trailer() {
                writeln!(out)?;
                write_table(&mut out, &header, &rows)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn write_table<W: Write>(out: &mut W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn params_string(params: &Option<BTreeMap<String, f64>>) -> String {
    params
        .as_ref()
        .map(|p| p.iter().map(|(k, v)| format!("{k}={}", fmt_g17(*v))).collect::<Vec<_>>().join(";"))
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRecord {
    pub method: String,
    pub family: Option<String>,
    pub params: Option<BTreeMap<String, f64>>,
    pub n: Option<usize>,
    pub kappa: f64,
    pub value: f64,
    pub error_estimate: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

impl ProbabilityRecord {
    pub fn new(result: &ProbabilityResult, family: Option<&TailFamily>) -> Self {
        ProbabilityRecord {
            method: result.method.as_str().to_string(),
            family: family.map(|f| f.name().to_string()),
            params: family.map(TailFamily::params),
            n: result.n,
            kappa: result.kappa,
            value: result.value,
            error_estimate: result.error_estimate,
            ci_lo: result.ci.map(|c| c.0),
            ci_hi: result.ci.map(|c| c.1),
            trials: result.trials,
            seed: result.seed.map(|s| s.0),
        }
    }

    /// Record for the closed-form limit, which carries only the tail index.
    pub fn limit(kappa: f64, alpha: f64, value: f64) -> Self {
        ProbabilityRecord {
            method: "limit".into(),
            family: None,
            params: Some(BTreeMap::from([("alpha".to_string(), alpha)])),
            n: None,
            kappa,
            value,
            error_estimate: 0.0,
            ci_lo: None,
            ci_hi: None,
            trials: None,
            seed: None,
        }
    }
}

impl Record for ProbabilityRecord {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["method", "family", "params", "n", "kappa", "value", "error_estimate", "ci_lo", "ci_hi", "trials", "seed"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.method.clone(),
            self.family.clone().unwrap_or_default(),
            params_string(&self.params),
            opt_int(self.n),
            fmt_g17(self.kappa),
            fmt_g17(self.value),
            fmt_g17(self.error_estimate),
            opt_num(self.ci_lo),
            opt_num(self.ci_hi),
            opt_int(self.trials),
            opt_int(self.seed),
        ]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRecord {
    pub alpha_hat: f64,
    pub p_hat: f64,
    pub kappa: f64,
    pub block_size: Option<usize>,
    pub blocks: usize,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub confidence: f64,
}

impl From<&AlphaEstimate> for AlphaRecord {
    fn from(e: &AlphaEstimate) -> Self {
        AlphaRecord {
            alpha_hat: e.alpha_hat,
            p_hat: e.p_hat,
            kappa: e.kappa,
            block_size: e.block_size,
            blocks: e.blocks,
            ci_lo: e.ci.0,
            ci_hi: e.ci.1,
            confidence: e.confidence,
        }
    }
}

impl Record for AlphaRecord {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["alpha_hat", "p_hat", "kappa", "block_size", "blocks", "ci_lo", "ci_hi", "confidence"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            fmt_g17(self.alpha_hat),
            fmt_g17(self.p_hat),
            fmt_g17(self.kappa),
            opt_int(self.block_size),
            self.blocks.to_string(),
            fmt_g17(self.ci_lo),
            fmt_g17(self.ci_hi),
            fmt_g17(self.confidence),
        ]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectRecord {
    pub is_outlier: bool,
    pub kappa: f64,
    pub ratio: f64,
    pub max_magnitude: f64,
    pub second_magnitude: f64,
    pub max_index: usize,
    pub second_index: usize,
    pub count: usize,
}

impl DetectRecord {
    pub fn new(v: &OutlierVerdict, count: usize) -> Self {
        DetectRecord {
            is_outlier: v.is_outlier,
            kappa: v.kappa,
            ratio: v.ratio,
            max_magnitude: v.top_two.max_magnitude,
            second_magnitude: v.top_two.second_magnitude,
            max_index: v.top_two.max_index,
            second_index: v.top_two.second_index,
            count,
        }
    }
}

impl Record for DetectRecord {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["is_outlier", "kappa", "ratio", "max_magnitude", "second_magnitude", "max_index", "second_index", "count"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.is_outlier.to_string(),
            fmt_g17(self.kappa),
            fmt_g17(self.ratio),
            fmt_g17(self.max_magnitude),
            fmt_g17(self.second_magnitude),
            self.max_index.to_string(),
            self.second_index.to_string(),
            self.count.to_string(),
        ]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSigmaRecord {
    pub k: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub threshold: f64,
    pub outliers: Vec<usize>,
    pub count: usize,
}

impl Record for KSigmaRecord {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["k", "mean", "std_dev", "threshold", "outliers", "count"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            fmt_g17(self.k),
            fmt_g17(self.mean),
            fmt_g17(self.std_dev),
            fmt_g17(self.threshold),
            self.outliers.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
            self.count.to_string(),
        ]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub kappa: f64,
    pub n: usize,
    pub boundary_ratio_limit: f64,
    pub zero_limit_ok: bool,
    pub integrand_integral: f64,
    pub integrand_max_abs: f64,
    pub probe_lo: f64,
    pub probe_hi: f64,
    pub notes: Vec<String>,
}

impl ConditionRecord {
    pub fn new(r: &ConditionReport, family: &TailFamily) -> Self {
        ConditionRecord {
            family: family.name().to_string(),
            params: family.params(),
            kappa: r.kappa,
            n: r.n,
            boundary_ratio_limit: r.boundary_ratio_limit,
            zero_limit_ok: r.zero_limit_ok,
            integrand_integral: r.integrand_integral,
            integrand_max_abs: r.integrand_max_abs,
            probe_lo: r.probe_range.0,
            probe_hi: r.probe_range.1,
            notes: r.notes.clone(),
        }
    }
}

impl Record for ConditionRecord {
    fn csv_header(&self) -> Vec<&'static str> {
        vec![
            "family",
            "params",
            "kappa",
            "n",
            "boundary_ratio_limit",
            "zero_limit_ok",
            "integrand_integral",
            "integrand_max_abs",
            "probe_lo",
            "probe_hi",
            "notes",
        ]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.family.clone(),
            params_string(&Some(self.params.clone())),
            fmt_g17(self.kappa),
            self.n.to_string(),
            fmt_g17(self.boundary_ratio_limit),
            self.zero_limit_ok.to_string(),
            fmt_g17(self.integrand_integral),
            fmt_g17(self.integrand_max_abs),
            fmt_g17(self.probe_lo),
            fmt_g17(self.probe_hi),
            self.notes.join(" | "),
        ]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub n: usize,
    pub replication: usize,
    pub running_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub family: String,
    pub seed: u64,
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryRecord {
    pub fn new(family: &TailFamily, seed: u64, runs: &[TrajectorySeries]) -> Self {
        let rows = runs
            .iter()
            .enumerate()
            .flat_map(|(r, t)| {
                t.checkpoints.iter().zip(&t.running_means).map(move |(&n, &m)| TrajectoryRow {
                    n,
                    replication: r,
                    running_mean: m,
                })
            })
            .collect();
        TrajectoryRecord {
            family: family.to_string(),
            seed,
            rows,
        }
    }
}

impl Record for TrajectoryRecord {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["n", "replication", "running_mean"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| vec![r.n.to_string(), r.replication.to_string(), fmt_g17(r.running_mean)])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub family: String,
    pub seed: u64,
    pub replications: usize,
    pub ns: Vec<usize>,
    pub median_abs_mean: Vec<f64>,
    pub slope: f64,
    pub theory_slope: Option<f64>,
}

impl From<&ScalingExperiment> for ScalingRecord {
    fn from(e: &ScalingExperiment) -> Self {
        ScalingRecord {
            family: e.family.clone(),
            seed: e.seed.0,
            replications: e.replications,
            ns: e.ns.clone(),
            median_abs_mean: e.medians.clone(),
            slope: e.slope,
            theory_slope: e.theory_slope,
        }
    }
}

impl Record for ScalingRecord {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["n", "median_abs_mean"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.ns
            .iter()
            .zip(&self.median_abs_mean)
            .map(|(n, m)| vec![n.to_string(), fmt_g17(*m)])
            .collect()
    }

    fn csv_trailer(&self) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
        Some((vec!["slope", "theory_slope"], vec![vec![fmt_g17(self.slope), opt_num(self.theory_slope)]]))
    }
}

/// Reads one number per line; blank lines and lines starting with `#` are skipped.
pub fn read_values<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse {
            what: "input value",
            detail: format!("line {}: `{t}` is not a number", i + 1),
        })?;
        if v.is_nan() {
            return Err(Error::Parse {
                what: "input value",
                detail: format!("line {}: NaN is not an observation", i + 1),
            });
        }
        values.push(v);
    }
    Ok(values)
}
