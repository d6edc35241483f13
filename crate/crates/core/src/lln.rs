//! Running means of heavy-tailed streams and the growth rate of |mean|.
//!
//! For a symmetric alpha-stable law the sample mean of n draws is distributed
//! as `n^(1/alpha - 1)` times a single draw, so the median of |mean| over
//! replications grows with n when alpha < 1 and shrinks when alpha > 1.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::TailFamily;
use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::stats::{least_squares_slope, median};

pub const DEFAULT_CHECKPOINTS: [usize; 4] = [100, 1_000, 10_000, 100_000];

pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySeries {
    pub checkpoints: Vec<usize>,
    pub running_means: Vec<f64>,
    pub family: String,
    pub seed: Seed,
}

fn check_checkpoints(checkpoints: &[usize], total: usize) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(Error::domain("at least one checkpoint is required"));
    }
    if checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("checkpoints must be positive and strictly increasing"));
    }
    let last = *checkpoints.last().unwrap();
    if last > total {
        return Err(Error::domain(format!("last checkpoint {last} exceeds total {total}")));
    }
    Ok(())
}

/// Partial means of `stream` at each checkpoint, in one pass and O(1)
/// memory beyond the output.
pub fn running_means<I: IntoIterator<Item = f64>>(stream: I, checkpoints: &[usize]) -> Result<Vec<f64>> {
    let total = checkpoints.last().copied().unwrap_or(0);
    check_checkpoints(checkpoints, total)?;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    let mut sum = 0.0;
    for (i, x) in stream.into_iter().take(total).enumerate() {
        sum += x;
        let count = i + 1;
        if next.peek() == Some(&&count) {
            out.push(sum / count as f64);
            next.next();
        }
    }
    if out.len() != checkpoints.len() {
        return Err(Error::InsufficientData {
            needed: total,
            got: out.len(),
        });
    }
    Ok(out)
}

fn require_sampler(family: &TailFamily) -> Result<()> {
    if family.capabilities().has_sampler {
        Ok(())
    } else {
        Err(Error::Capability {
            family: family.to_string(),
            capability: "sampler",
        })
    }
}

/// Running means of the `seed` stream of `family`, the same stream that
/// [`TailFamily::sample`] returns.
pub fn running_mean_trajectory(family: &TailFamily, total: usize, checkpoints: &[usize], seed: Seed) -> Result<TrajectorySeries> {
    require_sampler(family)?;
    check_checkpoints(checkpoints, total)?;
    let mut rng = seed.rng();
    let stream = (0..total).map(|_| family.draw(&mut rng));
    Ok(TrajectorySeries {
        checkpoints: checkpoints.to_vec(),
        running_means: running_means(stream, checkpoints)?,
        family: family.to_string(),
        seed,
    })
}

/// Running means for replications `0..replications`, replication `r` drawn
/// from substream `r` of `seed`.
pub fn replicated_trajectories(
    family: &TailFamily,
    checkpoints: &[usize],
    replications: usize,
    seed: Seed,
) -> Result<Vec<TrajectorySeries>> {
    require_sampler(family)?;
    let total = checkpoints.last().copied().unwrap_or(0);
    check_checkpoints(checkpoints, total)?;
    (0..replications as u64)
        .into_par_iter()
        .map(|r| running_mean_trajectory(family, total, checkpoints, seed.derive(r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingExperiment {
    pub family: String,
    pub ns: Vec<usize>,
    pub medians: Vec<f64>,
    /// Least-squares slope of ln(median |mean|) against ln(n).
    pub slope: f64,
    /// `1/alpha - 1` for stable families.
    pub theory_slope: Option<f64>,
    pub replications: usize,
    pub seed: Seed,
}

pub fn scaling_exponent_experiment(family: &TailFamily, ns: &[usize], replications: usize, seed: Seed) -> Result<ScalingExperiment> {
    require_sampler(family)?;
    if ns.len() < 2 {
        return Err(Error::domain("need at least two sample sizes for a slope"));
    }
    if replications < MIN_REPLICATIONS {
        return Err(Error::domain(format!(
            "replications must be at least {MIN_REPLICATIONS}, got {replications}"
        )));
    }
    let runs = replicated_trajectories(family, ns, replications, seed)?;
    let medians: Vec<f64> = (0..ns.len())
        .map(|j| {
            let mut abs: Vec<f64> = runs.iter().map(|t| t.running_means[j].abs()).collect();
            median(&mut abs)
        })
        .collect();
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let log_m: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    Ok(ScalingExperiment {
        family: family.to_string(),
        ns: ns.to_vec(),
        slope: least_squares_slope(&log_n, &log_m),
        medians,
        theory_slope: family.stability_index().map(|a| 1.0 / a - 1.0),
        replications,
        seed,
    })
}
