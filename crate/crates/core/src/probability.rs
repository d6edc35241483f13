//! Probability of the outlier event `X(n-1) <= kappa * X(n)`.
//!
//! For i.i.d. |X| with distribution function F and density p,
//!
//! ```text
//! P_n(kappa) = n * ∫_0^∞ F(kappa y)^(n-1) p(y) dy
//! ```
//!
//! and, when p is regularly varying with index -(alpha+1),
//! `P_n -> kappa^alpha`. This module computes the limit, the finite-n
//! integral (two quadrature routes), a Monte Carlo estimate, an independent
//! double integral of the joint density of the top two order statistics,
//! and numerical probes of the side conditions behind the limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Analytic, TailFamily};
use crate::error::{check_confidence, check_kappa, Error, Result};
use crate::outlier::{is_ratio_event, TopTwoTracker};
use crate::quadrature::{integrate, integrate_to_infinity, QuadResult, Tolerance};
use crate::rng::Seed;
use crate::stats::wilson_interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Limit,
    Quadrature,
    MonteCarlo,
    JointOracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Limit => "limit",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
            Method::JointOracle => "joint_oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityResult {
    pub value: f64,
    pub method: Method,
    /// Quadrature error bound, or Monte Carlo standard error.
    pub error_estimate: f64,
    pub n: Option<usize>,
    pub kappa: f64,
    /// Wilson interval (Monte Carlo only).
    pub ci: Option<(f64, f64)>,
    pub trials: Option<usize>,
    pub seed: Option<Seed>,
}

impl ProbabilityResult {
    fn quadrature(method: Method, q: QuadResult, extra_error: f64, n: usize, kappa: f64) -> Self {
        ProbabilityResult {
            value: q.value.clamp(0.0, 1.0),
            method,
            error_estimate: q.abs_error + extra_error,
            n: Some(n),
            kappa,
            ci: None,
            trials: None,
            seed: None,
        }
    }
}

/// `kappa^alpha`, the large-n limit for a tail of index `alpha`.
pub fn limit_probability(kappa: f64, alpha: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::domain(format!("kappa must lie in (0, 1], got {kappa}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(kappa.powf(alpha))
}

fn check_n(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::domain(format!("sample size n must be at least 2, got {n}")))
    }
}

/// How [`exact_probability_with`] maps the integral onto a finite interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRoute {
    /// Substitute `u = F(kappa y)` and then `v = u^n`. The integral becomes
    /// `∫_0^1 p(y) / (kappa p(kappa y)) dv` with `y = Q(v^(1/n)) / kappa`,
    /// whose integrand is bounded for every n.
    QuantileTransform,
    /// Integrate `n exp((n-1) ln F(kappa y)) p(y)` directly over
    /// `y in (edge/kappa, inf)`, mapped onto `t in (0, 1)` by a power law.
    /// Suitable for moderate n only: the mass concentrates as n grows.
    Direct,
}

/// Finite-n outlier probability by adaptive quadrature.
pub fn exact_probability(family: &TailFamily, n: usize, kappa: f64) -> Result<ProbabilityResult> {
    exact_probability_with(family, n, kappa, QuadratureRoute::QuantileTransform, Tolerance::default())
}

pub fn exact_probability_with(
    family: &TailFamily,
    n: usize,
    kappa: f64,
    route: QuadratureRoute,
    tol: Tolerance,
) -> Result<ProbabilityResult> {
    let law = family.require_analytic("cdf")?;
    check_n(n)?;
    check_kappa(kappa)?;
    let q = match route {
        QuadratureRoute::QuantileTransform => quantile_route(&law, n, kappa, tol)?,
        QuadratureRoute::Direct => direct_route(&law, n, kappa, tol)?,
    };
    Ok(ProbabilityResult::quadrature(Method::Quadrature, q, 0.0, n, kappa))
}

/// `p(y) / (kappa p(kappa y))` evaluated in log space.
#[inline]
fn log_ratio(law: &Analytic, y: f64, kappa: f64) -> f64 {
    law.ln_pdf(y) - law.ln_pdf(kappa * y) - kappa.ln()
}

fn quantile_route(law: &Analytic, n: usize, kappa: f64, tol: Tolerance) -> Result<QuadResult> {
    let inv_n = 1.0 / n as f64;
    integrate(
        |v: f64| {
            // upper-tail probability of kappa*y: s = 1 - v^(1/n)
            let s = -(v.ln() * inv_n).exp_m1();
            if s <= 0.0 {
                return 0.0;
            }
            let x = law.upper_quantile(s);
            let r = log_ratio(law, x / kappa, kappa).exp();
            if r.is_finite() {
                r
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

fn direct_route(law: &Analytic, n: usize, kappa: f64, tol: Tolerance) -> Result<QuadResult> {
    let nf = n as f64;
    let start = law.lower_edge() / kappa;
    let scale = start.max(1.0);
    // y = start + scale((1-t)^-2 - 1) keeps y^(-1-alpha) tails bounded in t for alpha >= 1/2
    integrate(
        |t: f64| {
            let w = 1.0 / (1.0 - t);
            let y = start + scale * (w * w - 1.0);
            let lf = law.log_cdf(kappa * y);
            if lf == f64::NEG_INFINITY || !y.is_finite() {
                return 0.0;
            }
            let jac = 2.0 * scale * w * w * w;
            let v = (nf.ln() + (nf - 1.0) * lf + law.ln_pdf(y)).exp() * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Monte Carlo estimate from `trials` independent samples of size `n`.
///
/// Trial `i` draws from substream `i` of `seed` and the reduction is an
/// exact count, so the estimate does not depend on the rayon pool size.
pub fn mc_probability(
    family: &TailFamily,
    n: usize,
    kappa: f64,
    trials: usize,
    seed: Seed,
    confidence: f64,
) -> Result<ProbabilityResult> {
    if !family.capabilities().has_sampler {
        return Err(Error::Capability {
            family: family.to_string(),
            capability: "sampler",
        });
    }
    check_n(n)?;
    check_kappa(kappa)?;
    check_confidence(confidence)?;
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let events = (0..trials as u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = seed.substream(i);
            let mut top = TopTwoTracker::default();
            for _ in 0..n {
                top.push(family.draw(&mut rng));
            }
            is_ratio_event(&top.finish().expect("n >= 2"), kappa)
        })
        .count();
    let p_hat = events as f64 / trials as f64;
    Ok(ProbabilityResult {
        value: p_hat,
        method: Method::MonteCarlo,
        error_estimate: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
        n: Some(n),
        kappa,
        ci: Some(wilson_interval(p_hat, trials, confidence)?),
        trials: Some(trials),
        seed: Some(seed),
    })
}

pub const JOINT_ORACLE_MAX_N: usize = 8;

/// Integrates the joint density `n(n-1) F(x)^(n-2) p(x) p(y)` of the top
/// two magnitudes over `{edge <= x <= kappa y}`, both integrals numerically.
/// Independent of the single-integral routes; limited to small n.
pub fn joint_oracle_probability(family: &TailFamily, n: usize, kappa: f64) -> Result<ProbabilityResult> {
    let law = family.require_analytic("cdf")?;
    if !(2..=JOINT_ORACLE_MAX_N).contains(&n) {
        return Err(Error::domain(format!(
            "joint oracle supports n in 2..={JOINT_ORACLE_MAX_N}, got {n}"
        )));
    }
    check_kappa(kappa)?;
    let edge = law.lower_edge();
    let coef = (n * (n - 1)) as f64;
    let inner_tol = Tolerance {
        abs: 1e-13,
        rel: 1e-11,
        max_intervals: 1000,
    };
    let mut inner_error: f64 = 0.0;
    let mut failure = None;
    let outer = integrate_to_infinity(
        |y| {
            let upper = kappa * y;
            if upper <= edge || failure.is_some() {
                return 0.0;
            }
            let inner = integrate(
                |x| coef * law.cdf(x).powi(n as i32 - 2) * law.pdf(x),
                edge,
                upper,
                inner_tol,
            );
            match inner {
                Ok(r) => {
                    inner_error = inner_error.max(r.abs_error);
                    r.value * law.pdf(y)
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        edge / kappa,
        Tolerance::default(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    // ∫ p(y) dy <= 1 bounds the propagated inner error
    Ok(ProbabilityResult::quadrature(Method::JointOracle, outer, inner_error, n, kappa))
}

/// `p(x) / (kappa p(kappa x))`.
pub fn boundary_ratio(family: &TailFamily, kappa: f64, x: f64) -> Result<f64> {
    let law = family.require_analytic("pdf")?;
    check_kappa(kappa)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("x must be positive and finite, got {x}")));
    }
    let denom = law.pdf(kappa * x);
    if denom == 0.0 {
        return Err(Error::Singularity { x });
    }
    Ok(law.pdf(x) / (kappa * denom))
}

/// Numerical evidence about the side conditions of the limit theorem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub family: String,
    pub kappa: f64,
    pub n: usize,
    /// `p(x)/(kappa p(kappa x))` at the top of the probe range.
    pub boundary_ratio_limit: f64,
    /// Whether `F(kappa x)^n p(x)/p(kappa x)` decays to 0 at the lower support edge.
    pub zero_limit_ok: bool,
    /// `(x, F(kappa x)^n p(x)/p(kappa x))` along the approach to the edge.
    pub zero_limit_trace: Vec<(f64, f64)>,
    /// `∫ |g(x)| dx` over the probe range, g the integration-by-parts integrand.
    pub integrand_integral: f64,
    pub integrand_max_abs: f64,
    pub probe_range: (f64, f64),
    pub notes: Vec<String>,
}

pub const ZERO_LIMIT_TOL: f64 = 1e-12;

/// `g(x) = p'(x)/(kappa p(kappa x)) - p(x) p'(kappa x)/p(kappa x)^2`,
/// computed as `(s(x) - kappa s(kappa x)) * p(x)/(kappa p(kappa x))` with
/// `s = p'/p`, which avoids 0/0 where the densities underflow.
pub fn by_parts_integrand(law: &Analytic, kappa: f64, x: f64) -> f64 {
    let ratio = log_ratio(law, x, kappa).exp();
    if ratio == 0.0 {
        return 0.0;
    }
    (law.score(x) - kappa * law.score(kappa * x)) * ratio
}

pub fn check_theorem_conditions(
    family: &TailFamily,
    kappa: f64,
    n: usize,
    probe_range: (f64, f64),
    grid_points: usize,
) -> Result<ConditionReport> {
    let law = family.require_analytic("pdf_derivative")?;
    check_kappa(kappa)?;
    check_n(n)?;
    let (lo, hi) = probe_range;
    let edge = law.lower_edge();
    let start = lo.max(edge / kappa);
    if !(hi.is_finite() && hi > start && lo >= 0.0) {
        return Err(Error::domain(format!(
            "probe range ({lo}, {hi}) must satisfy 0 <= lo < hi with hi above the common support edge {}",
            edge / kappa
        )));
    }
    if grid_points < 2 {
        return Err(Error::domain("grid_points must be at least 2"));
    }
    let mut notes = Vec::new();

    // (a) F(kappa x)^n p(x)/p(kappa x) as x approaches the lower support edge
    let nf = n as f64;
    let trace: Vec<(f64, f64)> = (1..=15)
        .map(|k| {
            let x = edge + (hi - edge) * 10f64.powi(-k);
            let lf = law.log_cdf(kappa * x);
            let v = if lf == f64::NEG_INFINITY {
                0.0
            } else {
                (nf * lf + law.ln_pdf(x) - law.ln_pdf(kappa * x)).exp()
            };
            (x, v)
        })
        .collect();
    let tail = &trace[trace.len() - 3..];
    let zero_limit_ok = tail.iter().all(|&(_, v)| v <= ZERO_LIMIT_TOL) && tail.windows(2).all(|w| w[1].1 <= w[0].1);
    notes.push(format!(
        "F(kappa x)^n p(x)/p(kappa x) at x = {:.3e} (edge {edge}) is {:.3e}",
        tail[2].0, tail[2].1
    ));

    // (b) the by-parts integrand on the common support
    let step = (hi - start) / (grid_points - 1) as f64;
    let integrand_max_abs = (0..grid_points)
        .map(|i| by_parts_integrand(&law, kappa, start + step * i as f64).abs())
        .fold(0.0, f64::max);
    let integral = integrate(|x| by_parts_integrand(&law, kappa, x).abs(), start, hi, Tolerance::default());
    let integrand_integral = match integral {
        Ok(r) => r.value,
        Err(Error::Accuracy { estimate, error_bound }) => {
            notes.push(format!("integral of |g| did not converge (error bound {error_bound:.3e})"));
            estimate
        }
        Err(e) => return Err(e),
    };
    notes.push(format!(
        "integral of |g| over [{start}, {hi}] is {integrand_integral:.6e}; finite range only, not a proof of integrability"
    ));

    // (c) boundary ratio at the top of the range
    let boundary_ratio_limit = log_ratio(&law, hi, kappa).exp();
    match family.tail_index() {
        Some(alpha) => notes.push(format!(
            "boundary ratio {boundary_ratio_limit:.6e} at x = {hi}; regular variation predicts kappa^alpha = {:.6e}",
            kappa.powf(alpha)
        )),
        None => notes.push(format!(
            "boundary ratio {boundary_ratio_limit:.6e} at x = {hi}; light tail, limit is 0"
        )),
    }

    Ok(ConditionReport {
        family: family.to_string(),
        kappa,
        n,
        boundary_ratio_limit,
        zero_limit_ok,
        zero_limit_trace: trace,
        integrand_integral,
        integrand_max_abs,
        probe_range: (start, hi),
        notes,
    })
}
