//! Distribution families for the magnitude |X| and the signed variable X.
//!
//! Four families have closed-form laws ([`Analytic`]): Pareto and half-Cauchy
//! with regularly varying densities, plus exponential and half-normal as
//! light-tailed controls. The symmetric alpha-stable family only has a
//! sampler (Chambers–Mallows–Stuck).
//!
//! Densities, distribution functions and quantiles always describe |X|.
//! Samplers emit X itself: the stable family is symmetric and emits signed
//! values, the others emit magnitudes.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::Serialize;
use statrs::function::erf::{erf, erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::rng::{open_unit, Seed};

/// Which parts of a law are available in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Capabilities {
    pub has_cdf: bool,
    pub has_pdf: bool,
    pub has_pdf_derivative: bool,
    pub has_sampler: bool,
    pub has_quantile: bool,
}

impl Capabilities {
    const FULL: Capabilities = Capabilities {
        has_cdf: true,
        has_pdf: true,
        has_pdf_derivative: true,
        has_sampler: true,
        has_quantile: true,
    };
    const SAMPLER_ONLY: Capabilities = Capabilities {
        has_cdf: false,
        has_pdf: false,
        has_pdf_derivative: false,
        has_sampler: true,
        has_quantile: false,
    };
}

/// Closed-form magnitude laws. All methods are total on `x >= 0`; outside
/// the support the density is 0 and the log-density is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Analytic {
    Pareto { alpha: f64, xm: f64 },
    HalfCauchy { scale: f64 },
    Exponential { rate: f64 },
    HalfNormal { sigma: f64 },
}

const FRAC_2_SQRT_2PI: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

impl Analytic {
    /// Infimum of the support of |X|.
    pub fn lower_edge(&self) -> f64 {
        match *self {
            Analytic::Pareto { xm, .. } => xm,
            _ => 0.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Analytic::Pareto { alpha, xm } => {
                if x <= xm {
                    0.0
                } else {
                    1.0 - (xm / x).powf(alpha)
                }
            }
            Analytic::HalfCauchy { scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    FRAC_2_PI * (x / scale).atan()
                }
            }
            Analytic::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Analytic::HalfNormal { sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    erf(x / (sigma * SQRT_2))
                }
            }
        }
    }

    /// Survival function 1 - F(x), evaluated without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Analytic::Pareto { alpha, xm } => {
                if x <= xm {
                    1.0
                } else {
                    (xm / x).powf(alpha)
                }
            }
            Analytic::HalfCauchy { scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    FRAC_2_PI * (scale / x).atan()
                }
            }
            Analytic::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Analytic::HalfNormal { sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    erfc(x / (sigma * SQRT_2))
                }
            }
        }
    }

    /// ln F(x). Uses `ln_1p(-sf)` in the upper tail so that `n * ln F` stays
    /// accurate when F is within rounding of 1.
    pub fn log_cdf(&self, x: f64) -> f64 {
        if x <= self.lower_edge() {
            return f64::NEG_INFINITY;
        }
        let s = self.sf(x);
        if s < 0.5 {
            (-s).ln_1p()
        } else {
            self.cdf(x).ln()
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Analytic::Pareto { alpha, xm } => {
                if x < xm {
                    0.0
                } else {
                    alpha * xm.powf(alpha) * x.powf(-alpha - 1.0)
                }
            }
            Analytic::HalfCauchy { scale } => {
                if x < 0.0 {
                    0.0
                } else {
                    FRAC_2_PI * scale / (scale * scale + x * x)
                }
            }
            Analytic::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Analytic::HalfNormal { sigma } => {
                if x < 0.0 {
                    0.0
                } else {
                    let z = x / sigma;
                    FRAC_2_SQRT_2PI / sigma * (-0.5 * z * z).exp()
                }
            }
        }
    }

    /// ln p(x), finite far into tails where `pdf` underflows.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Analytic::Pareto { alpha, xm } => {
                if x < xm {
                    f64::NEG_INFINITY
                } else {
                    alpha.ln() + alpha * xm.ln() - (alpha + 1.0) * x.ln()
                }
            }
            Analytic::HalfCauchy { scale } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let r = x / scale;
                    FRAC_2_PI.ln() - scale.ln() - r.mul_add(r, 1.0).ln()
                }
            }
            Analytic::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - rate * x
                }
            }
            Analytic::HalfNormal { sigma } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let z = x / sigma;
                    FRAC_2_SQRT_2PI.ln() - sigma.ln() - 0.5 * z * z
                }
            }
        }
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        match *self {
            Analytic::Pareto { alpha, xm } => {
                if x < xm {
                    0.0
                } else {
                    -alpha * (alpha + 1.0) * xm.powf(alpha) * x.powf(-alpha - 2.0)
                }
            }
            Analytic::HalfCauchy { scale } => {
                if x < 0.0 {
                    0.0
                } else {
                    let d = scale * scale + x * x;
                    -2.0 * FRAC_2_PI * scale * x / (d * d)
                }
            }
            Analytic::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    -rate * rate * (-rate * x).exp()
                }
            }
            Analytic::HalfNormal { sigma } => {
                if x < 0.0 {
                    0.0
                } else {
                    -x / (sigma * sigma) * self.pdf(x)
                }
            }
        }
    }

    /// Log-derivative `p'(x) / p(x)` on the support.
    pub fn score(&self, x: f64) -> f64 {
        match *self {
            Analytic::Pareto { alpha, .. } => -(alpha + 1.0) / x,
            Analytic::HalfCauchy { scale } => -2.0 * x / (scale * scale + x * x),
            Analytic::Exponential { rate } => -rate,
            Analytic::HalfNormal { sigma } => -x / (sigma * sigma),
        }
    }

    /// Quantile expressed through the upper-tail probability `s = 1 - u`,
    /// which keeps full precision as `u -> 1`.
    pub fn upper_quantile(&self, s: f64) -> f64 {
        match *self {
            Analytic::Pareto { alpha, xm } => xm * s.powf(-1.0 / alpha),
            Analytic::HalfCauchy { scale } => scale / (FRAC_PI_2 * s).tan(),
            Analytic::Exponential { rate } => -s.ln() / rate,
            Analytic::HalfNormal { sigma } => {
                // one Newton step on sf polishes erfc_inv to full precision
                let x = sigma * SQRT_2 * erfc_inv(s);
                let p = self.pdf(x);
                if p > 0.0 {
                    x + (self.sf(x) - s) / p
                } else {
                    x
                }
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Analytic::Pareto { .. } | Analytic::HalfNormal { .. } => self.upper_quantile(1.0 - u),
            Analytic::HalfCauchy { scale } => scale * (FRAC_PI_2 * u).tan(),
            Analytic::Exponential { rate } => -(-u).ln_1p() / rate,
        }
    }

    /// Regular-variation index of the tail, if the density is regularly varying.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            Analytic::Pareto { alpha, .. } => Some(alpha),
            Analytic::HalfCauchy { .. } => Some(1.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Analytic(Analytic),
    SymmetricStable { alpha: f64, scale: f64 },
}

/// An immutable distribution family descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFamily {
    kind: Kind,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::domain(format!("{name} must be a positive finite number, got {v}")))
    }
}

pub fn make_pareto(alpha: f64, xm: f64) -> Result<TailFamily> {
    let alpha = positive("pareto alpha", alpha)?;
    let xm = positive("pareto xm", xm)?;
    Ok(TailFamily::analytic_family(Analytic::Pareto { alpha, xm }))
}

pub fn make_half_cauchy(scale: f64) -> Result<TailFamily> {
    let scale = positive("half-cauchy scale", scale)?;
    Ok(TailFamily::analytic_family(Analytic::HalfCauchy { scale }))
}

pub fn make_exponential(rate: f64) -> Result<TailFamily> {
    let rate = positive("exponential rate", rate)?;
    Ok(TailFamily::analytic_family(Analytic::Exponential { rate }))
}

pub fn make_half_normal(sigma: f64) -> Result<TailFamily> {
    let sigma = positive("half-normal sigma", sigma)?;
    Ok(TailFamily::analytic_family(Analytic::HalfNormal { sigma }))
}

/// Symmetric alpha-stable law, sampler only.
pub fn make_symmetric_stable(alpha: f64, scale: f64) -> Result<TailFamily> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::domain(format!(
            "stable alpha must lie in (0, 2], got {alpha}"
        )));
    }
    let scale = positive("stable scale", scale)?;
    Ok(TailFamily {
        kind: Kind::SymmetricStable { alpha, scale },
    })
}

impl TailFamily {
    fn analytic_family(a: Analytic) -> Self {
        TailFamily {
            kind: Kind::Analytic(a),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::Analytic(Analytic::Pareto { .. }) => "pareto",
            Kind::Analytic(Analytic::HalfCauchy { .. }) => "half_cauchy",
            Kind::Analytic(Analytic::Exponential { .. }) => "exponential",
            Kind::Analytic(Analytic::HalfNormal { .. }) => "half_normal",
            Kind::SymmetricStable { .. } => "stable",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match self.kind {
            Kind::Analytic(Analytic::Pareto { alpha, xm }) => vec![("alpha", alpha), ("xm", xm)],
            Kind::Analytic(Analytic::HalfCauchy { scale }) => vec![("scale", scale)],
            Kind::Analytic(Analytic::Exponential { rate }) => vec![("rate", rate)],
            Kind::Analytic(Analytic::HalfNormal { sigma }) => vec![("sigma", sigma)],
            Kind::SymmetricStable { alpha, scale } => vec![("alpha", alpha), ("scale", scale)],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// The alpha of the regularly varying tail; `None` for light tails and
    /// for the Gaussian end point of the stable family.
    pub fn tail_index(&self) -> Option<f64> {
        match self.kind {
            Kind::Analytic(a) => a.tail_index(),
            Kind::SymmetricStable { alpha, .. } => (alpha < 2.0).then_some(alpha),
        }
    }

    /// Stability index when the family is itself alpha-stable.
    pub fn stability_index(&self) -> Option<f64> {
        match self.kind {
            Kind::SymmetricStable { alpha, .. } => Some(alpha),
            Kind::Analytic(_) => None,
        }
    }

    pub fn capabilities(&self) -> Capabilities {
        match self.kind {
            Kind::Analytic(_) => Capabilities::FULL,
            Kind::SymmetricStable { .. } => Capabilities::SAMPLER_ONLY,
        }
    }

    /// Closed-form view of the law, or a capability error naming `what`.
    pub fn require_analytic(&self, what: &'static str) -> Result<Analytic> {
        match self.kind {
            Kind::Analytic(a) => Ok(a),
            Kind::SymmetricStable { .. } => Err(Error::Capability {
                family: self.to_string(),
                capability: what,
            }),
        }
    }

    pub fn analytic(&self) -> Option<Analytic> {
        match self.kind {
            Kind::Analytic(a) => Some(a),
            Kind::SymmetricStable { .. } => None,
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.require_analytic("cdf")?.cdf(x))
    }

    pub fn log_cdf(&self, x: f64) -> Result<f64> {
        Ok(self.require_analytic("cdf")?.log_cdf(x))
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.require_analytic("pdf")?.pdf(x))
    }

    pub fn pdf_derivative(&self, x: f64) -> Result<f64> {
        Ok(self.require_analytic("pdf_derivative")?.pdf_derivative(x))
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {u}")));
        }
        Ok(self.require_analytic("quantile")?.quantile(u))
    }

    /// One draw of X.
    #[inline]
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            Kind::Analytic(Analytic::Pareto { alpha, xm }) => xm * open_unit(rng).powf(-1.0 / alpha),
            Kind::Analytic(Analytic::HalfCauchy { scale }) => {
                (scale * (PI * (open_unit(rng) - 0.5)).tan()).abs()
            }
            Kind::Analytic(Analytic::Exponential { rate }) => -open_unit(rng).ln() / rate,
            Kind::Analytic(a @ Analytic::HalfNormal { .. }) => a.upper_quantile(open_unit(rng)),
            Kind::SymmetricStable { alpha, scale } => scale * chambers_mallows_stuck(alpha, rng),
        }
    }

    /// `count` i.i.d. draws from the stream of `seed`.
    pub fn sample(&self, count: usize, seed: Seed) -> Result<Vec<f64>> {
        if !self.capabilities().has_sampler {
            return Err(Error::Capability {
                family: self.to_string(),
                capability: "sampler",
            });
        }
        if count == 0 {
            return Err(Error::domain("sample count must be at least 1"));
        }
        let mut rng = seed.rng();
        Ok((0..count).map(|_| self.draw(&mut rng)).collect())
    }
}

/// Standard symmetric stable variate (unit scale).
fn chambers_mallows_stuck<R: RngCore + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = PI * (open_unit(rng) - 0.5);
    if alpha == 1.0 {
        return u.tan();
    }
    let e = -open_unit(rng).ln();
    let cos_u = u.cos();
    (alpha * u).sin() / cos_u.powf(1.0 / alpha)
        * (((1.0 - alpha) * u).cos() / e).powf((1.0 - alpha) / alpha)
}

/// Renders as the spec string accepted by [`FromStr`].
impl fmt::Display for TailFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.name())?;
        let params = self.params();
        for (i, (k, v)) in params.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Parses `name:key=value,key=value`, case-insensitively.
///
/// Recognized names: `pareto` (alpha, xm=1), `half_cauchy` (scale=1),
/// `stable` (alpha, scale=1), `exponential` (rate=1), `half_normal`
/// (sigma=1). Hyphens in names are accepted in place of underscores.
impl FromStr for TailFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "family spec",
            detail,
        };
        let lower = s.trim().to_ascii_lowercase();
        let (name, rest) = match lower.split_once(':') {
            Some((n, r)) => (n.trim().replace('-', "_"), r.trim()),
            None => (lower.replace('-', "_"), ""),
        };
        let mut values = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{pair}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| bad(format!("`{}` is not a number", v.trim())))?;
            if values.insert(k.trim().to_string(), v).is_some() {
                return Err(bad(format!("duplicate key `{}`", k.trim())));
            }
        }
        let allowed: &[&str] = match name.as_str() {
            "pareto" => &["alpha", "xm"],
            "half_cauchy" | "halfcauchy" => &["scale"],
            "stable" | "symmetric_stable" => &["alpha", "scale"],
            "exponential" | "exp" => &["rate"],
            "half_normal" | "halfnormal" => &["sigma"],
            other => return Err(bad(format!("unknown family `{other}`"))),
        };
        if let Some(k) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(bad(format!("unknown key `{k}` for family `{name}`")));
        }
        let get = |k: &str, default: Option<f64>| {
            values
                .get(k)
                .copied()
                .or(default)
                .ok_or_else(|| bad(format!("family `{name}` requires `{k}`")))
        };
        match allowed[0] {
            "alpha" if name == "pareto" => make_pareto(get("alpha", None)?, get("xm", Some(1.0))?),
            "alpha" => make_symmetric_stable(get("alpha", None)?, get("scale", Some(1.0))?),
            "scale" => make_half_cauchy(get("scale", Some(1.0))?),
            "rate" => make_exponential(get("rate", Some(1.0))?),
            _ => make_half_normal(get("sigma", Some(1.0))?),
        }
    }
}
