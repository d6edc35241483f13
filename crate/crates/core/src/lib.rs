//! Outliers of order 1/kappa: the event that the second-largest magnitude of
//! an i.i.d. sample is at most `kappa` times the largest.
//!
//! The crate computes the probability of that event (limit, quadrature,
//! Monte Carlo and a joint-density oracle), turns its observed frequency
//! into an estimate of the stability index, and simulates running means of
//! heavy-tailed streams.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod lln;
pub mod outlier;
pub mod output;
pub mod probability;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use distributions::{
    make_exponential, make_half_cauchy, make_half_normal, make_pareto, make_symmetric_stable, TailFamily,
};
pub use error::{Error, Result};
pub use rng::Seed;
