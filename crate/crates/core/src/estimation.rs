//! Stability-index estimator `alpha_hat = ln(p_hat) / ln(kappa)`, where
//! `p_hat` is the block frequency of the outlier event.
//!
//! At finite block size the event probability is not exactly `kappa^alpha`
//! except for pure Pareto tails, so for other laws `alpha_hat` is an
//! effective index at block size n, not the tail index itself.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_confidence, check_kappa, BoundKind, Error, Result};
use crate::outlier::block_event_frequency;
use crate::stats::wilson_interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha_hat: f64,
    pub p_hat: f64,
    pub kappa: f64,
    /// Block size n; unknown when the estimate was built from a bare frequency.
    pub block_size: Option<usize>,
    pub blocks: usize,
    pub ci: (f64, f64),
    pub confidence: f64,
}

impl fmt::Display for AlphaEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha_hat = {:.6} [{:.6}, {:.6}] ({}% CI) from p_hat = {:.6} over {} blocks",
            self.alpha_hat,
            self.ci.0,
            self.ci.1,
            self.confidence * 100.0,
            self.p_hat,
            self.blocks
        )?;
        if let Some(n) = self.block_size {
            write!(f, "; effective index at block size {n}")?;
        }
        Ok(())
    }
}

#[inline]
fn to_alpha(p: f64, kappa: f64) -> f64 {
    p.ln() / kappa.ln()
}

/// Inverts `p = kappa^alpha`. The Wilson interval for `p_hat` is pushed
/// through the same decreasing map, so its endpoints swap.
pub fn estimate_alpha_from_frequency(p_hat: f64, kappa: f64, blocks: usize, confidence: f64) -> Result<AlphaEstimate> {
    check_kappa(kappa)?;
    check_confidence(confidence)?;
    if blocks == 0 {
        return Err(Error::domain("blocks must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::domain(format!("p_hat must lie in [0, 1], got {p_hat}")));
    }
    let (lo, hi) = wilson_interval(p_hat, blocks, confidence)?;
    if p_hat == 0.0 {
        return Err(Error::DegenerateFrequency {
            p_hat,
            blocks,
            kind: BoundKind::Lower,
            bound: to_alpha(hi, kappa),
        });
    }
    if p_hat == 1.0 {
        return Err(Error::DegenerateFrequency {
            p_hat,
            blocks,
            kind: BoundKind::Upper,
            bound: to_alpha(lo, kappa),
        });
    }
    Ok(AlphaEstimate {
        alpha_hat: to_alpha(p_hat, kappa),
        p_hat,
        kappa,
        block_size: None,
        blocks,
        ci: (to_alpha(hi, kappa), to_alpha(lo, kappa)),
        confidence,
    })
}

pub fn estimate_alpha_from_data(data: &[f64], block_size: usize, kappa: f64, confidence: f64) -> Result<AlphaEstimate> {
    let freq = block_event_frequency(data, block_size, kappa)?;
    let est = estimate_alpha_from_frequency(freq.p_hat, kappa, freq.blocks, confidence)?;
    Ok(AlphaEstimate {
        block_size: Some(block_size),
        ..est
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::make_pareto;
    use crate::probability::limit_probability;
    use crate::rng::Seed;

    #[test]
    fn frequency_examples() {
        assert!((estimate_alpha_from_frequency(0.5, 0.5, 100, 0.95).unwrap().alpha_hat - 1.0).abs() < 1e-15);
        assert!((estimate_alpha_from_frequency(0.25, 0.5, 100, 0.95).unwrap().alpha_hat - 2.0).abs() < 1e-15);
        let p = 0.3f64.powf(1.7);
        assert!((estimate_alpha_from_frequency(p, 0.3, 10, 0.95).unwrap().alpha_hat - 1.7).abs() < 1e-12);
    }

    #[test]
    fn round_trip_through_limit() {
        for alpha in [0.3, 0.6, 1.0, 1.5, 1.9] {
            for kappa in [0.2, 0.5, 0.8] {
                let p = limit_probability(kappa, alpha).unwrap();
                let est = estimate_alpha_from_frequency(p, kappa, 1000, 0.95).unwrap();
                assert!((est.alpha_hat - alpha).abs() < 1e-12);
                assert!(est.ci.0 <= est.alpha_hat && est.alpha_hat <= est.ci.1);
            }
        }
    }

    #[test]
    fn strictly_decreasing_in_p_hat() {
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let a = estimate_alpha_from_frequency(i as f64 / 100.0, 0.4, 50, 0.9).unwrap().alpha_hat;
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn degenerate_frequencies_give_one_sided_bounds() {
        match estimate_alpha_from_frequency(1.0, 0.5, 20, 0.95) {
            Err(Error::DegenerateFrequency { kind: BoundKind::Upper, bound, .. }) => {
                let (lo, _) = wilson_interval(1.0, 20, 0.95).unwrap();
                assert!((bound - lo.ln() / 0.5f64.ln()).abs() < 1e-15);
                assert!(bound > 0.0);
            }
            other => panic!("{other:?}"),
        }
        match estimate_alpha_from_frequency(0.0, 0.5, 20, 0.95) {
            Err(Error::DegenerateFrequency { kind: BoundKind::Lower, bound, .. }) => assert!(bound > 0.0),
            other => panic!("{other:?}"),
        }
        // every block triggers: the maximum dwarfs the rest in each block
        let data: Vec<f64> = (0..30).map(|i| if i % 3 == 2 { 100.0 } else { 1.0 }).collect();
        let err = estimate_alpha_from_data(&data, 3, 0.5, 0.95).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrequency { .. }));
        assert_eq!(err.exit_code(), 6);
    }

    #[test]
    fn bad_inputs() {
        assert!(estimate_alpha_from_frequency(0.5, 1.0, 10, 0.95).is_err());
        assert!(estimate_alpha_from_frequency(0.5, 0.5, 0, 0.95).is_err());
        assert!(estimate_alpha_from_frequency(1.5, 0.5, 10, 0.95).is_err());
        assert!(estimate_alpha_from_frequency(0.5, 0.5, 10, 1.0).is_err());
        assert!(matches!(
            estimate_alpha_from_data(&[1.0; 5], 10, 0.5, 0.95),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn pareto_data_recovers_alpha() {
        let data = make_pareto(1.5, 1.0).unwrap().sample(1_000_000, Seed(2024)).unwrap();
        let est = estimate_alpha_from_data(&data, 100, 0.5, 0.95).unwrap();
        assert!((1.4..=1.6).contains(&est.alpha_hat), "{est}");
        assert!(est.ci.0 <= 1.5 && 1.5 <= est.ci.1, "{est}");
        assert_eq!(est.block_size, Some(100));
        assert_eq!(est.blocks, 10_000);
        let scaled: Vec<f64> = data.iter().map(|x| -3.7 * x).collect();
        assert_eq!(estimate_alpha_from_data(&scaled, 100, 0.5, 0.95).unwrap(), est);
    }
}
