//! Top-two order statistics of |X| and the two outlier rules: the ratio rule
//! `X(n-1) <= kappa * X(n)` on magnitudes, and the k-sigma baseline.

use serde::{Deserialize, Serialize};

use crate::error::{check_kappa, Error, Result};

/// The largest and second-largest magnitudes of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopTwo {
    pub max_magnitude: f64,
    pub second_magnitude: f64,
    pub max_index: usize,
    pub second_index: usize,
}

/// Single-pass accumulator behind [`top_two_magnitudes`]; usable on
/// streams that are never materialized.
#[derive(Debug, Clone, Copy)]
pub struct TopTwoTracker {
    max: f64,
    second: f64,
    max_index: usize,
    second_index: usize,
    seen: usize,
}

impl Default for TopTwoTracker {
    fn default() -> Self {
        TopTwoTracker {
            max: f64::NEG_INFINITY,
            second: f64::NEG_INFINITY,
            max_index: 0,
            second_index: 0,
            seen: 0,
        }
    }
}

impl TopTwoTracker {
    /// Ties keep the earlier observation in the higher rank.
    #[inline]
    pub fn push(&mut self, x: f64) {
        let m = x.abs();
        let i = self.seen;
        self.seen += 1;
        if m > self.max {
            self.second = self.max;
            self.second_index = self.max_index;
            self.max = m;
            self.max_index = i;
        } else if m > self.second {
            self.second = m;
            self.second_index = i;
        }
    }

    pub fn finish(self) -> Result<TopTwo> {
        if self.seen < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.seen,
            });
        }
        Ok(TopTwo {
            max_magnitude: self.max,
            second_magnitude: self.second,
            max_index: self.max_index,
            second_index: self.second_index,
        })
    }
}

fn reject_nan(data: &[f64]) -> Result<()> {
    match data.iter().position(|x| x.is_nan()) {
        Some(i) => Err(Error::domain(format!("observation {i} is NaN"))),
        None => Ok(()),
    }
}

pub fn top_two_magnitudes(data: &[f64]) -> Result<TopTwo> {
    reject_nan(data)?;
    let mut t = TopTwoTracker::default();
    data.iter().for_each(|&x| t.push(x));
    t.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierVerdict {
    pub is_outlier: bool,
    pub kappa: f64,
    /// `second / max`, or 0 when both are 0.
    pub ratio: f64,
    pub top_two: TopTwo,
}

impl OutlierVerdict {
    pub fn from_top_two(top_two: TopTwo, kappa: f64) -> Self {
        let ratio = if top_two.max_magnitude == 0.0 {
            0.0
        } else {
            top_two.second_magnitude / top_two.max_magnitude
        };
        OutlierVerdict {
            is_outlier: is_ratio_event(&top_two, kappa),
            kappa,
            ratio,
            top_two,
        }
    }
}

/// The non-strict event `second <= kappa * max`.
#[inline]
pub fn is_ratio_event(t: &TopTwo, kappa: f64) -> bool {
    t.second_magnitude <= kappa * t.max_magnitude
}

/// Whether the largest magnitude is an outlier of order `1/kappa`.
pub fn is_outlier(data: &[f64], kappa: f64) -> Result<OutlierVerdict> {
    check_kappa(kappa)?;
    Ok(OutlierVerdict::from_top_two(top_two_magnitudes(data)?, kappa))
}

/// Mean and population (divide-by-n) standard deviation.
pub fn population_mean_std(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Indices `j` with `|x_j - mean| > k * s`, `s` the population standard
/// deviation. Constant data has no outliers.
pub fn ksigma_outliers(data: &[f64], k: f64) -> Result<Vec<usize>> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("k must be a positive finite number, got {k}")));
    }
    if data.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: data.len(),
        });
    }
    reject_nan(data)?;
    if data.iter().all(|&x| x == data[0]) {
        return Ok(Vec::new());
    }
    let (mean, s) = population_mean_std(data);
    let threshold = k * s;
    Ok(data
        .iter()
        .enumerate()
        .filter(|(_, &x)| (x - mean).abs() > threshold)
        .map(|(j, _)| j)
        .collect())
}

/// Frequency of the outlier event over consecutive disjoint blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockFrequency {
    pub p_hat: f64,
    pub blocks: usize,
    pub events: usize,
}

/// Splits `data` into `len / block_size` consecutive blocks (the remainder
/// is dropped) and counts blocks whose maximum is an outlier.
pub fn block_event_frequency(data: &[f64], block_size: usize, kappa: f64) -> Result<BlockFrequency> {
    check_kappa(kappa)?;
    if block_size < 2 {
        return Err(Error::domain(format!("block size must be at least 2, got {block_size}")));
    }
    if data.len() < block_size {
        return Err(Error::InsufficientData {
            needed: block_size,
            got: data.len(),
        });
    }
    reject_nan(data)?;
    let mut events = 0;
    let mut blocks = 0;
    for block in data.chunks_exact(block_size) {
        let mut t = TopTwoTracker::default();
        block.iter().for_each(|&x| t.push(x));
        if is_ratio_event(&t.finish()?, kappa) {
            events += 1;
        }
        blocks += 1;
    }
    Ok(BlockFrequency {
        p_hat: events as f64 / blocks as f64,
        blocks,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn top_two_examples() {
        let t = top_two_magnitudes(&[1.0, -2.0, 10.0]).unwrap();
        assert_eq!((t.max_magnitude, t.second_magnitude, t.max_index, t.second_index), (10.0, 2.0, 2, 1));
        let t = top_two_magnitudes(&[5.0, 5.0]).unwrap();
        assert_eq!((t.max_magnitude, t.second_magnitude, t.max_index, t.second_index), (5.0, 5.0, 0, 1));
        let t = top_two_magnitudes(&[-7.5, 3.0, 7.5, 1.0]).unwrap();
        assert_eq!((t.max_magnitude, t.second_magnitude, t.max_index, t.second_index), (7.5, 7.5, 0, 2));
    }

    #[test]
    fn top_two_needs_two_values() {
        assert!(matches!(top_two_magnitudes(&[1.0]), Err(Error::InsufficientData { needed: 2, got: 1 })));
        assert!(matches!(top_two_magnitudes(&[]), Err(Error::InsufficientData { .. })));
        assert!(matches!(top_two_magnitudes(&[1.0, f64::NAN]), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn verdict_examples() {
        let v = is_outlier(&[1.0, -2.0, 10.0], 0.5).unwrap();
        assert!(v.is_outlier);
        assert_eq!(v.ratio, 0.2);
        assert!(!is_outlier(&[1.0, 2.0, 3.0], 0.5).unwrap().is_outlier);
        // boundary: 2 <= 0.5 * 4
        assert!(is_outlier(&[4.0, 2.0], 0.5).unwrap().is_outlier);
        let zeros = is_outlier(&[0.0, 0.0, 0.0], 0.5).unwrap();
        assert_eq!(zeros.ratio, 0.0);
        assert!(zeros.is_outlier);
    }

    #[test]
    fn verdict_rejects_bad_kappa() {
        for k in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(is_outlier(&[1.0, 2.0], k), Err(Error::ParameterDomain(_))));
        }
        assert!(matches!(is_outlier(&[1.0], 0.5), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn ksigma_examples() {
        let (mean, s) = population_mean_std(&[0.0, 0.0, 0.0, 10.0]);
        assert_eq!(mean, 2.5);
        assert!((s - 4.330_127_018_922_193).abs() < 1e-12);
        assert!(ksigma_outliers(&[0.0, 0.0, 0.0, 10.0], 2.0).unwrap().is_empty());
        assert_eq!(ksigma_outliers(&[0.0, 0.0, 0.0, 10.0], 1.0).unwrap(), vec![3]);
        assert!(ksigma_outliers(&[0.1; 7], 0.001).unwrap().is_empty());
        assert!(matches!(ksigma_outliers(&[1.0, 2.0], 0.0), Err(Error::ParameterDomain(_))));
        assert!(matches!(ksigma_outliers(&[1.0], 1.0), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn block_frequency_examples() {
        let f = block_event_frequency(&[1.0, 2.0, 10.0, 1.0, 2.0, 3.0], 3, 0.5).unwrap();
        assert_eq!((f.p_hat, f.blocks, f.events), (0.5, 2, 1));
        // remainder dropped
        let f = block_event_frequency(&[1.0, 2.0, 10.0, 1.0, 2.0, 3.0, 100.0], 3, 0.5).unwrap();
        assert_eq!(f.blocks, 2);
        assert!(matches!(
            block_event_frequency(&[1.0, 2.0], 3, 0.5),
            Err(Error::InsufficientData { needed: 3, got: 2 })
        ));
        assert!(matches!(block_event_frequency(&[1.0, 2.0], 1, 0.5), Err(Error::ParameterDomain(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn top_two_agrees_with_sort(data in prop::collection::vec(-1e6f64..1e6, 2..500)) {
            let t = top_two_magnitudes(&data).unwrap();
            let mut mags: Vec<f64> = data.iter().map(|x| x.abs()).collect();
            mags.sort_by(f64::total_cmp);
            prop_assert_eq!(t.max_magnitude, mags[mags.len() - 1]);
            prop_assert_eq!(t.second_magnitude, mags[mags.len() - 2]);
            prop_assert!(t.max_index != t.second_index);
            prop_assert_eq!(data[t.max_index].abs(), t.max_magnitude);
            prop_assert_eq!(data[t.second_index].abs(), t.second_magnitude);
        }

        #[test]
        fn outlier_is_monotone_in_kappa(
            data in prop::collection::vec(-1e3f64..1e3, 2..50),
            k1 in 0.01f64..0.99,
            k2 in 0.01f64..0.99,
        ) {
            let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
            if is_outlier(&data, lo).unwrap().is_outlier {
                prop_assert!(is_outlier(&data, hi).unwrap().is_outlier);
            }
        }

        #[test]
        fn outlier_is_scale_invariant(
            data in prop::collection::vec(-1e3f64..1e3, 2..50),
            exp in -8i32..8,
            negate in any::<bool>(),
            kappa in 0.05f64..0.95,
        ) {
            // powers of two keep the scaling exact in floating point
            let c = if negate { -(2f64.powi(exp)) } else { 2f64.powi(exp) };
            let scaled: Vec<f64> = data.iter().map(|x| c * x).collect();
            prop_assert_eq!(
                is_outlier(&data, kappa).unwrap().is_outlier,
                is_outlier(&scaled, kappa).unwrap().is_outlier
            );
        }
    }
}
