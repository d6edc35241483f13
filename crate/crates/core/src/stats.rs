//! Small statistical helpers: Wilson score interval, median, least-squares slope.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{check_confidence, Error, Result};

/// Two-sided standard normal critical value for `confidence`.
pub fn z_critical(confidence: f64) -> Result<f64> {
    check_confidence(confidence)?;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(0.5 + 0.5 * confidence))
}

/// Wilson score interval for a binomial proportion `p_hat` over `trials`.
pub fn wilson_interval(p_hat: f64, trials: usize, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::domain("Wilson interval needs at least one trial"));
    }
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::domain(format!("proportion must lie in [0, 1], got {p_hat}")));
    }
    let z = z_critical(confidence)?;
    let n = trials as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if p_hat == 0.0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if p_hat == 1.0 { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
