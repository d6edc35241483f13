//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error meets `max(abs, rel * |I|)` or the interval cap is reached.
//! Infinite ranges are handled by the caller through a change of variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1] (symmetric), QUADPACK qk15.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the 7-point rule (odd Kronrod nodes).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
            max_intervals: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod evaluation with the embedded 7-point Gauss estimate.
fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    // |K15 - G7| is a conservative bound on the error of the Kronrod value
    let mut error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() || !error.is_finite() {
        error = f64::INFINITY;
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`. On failure to converge returns
/// [`Error::Accuracy`] carrying the best estimate and its error bound.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    if a > b {
        return integrate(f, b, a, tol).map(|r| QuadResult { value: -r.value, ..r });
    }
    let mut heap = BinaryHeap::new();
    let first = gauss_kronrod(&mut f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    loop {
        if error <= tol.abs.max(tol.rel * value.abs()) {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in f64
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
            });
        }
        let left = gauss_kronrod(&mut f, worst.a, mid);
        let right = gauss_kronrod(&mut f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // re-sum occasionally to shed accumulated rounding in the running totals
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
    let value_sum: f64 = heap.iter().map(|s| s.value).sum();
    let error_sum: f64 = heap.iter().map(|s| s.error).sum();
    if !value_sum.is_finite() {
        return Err(Error::Accuracy {
            estimate: value_sum,
            error_bound: f64::INFINITY,
        });
    }
    Ok(QuadResult {
        value: value_sum,
        abs_error: error_sum,
        intervals: heap.len(),
    })
}

/// Integrates `f` over `[a, inf)` via `y = a + t / (1 - t)`, `t in [0, 1)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<QuadResult> {
    integrate(
        |t| {
            let one_minus = 1.0 - t;
            let y = a + t / one_minus;
            let v = f(y) / (one_minus * one_minus);
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0 + 3.0)).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn smooth_and_singular_integrands() {
        let tol = Tolerance::default();
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, tol).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        // integrable log singularity at 0
        let r = integrate(|x: f64| -x.ln(), 0.0, 1.0, tol).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{}", r.value);
        assert!(r.abs_error < 1e-8);
        // 1/sqrt singularity
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, tol).unwrap();
        assert!((r.value - 2.0).abs() < 3e-8, "{}", r.value);
    }

    #[test]
    fn semi_infinite_range() {
        let r = integrate_to_infinity(|y| 1.0 / (1.0 + y * y), 0.0, Tolerance::default()).unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        let r = integrate_to_infinity(|y| (-y).exp(), 2.0, Tolerance::default()).unwrap();
        assert!((r.value - (-2f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn reversed_and_empty_ranges() {
        let t = Tolerance::default();
        assert_eq!(integrate(|x| x, 1.0, 1.0, t).unwrap().value, 0.0);
        let r = integrate(|x| x, 1.0, 0.0, t).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn interval_cap_reports_best_estimate() {
        let tol = Tolerance {
            abs: 1e-15,
            rel: 0.0,
            max_intervals: 4,
        };
        match integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, tol) {
            Err(Error::Accuracy { estimate, error_bound }) => {
                assert!(estimate.is_finite());
                assert!(error_bound > 1e-15);
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }
}
