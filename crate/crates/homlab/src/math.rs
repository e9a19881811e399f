//! Small numeric helpers shared across the crate.
//!
//! Summation is pairwise everywhere ensemble statistics are produced so that
//! results do not depend on how work was split across threads.

/// Pairwise (cascade) summation. Deterministic for a given slice regardless
/// of the caller's threading, and considerably more accurate than a naive
/// left fold for long ensembles.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Arithmetic mean via pairwise summation. Empty input returns NaN.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample standard deviation with the (n - 1) divisor.
/// Returns NaN for fewer than two points.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    (pairwise_sum(&sq) / (xs.len() - 1) as f64).sqrt()
}

/// Trapezoidal rule over uniformly spaced samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior = pairwise_sum(&values[1..values.len() - 1]);
    dx * (interior + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Inclusive linear-interpolation percentile of an already sorted slice.
/// `p` is a fraction in [0, 1]; the rank is p * (n - 1) with interpolation
/// between the bracketing order statistics.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty slice");
    assert!((0.0..=1.0).contains(&p), "percentile fraction out of range");
    let rank = p * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac
}

/// Sort a copy of `xs` by total order (NaNs sort last) and return it.
pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}
