//! Sample-size planning and percentile bootstrap confidence intervals.
//!
//! Two jobs: decide how many shots an ensemble needs before its mean is
//! trustworthy, and put resampling error bars on statistics (like the
//! normalized coincidence) whose sampling distribution we would rather
//! not derive.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::{mean, pairwise_sum, percentile_sorted, sample_std, sorted};
use crate::rng::{SeedSpace, StreamDomain};

/// Target relative half-width of the mean's confidence interval: the CI
/// width should be 10% of the mean, so the half-width is 5%.
pub const DEFAULT_REL_HALFWIDTH: f64 = 0.05;

/// Two-sided 95% normal quantile.
pub const DEFAULT_Z: f64 = 1.96;

/// First two moments of a sample, the inputs to the sample-size rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub count: usize,
}

impl SampleSummary {
    pub fn new(mean: f64, std_dev: f64, count: usize) -> Result<Self> {
        if !mean.is_finite() || !std_dev.is_finite() || std_dev < 0.0 {
            return Err(Error::Stats(format!(
                "summary moments must be finite with std_dev >= 0, got mean {mean}, std {std_dev}"
            )));
        }
        if count < 2 {
            return Err(Error::Stats(format!(
                "summary needs at least 2 observations, got {count}"
            )));
        }
        Ok(SampleSummary {
            mean,
            std_dev,
            count,
        })
    }

    /// Plug-in estimates: sample mean and the (n-1)-divisor deviation.
    pub fn from_data(data: &[f64]) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::Stats(format!(
                "need at least 2 observations to summarize, got {}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Stats("sample contains non-finite values".into()));
        }
        SampleSummary::new(mean(data), sample_std(data), data.len())
    }
}

/// Samples needed so that a z-level confidence interval for the mean has
/// half-width `rel_halfwidth * mean`:
///
/// ```text
/// N = ceil( (z * std_dev / (rel_halfwidth * mean))^2 ),  minimum 2
/// ```
///
/// The mean must be positive; a relative width target makes no sense
/// around zero.
pub fn min_samples(summary: &SampleSummary, rel_halfwidth: f64, z: f64) -> Result<usize> {
    if !(summary.mean > 0.0) {
        return Err(Error::Stats(format!(
            "relative-width planning needs a positive mean, got {}",
            summary.mean
        )));
    }
    if !(rel_halfwidth.is_finite() && rel_halfwidth > 0.0) {
        return Err(Error::Stats(format!(
            "relative half-width {rel_halfwidth} must be positive"
        )));
    }
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Stats(format!("z quantile {z} must be positive")));
    }
    let ratio = z * summary.std_dev / (rel_halfwidth * summary.mean);
    let n = (ratio * ratio).ceil();
    if !n.is_finite() || n > usize::MAX as f64 {
        return Err(Error::Stats("required sample size overflows".into()));
    }
    Ok((n as usize).max(2))
}

/// A two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn new(lo: f64, hi: f64, level: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Stats(format!(
                "interval [{lo}, {hi}] is not ordered and finite"
            )));
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Stats(format!(
                "confidence level {level} outside (0, 1)"
            )));
        }
        Ok(ConfidenceInterval { lo, hi, level })
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Resampling plan for the percentile bootstrap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSpec {
    pub n_resamples: usize,
    pub level: f64,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        BootstrapSpec {
            n_resamples: 10_000,
            level: 0.95,
        }
    }
}

impl BootstrapSpec {
    fn validate(&self) -> Result<()> {
        if self.n_resamples < 100 {
            return Err(Error::Stats(format!(
                "{} resamples cannot resolve the interval tails; need at least 100",
                self.n_resamples
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Stats(format!(
                "confidence level {} outside (0, 1)",
                self.level
            )));
        }
        Ok(())
    }
}

/// Percentile bootstrap for an arbitrary statistic over an indexed
/// dataset of `n` records.
///
/// `stat` is called with resampled indices into the caller's data and
/// must return the statistic of that resample; `center` is the statistic
/// of the original sample. Each resample draws its indices from its own
/// seed substream, so the result is independent of scheduling and
/// reproducible from (seeds, id) alone.
pub fn bootstrap_statistic_ci<F>(
    n: usize,
    center: f64,
    stat: F,
    spec: &BootstrapSpec,
    seeds: &SeedSpace,
    id: u64,
) -> Result<ConfidenceInterval>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    spec.validate()?;
    if n < 2 {
        return Err(Error::Stats(format!(
            "bootstrap needs at least 2 records, got {n}"
        )));
    }
    if !center.is_finite() {
        return Err(Error::Stats("statistic of the original sample is not finite".into()));
    }
    let deltas: Vec<f64> = (0..spec.n_resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeds.stream(StreamDomain::Bootstrap, id, b as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            stat(&idx) - center
        })
        .collect();
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::Stats(
            "a resample produced a non-finite statistic".into(),
        ));
    }
    let deltas = sorted(&deltas);
    let lo_q = (1.0 - spec.level) / 2.0;
    let hi_q = (1.0 + spec.level) / 2.0;
    ConfidenceInterval::new(
        center + percentile_sorted(&deltas, lo_q),
        center + percentile_sorted(&deltas, hi_q),
        spec.level,
    )
}

/// Percentile bootstrap interval for the mean of a sample.
pub fn bootstrap_ci(
    sample: &[f64],
    spec: &BootstrapSpec,
    seeds: &SeedSpace,
    id: u64,
) -> Result<ConfidenceInterval> {
    if sample.len() < 2 {
        return Err(Error::Stats(format!(
            "bootstrap needs at least 2 observations, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Stats("sample contains non-finite values".into()));
    }
    let center = mean(sample);
    bootstrap_statistic_ci(
        sample.len(),
        center,
        |idx| {
            let picked: Vec<f64> = idx.iter().map(|&i| sample[i]).collect();
            pairwise_sum(&picked) / picked.len() as f64
        },
        spec,
        seeds,
        id,
    )
}
