//! Pulse synthesis, phase ensembles, and the RF signal chain.
//!
//! Fields live on a uniform time grid in one of two representations:
//!
//! * `Analytic`: complex envelope times carrier, `A g(t) e^{i(wt + phi)}`.
//!   Intensity is `|E|^2` directly.
//! * `RealVoltage`: the voltage a scope samples, `A g(t) sin(wt + phi)`.
//!   Intensity is what a slow detector reports: the squared voltage
//!   low-passed below the carrier, which is half the squared envelope.
//!
//! The mixer chain (up-convert, process, down-convert, low-pass) operates on
//! real voltages only; everything downstream of intensity extraction is
//! representation-agnostic.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use std::f64::consts::TAU;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// How field samples are stored and what "intensity" means for them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Analytic,
    RealVoltage,
}

/// Uniform sampling grid, inclusive of both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    dt: f64,
}

impl TimeGrid {
    /// The span must be a whole number of steps (within 1e-9 relative).
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && dt.is_finite()) {
            return Err(Error::domain("time grid parameters must be finite"));
        }
        if t_end <= t_start {
            return Err(Error::domain("time grid requires t_end > t_start"));
        }
        if dt <= 0.0 {
            return Err(Error::domain("time grid requires dt > 0"));
        }
        let span = t_end - t_start;
        let steps = (span / dt).round();
        if steps < 1.0 || ((steps * dt - span) / span).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "grid span {span:e} is not a whole number of steps of {dt:e}"
            )));
        }
        Ok(TimeGrid { t_start, t_end, dt })
    }

    /// Grid over `[t_start, t_end]` with `dt <= max_dt`, choosing a
    /// power-of-two sample count so FFT-based stages stay fast.
    pub fn with_sample_budget(t_start: f64, t_end: f64, max_dt: f64) -> Result<Self> {
        if max_dt <= 0.0 || !max_dt.is_finite() {
            return Err(Error::domain("max_dt must be positive and finite"));
        }
        let span = t_end - t_start;
        if span <= 0.0 {
            return Err(Error::domain("time grid requires t_end > t_start"));
        }
        let min_steps = (span / max_dt).ceil().max(1.0) as usize;
        let samples = (min_steps + 1).next_power_of_two();
        let dt = span / (samples - 1) as f64;
        Ok(TimeGrid {
            t_start,
            t_end,
            dt,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of samples, endpoints included.
    pub fn sample_count(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt).round() as usize + 1
    }

    /// Sample time computed directly from the index; no running sums, so
    /// every consumer sees bit-identical time stamps.
    pub fn time_at(&self, index: usize) -> f64 {
        self.t_start + index as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.sample_count()).map(move |k| self.time_at(k))
    }

    /// True when the grid extends at least `n_sigmas` envelope widths on
    /// both sides of the pulse center.
    pub fn covers_pulse(&self, pulse: &PulseSpec, n_sigmas: f64) -> bool {
        let reach = n_sigmas * pulse.envelope_sigma;
        self.t_start <= pulse.delay - reach && self.t_end >= pulse.delay + reach
    }
}

/// One Gaussian pulse: `A exp(-(t - delay)^2 / (2 sigma^2))` modulating a
/// carrier `sin(w t + phase)` (or `e^{i(w t + phase)}` in analytic form).
/// The carrier phase is referenced to t = 0, not to the envelope center, so
/// delaying a pulse slides the envelope across a fixed carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Peak envelope amplitude, volts.
    pub amplitude: f64,
    /// Gaussian envelope standard deviation, seconds.
    pub envelope_sigma: f64,
    /// Carrier frequency, hertz.
    pub carrier_freq: f64,
    /// Envelope center, seconds.
    pub delay: f64,
    /// Carrier phase offset, radians.
    pub phase: f64,
}

impl PulseSpec {
    fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::domain("pulse amplitude must be finite and >= 0"));
        }
        if !(self.envelope_sigma.is_finite() && self.envelope_sigma > 0.0) {
            return Err(Error::domain("pulse envelope sigma must be positive"));
        }
        if !(self.carrier_freq.is_finite() && self.carrier_freq > 0.0) {
            return Err(Error::domain("pulse carrier frequency must be positive"));
        }
        if !(self.delay.is_finite() && self.phase.is_finite()) {
            return Err(Error::domain("pulse delay and phase must be finite"));
        }
        Ok(())
    }
}

/// Field samples in one representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Analytic(Vec<Complex64>),
    RealVoltage(Vec<f64>),
}

impl Samples {
    fn len(&self) -> usize {
        match self {
            Samples::Analytic(v) => v.len(),
            Samples::RealVoltage(v) => v.len(),
        }
    }
}

/// A field on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    t_start: f64,
    dt: f64,
    samples: Samples,
    /// Carrier frequency (Hz) the slow-detector model uses to place its
    /// averaging cutoff. Set by `synthesize_pulse`, carried through linear
    /// operations and the mixer chain (which returns the signal to its
    /// original band before detection); absent on hand-built signals,
    /// which are then treated as already detector-bandwidth-limited.
    carrier_freq: Option<f64>,
}

impl SampledSignal {
    pub fn new(grid: &TimeGrid, samples: Samples) -> Result<Self> {
        if samples.len() != grid.sample_count() {
            return Err(Error::SignalMismatch(format!(
                "{} samples on a {}-sample grid",
                samples.len(),
                grid.sample_count()
            )));
        }
        if samples.len() < 2 {
            return Err(Error::domain("signals need at least two samples"));
        }
        Ok(SampledSignal {
            t_start: grid.t_start(),
            dt: grid.dt(),
            samples,
            carrier_freq: None,
        })
    }

    pub fn representation(&self) -> Representation {
        match self.samples {
            Samples::Analytic(_) => Representation::Analytic,
            Samples::RealVoltage(_) => Representation::RealVoltage,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructors reject len < 2
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + (self.len() - 1) as f64 * self.dt
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.t_start + index as f64 * self.dt
    }

    pub fn carrier_freq(&self) -> Option<f64> {
        self.carrier_freq
    }

    pub fn analytic_samples(&self) -> Option<&[Complex64]> {
        match &self.samples {
            Samples::Analytic(v) => Some(v),
            Samples::RealVoltage(_) => None,
        }
    }

    pub fn real_samples(&self) -> Option<&[f64]> {
        match &self.samples {
            Samples::RealVoltage(v) => Some(v),
            Samples::Analytic(_) => None,
        }
    }

    /// Intensity samples as a slow detector would report them.
    ///
    /// Analytic signals square to the full envelope intensity `|E|^2`.
    /// Real voltages are squared and low-passed at the carrier frequency,
    /// the quietest point between the intensity baseband and its image at
    /// twice the carrier; what remains settles at half the squared
    /// envelope. Pointwise accuracy is limited by how well the bands
    /// separate (about 1e-4 for carrier_freq * sigma = 1), but whole-grid
    /// sums of the result equal sums of the raw squared voltage exactly,
    /// because a brick-wall filter leaves the DC bin untouched. Without a
    /// carrier hint the squared voltage is returned as-is.
    pub fn detected_intensity(&self) -> Result<Vec<f64>> {
        match &self.samples {
            Samples::Analytic(v) => Ok(v.iter().map(|z| z.norm_sqr()).collect()),
            Samples::RealVoltage(v) => {
                let squared: Vec<f64> = v.iter().map(|x| x * x).collect();
                match self.carrier_freq {
                    None => Ok(squared),
                    Some(freq) => {
                        let grid = self.grid();
                        let sig = SampledSignal::new(&grid, Samples::RealVoltage(squared))?;
                        let filtered = low_pass(&sig, freq)?;
                        Ok(filtered.real_samples().expect("representation preserved").to_vec())
                    }
                }
            }
        }
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t_start: self.t_start,
            t_end: self.t_end(),
            dt: self.dt,
        }
    }

    fn same_grid(&self, other: &SampledSignal) -> bool {
        self.t_start == other.t_start && self.dt == other.dt && self.len() == other.len()
    }

    /// Multiply by a complex factor. Real signals only admit real factors
    /// (a phase rotation of a real waveform is not a pointwise operation).
    pub fn scaled(&self, w: Complex64) -> Result<SampledSignal> {
        let mut out = self.clone();
        match &mut out.samples {
            Samples::Analytic(v) => {
                for z in v.iter_mut() {
                    *z *= w;
                }
            }
            Samples::RealVoltage(v) => {
                let re = real_weight(w)?;
                for x in v.iter_mut() {
                    *x *= re;
                }
            }
        }
        Ok(out)
    }

    pub fn zeroed_like(&self) -> SampledSignal {
        let mut out = self.clone();
        match &mut out.samples {
            Samples::Analytic(v) => v.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0)),
            Samples::RealVoltage(v) => v.iter_mut().for_each(|x| *x = 0.0),
        }
        out
    }
}

/// Interpret a nominally real weight, tolerating the ~1e-16 imaginary dust
/// that `e^{i pi}` style constructions leave behind.
fn real_weight(w: Complex64) -> Result<f64> {
    if w.im.abs() > 1e-12 * w.norm().max(1e-300) {
        return Err(Error::Representation(
            "complex weight applied to a real_voltage signal".into(),
        ));
    }
    Ok(w.re)
}

/// `w1 * a + w2 * b` sample by sample. Grids and representations must match.
pub(crate) fn combine(
    a: &SampledSignal,
    b: &SampledSignal,
    w1: Complex64,
    w2: Complex64,
) -> Result<SampledSignal> {
    if !a.same_grid(b) {
        return Err(Error::SignalMismatch(
            "combining signals on different grids".into(),
        ));
    }
    // The bench drives every pulse at one carrier; hints that disagree
    // leave no safe detector band, so they cancel out.
    let carrier_freq = match (a.carrier_freq, b.carrier_freq) {
        (Some(x), Some(y)) if x == y => Some(x),
        (Some(_), Some(_)) => None,
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    };
    let samples = match (&a.samples, &b.samples) {
        (Samples::Analytic(xa), Samples::Analytic(xb)) => Samples::Analytic(
            xa.iter()
                .zip(xb)
                .map(|(&za, &zb)| w1 * za + w2 * zb)
                .collect(),
        ),
        (Samples::RealVoltage(xa), Samples::RealVoltage(xb)) => {
            let (r1, r2) = (real_weight(w1)?, real_weight(w2)?);
            Samples::RealVoltage(xa.iter().zip(xb).map(|(&va, &vb)| r1 * va + r2 * vb).collect())
        }
        _ => {
            return Err(Error::SignalMismatch(
                "combining signals of different representations".into(),
            ))
        }
    };
    Ok(SampledSignal {
        t_start: a.t_start,
        dt: a.dt,
        samples,
        carrier_freq,
    })
}

/// Spectral standard deviation (Hz) of a Gaussian envelope of width `sigma`.
pub fn envelope_bandwidth(sigma: f64) -> f64 {
    1.0 / (TAU * sigma)
}

/// Evaluate a pulse on a grid.
///
/// Real voltages must resolve the carrier: `dt <= 1 / (10 carrier_freq)`.
/// Analytic signals have no such floor because the carrier cancels from
/// every intensity; their grids only need to resolve the envelope.
pub fn synthesize_pulse(
    spec: &PulseSpec,
    grid: &TimeGrid,
    representation: Representation,
) -> Result<SampledSignal> {
    spec.validate()?;
    let omega = TAU * spec.carrier_freq;
    let inv_two_sigma_sq = 1.0 / (2.0 * spec.envelope_sigma * spec.envelope_sigma);
    let envelope = |t: f64| {
        let x = t - spec.delay;
        spec.amplitude * (-x * x * inv_two_sigma_sq).exp()
    };
    let samples = match representation {
        Representation::RealVoltage => {
            if grid.dt() > 1.0 / (10.0 * spec.carrier_freq) {
                return Err(Error::Undersampled(format!(
                    "dt = {:e} exceeds 1/(10 carrier) = {:e}",
                    grid.dt(),
                    1.0 / (10.0 * spec.carrier_freq)
                )));
            }
            Samples::RealVoltage(
                grid.times()
                    .map(|t| envelope(t) * (omega * t + spec.phase).sin())
                    .collect(),
            )
        }
        Representation::Analytic => Samples::Analytic(
            grid.times()
                .map(|t| {
                    let (s, c) = (omega * t + spec.phase).sin_cos();
                    envelope(t) * Complex64::new(c, s)
                })
                .collect(),
        ),
    };
    let mut signal = SampledSignal::new(grid, samples)?;
    signal.carrier_freq = Some(spec.carrier_freq);
    Ok(signal)
}

/// Relative-phase ensemble for the second pulse.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseDistribution {
    /// Equal-probability draws from a fixed set of phases.
    DiscreteUniform(Vec<f64>),
    /// Uniform over [0, 2 pi).
    ContinuousUniform,
    /// Explicit (phase, probability) table; probabilities sum to one.
    WeightedDiscrete(Vec<(f64, f64)>),
}

impl PhaseDistribution {
    /// Normalize phases into [0, 2 pi) and check the weight table.
    pub fn validated(self) -> Result<Self> {
        match self {
            PhaseDistribution::DiscreteUniform(values) => {
                if values.is_empty() {
                    return Err(Error::PhaseDistribution("empty phase set".into()));
                }
                let values = values
                    .into_iter()
                    .map(reduce_phase)
                    .collect::<Result<Vec<_>>>()?;
                Ok(PhaseDistribution::DiscreteUniform(values))
            }
            PhaseDistribution::ContinuousUniform => Ok(PhaseDistribution::ContinuousUniform),
            PhaseDistribution::WeightedDiscrete(pairs) => {
                if pairs.is_empty() {
                    return Err(Error::PhaseDistribution("empty phase table".into()));
                }
                let mut total = 0.0;
                let mut out = Vec::with_capacity(pairs.len());
                for (phase, weight) in pairs {
                    if !(weight.is_finite() && weight >= 0.0) {
                        return Err(Error::PhaseDistribution(format!(
                            "weight {weight} is not a probability"
                        )));
                    }
                    total += weight;
                    out.push((reduce_phase(phase)?, weight));
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::PhaseDistribution(format!(
                        "weights sum to {total}, expected 1 within 1e-12"
                    )));
                }
                Ok(PhaseDistribution::WeightedDiscrete(out))
            }
        }
    }

    /// Draw one phase.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            PhaseDistribution::DiscreteUniform(values) => {
                values[rng.random_range(0..values.len())]
            }
            PhaseDistribution::ContinuousUniform => rng.random::<f64>() * TAU,
            PhaseDistribution::WeightedDiscrete(pairs) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (phase, weight) in pairs {
                    acc += weight;
                    if u < acc {
                        return *phase;
                    }
                }
                pairs.last().expect("validated table is non-empty").0
            }
        }
    }

    /// E[cos phi]; zero means no single-shot (second-order) interference
    /// survives ensemble averaging.
    pub fn mean_cos(&self) -> f64 {
        match self {
            PhaseDistribution::DiscreteUniform(values) => {
                let cs: Vec<f64> = values.iter().map(|p| p.cos()).collect();
                crate::math::mean(&cs)
            }
            PhaseDistribution::ContinuousUniform => 0.0,
            PhaseDistribution::WeightedDiscrete(pairs) => {
                let terms: Vec<f64> = pairs.iter().map(|(p, w)| w * p.cos()).collect();
                crate::math::pairwise_sum(&terms)
            }
        }
    }

    /// E[cos^2 phi]; the ensemble's coincidence-dip visibility.
    pub fn mean_cos_sq(&self) -> f64 {
        match self {
            PhaseDistribution::DiscreteUniform(values) => {
                let cs: Vec<f64> = values.iter().map(|p| p.cos() * p.cos()).collect();
                crate::math::mean(&cs)
            }
            PhaseDistribution::ContinuousUniform => 0.5,
            PhaseDistribution::WeightedDiscrete(pairs) => {
                let terms: Vec<f64> = pairs.iter().map(|(p, w)| w * p.cos() * p.cos()).collect();
                crate::math::pairwise_sum(&terms)
            }
        }
    }

    /// Quadrature nodes for exact ensemble averages: the support itself for
    /// discrete distributions, a uniform midpoint grid for the continuous
    /// one (exact for trigonometric polynomials once `continuous_points`
    /// exceeds their degree).
    pub fn nodes(&self, continuous_points: usize) -> Vec<(f64, f64)> {
        match self {
            PhaseDistribution::DiscreteUniform(values) => {
                let w = 1.0 / values.len() as f64;
                values.iter().map(|&p| (p, w)).collect()
            }
            PhaseDistribution::ContinuousUniform => {
                let n = continuous_points.max(8);
                let w = 1.0 / n as f64;
                (0..n)
                    .map(|k| ((k as f64 + 0.5) * TAU / n as f64, w))
                    .collect()
            }
            PhaseDistribution::WeightedDiscrete(pairs) => pairs.clone(),
        }
    }
}

fn reduce_phase(phase: f64) -> Result<f64> {
    if !phase.is_finite() {
        return Err(Error::PhaseDistribution("phase must be finite".into()));
    }
    Ok(phase.rem_euclid(TAU))
}

/// Draw a relative phase for one ensemble member.
pub fn sample_phase(dist: &PhaseDistribution, rng: &mut impl Rng) -> f64 {
    dist.sample(rng)
}

/// Multiply a real voltage by a local oscillator `lo_amp sin(2 pi f_lo t)`.
/// The grid must resolve the oscillator: `dt <= 1 / (10 lo_freq)`.
pub fn mix(signal: &SampledSignal, lo_freq: f64, lo_amp: f64) -> Result<SampledSignal> {
    if !(lo_freq.is_finite() && lo_freq > 0.0) {
        return Err(Error::domain("LO frequency must be positive"));
    }
    if !lo_amp.is_finite() {
        return Err(Error::domain("LO amplitude must be finite"));
    }
    let values = signal.real_samples().ok_or_else(|| {
        Error::Representation("mixing is defined for real_voltage signals only".into())
    })?;
    if signal.dt() > 1.0 / (10.0 * lo_freq) {
        return Err(Error::Undersampled(format!(
            "dt = {:e} exceeds 1/(10 lo_freq) = {:e}",
            signal.dt(),
            1.0 / (10.0 * lo_freq)
        )));
    }
    let omega = TAU * lo_freq;
    let mixed: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(k, &x)| x * lo_amp * (omega * signal.time_at(k)).sin())
        .collect();
    let mut out = signal.clone();
    out.samples = Samples::RealVoltage(mixed);
    Ok(out)
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Ideal brick-wall low-pass: discrete frequency components with
/// `|f| > cutoff` are removed, everything else passes untouched.
pub fn low_pass(signal: &SampledSignal, cutoff: f64) -> Result<SampledSignal> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::domain("low-pass cutoff must be positive"));
    }
    let n = signal.len();
    let mut buf: Vec<Complex64> = match &signal.samples {
        Samples::Analytic(v) => v.clone(),
        Samples::RealVoltage(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    };
    let (fwd, inv) = {
        let mut planner = planner().lock().expect("fft planner lock");
        (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
    };
    fwd.process(&mut buf);
    let df = 1.0 / (n as f64 * signal.dt());
    for (k, z) in buf.iter_mut().enumerate() {
        let f = if k <= n / 2 {
            k as f64 * df
        } else {
            (k as f64 - n as f64) * df
        };
        if f.abs() > cutoff {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut out = signal.clone();
    out.samples = match signal.representation() {
        Representation::Analytic => Samples::Analytic(buf.into_iter().map(|z| z * scale).collect()),
        Representation::RealVoltage => {
            Samples::RealVoltage(buf.into_iter().map(|z| z.re * scale).collect())
        }
    };
    Ok(out)
}
