//! End-to-end experiment runners: everything between a parsed config and
//! the files on disk.
//!
//! Each runner is deterministic given (config, master seed): delays get
//! their own counter-addressed random substreams, so results do not
//! depend on thread count or scheduling, and reruns are byte-identical.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    BootstrapJobConfig, ClassicalDipConfig, ComplementarityClassicalConfig,
    ComplementarityQuantumConfig, FitJobConfig, FitModelKind, GridConfig, Job, JsaConfig,
    MinNConfig, MziScanConfig, PulseConfig, QuantumDipConfig, RfConfig, SamplesSpec,
};
use crate::correlator::{
    amplitude_mismatch_factor, analytic_visibility, dip_visibility, integrated_intensity,
    DipCurve, DipPoint, EnsembleRecord,
};
use crate::error::{Error, Result};
use crate::fit::{fit_classical, fit_quantum, FitOptions, FitResult, QuantumFitSetup};
use crate::fock::{
    derived_visibility, quantum_coincidence_at, JsaSpec, Mode, QuantumDipParams, TwoModeState,
};
use crate::io::{
    read_dip_curve, read_filter_table, read_fit_data, read_values, write_dip_curve, write_json,
    write_mzi_scan,
};
use crate::math::mean;
use crate::rng::{SeedSpace, StreamDomain};
use crate::signals::{
    synthesize_pulse, low_pass, mix, PulseSpec, Representation, SampledSignal, TimeGrid,
};
use crate::splitter::{mzi_recombine, MziBlock, Splitter};
use crate::stats::{
    bootstrap_ci, bootstrap_statistic_ci, min_samples, BootstrapSpec, SampleSummary,
    DEFAULT_REL_HALFWIDTH, DEFAULT_Z,
};

/// Pilot ensemble size used to estimate the spread before an "auto"
/// sample count is resolved, and the floor the resolved count never
/// drops below.
pub const PILOT_SAMPLES: usize = 200;

/// Midpoint-rule nodes standing in for the continuous phase ensemble in
/// enumerated runs. The averaged integrands are trigonometric polynomials
/// of degree two, for which this many nodes is exact.
const CONTINUOUS_NODES: usize = 64;

// ---------------------------------------------------------------------
// shared classical plumbing

fn pulse_pair_specs(pulse: &PulseConfig, delay: f64, phase: f64) -> (PulseSpec, PulseSpec) {
    let first = PulseSpec {
        amplitude: pulse.amplitude_v,
        envelope_sigma: pulse.envelope_sigma_s,
        carrier_freq: pulse.carrier_freq_hz,
        delay: 0.0,
        phase: 0.0,
    };
    let second = PulseSpec {
        amplitude: pulse.amplitude_v * pulse.amplitude_ratio,
        delay,
        phase,
        ..first
    };
    (first, second)
}

/// Sampling grid covering both pulse centers with the configured margin.
/// The mixer chain needs its top image band (twice the oscillator plus
/// the carrier) resolved; the analytic path only needs the envelope.
fn classical_grid(
    pulse: &PulseConfig,
    grid: &GridConfig,
    delay: f64,
    rf: Option<&RfConfig>,
) -> Result<TimeGrid> {
    let sigma = pulse.envelope_sigma_s;
    let pad = grid.pad_sigmas * sigma;
    let t_lo = delay.min(0.0) - pad;
    let t_hi = delay.max(0.0) + pad;
    let mut max_dt = sigma / grid.steps_per_sigma;
    if let Some(rf) = rf {
        let top = 2.0 * rf.lo_freq_hz + pulse.carrier_freq_hz;
        max_dt = max_dt.min(1.0 / (10.0 * top));
    }
    TimeGrid::with_sample_budget(t_lo, t_hi, max_dt)
}

fn full_window_intensity(signal: &SampledSignal) -> Result<f64> {
    let window = signal.grid();
    integrated_intensity(signal, &window)
}

/// One ensemble member: synthesize the pulse pair at the given relative
/// phase, route it to the splitter (through the mixer chain when
/// requested), and integrate both output intensities.
fn dip_shot(
    pulse: &PulseConfig,
    splitter: &Splitter,
    grid: &TimeGrid,
    delay: f64,
    phase: f64,
    rf: Option<&RfConfig>,
) -> Result<(f64, f64)> {
    let (s1, s2) = pulse_pair_specs(pulse, delay, phase);
    match rf {
        None => {
            let e1 = synthesize_pulse(&s1, grid, Representation::Analytic)?;
            let e2 = synthesize_pulse(&s2, grid, Representation::Analytic)?;
            let (p, m) = splitter.split(&e1, &e2)?;
            Ok((full_window_intensity(&p)?, full_window_intensity(&m)?))
        }
        Some(rf) => {
            // Up-convert, combine in the oscillator band, down-convert,
            // then low-pass before detection: the second mixer parks
            // image bands at 2 lo +/- carrier, and squaring them would
            // fold power back to baseband, so they must die first. The
            // cutoff only has to separate the recovered carrier band
            // from those images.
            let v1 = synthesize_pulse(&s1, grid, Representation::RealVoltage)?;
            let v2 = synthesize_pulse(&s2, grid, Representation::RealVoltage)?;
            let u1 = mix(&v1, rf.lo_freq_hz, rf.lo_amp_v)?;
            let u2 = mix(&v2, rf.lo_freq_hz, rf.lo_amp_v)?;
            let (p, m) = splitter.split(&u1, &u2)?;
            let pd = low_pass(&mix(&p, rf.lo_freq_hz, rf.lo_amp_v)?, rf.cutoff_hz)?;
            let md = low_pass(&mix(&m, rf.lo_freq_hz, rf.lo_amp_v)?, rf.cutoff_hz)?;
            Ok((full_window_intensity(&pd)?, full_window_intensity(&md)?))
        }
    }
}

/// Draw an `n`-shot ensemble for one delay from the given stream domain.
fn classical_ensemble(
    cfg: &ClassicalDipConfig,
    rf_active: bool,
    index: usize,
    n: usize,
    domain: StreamDomain,
    seeds: &SeedSpace,
) -> Result<EnsembleRecord> {
    let delay = cfg.delays.delays_s[index];
    let rf = if rf_active { Some(&cfg.rf) } else { None };
    let grid = classical_grid(&cfg.pulse, &cfg.grid, delay, rf)?;
    let splitter = Splitter::new(cfg.splitter.transmission, cfg.splitter.phase_error_rad)?;
    let mut rng = seeds.stream(domain, index as u64, 0);
    let mut u_plus = Vec::with_capacity(n);
    let mut u_minus = Vec::with_capacity(n);
    for _ in 0..n {
        let mut phase = cfg.phase.dist.sample(&mut rng);
        if cfg.phase.jitter_sigma_rad > 0.0 {
            phase += cfg.phase.jitter_sigma_rad * rng.sample::<f64, _>(StandardNormal);
        }
        let (up, um) = dip_shot(&cfg.pulse, &splitter, &grid, delay, phase, rf)?;
        u_plus.push(up);
        u_minus.push(um);
    }
    EnsembleRecord::sampled(delay, u_plus, u_minus)
}

/// Sample budget one stream demands for a 5 percent relative CI
/// half-width; None when the stream is degenerate (a dark port or a
/// constant product puts no constraint on the budget).
fn stream_requirement(values: &[f64]) -> Option<usize> {
    let s = SampleSummary::from_data(values).ok()?;
    if !(s.mean > 0.0) || !(s.std_dev > 0.0) {
        return None;
    }
    min_samples(&s, DEFAULT_REL_HALFWIDTH, DEFAULT_Z).ok()
}

fn auto_from_pilot(pilot: &EnsembleRecord) -> usize {
    let streams = [
        pilot.products(),
        pilot.u_plus().to_vec(),
        pilot.u_minus().to_vec(),
    ];
    streams
        .iter()
        .filter_map(|s| stream_requirement(s))
        .max()
        .unwrap_or(PILOT_SAMPLES)
        .max(PILOT_SAMPLES)
}

/// The per-delay sample count an "auto" config resolves to: the largest
/// demand among the product and port streams of a pilot ensemble, never
/// below the pilot size itself.
pub fn classical_auto_samples(
    cfg: &ClassicalDipConfig,
    rf_active: bool,
    index: usize,
    seeds: &SeedSpace,
) -> Result<usize> {
    match cfg.samples {
        SamplesSpec::Fixed(n) => Ok(n),
        SamplesSpec::Auto => {
            let pilot = classical_ensemble(
                cfg,
                rf_active,
                index,
                PILOT_SAMPLES,
                StreamDomain::Pilot,
                seeds,
            )?;
            Ok(auto_from_pilot(&pilot))
        }
    }
}

// ---------------------------------------------------------------------
// classical dip

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalDipSummary {
    pub kind: String,
    pub seed: u64,
    pub rf_chain: bool,
    pub samples_per_delay: Vec<usize>,
    /// Correlation at the delay nearest zero.
    pub c_zero: f64,
    /// Correlation baseline: mean of the two extreme-delay points.
    pub c_far: f64,
    pub visibility: f64,
    /// Closed-form target for the ideal bench (balanced splitter, no
    /// jitter); None when the config leaves that regime.
    pub analytic_visibility: Option<f64>,
}

fn ideal_reference(cfg: &ClassicalDipConfig) -> Option<f64> {
    if cfg.phase.jitter_sigma_rad != 0.0 {
        return None;
    }
    if cfg.splitter.transmission != 0.5 || cfg.splitter.phase_error_rad != 0.0 {
        return None;
    }
    let v = analytic_visibility(&cfg.phase.dist).ok()?;
    let m = amplitude_mismatch_factor(cfg.pulse.amplitude_ratio).ok()?;
    Some(v * m)
}

pub fn run_classical_dip(
    cfg: &ClassicalDipConfig,
    seeds: &SeedSpace,
    rf_chain: bool,
) -> Result<(DipCurve, ClassicalDipSummary)> {
    let rf_active = rf_chain || cfg.rf.enabled;
    let spec = BootstrapSpec {
        n_resamples: cfg.bootstrap.n_resamples,
        level: cfg.bootstrap.level,
    };
    let per_delay: Vec<(DipPoint, usize)> = (0..cfg.delays.delays_s.len())
        .into_par_iter()
        .map(|i| -> Result<(DipPoint, usize)> {
            let n = classical_auto_samples(cfg, rf_active, i, seeds)?;
            let rec = classical_ensemble(cfg, rf_active, i, n, StreamDomain::Ensemble, seeds)?;
            let c = rec.cross_correlation()?;
            let products = rec.products();
            let u_plus = rec.u_plus();
            let u_minus = rec.u_minus();
            let stat = |idx: &[usize]| {
                let mut sp = 0.0;
                let mut su = 0.0;
                let mut sm = 0.0;
                for &k in idx {
                    sp += products[k];
                    su += u_plus[k];
                    sm += u_minus[k];
                }
                let len = idx.len() as f64;
                let denom = (su / len) * (sm / len);
                // an all-dark resample cannot form the ratio; report the
                // full-sample value so its delta is zero
                if denom > 0.0 {
                    (sp / len) / denom
                } else {
                    c
                }
            };
            let ci = bootstrap_statistic_ci(rec.sample_count(), c, stat, &spec, seeds, i as u64)?;
            // percentile deltas almost always straddle zero; clamp the
            // rare off-center interval so the curve invariant holds
            let point = DipPoint {
                tau_s: rec.delay(),
                c_mean: c,
                ci_lo: ci.lo.min(c),
                ci_hi: ci.hi.max(c),
            };
            Ok((point, n))
        })
        .collect::<Result<Vec<_>>>()?;

    let points: Vec<DipPoint> = per_delay.iter().map(|(p, _)| *p).collect();
    let samples_per_delay: Vec<usize> = per_delay.iter().map(|(_, n)| *n).collect();
    let curve = DipCurve::new(points)?;
    let pts = curve.points();
    let zero = pts
        .iter()
        .min_by(|a, b| a.tau_s.abs().total_cmp(&b.tau_s.abs()))
        .expect("curve is nonempty");
    let c_far = (pts[0].c_mean + pts[pts.len() - 1].c_mean) / 2.0;
    let visibility = dip_visibility(zero.c_mean, c_far)?;
    let summary = ClassicalDipSummary {
        kind: "classical-dip".to_string(),
        seed: seeds.master(),
        rf_chain: rf_active,
        samples_per_delay,
        c_zero: zero.c_mean,
        c_far,
        visibility,
        analytic_visibility: ideal_reference(cfg),
    };
    Ok((curve, summary))
}

// ---------------------------------------------------------------------
// quantum dip

#[derive(Debug, Clone, Serialize)]
pub struct QuantumDipSummary {
    pub kind: String,
    pub seed: u64,
    pub transmission: f64,
    pub eta: f64,
    pub zeta: f64,
    pub scale: f64,
    pub sigma_omega_rad_s: f64,
    pub poisson_noise: bool,
    pub repetitions: usize,
    /// Visibility implied by the model parameters alone.
    pub visibility_model: f64,
    /// Visibility read off the emitted curve (noisy when counts are);
    /// None when the baseline cannot be formed.
    pub visibility_curve: Option<f64>,
}

fn load_jsa(cfg: &JsaConfig) -> Result<JsaSpec> {
    let filter = match &cfg.filter_csv {
        Some(path) => Some(read_filter_table(path)?),
        None => None,
    };
    Ok(JsaSpec {
        sigma_omega: cfg.sigma_omega_rad_s,
        filter,
        renormalize: cfg.renormalize,
    })
}

pub fn run_quantum_dip(
    cfg: &QuantumDipConfig,
    seeds: &SeedSpace,
) -> Result<(DipCurve, QuantumDipSummary)> {
    let params = QuantumDipParams {
        transmission: cfg.quantum.transmission,
        eta: cfg.quantum.eta,
        zeta: cfg.quantum.zeta,
        scale: cfg.quantum.scale,
    };
    params.validate()?;
    let jsa = load_jsa(&cfg.jsa)?;
    let spec = BootstrapSpec {
        n_resamples: cfg.bootstrap.n_resamples,
        level: cfg.bootstrap.level,
    };
    let points: Vec<DipPoint> = (0..cfg.delays.delays_s.len())
        .into_par_iter()
        .map(|i| -> Result<DipPoint> {
            let tau = cfg.delays.delays_s[i];
            let model = quantum_coincidence_at(&params, &jsa, tau)?;
            if !cfg.quantum.poisson_noise {
                return Ok(DipPoint {
                    tau_s: tau,
                    c_mean: model,
                    ci_lo: model,
                    ci_hi: model,
                });
            }
            let mut rng = seeds.stream(StreamDomain::Noise, i as u64, 0);
            let counts: Vec<f64> = if model > 0.0 {
                let draw = Poisson::new(model)
                    .map_err(|e| Error::Stats(format!("count noise: {e}")))?;
                (0..cfg.quantum.repetitions)
                    .map(|_| rng.sample(draw))
                    .collect()
            } else {
                vec![0.0; cfg.quantum.repetitions]
            };
            let c = mean(&counts);
            let (lo, hi) = if counts.len() < 2 {
                (c, c)
            } else {
                let ci = bootstrap_ci(&counts, &spec, seeds, i as u64)?;
                (ci.lo.min(c), ci.hi.max(c))
            };
            Ok(DipPoint {
                tau_s: tau,
                c_mean: c,
                ci_lo: lo,
                ci_hi: hi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = DipCurve::new(points)?;
    let pts = curve.points();
    let zero = pts
        .iter()
        .min_by(|a, b| a.tau_s.abs().total_cmp(&b.tau_s.abs()))
        .expect("curve is nonempty");
    let c_far = (pts[0].c_mean + pts[pts.len() - 1].c_mean) / 2.0;
    let summary = QuantumDipSummary {
        kind: "quantum-dip".to_string(),
        seed: seeds.master(),
        transmission: cfg.quantum.transmission,
        eta: cfg.quantum.eta,
        zeta: cfg.quantum.zeta,
        scale: cfg.quantum.scale,
        sigma_omega_rad_s: cfg.jsa.sigma_omega_rad_s,
        poisson_noise: cfg.quantum.poisson_noise,
        repetitions: cfg.quantum.repetitions,
        visibility_model: derived_visibility(
            cfg.quantum.transmission,
            cfg.quantum.eta,
            cfg.quantum.zeta,
        )?,
        visibility_curve: dip_visibility(zero.c_mean, c_far).ok(),
    };
    Ok((curve, summary))
}

// ---------------------------------------------------------------------
// complementarity

#[derive(Debug, Clone, Serialize)]
pub struct ComplementarityReport {
    pub kind: String,
    pub seed: u64,
    /// Mean intensity product with both interferometer arms open.
    pub case_a: f64,
    /// Mean intensity product with the difference arm blocked.
    pub case_b: f64,
    pub ratio: f64,
}

/// Blocked-over-open ratio of the mean intensity product for classical
/// pulse pairs at zero delay. The phase ensemble is enumerated, not
/// sampled, so the ideal configuration lands on the closed-form ratio
/// exactly.
pub fn run_complementarity_classical(
    cfg: &ComplementarityClassicalConfig,
    seed: u64,
) -> Result<ComplementarityReport> {
    if cfg.phase.jitter_sigma_rad != 0.0 {
        return Err(Error::config(
            "phase.jitter_sigma_rad",
            "the interferometer comparison enumerates phases exactly and cannot jitter them",
        ));
    }
    let splitter = Splitter::new(cfg.splitter.transmission, cfg.splitter.phase_error_rad)?;
    let grid = classical_grid(&cfg.pulse, &cfg.grid, 0.0, None)?;
    let nodes = cfg.phase.dist.nodes(CONTINUOUS_NODES);
    let shots = nodes.len();
    let mut open_plus = Vec::with_capacity(shots);
    let mut open_minus = Vec::with_capacity(shots);
    let mut blocked_plus = Vec::with_capacity(shots);
    let mut blocked_minus = Vec::with_capacity(shots);
    let mut weights = Vec::with_capacity(shots);
    for (phase, w) in nodes {
        let (s1, s2) = pulse_pair_specs(&cfg.pulse, 0.0, phase);
        let e1 = synthesize_pulse(&s1, &grid, Representation::Analytic)?;
        let e2 = synthesize_pulse(&s2, &grid, Representation::Analytic)?;
        let (p, m) = splitter.split(&e1, &e2)?;
        let (a1, a2) = mzi_recombine(&p, &m, cfg.mzi.theta_rad, MziBlock::None)?;
        let (b1, b2) = mzi_recombine(&p, &m, cfg.mzi.theta_rad, MziBlock::Minus)?;
        open_plus.push(full_window_intensity(&a1)?);
        open_minus.push(full_window_intensity(&a2)?);
        blocked_plus.push(full_window_intensity(&b1)?);
        blocked_minus.push(full_window_intensity(&b2)?);
        weights.push(w);
    }
    let case_a =
        EnsembleRecord::enumerated(0.0, open_plus, open_minus, weights.clone())?.mean_product();
    let case_b =
        EnsembleRecord::enumerated(0.0, blocked_plus, blocked_minus, weights)?.mean_product();
    if !(case_a > 0.0) {
        return Err(Error::domain(
            "open-interferometer correlation vanished; the ratio is undefined",
        ));
    }
    Ok(ComplementarityReport {
        kind: "complementarity-classical".to_string(),
        seed,
        case_a,
        case_b,
        ratio: case_b / case_a,
    })
}

/// Blocked-over-open coincidence ratio for the two-photon state. The
/// blocked branch keeps unnormalized amplitudes, so its coincidence is
/// the absolute probability including the absorbed population.
pub fn run_complementarity_quantum(
    cfg: &ComplementarityQuantumConfig,
    seed: u64,
) -> Result<ComplementarityReport> {
    let t = cfg.transmission;
    let input = TwoModeState::fock(1, 1);
    let case_a = input
        .beam_splitter(t)?
        .beam_splitter(t)?
        .coincidence_probability();
    let case_b = input
        .beam_splitter(t)?
        .block_arm(Mode::B)
        .beam_splitter(t)?
        .coincidence_probability();
    if !(case_a > 0.0) {
        return Err(Error::domain(
            "open-interferometer coincidence vanished; the ratio is undefined",
        ));
    }
    Ok(ComplementarityReport {
        kind: "complementarity-quantum".to_string(),
        seed,
        case_a,
        case_b,
        ratio: case_b / case_a,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplementarityPairReport {
    pub kind: String,
    pub seed: u64,
    pub classical: ComplementarityReport,
    pub quantum: ComplementarityReport,
}

/// Run both complementarity flavors with their default configurations
/// and write one combined report.
pub fn execute_complementarity_pair(seed: u64, out: &Path) -> Result<ExecutionSummary> {
    std::fs::create_dir_all(out)?;
    let classical =
        run_complementarity_classical(&ComplementarityClassicalConfig::default(), seed)?;
    let quantum = run_complementarity_quantum(&ComplementarityQuantumConfig::default(), seed)?;
    let report = ComplementarityPairReport {
        kind: "complementarity".to_string(),
        seed,
        classical,
        quantum,
    };
    let path = out.join("complementarity.json");
    write_json(&path, &report)?;
    Ok(ExecutionSummary {
        headline: format!(
            "blocked/open ratios: classical {:.6}, quantum {:.6}",
            report.classical.ratio, report.quantum.ratio
        ),
        files: vec![path],
    })
}

// ---------------------------------------------------------------------
// interferometer scan

#[derive(Debug, Clone, Serialize)]
pub struct MziScanSummary {
    pub kind: String,
    pub seed: u64,
    pub points: usize,
}

/// Coincidence after the second splitter versus the accumulated phase of
/// the two-photon amplitude. Inside the interferometer the pair occupies
/// a two-photon superposition, so each photon's arm phase is theta / 2
/// and the pair picks up theta in total.
pub fn run_mzi_scan(cfg: &MziScanConfig) -> Result<Vec<(f64, f64)>> {
    let n = cfg.points;
    (0..n)
        .map(|k| {
            let frac = k as f64 / (n - 1) as f64;
            let theta = cfg.start_rad + (cfg.stop_rad - cfg.start_rad) * frac;
            let p = TwoModeState::fock(1, 1)
                .beam_splitter(0.5)?
                .phase_shift(Mode::B, theta / 2.0)
                .beam_splitter(0.5)?
                .coincidence_probability();
            Ok((theta, p))
        })
        .collect()
}

// ---------------------------------------------------------------------
// statistics utilities

#[derive(Debug, Clone, Serialize)]
pub struct MinNReport {
    pub kind: String,
    pub seed: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub rel_halfwidth: f64,
    pub z: f64,
    pub min_samples: usize,
}

pub fn run_min_n(cfg: &MinNConfig, seed: u64) -> Result<MinNReport> {
    let summary = SampleSummary::new(cfg.mean, cfg.std_dev, cfg.count.max(2))?;
    let n = min_samples(&summary, cfg.rel_halfwidth, cfg.z)?;
    Ok(MinNReport {
        kind: "min-n".to_string(),
        seed,
        mean: cfg.mean,
        std_dev: cfg.std_dev,
        rel_halfwidth: cfg.rel_halfwidth,
        z: cfg.z,
        min_samples: n,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapReport {
    pub kind: String,
    pub seed: u64,
    pub count: usize,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub level: f64,
    pub n_resamples: usize,
}

pub fn run_bootstrap(cfg: &BootstrapJobConfig, seeds: &SeedSpace) -> Result<BootstrapReport> {
    let values = read_values(&cfg.data_csv)?;
    let spec = BootstrapSpec {
        n_resamples: cfg.bootstrap.n_resamples,
        level: cfg.bootstrap.level,
    };
    let ci = bootstrap_ci(&values, &spec, seeds, 0)?;
    Ok(BootstrapReport {
        kind: "bootstrap".to_string(),
        seed: seeds.master(),
        count: values.len(),
        mean: mean(&values),
        ci_lo: ci.lo,
        ci_hi: ci.hi,
        level: spec.level,
        n_resamples: spec.n_resamples,
    })
}

// ---------------------------------------------------------------------
// fitting

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub kind: String,
    pub seed: u64,
    pub model: String,
    pub data_csv: String,
    /// Dip visibility implied by the fitted parameters.
    pub visibility: Option<f64>,
    pub result: FitResult,
}

pub fn run_fit(cfg: &FitJobConfig, seed: u64) -> Result<FitReport> {
    let options = FitOptions {
        max_iterations: cfg.max_iterations,
        rel_tol: cfg.rel_tol,
    };
    let (model, result, visibility) = match cfg.model {
        FitModelKind::Quantum => {
            let data = read_fit_data(&cfg.data_csv)?;
            let filter = match &cfg.jsa.filter_csv {
                Some(path) => Some(read_filter_table(path)?),
                None => None,
            };
            let setup = QuantumFitSetup {
                transmission: cfg.quantum.transmission,
                sigma_omega: cfg.jsa.sigma_omega_rad_s,
                zeta: cfg.quantum.zeta,
                eta: cfg.quantum.eta,
                filter,
                renormalize: cfg.jsa.renormalize,
            };
            let free: Vec<&str> = cfg.free.iter().map(String::as_str).collect();
            let result = fit_quantum(&data, &setup, &free, &options)?;
            let eta = result.value("eta").unwrap_or(cfg.quantum.eta);
            let zeta = result.value("zeta").unwrap_or(cfg.quantum.zeta);
            let vis = derived_visibility(cfg.quantum.transmission, eta, zeta).ok();
            ("quantum", result, vis)
        }
        FitModelKind::Classical => {
            if cfg.phase.jitter_sigma_rad != 0.0 {
                return Err(Error::config(
                    "phase.jitter_sigma_rad",
                    "the dip model assumes jitter-free phase ensembles",
                ));
            }
            let curve = read_dip_curve(&cfg.data_csv)?;
            let result = fit_classical(&curve, &cfg.phase.dist, cfg.envelope_sigma_s, &options)?;
            let vis = result.value("visibility");
            ("classical", result, vis)
        }
    };
    Ok(FitReport {
        kind: "fit".to_string(),
        seed,
        model: model.to_string(),
        data_csv: cfg.data_csv.display().to_string(),
        visibility,
        result,
    })
}

// ---------------------------------------------------------------------
// dispatcher

/// What a finished run produced, for the caller to report.
#[derive(Debug, Clone)]
pub struct ExecutionSummary {
    pub headline: String,
    pub files: Vec<PathBuf>,
}

/// Run one job and write its output files under `out`.
pub fn execute(job: &Job, seed: u64, rf_chain: bool, out: &Path) -> Result<ExecutionSummary> {
    if rf_chain && !matches!(job, Job::ClassicalDip(_)) {
        return Err(Error::config(
            "kind",
            "only the classical dip has a mixer chain to enable",
        ));
    }
    std::fs::create_dir_all(out)?;
    let seeds = SeedSpace::new(seed);
    match job {
        Job::ClassicalDip(cfg) => {
            let (curve, summary) = run_classical_dip(cfg, &seeds, rf_chain)?;
            let curve_path = out.join("dip_curve.csv");
            let summary_path = out.join("summary.json");
            write_dip_curve(&curve_path, &curve)?;
            write_json(&summary_path, &summary)?;
            Ok(ExecutionSummary {
                headline: format!(
                    "classical dip over {} delays: visibility {:.6}",
                    curve.points().len(),
                    summary.visibility
                ),
                files: vec![curve_path, summary_path],
            })
        }
        Job::QuantumDip(cfg) => {
            let (curve, summary) = run_quantum_dip(cfg, &seeds)?;
            let curve_path = out.join("dip_curve.csv");
            let summary_path = out.join("summary.json");
            write_dip_curve(&curve_path, &curve)?;
            write_json(&summary_path, &summary)?;
            Ok(ExecutionSummary {
                headline: format!(
                    "quantum dip over {} delays: model visibility {:.6}",
                    curve.points().len(),
                    summary.visibility_model
                ),
                files: vec![curve_path, summary_path],
            })
        }
        Job::ComplementarityClassical(cfg) => {
            let report = run_complementarity_classical(cfg, seed)?;
            let path = out.join("complementarity.json");
            write_json(&path, &report)?;
            Ok(ExecutionSummary {
                headline: format!("classical blocked/open ratio {:.6}", report.ratio),
                files: vec![path],
            })
        }
        Job::ComplementarityQuantum(cfg) => {
            let report = run_complementarity_quantum(cfg, seed)?;
            let path = out.join("complementarity.json");
            write_json(&path, &report)?;
            Ok(ExecutionSummary {
                headline: format!("quantum blocked/open ratio {:.6}", report.ratio),
                files: vec![path],
            })
        }
        Job::MziScan(cfg) => {
            let points = run_mzi_scan(cfg)?;
            let scan_path = out.join("mzi_scan.csv");
            let summary_path = out.join("summary.json");
            write_mzi_scan(&scan_path, &points)?;
            write_json(
                &summary_path,
                &MziScanSummary {
                    kind: "mzi-scan".to_string(),
                    seed,
                    points: points.len(),
                },
            )?;
            Ok(ExecutionSummary {
                headline: format!("interferometer scan over {} phases", points.len()),
                files: vec![scan_path, summary_path],
            })
        }
        Job::Fit(cfg) => {
            let report = run_fit(cfg, seed)?;
            let path = out.join("fit_report.json");
            write_json(&path, &report)?;
            Ok(ExecutionSummary {
                headline: format!(
                    "{} fit: converged {} in {} iterations, R^2 {:.6}",
                    report.model, report.result.converged, report.result.iterations,
                    report.result.r_squared
                ),
                files: vec![path],
            })
        }
        Job::MinN(cfg) => {
            let report = run_min_n(cfg, seed)?;
            let path = out.join("min_n.json");
            write_json(&path, &report)?;
            Ok(ExecutionSummary {
                headline: format!("minimum sample count {}", report.min_samples),
                files: vec![path],
            })
        }
        Job::Bootstrap(cfg) => {
            let report = run_bootstrap(cfg, &seeds)?;
            let path = out.join("bootstrap.json");
            write_json(&path, &report)?;
            Ok(ExecutionSummary {
                headline: format!(
                    "mean {:.6} with {:.0}% CI [{:.6}, {:.6}]",
                    report.mean,
                    report.level * 100.0,
                    report.ci_lo,
                    report.ci_hi
                ),
                files: vec![path],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{BootstrapConfig, DelayConfig, PhaseConfig};
    use crate::io::dip_curve_to_csv;
    use crate::signals::PhaseDistribution;
    use std::f64::consts::PI;

    fn small_classical() -> ClassicalDipConfig {
        ClassicalDipConfig {
            delays: DelayConfig {
                delays_s: vec![-4e-3, 0.0, 4e-3],
            },
            samples: SamplesSpec::Fixed(64),
            bootstrap: BootstrapConfig {
                n_resamples: 200,
                level: 0.95,
            },
            ..ClassicalDipConfig::default()
        }
    }

    fn four_phase() -> PhaseConfig {
        PhaseConfig {
            dist: PhaseDistribution::DiscreteUniform(vec![
                0.0,
                PI / 2.0,
                PI,
                3.0 * PI / 2.0,
            ]),
            jitter_sigma_rad: 0.0,
        }
    }

    #[test]
    fn interferometer_scan_matches_the_two_photon_fringe() {
        let cfg = MziScanConfig {
            start_rad: 0.0,
            stop_rad: std::f64::consts::TAU,
            points: 9,
        };
        let points = run_mzi_scan(&cfg).unwrap();
        assert_eq!(points.len(), 9);
        for (theta, p) in points {
            let expected = (theta / 2.0).cos().powi(2);
            assert!((p - expected).abs() < 1e-12, "theta {theta}: {p}");
        }
    }

    #[test]
    fn complementarity_ratios_separate_the_two_sources() {
        let classical =
            run_complementarity_classical(&ComplementarityClassicalConfig::default(), 7).unwrap();
        assert!(
            (classical.ratio - 0.5).abs() < 1e-9,
            "classical ratio {}",
            classical.ratio
        );
        let quantum =
            run_complementarity_quantum(&ComplementarityQuantumConfig::default(), 7).unwrap();
        assert!((quantum.case_a - 1.0).abs() < 1e-12, "open {}", quantum.case_a);
        assert!(
            (quantum.ratio - 0.25).abs() < 1e-12,
            "quantum ratio {}",
            quantum.ratio
        );
    }

    #[test]
    fn complementarity_rejects_phase_jitter() {
        let mut cfg = ComplementarityClassicalConfig::default();
        cfg.phase.jitter_sigma_rad = 0.1;
        assert!(run_complementarity_classical(&cfg, 1).is_err());
    }

    #[test]
    fn quantum_dip_defaults_reach_full_visibility() {
        let seeds = SeedSpace::new(3);
        let (curve, summary) = run_quantum_dip(&QuantumDipConfig::default(), &seeds).unwrap();
        assert!((summary.visibility_model - 1.0).abs() < 1e-12);
        let pts = curve.points();
        let center = pts.iter().min_by(|a, b| a.tau_s.abs().total_cmp(&b.tau_s.abs())).unwrap();
        assert!(center.c_mean.abs() < 1e-9, "dip floor {}", center.c_mean);
        assert!((pts[0].c_mean - 0.5).abs() < 1e-9, "baseline {}", pts[0].c_mean);
        let vis = summary.visibility_curve.unwrap();
        assert!((vis - 1.0).abs() < 1e-9);
    }

    #[test]
    fn poisson_counts_scatter_around_the_model_curve() {
        let mut cfg = QuantumDipConfig::default();
        cfg.quantum.scale = 2300.0;
        cfg.quantum.zeta = 0.038;
        cfg.quantum.eta = 0.9995;
        cfg.quantum.poisson_noise = true;
        cfg.quantum.repetitions = 100;
        cfg.delays = DelayConfig {
            delays_s: vec![-2e-12, -5e-13, 0.0, 5e-13, 2e-12],
        };
        cfg.bootstrap.n_resamples = 500;
        let seeds = SeedSpace::new(11);
        let params = QuantumDipParams {
            transmission: cfg.quantum.transmission,
            eta: cfg.quantum.eta,
            zeta: cfg.quantum.zeta,
            scale: cfg.quantum.scale,
        };
        let jsa = JsaSpec::gaussian(cfg.jsa.sigma_omega_rad_s);
        let (curve, summary) = run_quantum_dip(&cfg, &seeds).unwrap();
        for p in curve.points() {
            let model = quantum_coincidence_at(&params, &jsa, p.tau_s).unwrap();
            let tol = 5.0 * (model.max(1.0) / 100.0).sqrt();
            assert!(
                (p.c_mean - model).abs() < tol,
                "tau {}: mean {} vs model {}",
                p.tau_s,
                p.c_mean,
                model
            );
            assert!(p.ci_lo < p.ci_hi, "CI should have width under noise");
        }
        assert!(summary.poisson_noise);
        let (again, _) = run_quantum_dip(&cfg, &seeds).unwrap();
        assert_eq!(dip_curve_to_csv(&again), dip_curve_to_csv(&curve));
    }

    #[test]
    fn classical_dip_small_run_hits_the_ideal_targets() {
        let cfg = small_classical();
        let seeds = SeedSpace::new(5);
        let (curve, summary) = run_classical_dip(&cfg, &seeds, false).unwrap();
        assert_eq!(summary.samples_per_delay, vec![64, 64, 64]);
        assert_eq!(summary.analytic_visibility, Some(1.0));
        assert!(summary.c_zero < 1e-6, "dip floor {}", summary.c_zero);
        // 4 ms is four envelope widths out; the dip term is e^{-8}
        assert!(
            (summary.c_far - 1.0).abs() < 0.05,
            "baseline {}",
            summary.c_far
        );
        assert!(
            (summary.visibility - 1.0).abs() < 0.05,
            "visibility {}",
            summary.visibility
        );
        let pts = curve.points();
        assert_eq!(pts.len(), 3);
        for p in pts {
            assert!(p.ci_lo <= p.c_mean && p.c_mean <= p.ci_hi);
        }
    }

    #[test]
    fn classical_dip_reruns_are_identical_and_seeds_matter() {
        let mut cfg = small_classical();
        cfg.phase = four_phase();
        let (a, _) = run_classical_dip(&cfg, &SeedSpace::new(9), false).unwrap();
        let (b, _) = run_classical_dip(&cfg, &SeedSpace::new(9), false).unwrap();
        assert_eq!(dip_curve_to_csv(&a), dip_curve_to_csv(&b));
        let (c, _) = run_classical_dip(&cfg, &SeedSpace::new(10), false).unwrap();
        assert_ne!(dip_curve_to_csv(&a), dip_curve_to_csv(&c));
    }

    #[test]
    fn auto_sizing_respects_the_pilot_demand() {
        let mut cfg = small_classical();
        cfg.phase = four_phase();
        cfg.samples = SamplesSpec::Auto;
        cfg.delays = DelayConfig {
            delays_s: vec![0.0],
        };
        let seeds = SeedSpace::new(2);
        let n = classical_auto_samples(&cfg, false, 0, &seeds).unwrap();
        assert!(n >= PILOT_SAMPLES, "auto resolved {n}");
        let pilot =
            classical_ensemble(&cfg, false, 0, PILOT_SAMPLES, StreamDomain::Pilot, &seeds)
                .unwrap();
        let demand = stream_requirement(&pilot.products()).unwrap();
        assert!(n >= demand, "auto {n} below pilot demand {demand}");
    }

    #[test]
    fn executor_writes_the_published_filenames() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("classical");
        let summary = execute(&Job::ClassicalDip(small_classical()), 4, false, &out).unwrap();
        assert!(out.join("dip_curve.csv").is_file());
        assert!(out.join("summary.json").is_file());
        assert_eq!(summary.files.len(), 2);
        let text = std::fs::read_to_string(out.join("summary.json")).unwrap();
        assert!(text.contains("\"seed\": 4"), "{text}");

        let out = dir.path().join("scan");
        execute(&Job::MziScan(MziScanConfig::default()), 4, false, &out).unwrap();
        assert!(out.join("mzi_scan.csv").is_file());

        let out = dir.path().join("minn");
        let job = Job::MinN(MinNConfig {
            mean: 2.0,
            std_dev: 0.2,
            count: 2,
            rel_halfwidth: 0.05,
            z: 1.96,
        });
        execute(&job, 4, false, &out).unwrap();
        let text = std::fs::read_to_string(out.join("min_n.json")).unwrap();
        assert!(text.contains("\"min_samples\": 16"), "{text}");
    }

    #[test]
    fn executor_gates_the_mixer_flag_to_the_classical_dip() {
        let dir = tempfile::tempdir().unwrap();
        let err = execute(
            &Job::MziScan(MziScanConfig::default()),
            1,
            true,
            dir.path(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("mixer chain"), "{err}");
    }

    #[test]
    fn fit_job_round_trips_synthetic_counts() {
        let dir = tempfile::tempdir().unwrap();
        let params = QuantumDipParams {
            transmission: 0.5,
            eta: 1.0,
            zeta: 0.0,
            scale: 1800.0,
        };
        let jsa = JsaSpec::gaussian(1.67e12);
        let data: Vec<(f64, f64)> = (-6..=6)
            .map(|k| {
                let tau = k as f64 * 3e-13;
                (tau, quantum_coincidence_at(&params, &jsa, tau).unwrap())
            })
            .collect();
        let data_path = dir.path().join("counts.csv");
        std::fs::write(&data_path, crate::io::fit_data_to_csv(&data)).unwrap();
        let job = FitJobConfig {
            model: FitModelKind::Quantum,
            data_csv: data_path,
            free: vec!["scale".to_string(), "sigma_omega".to_string()],
            envelope_sigma_s: None,
            max_iterations: 200,
            rel_tol: 1e-10,
            quantum: crate::config::QuantumConfig {
                eta: 1.0,
                zeta: 0.0,
                ..Default::default()
            },
            jsa: JsaConfig::default(),
            phase: PhaseConfig::default(),
        };
        let report = run_fit(&job, 6).unwrap();
        assert!(report.result.converged);
        let scale = report.result.value("scale").unwrap();
        let sigma = report.result.value("sigma_omega").unwrap();
        assert!((scale - 1800.0).abs() / 1800.0 < 1e-6, "scale {scale}");
        assert!((sigma - 1.67e12).abs() / 1.67e12 < 1e-6, "sigma {sigma}");
        assert!((report.result.r_squared - 1.0).abs() < 1e-9);
        assert!((report.visibility.unwrap() - 1.0).abs() < 1e-9);
    }
}
