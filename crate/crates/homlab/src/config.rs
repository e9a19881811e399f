//! Experiment configs: a strict flat key-value format with sections.
//!
//! Grammar (also documented in the README):
//!
//! ```text
//! # comment to end of line
//! kind = classical-dip          # top-level keys before any section
//! seed = 42
//! samples = auto                # or a positive integer
//!
//! [pulse]                       # sections group related keys
//! amplitude_v = 0.05
//! ```
//!
//! Keys are `snake_case`, values are numbers, booleans, names, comma
//! lists, or phase expressions like `pi`, `pi/2`, `3pi/2`. Unknown keys,
//! unknown sections, duplicates, and sections that the config's kind
//! does not use are all hard errors; silently ignored settings hide
//! typos. Relative paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::signals::PhaseDistribution;

/// The eight experiment kinds a config can declare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigKind {
    ClassicalDip,
    QuantumDip,
    ComplementarityClassical,
    ComplementarityQuantum,
    MziScan,
    Fit,
    MinN,
    Bootstrap,
}

impl ConfigKind {
    pub const ALL: [ConfigKind; 8] = [
        ConfigKind::ClassicalDip,
        ConfigKind::QuantumDip,
        ConfigKind::ComplementarityClassical,
        ConfigKind::ComplementarityQuantum,
        ConfigKind::MziScan,
        ConfigKind::Fit,
        ConfigKind::MinN,
        ConfigKind::Bootstrap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConfigKind::ClassicalDip => "classical-dip",
            ConfigKind::QuantumDip => "quantum-dip",
            ConfigKind::ComplementarityClassical => "complementarity-classical",
            ConfigKind::ComplementarityQuantum => "complementarity-quantum",
            ConfigKind::MziScan => "mzi-scan",
            ConfigKind::Fit => "fit",
            ConfigKind::MinN => "min-n",
            ConfigKind::Bootstrap => "bootstrap",
        }
    }

    fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::config("kind", format!("unknown kind {name:?}; one of {names:?}"))
            })
    }
}

/// Sample count per ensemble: fixed, or sized from a pilot run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplesSpec {
    Auto,
    Fixed(usize),
}

impl SamplesSpec {
    pub fn parse(text: &str) -> Result<Self> {
        if text == "auto" {
            return Ok(SamplesSpec::Auto);
        }
        match text.parse::<usize>() {
            Ok(n) if n >= 2 => Ok(SamplesSpec::Fixed(n)),
            _ => Err(Error::config(
                "samples",
                format!("expected \"auto\" or an integer >= 2, got {text:?}"),
            )),
        }
    }
}

/// Input pulse pair shared by the classical experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseConfig {
    pub amplitude_v: f64,
    pub envelope_sigma_s: f64,
    pub carrier_freq_hz: f64,
    /// Second-pulse amplitude as a fraction of the first.
    pub amplitude_ratio: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig {
            amplitude_v: 0.05,
            envelope_sigma_s: 1e-3,
            carrier_freq_hz: 1e3,
            amplitude_ratio: 1.0,
        }
    }
}

/// Phase ensemble plus optional per-shot Gaussian jitter.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    pub dist: PhaseDistribution,
    pub jitter_sigma_rad: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            dist: PhaseDistribution::DiscreteUniform(vec![0.0, PI]),
            jitter_sigma_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterConfig {
    pub transmission: f64,
    pub phase_error_rad: f64,
}

impl Default for SplitterConfig {
    fn default() -> Self {
        SplitterConfig {
            transmission: 0.5,
            phase_error_rad: 0.0,
        }
    }
}

/// Mixer chain settings; active only when the RF path is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfConfig {
    pub enabled: bool,
    pub lo_freq_hz: f64,
    pub lo_amp_v: f64,
    /// Scope cutoff applied after down-conversion, before detection.
    pub cutoff_hz: f64,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig {
            enabled: false,
            lo_freq_hz: 2e4,
            lo_amp_v: 1.0,
            cutoff_hz: 3e3,
        }
    }
}

/// Sampling window controls; the grid always covers every pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub pad_sigmas: f64,
    pub steps_per_sigma: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            pad_sigmas: 8.0,
            steps_per_sigma: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayConfig {
    pub delays_s: Vec<f64>,
}

impl DelayConfig {
    pub fn classical_default() -> Self {
        // -7 ms .. 7 ms in 1 ms steps
        DelayConfig {
            delays_s: (-7..=7).map(|k| k as f64 * 1e-3).collect(),
        }
    }

    pub fn quantum_default() -> Self {
        // 15 delays across the few-picosecond dip
        DelayConfig {
            delays_s: (-7..=7).map(|k| k as f64 * 3e-13).collect(),
        }
    }

    fn validate(self, section: &str) -> Result<Self> {
        if self.delays_s.is_empty() {
            return Err(Error::config(section, "delay grid is empty"));
        }
        if self.delays_s.iter().any(|d| !d.is_finite()) {
            return Err(Error::config(section, "delays must be finite"));
        }
        for pair in self.delays_s.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::config(
                    section,
                    format!(
                        "delays must strictly increase, got {} then {}",
                        pair[0], pair[1]
                    ),
                ));
            }
        }
        Ok(self)
    }
}

/// Spectral model of the photon pair.
#[derive(Debug, Clone, PartialEq)]
pub struct JsaConfig {
    pub sigma_omega_rad_s: f64,
    pub filter_csv: Option<PathBuf>,
    pub renormalize: bool,
}

impl Default for JsaConfig {
    fn default() -> Self {
        JsaConfig {
            // a fraction-of-a-nanometer line width in the near infrared
            sigma_omega_rad_s: 1.67e12,
            filter_csv: None,
            renormalize: true,
        }
    }
}

/// Coincidence-rate model parameters for the quantum runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumConfig {
    pub transmission: f64,
    pub eta: f64,
    pub zeta: f64,
    pub scale: f64,
    /// Repeated count acquisitions per delay.
    pub repetitions: usize,
    /// Draw Poisson counts around the model curve instead of reporting
    /// the curve itself.
    pub poisson_noise: bool,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        QuantumConfig {
            transmission: 0.5,
            eta: 1.0,
            zeta: 0.0,
            scale: 1.0,
            repetitions: 100,
            poisson_noise: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            n_resamples: 10_000,
            level: 0.95,
        }
    }
}

/// Recombiner setting for the interferometer experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziConfig {
    pub theta_rad: f64,
}

impl Default for MziConfig {
    fn default() -> Self {
        MziConfig { theta_rad: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziScanConfig {
    pub start_rad: f64,
    pub stop_rad: f64,
    pub points: usize,
}

impl Default for MziScanConfig {
    fn default() -> Self {
        MziScanConfig {
            start_rad: 0.0,
            stop_rad: TAU,
            points: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDipConfig {
    pub pulse: PulseConfig,
    pub delays: DelayConfig,
    pub phase: PhaseConfig,
    pub splitter: SplitterConfig,
    pub rf: RfConfig,
    pub grid: GridConfig,
    pub bootstrap: BootstrapConfig,
    pub samples: SamplesSpec,
}

impl Default for ClassicalDipConfig {
    fn default() -> Self {
        ClassicalDipConfig {
            pulse: PulseConfig::default(),
            delays: DelayConfig::classical_default(),
            phase: PhaseConfig::default(),
            splitter: SplitterConfig::default(),
            rf: RfConfig::default(),
            grid: GridConfig::default(),
            bootstrap: BootstrapConfig::default(),
            samples: SamplesSpec::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumDipConfig {
    pub quantum: QuantumConfig,
    pub jsa: JsaConfig,
    pub delays: DelayConfig,
    pub bootstrap: BootstrapConfig,
}

impl Default for QuantumDipConfig {
    fn default() -> Self {
        QuantumDipConfig {
            quantum: QuantumConfig::default(),
            jsa: JsaConfig::default(),
            delays: DelayConfig::quantum_default(),
            bootstrap: BootstrapConfig::default(),
        }
    }
}

/// The classical interferometer comparison enumerates the phase ensemble
/// exactly instead of sampling it, so it takes no sample count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComplementarityClassicalConfig {
    pub pulse: PulseConfig,
    pub phase: PhaseConfig,
    pub splitter: SplitterConfig,
    pub mzi: MziConfig,
    pub grid: GridConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementarityQuantumConfig {
    pub transmission: f64,
}

impl Default for ComplementarityQuantumConfig {
    fn default() -> Self {
        ComplementarityQuantumConfig { transmission: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModelKind {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitJobConfig {
    pub model: FitModelKind,
    pub data_csv: PathBuf,
    /// Free parameter names for the quantum model.
    pub free: Vec<String>,
    /// Classical model: pin the envelope width, or co-fit when absent.
    pub envelope_sigma_s: Option<f64>,
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub quantum: QuantumConfig,
    pub jsa: JsaConfig,
    pub phase: PhaseConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinNConfig {
    pub mean: f64,
    pub std_dev: f64,
    pub count: usize,
    pub rel_halfwidth: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapJobConfig {
    pub bootstrap: BootstrapConfig,
    pub data_csv: PathBuf,
}

/// Everything one config file describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    ClassicalDip(ClassicalDipConfig),
    QuantumDip(QuantumDipConfig),
    ComplementarityClassical(ComplementarityClassicalConfig),
    ComplementarityQuantum(ComplementarityQuantumConfig),
    MziScan(MziScanConfig),
    Fit(FitJobConfig),
    MinN(MinNConfig),
    Bootstrap(BootstrapJobConfig),
}

impl Job {
    pub fn kind(&self) -> ConfigKind {
        match self {
            Job::ClassicalDip(_) => ConfigKind::ClassicalDip,
            Job::QuantumDip(_) => ConfigKind::QuantumDip,
            Job::ComplementarityClassical(_) => ConfigKind::ComplementarityClassical,
            Job::ComplementarityQuantum(_) => ConfigKind::ComplementarityQuantum,
            Job::MziScan(_) => ConfigKind::MziScan,
            Job::Fit(_) => ConfigKind::Fit,
            Job::MinN(_) => ConfigKind::MinN,
            Job::Bootstrap(_) => ConfigKind::Bootstrap,
        }
    }

    /// Built-in defaults for the simulation kinds. The data-driven kinds
    /// (fit, min-n, bootstrap) have nothing sensible to run without a
    /// config naming their inputs.
    pub fn default_for(kind: ConfigKind) -> Result<Job> {
        match kind {
            ConfigKind::ClassicalDip => Ok(Job::ClassicalDip(ClassicalDipConfig::default())),
            ConfigKind::QuantumDip => Ok(Job::QuantumDip(QuantumDipConfig::default())),
            ConfigKind::ComplementarityClassical => Ok(Job::ComplementarityClassical(
                ComplementarityClassicalConfig::default(),
            )),
            ConfigKind::ComplementarityQuantum => Ok(Job::ComplementarityQuantum(
                ComplementarityQuantumConfig::default(),
            )),
            ConfigKind::MziScan => Ok(Job::MziScan(MziScanConfig::default())),
            other => Err(Error::config(
                "kind",
                format!("{} needs a config file naming its inputs", other.name()),
            )),
        }
    }
}

/// A parsed config: the job plus the bookkeeping every output records.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub seed: Option<u64>,
    pub job: Job,
}

/// Parse a config file, resolving relative paths against its directory.
pub fn parse_config(path: &Path) -> Result<Experiment> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config_str(&text, base)
}

/// Parse config text; `base` anchors relative paths.
pub fn parse_config_str(text: &str, base: &Path) -> Result<Experiment> {
    let mut raw = RawConfig::parse(text)?;
    let kind_text = raw.top.require("kind")?;
    let kind = ConfigKind::from_name(&kind_text)?;
    let seed = raw.top.take_u64("seed")?;
    let samples = match raw.top.take_raw("samples") {
        Some(v) => Some(SamplesSpec::parse(&v)?),
        None => None,
    };
    raw.top.finish()?;

    let job = match kind {
        ConfigKind::ClassicalDip => {
            let mut cfg = ClassicalDipConfig::default();
            if let Some(s) = samples {
                cfg.samples = s;
            }
            cfg.pulse = read_pulse(&mut raw)?;
            cfg.delays = read_delays(&mut raw)?.unwrap_or(cfg.delays).validate("delays")?;
            cfg.phase = read_phase(&mut raw)?;
            cfg.splitter = read_splitter(&mut raw)?;
            cfg.rf = read_rf(&mut raw)?;
            cfg.grid = read_grid(&mut raw)?;
            cfg.bootstrap = read_bootstrap(&mut raw)?;
            Job::ClassicalDip(cfg)
        }
        ConfigKind::QuantumDip => {
            reject_samples(samples)?;
            let mut cfg = QuantumDipConfig::default();
            cfg.quantum = read_quantum(&mut raw)?;
            cfg.jsa = read_jsa(&mut raw, base)?;
            cfg.delays = read_delays(&mut raw)?.unwrap_or(cfg.delays).validate("delays")?;
            cfg.bootstrap = read_bootstrap(&mut raw)?;
            Job::QuantumDip(cfg)
        }
        ConfigKind::ComplementarityClassical => {
            reject_samples(samples)?;
            Job::ComplementarityClassical(ComplementarityClassicalConfig {
                pulse: read_pulse(&mut raw)?,
                phase: read_phase(&mut raw)?,
                splitter: read_splitter(&mut raw)?,
                mzi: read_mzi(&mut raw)?,
                grid: read_grid(&mut raw)?,
            })
        }
        ConfigKind::ComplementarityQuantum => {
            reject_samples(samples)?;
            let mut cfg = ComplementarityQuantumConfig::default();
            if let Some(mut s) = raw.section("quantum") {
                if let Some(t) = s.take_f64("transmission")? {
                    cfg.transmission = t;
                }
                s.finish()?;
            }
            Job::ComplementarityQuantum(cfg)
        }
        ConfigKind::MziScan => {
            reject_samples(samples)?;
            let mut cfg = MziScanConfig::default();
            if let Some(mut s) = raw.section("mzi_scan") {
                if let Some(v) = s.take_phase("start_rad")? {
                    cfg.start_rad = v;
                }
                if let Some(v) = s.take_phase("stop_rad")? {
                    cfg.stop_rad = v;
                }
                if let Some(v) = s.take_usize("points")? {
                    cfg.points = v;
                }
                s.finish()?;
            }
            if cfg.points < 2 {
                return Err(Error::config("mzi_scan.points", "need at least 2 points"));
            }
            if !(cfg.stop_rad > cfg.start_rad) {
                return Err(Error::config(
                    "mzi_scan.stop_rad",
                    "scan must run forward in theta",
                ));
            }
            Job::MziScan(cfg)
        }
        ConfigKind::Fit => {
            reject_samples(samples)?;
            let mut s = raw.section("fit").ok_or_else(|| {
                Error::config("fit", "a fit config needs a [fit] section")
            })?;
            let model = match s.require("model")?.as_str() {
                "quantum" => FitModelKind::Quantum,
                "classical" => FitModelKind::Classical,
                other => {
                    return Err(Error::config(
                        "fit.model",
                        format!("expected quantum or classical, got {other:?}"),
                    ))
                }
            };
            let data_csv = base.join(s.require("data_csv")?);
            let free = match s.take_raw("free") {
                Some(list) => list
                    .split(',')
                    .map(|t| t.trim().to_string())
                    .filter(|t| !t.is_empty())
                    .collect(),
                None => vec!["scale".to_string(), "sigma_omega".to_string()],
            };
            let envelope_sigma_s = s.take_f64("envelope_sigma_s")?;
            let max_iterations = s.take_usize("max_iterations")?.unwrap_or(200);
            let rel_tol = s.take_f64("rel_tol")?.unwrap_or(1e-10);
            s.finish()?;
            Job::Fit(FitJobConfig {
                model,
                data_csv,
                free,
                envelope_sigma_s,
                max_iterations,
                rel_tol,
                quantum: read_quantum(&mut raw)?,
                jsa: read_jsa(&mut raw, base)?,
                phase: read_phase(&mut raw)?,
            })
        }
        ConfigKind::MinN => {
            reject_samples(samples)?;
            let mut s = raw.section("min_n").ok_or_else(|| {
                Error::config("min_n", "a min-n config needs a [min_n] section")
            })?;
            let cfg = MinNConfig {
                mean: s.require_f64("mean")?,
                std_dev: s.require_f64("std_dev")?,
                count: s.take_usize("count")?.unwrap_or(2),
                rel_halfwidth: s.take_f64("rel_halfwidth")?.unwrap_or(0.05),
                z: s.take_f64("z")?.unwrap_or(1.96),
            };
            s.finish()?;
            Job::MinN(cfg)
        }
        ConfigKind::Bootstrap => {
            reject_samples(samples)?;
            let mut s = raw.section("bootstrap").ok_or_else(|| {
                Error::config("bootstrap", "a bootstrap config needs a [bootstrap] section")
            })?;
            let data_csv = base.join(s.require("data_csv")?);
            let cfg = BootstrapJobConfig {
                bootstrap: BootstrapConfig {
                    n_resamples: s.take_usize("n_resamples")?.unwrap_or(10_000),
                    level: s.take_f64("level")?.unwrap_or(0.95),
                },
                data_csv,
            };
            s.finish()?;
            Job::Bootstrap(cfg)
        }
    };

    raw.finish(kind)?;
    Ok(Experiment { seed, job })
}

fn reject_samples(samples: Option<SamplesSpec>) -> Result<()> {
    if samples.is_some() {
        return Err(Error::config(
            "samples",
            "only the sampled classical experiments take a sample count",
        ));
    }
    Ok(())
}

fn read_pulse(raw: &mut RawConfig) -> Result<PulseConfig> {
    let mut cfg = PulseConfig::default();
    if let Some(mut s) = raw.section("pulse") {
        if let Some(v) = s.take_f64("amplitude_v")? {
            cfg.amplitude_v = v;
        }
        if let Some(v) = s.take_f64("envelope_sigma_s")? {
            cfg.envelope_sigma_s = v;
        }
        if let Some(v) = s.take_f64("carrier_freq_hz")? {
            cfg.carrier_freq_hz = v;
        }
        if let Some(v) = s.take_f64("amplitude_ratio")? {
            cfg.amplitude_ratio = v;
        }
        s.finish()?;
    }
    if !(cfg.envelope_sigma_s > 0.0) || !(cfg.carrier_freq_hz > 0.0) {
        return Err(Error::config(
            "pulse",
            "envelope_sigma_s and carrier_freq_hz must be positive",
        ));
    }
    if !(cfg.amplitude_v >= 0.0) || !(cfg.amplitude_ratio > 0.0) {
        return Err(Error::config(
            "pulse",
            "amplitude_v must be >= 0 and amplitude_ratio > 0",
        ));
    }
    Ok(cfg)
}

fn read_delays(raw: &mut RawConfig) -> Result<Option<DelayConfig>> {
    let Some(mut s) = raw.section("delays") else {
        return Ok(None);
    };
    let list = s.take_raw("list_s");
    let start = s.take_f64("start_s")?;
    let stop = s.take_f64("stop_s")?;
    let step = s.take_f64("step_s")?;
    s.finish()?;
    let delays = match (list, start, stop, step) {
        (Some(list), None, None, None) => parse_f64_list("delays.list_s", &list)?,
        (None, Some(start), Some(stop), Some(step)) => {
            if !(step > 0.0) || !(stop > start) {
                return Err(Error::config(
                    "delays",
                    "need step_s > 0 and stop_s > start_s",
                ));
            }
            let n = ((stop - start) / step).round() as usize;
            (0..=n).map(|k| start + k as f64 * step).collect()
        }
        _ => {
            return Err(Error::config(
                "delays",
                "give either list_s or all of start_s/stop_s/step_s",
            ))
        }
    };
    Ok(Some(DelayConfig { delays_s: delays }))
}

fn read_phase(raw: &mut RawConfig) -> Result<PhaseConfig> {
    let mut cfg = PhaseConfig::default();
    let Some(mut s) = raw.section("phase") else {
        return Ok(cfg);
    };
    let dist_name = s.take_raw("dist").unwrap_or_else(|| "discrete".to_string());
    let values = s.take_raw("values_rad");
    let weights = s.take_raw("weights");
    if let Some(v) = s.take_f64("jitter_sigma_rad")? {
        if !(v >= 0.0) {
            return Err(Error::config("phase.jitter_sigma_rad", "must be >= 0"));
        }
        cfg.jitter_sigma_rad = v;
    }
    s.finish()?;

    let parse_values = |field: &str, text: Option<String>| -> Result<Vec<f64>> {
        let text = text.ok_or_else(|| {
            Error::config(field, "this distribution needs phase values")
        })?;
        text.split(',')
            .map(|tok| parse_phase_expr(field, tok.trim()))
            .collect()
    };

    cfg.dist = match dist_name.as_str() {
        "discrete" => {
            if weights.is_some() {
                return Err(Error::config(
                    "phase.weights",
                    "weights belong to dist = weighted",
                ));
            }
            match values {
                Some(_) => PhaseDistribution::DiscreteUniform(parse_values(
                    "phase.values_rad",
                    values,
                )?),
                None => PhaseConfig::default().dist,
            }
        }
        "continuous" => {
            if values.is_some() || weights.is_some() {
                return Err(Error::config(
                    "phase",
                    "continuous takes no values_rad or weights",
                ));
            }
            PhaseDistribution::ContinuousUniform
        }
        "weighted" => {
            let values = parse_values("phase.values_rad", values)?;
            let weights = parse_f64_list(
                "phase.weights",
                &weights.ok_or_else(|| {
                    Error::config("phase.weights", "dist = weighted needs weights")
                })?,
            )?;
            if values.len() != weights.len() {
                return Err(Error::config(
                    "phase.weights",
                    format!("{} weights for {} values", weights.len(), values.len()),
                ));
            }
            PhaseDistribution::WeightedDiscrete(values.into_iter().zip(weights).collect())
        }
        other => {
            return Err(Error::config(
                "phase.dist",
                format!("expected discrete, continuous, or weighted, got {other:?}"),
            ))
        }
    };
    cfg.dist = cfg
        .dist
        .validated()
        .map_err(|e| Error::config("phase", e.to_string()))?;
    Ok(cfg)
}

fn read_splitter(raw: &mut RawConfig) -> Result<SplitterConfig> {
    let mut cfg = SplitterConfig::default();
    if let Some(mut s) = raw.section("splitter") {
        if let Some(v) = s.take_f64("transmission")? {
            cfg.transmission = v;
        }
        if let Some(v) = s.take_phase("phase_error_rad")? {
            cfg.phase_error_rad = v;
        }
        s.finish()?;
    }
    Ok(cfg)
}

fn read_rf(raw: &mut RawConfig) -> Result<RfConfig> {
    let mut cfg = RfConfig::default();
    if let Some(mut s) = raw.section("rf") {
        if let Some(v) = s.take_bool("enabled")? {
            cfg.enabled = v;
        }
        if let Some(v) = s.take_f64("lo_freq_hz")? {
            cfg.lo_freq_hz = v;
        }
        if let Some(v) = s.take_f64("lo_amp_v")? {
            cfg.lo_amp_v = v;
        }
        if let Some(v) = s.take_f64("cutoff_hz")? {
            cfg.cutoff_hz = v;
        }
        s.finish()?;
    }
    if !(cfg.lo_freq_hz > 0.0) || !(cfg.lo_amp_v > 0.0) || !(cfg.cutoff_hz > 0.0) {
        return Err(Error::config(
            "rf",
            "lo_freq_hz, lo_amp_v, and cutoff_hz must be positive",
        ));
    }
    Ok(cfg)
}

fn read_grid(raw: &mut RawConfig) -> Result<GridConfig> {
    let mut cfg = GridConfig::default();
    if let Some(mut s) = raw.section("grid") {
        if let Some(v) = s.take_f64("pad_sigmas")? {
            cfg.pad_sigmas = v;
        }
        if let Some(v) = s.take_f64("steps_per_sigma")? {
            cfg.steps_per_sigma = v;
        }
        s.finish()?;
    }
    if !(cfg.pad_sigmas >= 8.0) {
        return Err(Error::config(
            "grid.pad_sigmas",
            "the window must keep at least 8 envelope widths of padding",
        ));
    }
    if !(cfg.steps_per_sigma >= 10.0) {
        return Err(Error::config(
            "grid.steps_per_sigma",
            "fewer than 10 steps per width cannot resolve the envelope",
        ));
    }
    Ok(cfg)
}

fn read_jsa(raw: &mut RawConfig, base: &Path) -> Result<JsaConfig> {
    let mut cfg = JsaConfig::default();
    if let Some(mut s) = raw.section("jsa") {
        if let Some(v) = s.take_f64("sigma_omega_rad_s")? {
            cfg.sigma_omega_rad_s = v;
        }
        if let Some(p) = s.take_raw("filter_csv") {
            cfg.filter_csv = Some(base.join(p));
        }
        if let Some(v) = s.take_bool("renormalize")? {
            cfg.renormalize = v;
        }
        s.finish()?;
    }
    if !(cfg.sigma_omega_rad_s > 0.0) {
        return Err(Error::config(
            "jsa.sigma_omega_rad_s",
            "spectral width must be positive",
        ));
    }
    Ok(cfg)
}

fn read_quantum(raw: &mut RawConfig) -> Result<QuantumConfig> {
    let mut cfg = QuantumConfig::default();
    if let Some(mut s) = raw.section("quantum") {
        if let Some(v) = s.take_f64("transmission")? {
            cfg.transmission = v;
        }
        if let Some(v) = s.take_f64("eta")? {
            cfg.eta = v;
        }
        if let Some(v) = s.take_f64("zeta")? {
            cfg.zeta = v;
        }
        if let Some(v) = s.take_f64("scale")? {
            cfg.scale = v;
        }
        if let Some(v) = s.take_usize("repetitions")? {
            cfg.repetitions = v;
        }
        if let Some(v) = s.take_bool("poisson_noise")? {
            cfg.poisson_noise = v;
        }
        s.finish()?;
    }
    if cfg.repetitions == 0 {
        return Err(Error::config("quantum.repetitions", "must be at least 1"));
    }
    Ok(cfg)
}

fn read_mzi(raw: &mut RawConfig) -> Result<MziConfig> {
    let mut cfg = MziConfig::default();
    if let Some(mut s) = raw.section("mzi") {
        if let Some(v) = s.take_phase("theta_rad")? {
            cfg.theta_rad = v;
        }
        s.finish()?;
    }
    Ok(cfg)
}

fn read_bootstrap(raw: &mut RawConfig) -> Result<BootstrapConfig> {
    let mut cfg = BootstrapConfig::default();
    if let Some(mut s) = raw.section("bootstrap") {
        if let Some(v) = s.take_usize("n_resamples")? {
            cfg.n_resamples = v;
        }
        if let Some(v) = s.take_f64("level")? {
            cfg.level = v;
        }
        s.finish()?;
    }
    Ok(cfg)
}

fn parse_f64_list(field: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>().map_err(|_| {
                Error::config(field, format!("{tok:?} is not a number"))
            })
        })
        .collect()
}

/// Phase expressions: a plain number, or `pi` with an optional leading
/// coefficient and `/divisor`, e.g. `pi`, `pi/2`, `3pi/2`, `-pi/4`, `0.5pi`.
fn parse_phase_expr(field: &str, tok: &str) -> Result<f64> {
    if tok.is_empty() {
        return Err(Error::config(field, "empty phase value"));
    }
    let Some(at) = tok.find("pi") else {
        return tok
            .parse::<f64>()
            .map_err(|_| Error::config(field, format!("{tok:?} is not a phase")));
    };
    let (coef_text, rest) = (&tok[..at], &tok[at + 2..]);
    let coef = match coef_text {
        "" => 1.0,
        "-" => -1.0,
        c => c
            .parse::<f64>()
            .map_err(|_| Error::config(field, format!("bad coefficient in {tok:?}")))?,
    };
    let div = match rest {
        "" => 1.0,
        r => {
            let r = r.strip_prefix('/').ok_or_else(|| {
                Error::config(field, format!("unexpected trailing text in {tok:?}"))
            })?;
            let d: f64 = r
                .parse()
                .map_err(|_| Error::config(field, format!("bad divisor in {tok:?}")))?;
            if d == 0.0 {
                return Err(Error::config(field, format!("zero divisor in {tok:?}")));
            }
            d
        }
    };
    Ok(coef * PI / div)
}

/// Raw parsed file: top-level keys and named sections, each tracking
/// which keys have been consumed so leftovers can be reported.
struct RawConfig {
    top: Table,
    sections: BTreeMap<String, (usize, Table)>,
}

struct Table {
    scope: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl Table {
    fn new(scope: &str) -> Self {
        Table {
            scope: scope.to_string(),
            entries: BTreeMap::new(),
        }
    }

    fn field(&self, key: &str) -> String {
        if self.scope.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.scope)
        }
    }

    fn take_raw(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take_raw(key)
            .ok_or_else(|| Error::config(self.field(key), "required key is missing"))
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<f64>().map(Some).map_err(|_| {
                Error::config(self.field(key), format!("{v:?} is not a number"))
            }),
        }
    }

    fn require_f64(&mut self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        v.parse::<f64>()
            .map_err(|_| Error::config(self.field(key), format!("{v:?} is not a number")))
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<u64>().map(Some).map_err(|_| {
                Error::config(
                    self.field(key),
                    format!("{v:?} is not an unsigned integer"),
                )
            }),
        }
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        Ok(self.take_u64(key)?.map(|v| v as usize))
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(v) => match v.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => Err(Error::config(
                    self.field(key),
                    format!("{v:?} is not true or false"),
                )),
            },
        }
    }

    fn take_phase(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(v) => parse_phase_expr(&self.field(key), &v).map(Some),
        }
    }

    fn finish(&self) -> Result<()> {
        if let Some((key, (line, _))) = self.entries.iter().next() {
            return Err(Error::config(
                self.field(key),
                format!("unknown key (line {line})"),
            ));
        }
        Ok(())
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig {
            top: Table::new(""),
            sections: BTreeMap::new(),
        };
        let mut current: Option<String> = None;
        for (idx, full_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match full_line.find('#') {
                Some(at) => &full_line[..at],
                None => full_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[') {
                let name = inner.strip_suffix(']').ok_or_else(|| {
                    Error::config(
                        format!("line {line_no}"),
                        "section header must look like [name]",
                    )
                })?;
                let name = name.trim();
                if !valid_name(name) {
                    return Err(Error::config(
                        format!("line {line_no}"),
                        format!("bad section name {name:?}"),
                    ));
                }
                if raw.sections.contains_key(name) {
                    return Err(Error::config(
                        name,
                        format!("section repeated (line {line_no})"),
                    ));
                }
                raw.sections
                    .insert(name.to_string(), (line_no, Table::new(name)));
                current = Some(name.to_string());
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(Error::config(
                    format!("line {line_no}"),
                    format!("expected key = value, got {line:?}"),
                ));
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if !valid_name(key) {
                return Err(Error::config(
                    format!("line {line_no}"),
                    format!("bad key name {key:?}"),
                ));
            }
            if value.is_empty() {
                return Err(Error::config(
                    format!("line {line_no}"),
                    format!("key {key} has no value"),
                ));
            }
            let table = match &current {
                Some(name) => &mut raw.sections.get_mut(name).unwrap().1,
                None => &mut raw.top,
            };
            let scope = table.field(key);
            if table
                .entries
                .insert(key.to_string(), (line_no, value.to_string()))
                .is_some()
            {
                return Err(Error::config(
                    scope,
                    format!("key repeated (line {line_no})"),
                ));
            }
        }
        Ok(raw)
    }

    /// Hand over a whole section for consumption; absent sections fall
    /// back to defaults at the call site.
    fn section(&mut self, name: &str) -> Option<Table> {
        self.sections.remove(name).map(|(_, t)| t)
    }

    /// Reject any section the kind never consumed.
    fn finish(&self, kind: ConfigKind) -> Result<()> {
        if let Some((name, (line, _))) = self.sections.iter().next() {
            return Err(Error::config(
                name,
                format!(
                    "section not used by kind {} (line {line})",
                    kind.name()
                ),
            ));
        }
        Ok(())
    }
}
