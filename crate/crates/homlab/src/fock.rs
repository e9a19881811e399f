//! Two-mode photon-number state engine and the closed-form coincidence
//! model for the genuine two-photon experiment.
//!
//! States are finite superpositions of |n, m> kets held in a sorted map,
//! so iteration order and therefore every accumulated float is
//! reproducible. The beam splitter acts on creation operators as
//!
//! ```text
//! a+ -> sqrt(t) c+ + sqrt(1-t) d+
//! b+ -> sqrt(1-t) c+ - sqrt(t) d+
//! ```
//!
//! a real orthogonal involution, so applying the same splitter twice is
//! the identity. That exactness anchors the interferometer tests.

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::math::{pairwise_sum, trapezoid};

/// Engine cap on total photon number per ket. High enough for every
/// experiment here (two photons), low enough that factorials stay exact.
const MAX_TOTAL: u32 = 20;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Which of the two modes an operation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

/// A pure state of two optical modes in the photon-number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amps: BTreeMap<(u32, u32), Complex64>,
}

impl TwoModeState {
    pub fn vacuum() -> Self {
        Self::fock(0, 0)
    }

    /// The basis ket |n, m>.
    pub fn fock(n: u32, m: u32) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert((n, m), Complex64::new(1.0, 0.0));
        TwoModeState { amps }
    }

    /// Build a superposition from (ket, amplitude) pairs. Duplicate kets
    /// add coherently. The result is not normalized automatically.
    pub fn from_amplitudes(
        pairs: impl IntoIterator<Item = ((u32, u32), Complex64)>,
    ) -> Result<Self> {
        let mut amps: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for ((n, m), amp) in pairs {
            if !(amp.re.is_finite() && amp.im.is_finite()) {
                return Err(Error::Fock(format!("amplitude for |{n},{m}> is not finite")));
            }
            *amps.entry((n, m)).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        if amps.is_empty() {
            return Err(Error::Fock("state needs at least one ket".into()));
        }
        Ok(TwoModeState { amps })
    }

    pub fn amplitude(&self, n: u32, m: u32) -> Complex64 {
        self.amps
            .get(&(n, m))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn probability(&self, n: u32, m: u32) -> f64 {
        self.amplitude(n, m).norm_sqr()
    }

    pub fn kets(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.amps.iter().map(|(&k, &a)| (k, a))
    }

    pub fn norm_sqr(&self) -> f64 {
        let terms: Vec<f64> = self.amps.values().map(|a| a.norm_sqr()).collect();
        pairwise_sum(&terms)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::Fock(format!("cannot normalize state of norm {norm}")));
        }
        for amp in self.amps.values_mut() {
            *amp /= norm;
        }
        Ok(self)
    }

    fn scaled(mut self, factor: f64) -> Self {
        for amp in self.amps.values_mut() {
            *amp *= factor;
        }
        self
    }

    /// Mix the modes on a splitter of power transmission `t`.
    pub fn beam_splitter(&self, t: f64) -> Result<TwoModeState> {
        if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
            return Err(Error::Fock(format!("power transmission {t} outside [0, 1]")));
        }
        let st = t.sqrt();
        let sr = (1.0 - t).sqrt();
        let mut out: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (&(n, m), &amp) in &self.amps {
            if n + m > MAX_TOTAL {
                return Err(Error::Fock(format!(
                    "total photon number {} exceeds the engine cap {MAX_TOTAL}",
                    n + m
                )));
            }
            let norm_in = 1.0 / (factorial(n) * factorial(m)).sqrt();
            for j in 0..=n {
                for k in 0..=m {
                    let p = j + k;
                    let q = n + m - p;
                    let sign = if (m - k) % 2 == 1 { -1.0 } else { 1.0 };
                    let coeff = binomial(n, j)
                        * binomial(m, k)
                        * st.powi((j + m - k) as i32)
                        * sr.powi((n - j + k) as i32)
                        * sign
                        * (factorial(p) * factorial(q)).sqrt()
                        * norm_in;
                    *out.entry((p, q)).or_insert(Complex64::new(0.0, 0.0)) += amp * coeff;
                }
            }
        }
        Ok(TwoModeState { amps: out })
    }

    /// Phase `alpha` per photon in one mode: |n, m> gains e^{i alpha m}
    /// (or e^{i alpha n} for mode A).
    pub fn phase_shift(&self, mode: Mode, alpha: f64) -> TwoModeState {
        let mut out = self.clone();
        for ((n, m), amp) in out.amps.iter_mut() {
            let count = match mode {
                Mode::A => *n,
                Mode::B => *m,
            };
            *amp *= Complex64::from_polar(1.0, alpha * f64::from(count));
        }
        out
    }

    /// Absorb every photon in one mode.
    ///
    /// Absorption entangles the blocked mode with the absorber, so
    /// components that lose different photon numbers can no longer
    /// interfere. The result is a mixture: one branch per absorbed count,
    /// returned as (probability, normalized pure state) pairs whose
    /// probabilities sum to the input norm.
    pub fn block(&self, mode: Mode) -> Vec<(f64, TwoModeState)> {
        let mut branches: BTreeMap<u32, BTreeMap<(u32, u32), Complex64>> = BTreeMap::new();
        for (&(n, m), &amp) in &self.amps {
            let (absorbed, kept) = match mode {
                Mode::B => (m, (n, 0)),
                Mode::A => (n, (0, m)),
            };
            *branches
                .entry(absorbed)
                .or_default()
                .entry(kept)
                .or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        branches
            .into_values()
            .filter_map(|amps| {
                let state = TwoModeState { amps };
                let weight = state.norm_sqr();
                if weight > 0.0 {
                    Some((weight, state.scaled(1.0 / weight.sqrt())))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Effective absorber map: every ket keeps its amplitude while the
    /// blocked mode's occupation is set to zero, and kets that land on the
    /// same occupation add coherently. The output is unnormalized; its
    /// norm is the survival amplitude structure.
    ///
    /// For photon-number-resolved observables this agrees exactly with
    /// the branch mixture from `block`, because components that lost
    /// different photon numbers can never be steered onto the same ket by
    /// number-conserving optics. Both routes are kept and cross-checked.
    pub fn block_arm(&self, mode: Mode) -> TwoModeState {
        let mut amps: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (&(n, m), &amp) in &self.amps {
            let kept = match mode {
                Mode::B => (n, 0),
                Mode::A => (0, m),
            };
            *amps.entry(kept).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        TwoModeState { amps }
    }

    /// Probability that both detectors fire: all components with at least
    /// one photon in each mode.
    pub fn coincidence_probability(&self) -> f64 {
        let terms: Vec<f64> = self
            .amps
            .iter()
            .filter(|(&(n, m), _)| n >= 1 && m >= 1)
            .map(|(_, a)| a.norm_sqr())
            .collect();
        pairwise_sum(&terms)
    }
}

/// Spectral model of the photon pair: a Gaussian marginal of width
/// `sigma_omega` (rad/s), optionally shaped by a measured filter curve.
#[derive(Debug, Clone)]
pub struct JsaSpec {
    /// Marginal spectral width, rad/s.
    pub sigma_omega: f64,
    /// Optional filter transmission versus frequency offset.
    pub filter: Option<FilterTable>,
    /// When true, the overlap is normalized by the filtered spectrum so
    /// g(0) = 1; when false, by the unfiltered spectrum, so g(0) is the
    /// transmitted fraction.
    pub renormalize: bool,
}

impl JsaSpec {
    pub fn gaussian(sigma_omega: f64) -> Self {
        JsaSpec {
            sigma_omega,
            filter: None,
            renormalize: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma_omega.is_finite() && self.sigma_omega > 0.0) {
            return Err(Error::domain(format!(
                "spectral width {} must be positive",
                self.sigma_omega
            )));
        }
        Ok(())
    }
}

/// Measured filter transmission: (frequency offset in Hz, transmission)
/// rows, strictly increasing in frequency. Lookups interpolate linearly;
/// outside the tabulated range the filter is opaque.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTable {
    points: Vec<(f64, f64)>,
}

impl FilterTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("filter table needs at least two rows"));
        }
        for pair in points.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::domain(format!(
                    "filter frequencies must strictly increase ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
        }
        for &(f, t) in &points {
            if !f.is_finite() || !(t.is_finite() && (0.0..=1.0).contains(&t)) {
                return Err(Error::domain(format!(
                    "filter row ({f}, {t}) is not a physical transmission"
                )));
            }
        }
        Ok(FilterTable { points })
    }

    pub fn min_freq(&self) -> f64 {
        self.points[0].0
    }

    pub fn max_freq(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Linear interpolation; zero outside the tabulated range.
    pub fn transmission_at(&self, freq_offset_hz: f64) -> f64 {
        let pts = &self.points;
        if freq_offset_hz < pts[0].0 || freq_offset_hz > pts[pts.len() - 1].0 {
            return 0.0;
        }
        let idx = pts.partition_point(|&(f, _)| f <= freq_offset_hz);
        if idx == 0 {
            return pts[0].1;
        }
        if idx >= pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (f0, t0) = pts[idx - 1];
        let (f1, t1) = pts[idx];
        t0 + (t1 - t0) * (freq_offset_hz - f0) / (f1 - f0)
    }
}

/// Quadrature resolution for the spectral overlap integral.
const OVERLAP_INTERVALS: usize = 4096;
/// Half-width of the quadrature domain in units of sigma_omega. Eight
/// sigma keeps the Gaussian truncation error near 1e-14 relative, well
/// under the 1e-9 budget the closed-form checks assume.
const OVERLAP_REACH: f64 = 8.0;

/// Overlap factor g(delta_tau): how much two-photon interference survives
/// a relative delay, given the (filtered) spectrum.
///
/// ```text
/// g = integral F(w) |f(w)|^2 cos(2 w delta_tau) dw / integral (norm) dw
/// ```
///
/// with |f(w)|^2 = exp(-w^2 / (2 sigma_omega^2)). Without a filter this
/// has the closed form exp(-2 sigma_omega^2 delta_tau^2).
pub fn spectral_overlap(jsa: &JsaSpec, delta_tau: f64) -> Result<f64> {
    jsa.validate()?;
    if !delta_tau.is_finite() {
        return Err(Error::domain("delay must be finite"));
    }
    let sigma = jsa.sigma_omega;
    if let Some(filter) = &jsa.filter {
        let reach = OVERLAP_REACH * sigma;
        let table_reach_rad = filter.max_freq().min(-filter.min_freq()) * std::f64::consts::TAU;
        if table_reach_rad < 6.0 * sigma {
            log::warn!(
                "filter table covers only {:.2} spectral widths; the overlap treats the rest as opaque",
                table_reach_rad / sigma
            );
        }
        let n = OVERLAP_INTERVALS + 1;
        let dw = 2.0 * reach / OVERLAP_INTERVALS as f64;
        let mut num = Vec::with_capacity(n);
        let mut den = Vec::with_capacity(n);
        for i in 0..n {
            let w = -reach + i as f64 * dw;
            let marginal = (-w * w / (2.0 * sigma * sigma)).exp();
            let shaped = marginal * filter.transmission_at(w / std::f64::consts::TAU);
            num.push(shaped * (2.0 * w * delta_tau).cos());
            den.push(if jsa.renormalize { shaped } else { marginal });
        }
        let denominator = trapezoid(&den, dw);
        if denominator <= 0.0 {
            return Err(Error::domain(
                "filtered spectrum integrates to zero; filter blocks the whole line",
            ));
        }
        Ok(trapezoid(&num, dw) / denominator)
    } else {
        Ok((-2.0 * sigma * sigma * delta_tau * delta_tau).exp())
    }
}

/// Parameters of the detected two-photon coincidence model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumDipParams {
    /// Splitter power transmission.
    pub transmission: f64,
    /// Interference contrast of the pair source, in [0, 1].
    pub eta: f64,
    /// Accidental-coincidence fraction, in [0, 1].
    pub zeta: f64,
    /// Overall detected rate scale.
    pub scale: f64,
}

impl QuantumDipParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.transmission.is_finite() && (0.0..=1.0).contains(&self.transmission)) {
            return Err(Error::domain(format!(
                "transmission {} outside [0, 1]",
                self.transmission
            )));
        }
        if !(self.eta.is_finite() && (0.0..=1.0).contains(&self.eta)) {
            return Err(Error::domain(format!("contrast {} outside [0, 1]", self.eta)));
        }
        if !(self.zeta.is_finite() && (0.0..=1.0).contains(&self.zeta)) {
            return Err(Error::domain(format!(
                "accidental fraction {} outside [0, 1]",
                self.zeta
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::domain(format!("rate scale {} must be positive", self.scale)));
        }
        Ok(())
    }
}

/// Expected coincidence rate for a given overlap factor:
///
/// ```text
/// C = K [ (1 - zeta) (t^2 + r^2 - 2 t r eta g) + 2 zeta t r ]
/// ```
///
/// where t is the power transmission, r = 1 - t, and g the spectral
/// overlap at the current delay. Accidentals (fraction zeta) carry no
/// interference and fill the dip floor.
pub fn quantum_coincidence(params: &QuantumDipParams, overlap: f64) -> f64 {
    let t = params.transmission;
    let r = 1.0 - t;
    let base = t * t + r * r;
    let cross = 2.0 * t * r;
    params.scale
        * ((1.0 - params.zeta) * (base - cross * params.eta * overlap) + params.zeta * cross)
}

/// Full counts model at a delay: spectral overlap through the JSA, then
/// the rate formula. This is the curve the fitter adjusts.
pub fn quantum_coincidence_at(
    params: &QuantumDipParams,
    jsa: &JsaSpec,
    delta_tau: f64,
) -> Result<f64> {
    params.validate()?;
    let overlap = spectral_overlap(jsa, delta_tau)?;
    Ok(quantum_coincidence(params, overlap))
}

/// Ideal two-photon coincidence probability after a splitter of power
/// transmission `t`: the textbook dip `t^2 + r^2 - 2 t r g(delta_tau)`.
pub fn hom_coincidence(t: f64, jsa: &JsaSpec, delta_tau: f64) -> Result<f64> {
    let params = QuantumDipParams {
        transmission: t,
        eta: 1.0,
        zeta: 0.0,
        scale: 1.0,
    };
    quantum_coincidence_at(&params, jsa, delta_tau)
}

/// Visibility `1 - C(0) / C(inf)` implied by fitted dip parameters, with
/// the overlap normalized so g(0) = 1 and g(inf) = 0.
pub fn derived_visibility(transmission: f64, eta: f64, zeta: f64) -> Result<f64> {
    let params = QuantumDipParams {
        transmission,
        eta,
        zeta,
        scale: 1.0,
    };
    params.validate()?;
    let c_zero = quantum_coincidence(&params, 1.0);
    let c_far = quantum_coincidence(&params, 0.0);
    if c_far <= 0.0 {
        return Err(Error::domain(
            "baseline coincidence vanishes; visibility is undefined",
        ));
    }
    Ok(1.0 - c_zero / c_far)
}
