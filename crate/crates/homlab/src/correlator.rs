//! Intensity correlation between the two splitter ports, plus the
//! closed-form dip curves the Monte Carlo runs are checked against.
//!
//! Detectors here are slow: each shot yields one number per port, the
//! intensity integrated over a gate window. The normalized coincidence
//!
//! ```text
//! C = <u_plus u_minus> / (<u_plus> <u_minus>)
//! ```
//!
//! compares the ensemble-averaged product of the integrated intensities to
//! the product of their averages. C = 1 means uncorrelated ports, C < 1
//! anticorrelation (the dip), C > 1 bunching.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{pairwise_sum, trapezoid};
use crate::signals::{PhaseDistribution, SampledSignal, TimeGrid};

/// Intensity integrated over a gate window by trapezoidal quadrature.
///
/// The window must lie on the signal's grid: same spacing, endpoints on
/// sample times inside the record. Real-voltage signals are detected
/// first (squared and band-limited), so the result is the cycle-averaged
/// intensity, half the squared envelope.
pub fn integrated_intensity(signal: &SampledSignal, window: &TimeGrid) -> Result<f64> {
    let dt = signal.dt();
    if ((window.dt() - dt) / dt).abs() > 1e-12 {
        return Err(Error::domain(format!(
            "window spacing {:e} does not match the signal grid {:e}",
            window.dt(),
            dt
        )));
    }
    let offset = (window.t_start() - signal.t_start()) / dt;
    let k0 = offset.round();
    if (offset - k0).abs() > 1e-6 || k0 < 0.0 {
        return Err(Error::domain(
            "window start does not sit on a sample of the signal grid",
        ));
    }
    let k0 = k0 as usize;
    let count = window.sample_count();
    if k0 + count > signal.len() {
        return Err(Error::domain(format!(
            "window of {count} samples from index {k0} leaves the {}-sample record",
            signal.len()
        )));
    }
    let intensity = signal.detected_intensity()?;
    Ok(trapezoid(&intensity[k0..k0 + count], dt))
}

/// One ensemble of per-shot integrated intensities at a fixed delay, with
/// optional probability weights for exactly enumerated ensembles.
#[derive(Debug, Clone)]
pub struct EnsembleRecord {
    delay: f64,
    u_plus: Vec<f64>,
    u_minus: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl EnsembleRecord {
    /// Monte Carlo ensemble: every shot carries weight 1/n.
    pub fn sampled(delay: f64, u_plus: Vec<f64>, u_minus: Vec<f64>) -> Result<Self> {
        Self::build(delay, u_plus, u_minus, None)
    }

    /// Enumerated ensemble: shot i carries probability `weights[i]`.
    pub fn enumerated(
        delay: f64,
        u_plus: Vec<f64>,
        u_minus: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        Self::build(delay, u_plus, u_minus, Some(weights))
    }

    fn build(
        delay: f64,
        mut u_plus: Vec<f64>,
        mut u_minus: Vec<f64>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !delay.is_finite() {
            return Err(Error::Stats("ensemble delay must be finite".into()));
        }
        if u_plus.len() < 2 || u_plus.len() != u_minus.len() {
            return Err(Error::Stats(format!(
                "ensemble needs matching ports with at least 2 shots, got {} and {}",
                u_plus.len(),
                u_minus.len()
            )));
        }
        // Intensities are nonnegative physically; band-limiting can leave
        // ringing dust of order -1e-16 * scale on otherwise-zero shots.
        // Clamp that to zero, reject anything genuinely negative.
        let scale = u_plus
            .iter()
            .chain(u_minus.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        let floor = -1e-12 * scale;
        for u in u_plus.iter_mut().chain(u_minus.iter_mut()) {
            if !u.is_finite() || *u < floor {
                return Err(Error::Stats(format!(
                    "integrated intensity {u:e} is negative beyond rounding dust"
                )));
            }
            if *u < 0.0 {
                *u = 0.0;
            }
        }
        if let Some(w) = &weights {
            if w.len() != u_plus.len() {
                return Err(Error::Stats(format!(
                    "{} weights for {} shots",
                    w.len(),
                    u_plus.len()
                )));
            }
            if w.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
                return Err(Error::Stats("weights must be finite and >= 0".into()));
            }
            let total: f64 = pairwise_sum(w);
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Stats(format!("weights sum to {total}, expected 1")));
            }
        }
        Ok(EnsembleRecord {
            delay,
            u_plus,
            u_minus,
            weights,
        })
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn sample_count(&self) -> usize {
        self.u_plus.len()
    }

    pub fn u_plus(&self) -> &[f64] {
        &self.u_plus
    }

    pub fn u_minus(&self) -> &[f64] {
        &self.u_minus
    }

    fn weighted_mean(&self, values: impl Iterator<Item = f64>) -> f64 {
        match &self.weights {
            Some(w) => {
                let terms: Vec<f64> = values.zip(w).map(|(v, &wi)| v * wi).collect();
                pairwise_sum(&terms)
            }
            None => {
                let terms: Vec<f64> = values.collect();
                pairwise_sum(&terms) / terms.len() as f64
            }
        }
    }

    pub fn mean_plus(&self) -> f64 {
        self.weighted_mean(self.u_plus.iter().copied())
    }

    pub fn mean_minus(&self) -> f64 {
        self.weighted_mean(self.u_minus.iter().copied())
    }

    /// Unnormalized coincidence signal `<u_plus u_minus>`.
    pub fn mean_product(&self) -> f64 {
        self.weighted_mean(self.u_plus.iter().zip(&self.u_minus).map(|(&a, &b)| a * b))
    }

    /// Normalized cross correlation `<u+ u-> / (<u+> <u->)`.
    pub fn cross_correlation(&self) -> Result<f64> {
        let denom = self.mean_plus() * self.mean_minus();
        if denom <= 0.0 || !denom.is_finite() {
            return Err(Error::Stats(format!(
                "normalization <u+><u-> = {denom:e} is not positive"
            )));
        }
        Ok(self.mean_product() / denom)
    }

    /// The per-shot products whose mean is the unnormalized coincidence;
    /// this is what the bootstrap resamples.
    pub fn products(&self) -> Vec<f64> {
        self.u_plus
            .iter()
            .zip(&self.u_minus)
            .map(|(&a, &b)| a * b)
            .collect()
    }
}

/// Dip visibility `1 - C(0) / C(far)`.
///
/// `c_far` is the correlation far outside the overlap region; it
/// normalizes away the ensemble's baseline. Fails if the baseline is not
/// positive, which signals a broken ensemble rather than a deep dip.
pub fn dip_visibility(c_zero: f64, c_far: f64) -> Result<f64> {
    if !(c_far.is_finite() && c_far > 0.0) {
        return Err(Error::Stats(format!(
            "far-delay correlation {c_far} must be positive"
        )));
    }
    if !c_zero.is_finite() {
        return Err(Error::Stats("zero-delay correlation must be finite".into()));
    }
    Ok(1.0 - c_zero / c_far)
}

/// Expected dip visibility of a phase ensemble: E[cos^2 phi].
///
/// Only meaningful for ensembles with E[cos phi] = 0; otherwise ordinary
/// single-shot interference survives the averaging and the dip picture
/// breaks down, so that case is rejected.
pub fn analytic_visibility(dist: &PhaseDistribution) -> Result<f64> {
    let mean_cos = dist.mean_cos();
    if mean_cos.abs() > 1e-9 {
        return Err(Error::PhaseDistribution(format!(
            "E[cos phi] = {mean_cos:e}; the phase ensemble must average the field to zero"
        )));
    }
    Ok(dist.mean_cos_sq())
}

/// Closed-form classical dip for equal-amplitude Gaussian pulses:
///
/// ```text
/// C(tau) = 1 - V exp(-tau^2 / (2 sigma^2))
/// ```
///
/// The envelope overlap falls as exp(-tau^2/(4 sigma^2)) and enters the
/// coincidence squared, hence the width.
pub fn analytic_classical_dip(
    tau: f64,
    envelope_sigma: f64,
    dist: &PhaseDistribution,
) -> Result<f64> {
    if !(envelope_sigma.is_finite() && envelope_sigma > 0.0) {
        return Err(Error::domain("envelope sigma must be positive"));
    }
    if !tau.is_finite() {
        return Err(Error::domain("delay must be finite"));
    }
    let v = analytic_visibility(dist)?;
    Ok(1.0 - v * (-tau * tau / (2.0 * envelope_sigma * envelope_sigma)).exp())
}

/// Visibility penalty for unequal pulse amplitudes with ratio `epsilon`:
/// the dip depth scales by (2 eps / (1 + eps^2))^2, symmetric under
/// swapping which pulse is weaker.
pub fn amplitude_mismatch_factor(epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::domain(format!(
            "amplitude ratio {epsilon} must be positive"
        )));
    }
    let u = 2.0 * epsilon / (1.0 + epsilon * epsilon);
    Ok(u * u)
}

/// One point of a measured or simulated dip curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipPoint {
    pub tau_s: f64,
    pub c_mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Correlation versus delay with bootstrap confidence bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipCurve {
    points: Vec<DipPoint>,
}

impl DipCurve {
    pub fn new(points: Vec<DipPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Stats("dip curve needs at least one point".into()));
        }
        for p in &points {
            if !(p.tau_s.is_finite()
                && p.c_mean.is_finite()
                && p.ci_lo.is_finite()
                && p.ci_hi.is_finite())
            {
                return Err(Error::Stats("dip curve values must be finite".into()));
            }
            if !(p.ci_lo <= p.c_mean && p.c_mean <= p.ci_hi) {
                return Err(Error::Stats(format!(
                    "confidence bounds [{}, {}] do not bracket the mean {}",
                    p.ci_lo, p.ci_hi, p.c_mean
                )));
            }
        }
        for pair in points.windows(2) {
            if !(pair[1].tau_s > pair[0].tau_s) {
                return Err(Error::Stats(format!(
                    "delays must strictly increase ({} then {})",
                    pair[0].tau_s, pair[1].tau_s
                )));
            }
        }
        Ok(DipCurve { points })
    }

    pub fn points(&self) -> &[DipPoint] {
        &self.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{synthesize_pulse, PulseSpec, Representation};
    use std::f64::consts::PI;

    fn gauss_pulse() -> (SampledSignal, TimeGrid) {
        let spec = PulseSpec {
            amplitude: 0.05,
            envelope_sigma: 1e-3,
            carrier_freq: 1e3,
            delay: 0.0,
            phase: 0.0,
        };
        let grid = TimeGrid::new(-8e-3, 8e-3, 5e-6).unwrap();
        (
            synthesize_pulse(&spec, &grid, Representation::Analytic).unwrap(),
            grid,
        )
    }

    #[test]
    fn integrated_gaussian_intensity_matches_closed_form() {
        // integral of A^2 exp(-t^2/sigma^2) dt = A^2 sigma sqrt(pi)
        let (sig, grid) = gauss_pulse();
        let energy = integrated_intensity(&sig, &grid).unwrap();
        let expect = 0.05f64.powi(2) * 1e-3 * PI.sqrt();
        assert!(
            ((energy - expect) / expect).abs() < 1e-9,
            "energy {energy:e}, closed form {expect:e}"
        );
    }

    #[test]
    fn half_window_captures_half_of_a_centered_pulse() {
        let (sig, _) = gauss_pulse();
        let full = integrated_intensity(&sig, &sig.grid()).unwrap();
        let half_window = TimeGrid::new(-8e-3, 0.0, 5e-6).unwrap();
        let half = integrated_intensity(&sig, &half_window).unwrap();
        assert!(
            (half / full - 0.5).abs() < 1e-3,
            "half-window ratio {}",
            half / full
        );
    }

    #[test]
    fn windows_must_sit_on_the_signal_grid() {
        let (sig, _) = gauss_pulse();
        let outside = TimeGrid::new(-9e-3, 0.0, 5e-6).unwrap();
        assert!(integrated_intensity(&sig, &outside).is_err());
        let wrong_dt = TimeGrid::new(-8e-3, 8e-3, 4e-6).unwrap();
        assert!(integrated_intensity(&sig, &wrong_dt).is_err());
        let off_grid = TimeGrid::new(-8e-3 + 2.5e-6, 2.5e-6, 5e-6).unwrap();
        assert!(integrated_intensity(&sig, &off_grid).is_err());
    }

    #[test]
    fn anticorrelated_shots_give_zero_coincidence() {
        // phases {0, pi}: each shot dumps everything into one port
        let shots = EnsembleRecord::sampled(0.0, vec![2.0, 0.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(shots.mean_product(), 0.0);
        assert!((shots.cross_correlation().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn constant_shots_give_unit_coincidence() {
        let shots = EnsembleRecord::sampled(0.0, vec![1.5; 64], vec![0.7; 64]).unwrap();
        assert!((shots.cross_correlation().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_is_scale_invariant() {
        let u_plus = vec![1.0, 2.0, 3.0, 0.5];
        let u_minus = vec![0.3, 0.9, 0.1, 1.0];
        let base = EnsembleRecord::sampled(0.0, u_plus.clone(), u_minus.clone())
            .unwrap()
            .cross_correlation()
            .unwrap();
        let scaled = EnsembleRecord::sampled(
            0.0,
            u_plus.iter().map(|x| 7.25 * x).collect(),
            u_minus.iter().map(|x| 0.04 * x).collect(),
        )
        .unwrap()
        .cross_correlation()
        .unwrap();
        assert!(((base - scaled) / base).abs() < 1e-12);
    }

    #[test]
    fn weighted_ensemble_reproduces_duplicated_shots() {
        // weight 3/4 on shot A, 1/4 on shot B == A,A,A,B unweighted
        let weighted =
            EnsembleRecord::enumerated(0.0, vec![2.0, 0.4], vec![0.1, 1.2], vec![0.75, 0.25])
                .unwrap();
        let duplicated =
            EnsembleRecord::sampled(0.0, vec![2.0, 2.0, 2.0, 0.4], vec![0.1, 0.1, 0.1, 1.2])
                .unwrap();
        let (a, b) = (
            weighted.cross_correlation().unwrap(),
            duplicated.cross_correlation().unwrap(),
        );
        assert!(((a - b) / b).abs() < 1e-12);
    }

    #[test]
    fn records_validate_shapes_weights_and_signs() {
        assert!(EnsembleRecord::sampled(0.0, vec![], vec![]).is_err());
        assert!(EnsembleRecord::sampled(0.0, vec![1.0], vec![1.0]).is_err());
        assert!(EnsembleRecord::sampled(0.0, vec![1.0, 1.0], vec![1.0, -0.5]).is_err());
        assert!(
            EnsembleRecord::enumerated(0.0, vec![1.0, 1.0], vec![1.0, 1.0], vec![0.7, 0.7])
                .is_err()
        );
        // ringing dust just below zero is clamped, not rejected
        let dusty =
            EnsembleRecord::sampled(0.0, vec![1.0, -1e-15], vec![1.0, 1.0]).unwrap();
        assert!(dusty.u_plus()[1] == 0.0);
    }

    #[test]
    fn zero_port_mean_is_an_error_not_a_dip() {
        let shots = EnsembleRecord::sampled(0.0, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(shots.cross_correlation().is_err());
    }

    #[test]
    fn visibility_reads_off_the_dip_depth() {
        assert!((dip_visibility(0.25, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((dip_visibility(0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(dip_visibility(0.5, 0.0).is_err());
        assert!(dip_visibility(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn phase_ensemble_visibilities_hit_the_four_reference_values() {
        let two = PhaseDistribution::DiscreteUniform(vec![0.0, PI]);
        assert!((analytic_visibility(&two).unwrap() - 1.0).abs() < 1e-12);
        let quarter = PhaseDistribution::DiscreteUniform(vec![PI / 2.0, 3.0 * PI / 2.0]);
        assert!(analytic_visibility(&quarter).unwrap().abs() < 1e-12);
        let four =
            PhaseDistribution::DiscreteUniform(vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
        assert!((analytic_visibility(&four).unwrap() - 0.5).abs() < 1e-12);
        let cont = PhaseDistribution::ContinuousUniform;
        assert!((analytic_visibility(&cont).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn biased_phase_ensembles_are_rejected() {
        let stuck = PhaseDistribution::DiscreteUniform(vec![0.0]);
        assert!(analytic_visibility(&stuck).is_err());
        let tilted =
            PhaseDistribution::WeightedDiscrete(vec![(0.0, 0.75), (PI, 0.25)]);
        assert!(analytic_visibility(&tilted).is_err());
    }

    #[test]
    fn classical_dip_curve_hits_known_points() {
        let two = PhaseDistribution::DiscreteUniform(vec![0.0, PI]);
        let sigma = 1e-3;
        assert!(analytic_classical_dip(0.0, sigma, &two).unwrap().abs() < 1e-12);
        let far = analytic_classical_dip(0.1, sigma, &two).unwrap();
        assert!((far - 1.0).abs() < 1e-12);
        // tau = sigma: 1 - exp(-1/2)
        let mid = analytic_classical_dip(sigma, sigma, &two).unwrap();
        assert!((mid - 0.393_469_340_287_366_6).abs() < 1e-12);
    }

    #[test]
    fn dip_and_visibility_functions_are_inverse_on_the_closed_form() {
        let four =
            PhaseDistribution::DiscreteUniform(vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
        let sigma = 1e-3;
        let c0 = analytic_classical_dip(0.0, sigma, &four).unwrap();
        let cfar = analytic_classical_dip(0.5, sigma, &four).unwrap();
        let v = dip_visibility(c0, cfar).unwrap();
        assert!((v - analytic_visibility(&four).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mismatch_factor_is_symmetric_and_peaks_at_one() {
        assert!((amplitude_mismatch_factor(1.0).unwrap() - 1.0).abs() < 1e-15);
        for eps in [0.3, 0.618, 0.9414] {
            let a = amplitude_mismatch_factor(eps).unwrap();
            let b = amplitude_mismatch_factor(1.0 / eps).unwrap();
            assert!(((a - b) / a).abs() < 1e-12, "eps = {eps}");
            assert!(a < 1.0);
        }
        assert!(amplitude_mismatch_factor(0.0).is_err());
        assert!(amplitude_mismatch_factor(-2.0).is_err());
    }

    #[test]
    fn dip_curves_validate_ordering_and_bracketing() {
        let good = DipCurve::new(vec![
            DipPoint {
                tau_s: -1.0,
                c_mean: 0.5,
                ci_lo: 0.4,
                ci_hi: 0.6,
            },
            DipPoint {
                tau_s: 0.0,
                c_mean: 0.1,
                ci_lo: 0.1,
                ci_hi: 0.1,
            },
        ]);
        assert!(good.is_ok());
        assert!(DipCurve::new(vec![]).is_err());
        let bad_bracket = DipCurve::new(vec![DipPoint {
            tau_s: 0.0,
            c_mean: 0.5,
            ci_lo: 0.6,
            ci_hi: 0.7,
        }]);
        assert!(bad_bracket.is_err());
        let bad_order = DipCurve::new(vec![
            DipPoint {
                tau_s: 1.0,
                c_mean: 0.5,
                ci_lo: 0.4,
                ci_hi: 0.6,
            },
            DipPoint {
                tau_s: 0.0,
                c_mean: 0.5,
                ci_lo: 0.4,
                ci_hi: 0.6,
            },
        ]);
        assert!(bad_order.is_err());
    }
}
