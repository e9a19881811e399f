//! Property tests: structural facts that must hold over whole parameter
//! ranges, not just at hand-picked points.

use std::path::Path;

use homlab::config::parse_config_str;
use homlab::correlator::{
    amplitude_mismatch_factor, analytic_classical_dip, EnsembleRecord,
};
use homlab::fock::{spectral_overlap, FilterTable, JsaSpec, Mode, TwoModeState};
use homlab::io;
use homlab::rng::SeedSpace;
use homlab::signals::PhaseDistribution;
use homlab::stats::{bootstrap_ci, min_samples, BootstrapSpec, SampleSummary};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn kets() -> Vec<(u32, u32)> {
    let mut v = Vec::new();
    for n in 0..=6u32 {
        for m in 0..=(6 - n) {
            v.push((n, m));
        }
    }
    v
}

/// Random normalized two-mode states over every ket with n + m <= 6.
fn state() -> impl Strategy<Value = TwoModeState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), kets().len()).prop_filter_map(
        "norm too small",
        |pairs| {
            let amps = kets()
                .into_iter()
                .zip(pairs.into_iter().map(|(re, im)| Complex64::new(re, im)));
            let state = TwoModeState::from_amplitudes(amps).unwrap();
            (state.norm_sqr() > 1e-3).then(|| state.normalized().unwrap())
        },
    )
}

fn photon_expectation(s: &TwoModeState) -> f64 {
    s.kets()
        .map(|((n, m), a)| f64::from(n + m) * a.norm_sqr())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The splitter matrix is real orthogonal and symmetric, so applying
    /// it twice must give back the input state, photon by photon.
    #[test]
    fn splitter_applied_twice_is_the_identity(s in state(), t in 0.01f64..0.99) {
        let twice = s.beam_splitter(t).unwrap().beam_splitter(t).unwrap();
        for (ket, want) in s.kets() {
            let got = twice.amplitude(ket.0, ket.1);
            prop_assert!(
                (got - want).norm() < 1e-10,
                "|{},{}>: {got} vs {want}", ket.0, ket.1
            );
        }
        prop_assert!((twice.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn splitter_conserves_norm_and_photon_number(s in state(), t in 0.0f64..=1.0) {
        let out = s.beam_splitter(t).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((photon_expectation(&out) - photon_expectation(&s)).abs() < 1e-11);
    }

    #[test]
    fn phase_shifts_never_move_population(
        s in state(),
        alpha in -10.0f64..10.0,
        on_b in any::<bool>(),
    ) {
        let mode = if on_b { Mode::B } else { Mode::A };
        let out = s.phase_shift(mode, alpha);
        for (ket, want) in s.kets() {
            let got = out.amplitude(ket.0, ket.1);
            prop_assert!((got.norm() - want.norm()).abs() < 1e-12);
        }
    }
}

proptest! {
    /// The normalized correlation is a ratio of intensity moments, so
    /// rescaling either detector's gain must not move it.
    #[test]
    fn correlation_ignores_detector_gain(
        shots in prop::collection::vec((0.01f64..10.0, 0.01f64..10.0), 3..40),
        gain_plus in 0.01f64..100.0,
        gain_minus in 0.01f64..100.0,
    ) {
        let (u_plus, u_minus): (Vec<f64>, Vec<f64>) = shots.into_iter().unzip();
        let plain = EnsembleRecord::sampled(0.0, u_plus.clone(), u_minus.clone())
            .unwrap()
            .cross_correlation()
            .unwrap();
        let scaled = EnsembleRecord::sampled(
            0.0,
            u_plus.iter().map(|u| gain_plus * u).collect(),
            u_minus.iter().map(|u| gain_minus * u).collect(),
        )
        .unwrap()
        .cross_correlation()
        .unwrap();
        prop_assert!(
            (scaled - plain).abs() <= 1e-12 * plain.abs().max(1.0),
            "{scaled} vs {plain}"
        );
    }

    #[test]
    fn the_analytic_dip_is_symmetric_in_delay(
        tau in -5e-3f64..5e-3,
        sigma in 1e-4f64..1e-2,
    ) {
        let dist = PhaseDistribution::DiscreteUniform(vec![0.0, PI]);
        let fwd = analytic_classical_dip(tau, sigma, &dist).unwrap();
        let bwd = analytic_classical_dip(-tau, sigma, &dist).unwrap();
        prop_assert_eq!(fwd, bwd);
    }

    /// Swapping which pulse is the strong one relabels the arms, so the
    /// mismatch penalty must be the same for a ratio and its inverse.
    #[test]
    fn amplitude_mismatch_is_reciprocal_symmetric(eps in 0.05f64..20.0) {
        let a = amplitude_mismatch_factor(eps).unwrap();
        let b = amplitude_mismatch_factor(1.0 / eps).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-12), "{a} vs {b}");
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn sample_planning_is_monotone(
        mean in 0.1f64..10.0,
        std_dev in 1e-3f64..5.0,
        rel in 5e-3f64..0.3,
        z in 0.5f64..4.0,
    ) {
        let s = SampleSummary::new(mean, std_dev, 2).unwrap();
        let tight = min_samples(&s, rel, z).unwrap();
        let loose = min_samples(&s, 2.0 * rel, z).unwrap();
        let confident = min_samples(&s, rel, 1.5 * z).unwrap();
        prop_assert!(tight >= loose, "tighter width wants {tight} < {loose}");
        prop_assert!(confident >= tight, "higher z wants {confident} < {tight}");
    }

    /// Percentile intervals commute with positive rescaling: the
    /// resample indices depend only on the seed and the sample size.
    #[test]
    fn bootstrap_intervals_scale_with_the_data(
        sample in prop::collection::vec(0.1f64..10.0, 4..40),
        gain in 0.01f64..100.0,
    ) {
        let seeds = SeedSpace::new(5);
        let spec = BootstrapSpec { n_resamples: 400, level: 0.9 };
        let plain = bootstrap_ci(&sample, &spec, &seeds, 7).unwrap();
        let scaled_sample: Vec<f64> = sample.iter().map(|x| gain * x).collect();
        let scaled = bootstrap_ci(&scaled_sample, &spec, &seeds, 7).unwrap();
        prop_assert!((scaled.lo - gain * plain.lo).abs() <= 1e-12 * gain * plain.lo.abs());
        prop_assert!((scaled.hi - gain * plain.hi).abs() <= 1e-12 * gain * plain.hi.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The overlap is a normalized correlation of spectral amplitudes,
    /// so Cauchy-Schwarz pins it to [-1, 1] with equality at zero delay.
    #[test]
    fn spectral_overlap_is_a_normalized_correlation(
        sigma in 1e10f64..1e13,
        delta_tau in -1e-11f64..1e-11,
        filtered in any::<bool>(),
    ) {
        let jsa = if filtered {
            let half_width_hz = sigma;
            JsaSpec {
                sigma_omega: sigma,
                filter: Some(FilterTable::new(vec![
                    (-half_width_hz, 0.0),
                    (0.0, 1.0),
                    (half_width_hz, 0.0),
                ]).unwrap()),
                renormalize: true,
            }
        } else {
            JsaSpec::gaussian(sigma)
        };
        let g = spectral_overlap(&jsa, delta_tau).unwrap();
        prop_assert!(g.abs() <= 1.0 + 1e-9, "overlap {g}");
        let g0 = spectral_overlap(&jsa, 0.0).unwrap();
        prop_assert!((g0 - 1.0).abs() <= 1e-9, "overlap at zero {g0}");
    }
}

proptest! {
    /// Hostile-input rule for every text reader: reject with an error,
    /// never panic.
    #[test]
    fn parsers_never_panic_on_arbitrary_text(text in any::<String>()) {
        let _ = parse_config_str(&text, Path::new("."));
        let _ = io::parse_dip_curve(&text, "prop");
        let _ = io::parse_filter_table(&text, "prop");
        let _ = io::parse_fit_data(&text, "prop");
        let _ = io::parse_values(&text, "prop");
        let _ = io::parse_mzi_scan(&text, "prop");
    }

    /// Same rule with a valid header stapled on, so the row parser and
    /// the config sections see the hostile bytes, not just the first
    /// line check.
    #[test]
    fn parsers_never_panic_past_the_header(body in any::<String>()) {
        for header in [
            io::DIP_CURVE_HEADER,
            io::FILTER_HEADER,
            io::FIT_DATA_HEADER,
            io::VALUES_HEADER,
            io::MZI_SCAN_HEADER,
        ] {
            let text = format!("{header}\n{body}");
            let _ = io::parse_dip_curve(&text, "prop");
            let _ = io::parse_filter_table(&text, "prop");
            let _ = io::parse_fit_data(&text, "prop");
            let _ = io::parse_values(&text, "prop");
            let _ = io::parse_mzi_scan(&text, "prop");
        }
        let config = format!("kind = classical-dip\n{body}");
        let _ = parse_config_str(&config, Path::new("."));
    }

    /// Floats are written with shortest round-trip formatting, so a
    /// write/read cycle must reproduce the exact bits.
    #[test]
    fn csv_round_trips_are_bit_exact(
        data in prop::collection::vec((-1e6f64..1e6, 1e-6f64..1e6), 1..30),
    ) {
        let parsed = io::parse_fit_data(&io::fit_data_to_csv(&data), "prop").unwrap();
        prop_assert_eq!(&parsed, &data);
        let values: Vec<f64> = data.iter().map(|(x, _)| *x).collect();
        let parsed = io::parse_values(&io::values_to_csv(&values), "prop").unwrap();
        prop_assert_eq!(&parsed, &values);
    }
}
