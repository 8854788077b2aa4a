use std::f64::consts::TAU;

use axionkit_core::geometry::{EphemerisConstants, ModulationCoefficients};
use axionkit_core::rng::stream_rng;
use axionkit_core::signal::noise::white_noise;
use axionkit_core::signal::{synthesize_baseband, BasebandModel, NoiseConfig, TimeSeries};
use axionkit_core::spectral::{
    periodogram, snr_estimate, triplet_from_series, triplet_statistic, window_response, PeriodogramConfig,
    Spectrum, TripletPhases, WindowKind,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn welch(kind: WindowKind, segment: usize) -> PeriodogramConfig {
    PeriodogramConfig { window: kind, segment: Some(segment), overlap: 0.5, detrend: false }
}

#[test]
fn white_noise_spectrum_is_flat_at_the_parseval_level() {
    let (dt, psd) = (0.5, 3.0);
    let x = white_noise(1 << 18, dt, psd, &mut stream_rng(21, 1));
    let sigma2 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let spec = periodogram(&TimeSeries::real(0.0, dt, x).unwrap(), &welch(WindowKind::Hann, 1024)).unwrap();
    assert!(spec.segments >= 100);
    let level = 2.0 * dt * sigma2;
    let inner = &spec.psd[1..spec.psd.len() - 1];
    for third in inner.chunks(inner.len() / 3) {
        let mean = third.iter().sum::<f64>() / third.len() as f64;
        assert!((mean / level - 1.0).abs() < 0.05, "band level {mean} vs {level}");
    }
}

#[test]
fn parseval_closure_for_both_windows() {
    let dt = 1.0;
    let n = 1 << 17;
    let mut rng = stream_rng(8, 2);
    // AR(1) colouring keeps the process stationary with a short memory.
    let w = white_noise(n, dt, 1.0, &mut rng);
    let mut x = Vec::with_capacity(n);
    let mut prev = 0.0;
    for v in w {
        prev = 0.8 * prev + v;
        x.push(prev);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let ts = TimeSeries::real(0.0, dt, x).unwrap();
    for kind in [WindowKind::Rectangular, WindowKind::Hann] {
        let spec = periodogram(&ts, &welch(kind, 4096)).unwrap();
        assert!(spec.segments >= 20);
        assert!((spec.total_power() / var - 1.0).abs() < 0.02, "{kind:?}: {} vs {var}", spec.total_power());
    }
}

#[test]
fn tone_power_and_two_tone_resolution() {
    let (dt, n) = (1.0, 1 << 16);
    let seg = 4096;
    let resolution = window_response(WindowKind::Hann, seg as f64 * dt).unwrap().resolution_hz;
    let (f1, a1) = (0.1, 0.8);
    let f2 = f1 + 3.0 * resolution;
    let a2 = 0.5;
    let x: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            a1 * (TAU * f1 * t).cos() + a2 * (TAU * f2 * t + 1.0).cos()
        })
        .collect();
    let spec = periodogram(&TimeSeries::real(0.0, dt, x).unwrap(), &welch(WindowKind::Hann, seg)).unwrap();
    let half = 0.5 * (f2 - f1);
    let p1 = spec.band_power(f1 - half, f1 + half);
    let p2 = spec.band_power(f2 - half, f2 + half);
    assert!((p1 / (a1 * a1 / 2.0) - 1.0).abs() < 0.02, "{p1}");
    assert!((p2 / (a2 * a2 / 2.0) - 1.0).abs() < 0.02, "{p2}");
    // Two separate maxima with a dip between them.
    let (fp1, s1) = spec.peak_in(f1 - half, f1 + half).unwrap();
    let (fp2, s2) = spec.peak_in(f2 - half, f2 + half).unwrap();
    let k_mid = ((0.5 * (fp1 + fp2) - spec.f0) / spec.df).round() as usize;
    assert!(spec.psd[k_mid] < 0.1 * s1.min(s2));
    assert!((fp1 - f1).abs() <= spec.df && (fp2 - f2).abs() <= spec.df);
}

fn triplet_model(eps: f64, ph: TripletPhases, scale: f64) -> BasebandModel {
    let c = ModulationCoefficients {
        c0: 0.1 * scale,
        c_star: 0.5 * scale,
        c_annual: 0.02 * scale,
        c_cross: 0.5 * eps * scale,
        psi_star: ph.psi_star,
        psi_annual: ph.psi_annual,
    };
    BasebandModel::from_coefficients(c, EphemerisConstants::default())
}

/// Frequencies of local maxima within `[f_lo, f_hi]`.
fn maxima_in(spec: &Spectrum, f_lo: f64, f_hi: f64) -> Vec<f64> {
    (1..spec.psd.len() - 1)
        .filter(|&k| {
            let f = spec.frequency(k);
            f >= f_lo && f <= f_hi && spec.psd[k] > spec.psd[k - 1] && spec.psd[k] > spec.psd[k + 1]
        })
        .map(|k| spec.frequency(k))
        .collect()
}

#[test]
fn triplet_is_resolved_only_when_the_window_is_narrow_enough() {
    let ph = TripletPhases { psi_star: 0.3, psi_annual: 1.0 };
    let model = triplet_model(0.3, ph, 1.0);
    let eph = model.ephemeris;
    let fs = eph.sidereal_frequency();
    let fe = eph.annual_frequency();
    let dt = 1000.0;
    for (years, resolved) in [(4.0, true), (0.5, false)] {
        let span = years * eph.year();
        let ts = synthesize_baseband(&model, &NoiseConfig::silent(), 10, 0.0, span, dt).unwrap();
        let cfg = PeriodogramConfig { detrend: true, ..PeriodogramConfig::default() };
        let spec = periodogram(&ts, &cfg).unwrap();
        let width = window_response(WindowKind::Rectangular, span).unwrap().resolution_hz;
        assert_eq!(width < fe, resolved);
        let maxima = maxima_in(&spec, fs - 1.5 * fe, fs + 1.5 * fe);
        if resolved {
            assert_eq!(maxima.len(), 3, "{years} y: {maxima:?}");
            for (m, target) in maxima.iter().zip([fs - fe, fs, fs + fe]) {
                assert!((m - target).abs() <= spec.df, "{m} vs {target}");
            }
        } else {
            // One broad line; the sidebands sit on its flanks.
            assert_eq!(maxima.len(), 1, "{years} y: {maxima:?}");
        }
    }
}

#[test]
fn power_statistics_scale_quadratically_and_are_symmetric() {
    let ph = TripletPhases { psi_star: 2.1, psi_annual: 0.4 };
    let eph = EphemerisConstants::default();
    let span = 2.0 * eph.year();
    let run = |scale: f64| {
        let ts = synthesize_baseband(&triplet_model(0.1, ph, scale), &NoiseConfig::silent(), 10, 0.0, span, 1000.0).unwrap();
        (
            triplet_from_series(&ts, None, &eph, Some(ph)).unwrap(),
            triplet_from_series(&ts, None, &eph, None).unwrap(),
        )
    };
    let (l1, a1) = run(1.0);
    let (l2, a2) = run(2.0);
    for (x1, x2) in [(l1.x_star, l2.x_star), (l1.x_plus, l2.x_plus), (a1.x_star, a2.x_star), (a1.x_minus, a2.x_minus)] {
        assert!((x2 / x1 - 4.0).abs() < 1e-9, "{x1} {x2}");
    }
    assert!((l1.x_plus / l1.x_minus - 1.0).abs() < 1e-9);
    assert!((l1.x_plus / l1.x_star / 2.5e-3 - 1.0).abs() < 1e-6);
    // Locking to the wrong annual phase loses most of the sideband amplitude.
    let wrong = TripletPhases { psi_annual: ph.psi_annual + 1.2, ..ph };
    let ts = synthesize_baseband(&triplet_model(0.1, ph, 1.0), &NoiseConfig::silent(), 10, 0.0, span, 1000.0).unwrap();
    let w = triplet_from_series(&ts, None, &eph, Some(wrong)).unwrap();
    assert!(w.epsilon_hat < 0.5 * 0.1, "{}", w.epsilon_hat);
}

#[test]
fn zero_depth_gives_sidebands_at_noise_level() {
    let ph = TripletPhases { psi_star: 0.9, psi_annual: 2.5 };
    let model = triplet_model(0.0, ph, 1.0);
    let eph = model.ephemeris;
    let dt = 1000.0;
    let psd = 200.0;
    let noise = NoiseConfig { readout: false, pink_amplitude: 0.0, rtn_amplitude: 0.0, ..NoiseConfig::white(psd, 4) };
    let ts = synthesize_baseband(&model, &noise, 10, 0.0, 60.0 * 86_400.0, dt).unwrap();
    let r = triplet_from_series(&ts, None, &eph, Some(ph)).unwrap();
    let n = ts.len() as f64;
    let sigma = (psd / (2.0 * dt)).sqrt();
    // a₊ + a₋ scatters by about 2σ/√n over a 60-day record.
    let spread = 2.0 * sigma / n.sqrt() / 0.5;
    let eps = r.epsilon_locked.unwrap();
    assert!(eps.abs() < 5.0 * spread, "{eps} vs {spread}");
    let noiseless = synthesize_baseband(&model, &NoiseConfig::silent(), 10, 0.0, 60.0 * 86_400.0, dt).unwrap();
    let q = triplet_from_series(&noiseless, None, &eph, Some(ph)).unwrap();
    assert!(q.epsilon_hat < 1e-9 && q.epsilon_locked.unwrap().abs() < 1e-9);
}

#[test]
fn triplet_rejects_zero_weights() {
    let eph = EphemerisConstants::default();
    let t: Vec<f64> = (0..100).map(|k| k as f64 * 100.0).collect();
    let y = vec![1.0; 100];
    let w = vec![0.0; 100];
    assert!(triplet_statistic(&t, &y, Some(&w), &eph, None).is_err());
}

#[test]
fn snr_scaling_laws() {
    let x = white_noise(1 << 14, 1.0, 2.0, &mut stream_rng(1, 1));
    let spec = periodogram(&TimeSeries::real(0.0, 1.0, x).unwrap(), &welch(WindowKind::Hann, 512)).unwrap();
    let a = snr_estimate(0.3, &spec, 0.2, 100.0, 0.0).unwrap();
    assert_eq!(a.snr_pm, 0.0);
    let b = snr_estimate(0.3, &spec, 0.2, 200.0, 0.1).unwrap();
    assert!((b.snr_star / a.snr_star - 2f64.sqrt()).abs() < 1e-12);
    assert!((b.snr_pm / b.snr_star - 0.05).abs() < 1e-15);
}

#[test]
fn predicted_snr_matches_monte_carlo_peak_to_background() {
    let (dt, n, psd, amp) = (1.0, 4096usize, 1.0, 0.2);
    let k_tone = 500;
    let f_tone = k_tone as f64 / (n as f64 * dt);
    let planner = &mut rustfft::FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut peak = 0.0;
    let mut background = 0.0;
    let mut predicted = 0.0;
    let trials = 100;
    for trial in 0..trials {
        let noise = white_noise(n, dt, psd, &mut stream_rng(500 + trial, 1));
        // Noise floor from an independent stretch of the same process.
        let reference = white_noise(1 << 15, dt, psd, &mut stream_rng(900 + trial, 1));
        let spec = periodogram(&TimeSeries::real(0.0, dt, reference).unwrap(), &welch(WindowKind::Hann, 512)).unwrap();
        predicted += snr_estimate(amp, &spec, f_tone, n as f64 * dt, 0.0).unwrap().snr_star;

        let mut buf: Vec<Complex64> = noise
            .iter()
            .enumerate()
            .map(|(k, w)| Complex64::new(amp * (TAU * f_tone * k as f64 * dt + 0.4).cos() + w, 0.0))
            .collect();
        fft.process(&mut buf);
        let z: Vec<f64> = buf.iter().map(|c| 2.0 * c.norm() / n as f64).collect();
        peak += z[k_tone];
        let off: Vec<f64> = (50..n / 2 - 50).filter(|k| k.abs_diff(k_tone) > 5).map(|k| z[k] * z[k]).collect();
        background += (off.iter().sum::<f64>() / off.len() as f64 / 2.0).sqrt();
    }
    let measured = peak / background;
    let predicted = predicted / trials as f64;
    assert!((measured / predicted - 1.0).abs() < 0.2, "measured {measured}, predicted {predicted}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn power_is_quadratic_in_amplitude(k in 0.1f64..10.0, psi in 0.0f64..std::f64::consts::TAU) {
        let eph = EphemerisConstants::default();
        let t: Vec<f64> = (0..2000).map(|i| i as f64 * 3000.0).collect();
        let y: Vec<f64> = t.iter().map(|&t| (eph.sidereal_rate * t - psi).cos() + 0.1).collect();
        let y2: Vec<f64> = y.iter().map(|v| v * k).collect();
        let ph = Some(TripletPhases { psi_star: psi, psi_annual: 0.0 });
        let a = triplet_statistic(&t, &y, None, &eph, ph).unwrap();
        let b = triplet_statistic(&t, &y2, None, &eph, ph).unwrap();
        prop_assert!((b.x_star / a.x_star / (k * k) - 1.0).abs() < 1e-9);
    }
}
