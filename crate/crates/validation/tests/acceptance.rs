//! Acceptance criteria for the whole toolkit. Each criterion prints exactly
//! one PASS or FAIL line followed by its individual measurements; the process
//! exits non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::fs;
use std::panic;
use std::time::{Duration, Instant};

use axionkit_cli::config::RunConfig;
use axionkit_core::geometry::{coefficients_for_site, geometric_gains, EphemerisConstants, SiteGeometry};
use axionkit_core::halo::{self, AxionParams, HaloParams};
use axionkit_core::rng::{derive_seed, stream_rng};
use axionkit_core::sensitivity::{g_min_curve, log_grid, look_elsewhere_threshold, GainMode, Preset, Regime, SearchConfig};
use axionkit_core::signal::daily::{daily_rms_monte_carlo, DailyRmsEstimator};
use axionkit_core::signal::noise::white_noise;
use axionkit_core::signal::{
    bessel_sideband_table, spin_expectation, synthesize_baseband, BasebandModel, NoiseConfig, TimeSeries,
};
use axionkit_core::spectral::{
    periodogram, triplet_from_series, window_response, PeriodogramConfig, Spectrum, TripletPhases, WindowKind,
};
use axionkit_core::units::C_KM_S;
use num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::function::erf::erfc;

/// One measured quantity compared with its target.
struct Item {
    label: String,
    ok: bool,
}

#[derive(Default)]
struct Report {
    items: Vec<Item>,
}

impl Report {
    fn rel(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        let dev = (value - target).abs() / target.abs();
        self.items.push(Item {
            label: format!("{label} = {value:.6e} (target {target:.4e} ± {:.1}%, off by {:.2}%)", tol * 100.0, dev * 100.0),
            ok: dev <= tol,
        });
    }

    fn abs(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        let dev = (value - target).abs();
        self.items.push(Item {
            label: format!("{label} = {value:.6e} (target {target:.4e} ± {tol:.1e}, off by {dev:.2e})"),
            ok: dev <= tol,
        });
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        self.items.push(Item { label: label.into(), ok });
    }
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn(&mut Report),
}

fn main() {
    let criteria = [
        Criterion { id: 1, title: "geometric gains", budget: Duration::from_secs(1), run: geometric_gains_check },
        Criterion { id: 2, title: "halo numbers", budget: Duration::from_secs(1), run: halo_numbers },
        Criterion { id: 3, title: "effective field", budget: Duration::from_secs(1), run: effective_field },
        Criterion { id: 4, title: "triplet morphology", budget: Duration::from_secs(60), run: triplet_morphology },
        Criterion { id: 5, title: "sub-year coherent recovery", budget: Duration::from_secs(60), run: sub_year_recovery },
        Criterion { id: 6, title: "daily-RMS robustness", budget: Duration::from_secs(600), run: daily_rms_robustness },
        Criterion { id: 7, title: "Bessel sidebands", budget: Duration::from_secs(1), run: bessel_sidebands },
        Criterion { id: 8, title: "sensitivity scaling", budget: Duration::from_secs(60), run: sensitivity_scaling },
        Criterion { id: 9, title: "statistical plumbing", budget: Duration::from_secs(60), run: statistical_plumbing },
    ];
    let mut failed = 0;
    for c in &criteria {
        let mut report = Report::default();
        let start = Instant::now();
        let outcome = panic::catch_unwind(panic::AssertUnwindSafe(|| (c.run)(&mut report)));
        let elapsed = start.elapsed();
        if let Err(e) = &outcome {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            report.check(format!("aborted: {msg}"), false);
        }
        report.check(
            format!("runtime {:.2} s (budget {} s)", elapsed.as_secs_f64(), c.budget.as_secs()),
            elapsed <= c.budget,
        );
        let pass = report.items.iter().all(|i| i.ok);
        if !pass {
            failed += 1;
        }
        println!("{} criterion {}: {}", if pass { "PASS" } else { "FAIL" }, c.id, c.title);
        for item in &report.items {
            println!("      [{}] {}", if item.ok { "ok" } else { "miss" }, item.label);
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn geometric_gains_check(r: &mut Report) {
    let site = SiteGeometry { latitude_deg: 39.9, wind_dec_deg: 30.0, ..SiteGeometry::default() };
    let g = geometric_gains(&site).unwrap();
    r.rel("p0", g.p0, 0.321, 0.005);
    r.rel("<P^2>", g.mean_square_projection, 0.324, 0.005);
    r.rel("G_daily", g.g_daily, 1.77, 0.005);
    r.rel("G_3axis", g.g_three_axis, 1.76, 0.005);
    r.rel("G_total", g.total(3), 5.40, 0.005);
}

fn halo_numbers(r: &mut Report) {
    let h = HaloParams { v0: 230.0, v_esc: 544.0, ..HaloParams::default() };
    let axion = AxionParams { m_a: 1.0, ..AxionParams::default() };
    r.rel("second-moment dnu/nu", halo::fractional_linewidth(&h).unwrap(), 3.9e-7, 0.05);
    r.rel("tau_a(1 ueV) [s]", halo::coherence_time(&axion, &h).unwrap(), 3.3e-3, 0.10);
    r.rel("FWHM(1 ueV) [Hz]", halo::lineshape_fwhm(&axion, &h).unwrap(), 117.0, 0.10);

    let nu_a = axion.frequency();
    let below: Vec<f64> = (1..=2000).map(|k| nu_a * (1.0 - k as f64 * 1e-9)).rev().collect();
    let zero = halo::shm_lineshape(&below, &axion, &h).unwrap().iter().all(|&g| g == 0.0);
    r.check("line shape vanishes below nu_a", zero);

    // Trapezoid on a grid that resolves the width by thousands of points.
    let top = halo::lineshape_upper_edge(&axion, &h);
    let n = 400_000;
    let step = (top - nu_a) / n as f64;
    let grid: Vec<f64> = (0..=n).map(|k| nu_a + k as f64 * step).collect();
    let g = halo::shm_lineshape(&grid, &axion, &h).unwrap();
    let integral = step * (g.iter().sum::<f64>() - 0.5 * (g[0] + g[n]));
    r.abs("normalisation", integral, 1.0, 1e-6);
}

fn effective_field(r: &mut Report) {
    let h = HaloParams::default();
    let v = 1e-3 * C_KM_S;
    let a = AxionParams { g_ae: 1e-13, ..AxionParams::default() };
    let b = halo::effective_field(&a, &h, v);
    r.check(
        format!("B_eff(g=1e-13, v=1e-3 c) = {b:.4e} T (target within a factor 3 of 1e-21 T)"),
        (1e-21 / 3.0..=3e-21).contains(&b),
    );
    let mut worst: f64 = 0.0;
    for k in [0.5, 2.0, 3.0, 10.0, 1e3] {
        let bk = halo::effective_field(&AxionParams { g_ae: k * a.g_ae, ..a }, &h, v);
        worst = worst.max((bk / (k * b) - 1.0).abs());
    }
    r.check(format!("linearity in g_ae: worst relative deviation {worst:.1e}"), worst <= 4.0 * f64::EPSILON);
    r.check("B_eff(g=0) = 0", halo::effective_field(&AxionParams { g_ae: 0.0, ..a }, &h, v) == 0.0);
}

/// Pure expansion of the default site with the cross term set to give `eps`.
fn injected_model(eps: f64) -> BasebandModel {
    let eph = EphemerisConstants::default();
    let mut c = coefficients_for_site(&SiteGeometry::default(), &eph, 1.0, 1800.0).unwrap().coefficients;
    c.c_cross = eps * c.c_star;
    BasebandModel::from_coefficients(c, eph)
}

fn peak_near(spec: &Spectrum, f: f64, half_width: f64) -> (f64, f64) {
    spec.peak_in(f - half_width, f + half_width).expect("line inside the spectrum")
}

fn triplet_morphology(r: &mut Report) {
    let eps = 0.1;
    let model = injected_model(eps);
    let eph = model.ephemeris;
    let span = 4.0 * eph.year();
    let ts = synthesize_baseband(&model, &NoiseConfig::silent(), 10, 0.0, span, 1e3).unwrap();
    let cfg = PeriodogramConfig { window: WindowKind::Rectangular, segment: None, overlap: 0.0, detrend: true };
    let spec = periodogram(&ts, &cfg).unwrap();
    let (fs, fe) = (eph.sidereal_frequency(), eph.annual_frequency());
    let hw = 0.4 * fe;
    let (f_c, p_c) = peak_near(&spec, fs, hw);
    let (f_u, p_u) = peak_near(&spec, fs + fe, hw);
    let (f_l, p_l) = peak_near(&spec, fs - fe, hw);
    let local_max = |f: f64| {
        let k = ((f - spec.f0) / spec.df).round() as usize;
        spec.psd[k] > spec.psd[k - 1] && spec.psd[k] > spec.psd[k + 1]
    };
    r.check(
        format!("three maxima at {f_l:.6e}, {f_c:.6e}, {f_u:.6e} Hz"),
        local_max(f_l) && local_max(f_c) && local_max(f_u) && (f_c - fs).abs() <= spec.df,
    );
    r.abs("lower spacing [Hz]", f_c - f_l, fe, spec.df);
    r.abs("upper spacing [Hz]", f_u - f_c, fe, spec.df);
    r.rel("side/centre power", 0.5 * (p_u + p_l) / p_c, 0.25 * eps * eps, 0.10);
    let w = window_response(WindowKind::Rectangular, 1.26e8).unwrap();
    r.rel("rectangular resolution at T_seg = 1.26e8 s [Hz]", w.resolution_hz, 7.93e-9, 0.02);
}

/// Start of a window of length `len` centred where the annual phase is π/2,
/// so the annual factor changes fastest across the record.
fn window_start(len: f64, psi_annual: f64, eph: &EphemerisConstants) -> f64 {
    let centre = ((0.5 * std::f64::consts::PI + psi_annual) / eph.annual_rate).rem_euclid(eph.year());
    (centre - 0.5 * len).rem_euclid(eph.year())
}

fn sub_year_recovery(r: &mut Report) {
    let eps = 0.1;
    let model = injected_model(eps);
    let eph = model.ephemeris;
    let c = model.coefficients;
    let phases = TripletPhases { psi_star: c.psi_star, psi_annual: c.psi_annual };
    let (len, dt) = (60.0 * 86_400.0, 1e3);
    let t0 = window_start(len, c.psi_annual, &eph);

    let clean = synthesize_baseband(&model, &NoiseConfig::silent(), 10, t0, len, dt).unwrap();
    let res = triplet_from_series(&clean, None, &eph, Some(phases)).unwrap();
    r.rel("noiseless epsilon_hat", res.epsilon_hat, eps, 0.20);

    // White noise with SNR★ = A★√(n/2)/σ = 10.
    let n = clean.len() as f64;
    let sigma = c.c_star.abs() * (n / 2.0).sqrt() / 10.0;
    let psd = 2.0 * sigma * sigma * dt;
    let mut estimates: Vec<f64> = (0..100)
        .map(|trial| {
            let noise = NoiseConfig::white(psd, derive_seed(0x5eed, trial));
            let ts = synthesize_baseband(&model, &noise, 10, t0, len, dt).unwrap();
            triplet_from_series(&ts, None, &eph, Some(phases)).unwrap().epsilon_locked.unwrap()
        })
        .collect();
    estimates.sort_by(f64::total_cmp);
    let median = 0.5 * (estimates[49] + estimates[50]);
    r.rel("median phase-locked epsilon over 100 noisy trials (SNR* = 10)", median, eps, 0.50);
}

fn daily_rms_robustness(r: &mut Report) {
    let eph = EphemerisConstants::default();
    let model = BasebandModel::for_site(&SiteGeometry::default(), &eph, &HaloParams::default()).unwrap();
    let noise = NoiseConfig::default();
    let study = daily_rms_monte_carlo(&model, &noise, 10, 365.25 * 86_400.0, 600.0, 20, DailyRmsEstimator::Harmonic)
        .unwrap();
    let coverage = study.coverage(5.0);
    r.check(
        format!(
            "{:.2}% of {} days inside the ±5σ band (need ≥ 99%), largest |mean − theory| = {:.3e}",
            100.0 * coverage,
            study.days.len(),
            study.max_abs_deviation()
        ),
        coverage >= 0.99,
    );
}

fn bessel_sidebands(r: &mut Report) {
    let beta = 0.5;
    let axion = AxionParams { m_a: 1.0, ..AxionParams::default() };
    let fa = axion.frequency();
    // Carrier and sidebands land on exact bins of an 8192-point transform.
    let (n, f0, fs) = (8192usize, 58.0 * fa, 128.0 * fa);
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(spin_expectation(k as f64 / fs, TAU * f0, beta, &axion, 0.0), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let line = |f: f64| 2.0 * buf[(f / fs * n as f64).round() as usize].norm() / n as f64;
    let j = bessel_sideband_table(beta, 21);
    for (order, jn) in j.iter().enumerate().take(4) {
        r.rel(&format!("|J_{order}| upper line"), line(f0 + order as f64 * fa), jn.abs(), 0.01);
        r.rel(&format!("|J_{order}| lower line"), line(f0 - order as f64 * fa), jn.abs(), 0.01);
    }
    let sum = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
    r.abs("J_0^2 + 2 sum J_n^2", sum, 1.0, 1e-9);
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0.ln(), a.1 + p.1.ln()));
    let (mx, my) = (sx / m, sy / m);
    points.iter().map(|p| (p.0.ln() - mx) * (p.1.ln() - my)).sum::<f64>()
        / points.iter().map(|p| (p.0.ln() - mx).powi(2)).sum::<f64>()
}

fn sensitivity_scaling(r: &mut Report) {
    let halo = HaloParams::default();
    let site = SiteGeometry::default();
    let cfg = SearchConfig::default();
    let masses = log_grid(0.1, 10.0, 81).unwrap();
    let qubit = Preset::Current.qubit();
    let base = g_min_curve(&masses, &qubit, &halo, &site, &cfg, GainMode::None).unwrap();
    let pick = |reg: Regime| -> Vec<(f64, f64)> {
        base.points.iter().filter(|p| p.regime == reg).map(|p| (p.m_a, p.g_min)).collect()
    };
    let (flat, tau) = (pick(Regime::Flat), pick(Regime::TauLimited));
    r.check(format!("{} cap-limited and {} tau-limited grid points", flat.len(), tau.len()), flat.len() >= 3 && tau.len() >= 3);
    r.abs("tau-limited log-log slope", slope(&tau), 0.5, 0.05);
    r.abs("cap-limited log-log slope", slope(&flat), 0.0, 0.05);

    let all = g_min_curve(&masses, &qubit, &halo, &site, &cfg, GainMode::All).unwrap();
    let g_total = geometric_gains(&site).unwrap().total(3);
    let worst = base
        .points
        .iter()
        .zip(&all.points)
        .map(|(b, a)| (b.g_min / a.g_min / g_total - 1.0).abs())
        .fold(0.0, f64::max);
    r.check(
        format!("baseline/full-gain ratio equals G_total = {g_total:.4} at every point (worst {:.1e}, need ≤ 1%)", worst),
        worst <= 0.01,
    );

    let future_masses = log_grid(1.0, 10.0, 41).unwrap();
    let future = g_min_curve(
        &future_masses,
        &Preset::Future.qubit(),
        &halo,
        &site,
        &cfg,
        Preset::Future.default_gains(),
    )
    .unwrap();
    let g = future.g_min();
    let (lo, hi) = (g.iter().cloned().fold(f64::INFINITY, f64::min), g.iter().cloned().fold(0.0, f64::max));
    r.check(
        format!("future preset over 1-10 ueV spans [{lo:.3e}, {hi:.3e}] (need inside [1e-14, 1e-10])"),
        lo >= 1e-14 && hi <= 1e-10,
    );
}

/// Upper Gaussian quantile by bisection on erfc.
fn quantile_oracle(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 0.5 * erfc(mid / 2f64.sqrt()) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn statistical_plumbing(r: &mut Report) {
    let z = look_elsewhere_threshold(0.01, 1.0).unwrap();
    r.abs("z(1%, 1) against the erfc oracle", z, quantile_oracle(0.01), 1e-3);
    r.abs("z(1%, 1) against 2.326", z, 2.326, 1e-3);

    let x = white_noise(1 << 16, 1.0, 1.0, &mut stream_rng(2024, 1));
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
    let ts = TimeSeries::real(0.0, 1.0, x).unwrap();
    for window in [WindowKind::Rectangular, WindowKind::Hann] {
        let cfg = PeriodogramConfig { window, segment: Some(2048), overlap: 0.5, detrend: false };
        let spec = periodogram(&ts, &cfg).unwrap();
        r.rel(&format!("{window:?} periodogram power / variance"), spec.total_power(), var, 0.02);
    }

    let dir = tempfile::TempDir::new().unwrap();
    for command in ["psd", "triplet"] {
        let mut cfg = RunConfig::default();
        cfg.output.directory = dir.path().join(command);
        let (manifest, _) = axionkit_cli::run_and_write(command, &cfg).unwrap();
        let replay_dir = dir.path().join(format!("{command}-replay"));
        let report = axionkit_cli::replay(&cfg.output.directory.join("manifest.json"), Some(&replay_dir));
        let mut identical = report.is_ok();
        let mut compared = 0;
        for f in manifest.files.iter().filter(|f| f.name.ends_with(".csv")) {
            let a = fs::read(cfg.output.directory.join(&f.name)).unwrap();
            let b = fs::read(replay_dir.join(&f.name)).unwrap_or_default();
            identical &= a == b;
            compared += 1;
        }
        r.check(format!("`{command}` replayed from its manifest: {compared} CSV file(s) byte-identical"), identical && compared > 0);
    }
}
