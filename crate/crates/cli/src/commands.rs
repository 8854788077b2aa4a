//! One function per subcommand. Each returns the artifacts it produced;
//! writing them out is left to the caller.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fs;
use std::io::Read;
use std::path::Path;

use axionkit_core::geometry::{self, coefficients_for_site, EphemerisConstants};
use axionkit_core::halo::{self, AxionParams};
use axionkit_core::sensitivity::{
    dfsz_band, g_min_curve, log_grid, GainMode, Preset, Regime, SensitivityCurve,
};
use axionkit_core::signal::daily::daily_rms_monte_carlo;
use axionkit_core::signal::{
    reference_index, synthesize_baseband, BasebandModel, NoiseConfig, QubitParams, TimeSeries,
};
use axionkit_core::spectral::{periodogram, triplet_from_series, window_response, TripletPhases};
use serde::Serialize;

use crate::config::{PresetChoice, RunConfig};
use crate::error::CliError;
use crate::output::{Artifacts, Cell, Table};
use crate::svg::{Plot, Series};

const DAY: f64 = 86_400.0;

pub const COMMANDS: [&str; 6] = ["envelope", "daily-rms", "psd", "triplet", "linewidth", "sensitivity"];

pub fn run(command: &str, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match command {
        "envelope" => envelope(cfg),
        "daily-rms" => daily_rms(cfg),
        "psd" => psd(cfg),
        "triplet" => triplet(cfg),
        "linewidth" => linewidth(cfg),
        "sensitivity" => sensitivity(cfg),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    }
}

fn site_model(cfg: &RunConfig) -> Result<BasebandModel, CliError> {
    Ok(BasebandModel::for_site(&cfg.geometry, &cfg.ephemeris, &cfg.halo)?)
}

/// With an injected depth the stream is the bare coefficient model, so the
/// annual speed swing does not add to the requested value.
fn with_injected_depth(mut model: BasebandModel, epsilon: Option<f64>) -> BasebandModel {
    if let Some(eps) = epsilon {
        model.coefficients.c_cross = eps * model.coefficients.c_star;
        model.speed_site = None;
    }
    model
}

fn thin(points: Vec<(f64, f64)>, max: usize) -> Vec<(f64, f64)> {
    let stride = points.len().div_ceil(max).max(1);
    points.into_iter().step_by(stride).collect()
}

#[derive(Serialize)]
struct EnvelopeSummary {
    coefficients: geometry::ModulationCoefficients,
    fit_residual_rms: f64,
    annual_depth: Option<f64>,
    sidereal_frequency_hz: f64,
    annual_frequency_hz: f64,
    days: usize,
    beta0: f64,
    mean_speed_ratio: f64,
}

fn envelope(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let eph = &cfg.ephemeris;
    let fit = coefficients_for_site(&cfg.geometry.normalized()?, eph, 1.0, 1800.0)?;
    let model = site_model(cfg)?;
    let span = cfg.envelope.years * eph.year();
    let days = (span / eph.sidereal_day()).floor() as i64;

    let mut daily = Table::new(&["day", "t_mid_s", "min", "max", "daily_mean", "daily_amplitude"]);
    let (mut lo_pts, mut hi_pts) = (Vec::new(), Vec::new());
    for d in 0..days {
        let t = geometry::day_midpoint(d, eph);
        let w = model.speed_weight(t);
        let (lo, hi) = geometry::envelope_at(t, &model.coefficients, eph);
        let mu = model.coefficients.daily_mean(t, eph);
        let k = model.coefficients.daily_amplitude(t, eph);
        daily.push(vec![Cell::I(d), t.into(), (w * lo).into(), (w * hi).into(), (w * mu).into(), (w * k).into()]);
        lo_pts.push((t / DAY, w * lo));
        hi_pts.push((t / DAY, w * hi));
    }

    let n = (span / cfg.envelope.dt).floor() as usize;
    let mut series = Table::new(&["t_s", "cos_theta", "speed_ratio", "beta_over_beta0"]);
    let mut trace = Vec::with_capacity(n);
    let mut speed_sum = 0.0;
    for i in 0..n {
        let t = i as f64 * cfg.envelope.dt;
        let c = model.coefficients.eval(t, eph);
        let w = model.speed_weight(t);
        speed_sum += w;
        series.push(vec![t.into(), c.into(), w.into(), (w * c).abs().into()]);
        trace.push((t / DAY, (w * c).abs()));
    }

    let summary = EnvelopeSummary {
        coefficients: model.coefficients,
        fit_residual_rms: fit.residual_rms,
        annual_depth: model.coefficients.annual_depth(),
        sidereal_frequency_hz: eph.sidereal_frequency(),
        annual_frequency_hz: eph.annual_frequency(),
        days: days as usize,
        beta0: reference_index(&cfg.axion, &cfg.halo, &cfg.qubit),
        mean_speed_ratio: speed_sum / n.max(1) as f64,
    };
    let mut art = Artifacts::default();
    art.note(format!(
        "envelope: {} days, c★ = {:.4}, ε⊕ = {:.4}, ripple at {:.5e} Hz, envelope at {:.4e} Hz",
        days,
        summary.coefficients.c_star,
        summary.annual_depth.unwrap_or(f64::NAN),
        summary.sidereal_frequency_hz,
        summary.annual_frequency_hz
    ));
    art.csv("envelope_daily", daily);
    art.csv("envelope_series", series);
    art.json("envelope", &summary)?;
    art.svg(
        "envelope",
        &Plot {
            title: "Projected wind over one year".into(),
            x_label: "time (days)".into(),
            y_label: "β/β0".into(),
            series: vec![
                Series::line("|β|/β0", thin(trace, 4000)),
                Series::dashed("daily max", hi_pts),
                Series::dashed("daily min", lo_pts),
            ],
            ..Default::default()
        },
    );
    Ok(art)
}

#[derive(Serialize)]
struct DailyRmsSummary {
    days: usize,
    trials: usize,
    k_sigma: f64,
    coverage: f64,
    max_abs_deviation: f64,
    trial_seeds: Vec<u64>,
    beta0: f64,
}

fn daily_rms(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let model = site_model(cfg)?;
    let c = &cfg.daily_rms;
    let study = daily_rms_monte_carlo(
        &model,
        &cfg.noise,
        cfg.qubit.n_spins,
        c.span_days * DAY,
        c.dt,
        c.trials,
        c.estimator,
    )?;
    let k = c.k_sigma;
    let mut table = Table::new(&["day", "t_mid_s", "theory", "mc_mean", "mc_std", "band_low", "band_high", "trial0"]);
    let mut theory = Vec::new();
    let mut mean = Vec::new();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (i, &d) in study.days.iter().enumerate() {
        let t = geometry::day_midpoint(d, &cfg.ephemeris);
        let (m, s) = (study.mean[i], study.std[i]);
        table.push(vec![
            Cell::I(d),
            t.into(),
            study.theory[i].into(),
            m.into(),
            s.into(),
            (m - k * s).into(),
            (m + k * s).into(),
            study.trials[0][i].into(),
        ]);
        theory.push((d as f64, study.theory[i]));
        mean.push((d as f64, m));
        lo.push((d as f64, m - k * s));
        hi.push((d as f64, m + k * s));
    }
    let summary = DailyRmsSummary {
        days: study.days.len(),
        trials: c.trials,
        k_sigma: k,
        coverage: study.coverage(k),
        max_abs_deviation: study.max_abs_deviation(),
        trial_seeds: study.trial_seeds.clone(),
        beta0: reference_index(&cfg.axion, &cfg.halo, &cfg.qubit),
    };
    let mut art = Artifacts::default();
    art.seeds = study.trial_seeds.clone();
    art.note(format!(
        "daily-rms: {} days × {} trials, theory inside ±{k}σ on {:.2}% of days",
        summary.days,
        summary.trials,
        100.0 * summary.coverage
    ));
    art.csv("daily_rms", table);
    art.json("daily_rms", &summary)?;
    art.svg(
        "daily_rms",
        &Plot {
            title: "Normalised daily RMS".into(),
            x_label: "sidereal day".into(),
            y_label: "RMS / mean".into(),
            series: vec![
                Series::line("geometry only", theory),
                Series::markers("Monte-Carlo mean", mean),
                Series::dashed(format!("-{k}σ"), lo),
                Series::dashed(format!("+{k}σ"), hi),
            ],
            ..Default::default()
        },
    );
    Ok(art)
}

#[derive(Serialize)]
struct LinePeak {
    expected_hz: f64,
    found_hz: f64,
    psd: f64,
}

#[derive(Serialize)]
struct PsdSummary {
    samples: usize,
    duration_s: f64,
    df_hz: f64,
    resolution_hz: f64,
    half_power_width_hz: f64,
    annual_frequency_hz: f64,
    triplet_resolved: bool,
    center: LinePeak,
    upper: LinePeak,
    lower: LinePeak,
    spacing_upper_hz: f64,
    spacing_lower_hz: f64,
    side_to_center_power: f64,
    expected_side_to_center_power: f64,
    noise_seed: Option<u64>,
}

fn peak_near(spec: &axionkit_core::spectral::Spectrum, f: f64, bins: f64) -> LinePeak {
    let (found_hz, psd) = spec
        .peak_in(f - bins * spec.df, f + bins * spec.df)
        .unwrap_or((f64::NAN, f64::NAN));
    LinePeak { expected_hz: f, found_hz, psd }
}

fn psd(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let eph = &cfg.ephemeris;
    let model = with_injected_depth(site_model(cfg)?, cfg.psd.epsilon_inject);
    let noise = if cfg.psd.noiseless { NoiseConfig::silent() } else { cfg.noise };
    let ts = synthesize_baseband(&model, &noise, cfg.qubit.n_spins, 0.0, cfg.psd.span_days * DAY, cfg.psd.dt)?;
    let spec = periodogram(&ts, &cfg.periodogram)?;
    let window = window_response(cfg.periodogram.window, spec.segment_duration)?;
    let (fs, fe) = (eph.sidereal_frequency(), eph.annual_frequency());
    // Half the triplet spacing keeps each search box to its own line.
    let bins = (0.5 * fe / spec.df).max(1.0);
    let center = peak_near(&spec, fs, bins);
    let upper = peak_near(&spec, fs + fe, bins);
    let lower = peak_near(&spec, fs - fe, bins);
    let eps = model.effective_coefficients()?.annual_depth().unwrap_or(0.0);
    let summary = PsdSummary {
        samples: ts.len(),
        duration_s: ts.duration(),
        df_hz: spec.df,
        resolution_hz: window.resolution_hz,
        half_power_width_hz: window.half_power_width_hz,
        annual_frequency_hz: fe,
        triplet_resolved: window.resolution_hz < fe,
        spacing_upper_hz: upper.found_hz - center.found_hz,
        spacing_lower_hz: center.found_hz - lower.found_hz,
        side_to_center_power: 0.5 * (upper.psd + lower.psd) / center.psd,
        expected_side_to_center_power: 0.25 * eps * eps,
        center,
        upper,
        lower,
        noise_seed: (!cfg.psd.noiseless).then_some(noise.seed),
    };
    let mut table = Table::new(&["frequency_hz", "psd"]);
    for (k, &p) in spec.psd.iter().enumerate() {
        table.push(vec![spec.frequency(k).into(), p.into()]);
    }
    let zoom: Vec<(f64, f64)> = spec
        .psd
        .iter()
        .enumerate()
        .map(|(k, &p)| (spec.frequency(k), p))
        .filter(|(f, _)| (f - fs).abs() < 12.0 * fe)
        .collect();
    let mut art = Artifacts::default();
    if !cfg.psd.noiseless {
        art.seeds.push(noise.seed);
    }
    art.note(format!(
        "psd: lines at {:.6e}, {:.6e}, {:.6e} Hz; spacing {:.3e}/{:.3e} Hz; side/centre power {:.4e} (expected {:.4e})",
        summary.lower.found_hz,
        summary.center.found_hz,
        summary.upper.found_hz,
        summary.spacing_lower_hz,
        summary.spacing_upper_hz,
        summary.side_to_center_power,
        summary.expected_side_to_center_power
    ));
    art.csv("psd", table);
    art.json("psd", &summary)?;
    art.svg(
        "psd",
        &Plot {
            title: "Baseband PSD near the sidereal line".into(),
            x_label: "frequency (Hz)".into(),
            y_label: "PSD (β0²/Hz)".into(),
            log_y: true,
            series: vec![Series::line("periodogram", zoom)],
            x_markers: vec![fs - fe, fs, fs + fe],
            ..Default::default()
        },
    );
    Ok(art)
}

fn read_series(path: &Path) -> Result<TimeSeries, CliError> {
    let mut magic = [0u8; 4];
    let is_binary = fs::File::open(path)
        .and_then(|mut f| f.read_exact(&mut magic))
        .map(|_| &magic == b"AXTS")
        .unwrap_or(false);
    let ts = if is_binary { TimeSeries::read_binary(path) } else { TimeSeries::read_csv(path) };
    ts.map_err(|e| CliError::Config(format!("cannot load {}: {e}", path.display())))
}

#[derive(Serialize)]
struct TripletSummary {
    source: String,
    t_start_s: f64,
    duration_s: f64,
    phases: Option<TripletPhases>,
    epsilon_injected: Option<f64>,
    result: axionkit_core::spectral::TripletResult,
    noise_seed: Option<u64>,
}

/// Start time centring a window of `len` on annual phase π/2.
fn default_window_start(len: f64, psi_annual: f64, eph: &EphemerisConstants) -> f64 {
    let centre = ((FRAC_PI_2 + psi_annual) / eph.annual_rate).rem_euclid(eph.year());
    let start = centre - 0.5 * len;
    if start < 0.0 {
        start + eph.year()
    } else {
        start
    }
}

fn triplet(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let eph = &cfg.ephemeris;
    let c = &cfg.triplet;
    let user_phases = match (c.psi_star, c.psi_annual) {
        (Some(s), Some(a)) => Some(TripletPhases { psi_star: s, psi_annual: a }),
        (None, None) => None,
        _ => {
            return Err(CliError::Config(
                "give both `triplet.psi_star` and `triplet.psi_annual`, or neither".into(),
            ))
        }
    };
    let mut art = Artifacts::default();
    let (ts, phases, source, injected, seed) = if let Some(path) = &c.input {
        let ts = read_series(path)?;
        if user_phases.is_none() && !c.agnostic {
            return Err(CliError::Config(
                "supplied data needs ephemeris phases: set --psi-star and --psi-earth \
                 (triplet.psi_star / triplet.psi_annual) or pass --agnostic"
                    .into(),
            ));
        }
        (ts, user_phases, path.display().to_string(), None, None)
    } else {
        let model = with_injected_depth(site_model(cfg)?, c.epsilon_inject);
        let eff = model.effective_coefficients()?;
        let len = c.window_days * DAY;
        let start = c
            .start_days
            .map(|d| d * DAY)
            .unwrap_or_else(|| default_window_start(len, eff.psi_annual, eph));
        let noise = if c.noiseless { NoiseConfig::silent() } else { cfg.noise };
        let ts = synthesize_baseband(&model, &noise, cfg.qubit.n_spins, start, len, c.dt)?;
        let phases = user_phases.or(Some(TripletPhases { psi_star: eff.psi_star, psi_annual: eff.psi_annual }));
        let seed = (!c.noiseless).then_some(noise.seed);
        if let Some(s) = seed {
            art.seeds.push(s);
        }
        (ts, phases, "synthetic".to_string(), eff.annual_depth(), seed)
    };
    let phases = if c.agnostic { None } else { phases };
    let result = triplet_from_series(&ts, None, eph, phases)?;
    let mut table = Table::new(&["line", "omega_rad_s", "frequency_hz", "x"]);
    for (name, om, x) in [
        ("minus", result.omega_minus, result.x_minus),
        ("star", result.omega_star, result.x_star),
        ("plus", result.omega_plus, result.x_plus),
    ] {
        table.push(vec![name.into(), om.into(), (om / TAU).into(), x.into()]);
    }
    art.note(format!(
        "triplet ({source}): ε̂ = {:.4}{}, SNR★ = {:.2}, SNR± = {:.2}",
        result.epsilon_hat,
        result.epsilon_locked.map(|e| format!(", locked ε = {e:.4}")).unwrap_or_default(),
        result.snr_star,
        result.snr_pm
    ));
    let summary = TripletSummary {
        source,
        t_start_s: ts.t0,
        duration_s: ts.duration(),
        phases,
        epsilon_injected: injected,
        result,
        noise_seed: seed,
    };
    art.csv("triplet", table);
    art.json("triplet", &summary)?;
    Ok(art)
}

#[derive(Serialize)]
struct LinewidthRow {
    m_a: f64,
    nu_a_hz: f64,
    fractional_linewidth: f64,
    linewidth_hz: f64,
    fwhm_hz: f64,
    coherence_time_s: f64,
    quality_factor: f64,
}

fn linewidth(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let h = &cfg.halo;
    let mut table = Table::new(&["m_a_micro_ev", "nu_hz", "offset_hz", "density_per_hz"]);
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for &m_a in &cfg.linewidth.masses {
        let axion = AxionParams { m_a, ..cfg.axion };
        let nu_a = axion.frequency();
        let edge = halo::lineshape_upper_edge(&axion, h);
        let width = edge - nu_a;
        let n = cfg.linewidth.points;
        // A few points below ν_a show the hard lower edge.
        let grid: Vec<f64> = (0..n)
            .map(|i| nu_a + width * (-0.02 + 1.04 * i as f64 / (n - 1) as f64))
            .collect();
        let g = halo::shm_lineshape(&grid, &axion, h)?;
        let mut pts = Vec::with_capacity(n);
        for (nu, d) in grid.iter().zip(&g) {
            table.push(vec![m_a.into(), (*nu).into(), (nu - nu_a).into(), (*d).into()]);
            pts.push((nu - nu_a, *d));
        }
        series.push(Series::line(format!("{m_a} µeV"), pts));
        rows.push(LinewidthRow {
            m_a,
            nu_a_hz: nu_a,
            fractional_linewidth: halo::fractional_linewidth(h)?,
            linewidth_hz: halo::linewidth(&axion, h)?,
            fwhm_hz: halo::lineshape_fwhm(&axion, h)?,
            coherence_time_s: halo::coherence_time(&axion, h)?,
            quality_factor: halo::quality_factor(h)?,
        });
    }
    let mut art = Artifacts::default();
    for r in &rows {
        art.note(format!(
            "linewidth: m_a = {} µeV, Δν = {:.2} Hz, FWHM = {:.2} Hz, τ = {:.4e} s",
            r.m_a, r.linewidth_hz, r.fwhm_hz, r.coherence_time_s
        ));
    }
    art.csv("linewidth", table);
    art.json("linewidth", &rows)?;
    art.svg(
        "linewidth",
        &Plot {
            title: "Standard-halo line shape".into(),
            x_label: "ν − ν_a (Hz)".into(),
            y_label: "g(ν) (1/Hz)".into(),
            log_x: true,
            log_y: true,
            series,
            ..Default::default()
        },
    );
    Ok(art)
}

#[derive(Serialize)]
struct CurveRecord<'a> {
    preset: &'a str,
    curve: &'a SensitivityCurve,
}

fn sensitivity(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let s = &cfg.sensitivity;
    let grid = log_grid(s.m_min, s.m_max, s.points)?;
    let presets: Vec<(&str, QubitParams, GainMode)> = match s.preset {
        PresetChoice::Current => vec![("current", Preset::Current.qubit(), Preset::Current.default_gains())],
        PresetChoice::Future => vec![("future", Preset::Future.qubit(), Preset::Future.default_gains())],
        PresetChoice::Both => vec![
            ("current", Preset::Current.qubit(), Preset::Current.default_gains()),
            ("future", Preset::Future.qubit(), Preset::Future.default_gains()),
        ],
        PresetChoice::Custom => vec![("custom", cfg.qubit, GainMode::None)],
    };
    let mut curves = Vec::new();
    for (name, q, _) in &presets {
        let qubit = QubitParams { gamma_e: cfg.qubit.gamma_e, ..*q };
        for mode in s.gains.modes() {
            let curve = g_min_curve(&grid, &qubit, &cfg.halo, &cfg.geometry, &cfg.search, mode)?;
            curves.push((*name, curve));
        }
    }
    let mut table = Table::new(&[
        "preset", "gains", "m_a_micro_ev", "g_min", "regime", "t_seg_s", "n_trials", "z_threshold", "snr_required",
    ]);
    let mut plot_series = Vec::new();
    for (name, curve) in &curves {
        let gains = gain_label(curve.gains.mode);
        for p in &curve.points {
            table.push(vec![
                (*name).into(),
                gains.into(),
                p.m_a.into(),
                p.g_min.into(),
                match p.regime {
                    Regime::Flat => "flat",
                    Regime::TauLimited => "tau_limited",
                }
                .into(),
                p.t_seg.into(),
                p.n_trials.into(),
                p.z_threshold.into(),
                p.snr_required.into(),
            ]);
        }
        plot_series.push(Series::line(
            format!("{name}, {gains}"),
            curve.points.iter().map(|p| (p.m_a, p.g_min)).collect(),
        ));
    }
    let band = dfsz_band(&grid, s.tan_beta_min, s.tan_beta_max)?;
    let mut dfsz = Table::new(&["m_a_micro_ev", "g_low", "g_high", "g_benchmark"]);
    for p in &band {
        dfsz.push(vec![p.m_a.into(), p.g_low.into(), p.g_high.into(), p.g_benchmark.into()]);
    }
    plot_series.push(Series::dashed("DFSZ tan β = 1", band.iter().map(|p| (p.m_a, p.g_benchmark)).collect()));
    let mut art = Artifacts::default();
    for (name, curve) in &curves {
        let g = curve.g_min();
        art.note(format!(
            "sensitivity {name}/{}: g_min from {:.3e} to {:.3e} (gain {:.3})",
            gain_label(curve.gains.mode),
            g.iter().cloned().fold(f64::INFINITY, f64::min),
            g.iter().cloned().fold(0.0, f64::max),
            curve.gains.total
        ));
    }
    let records: Vec<CurveRecord> = curves.iter().map(|(n, c)| CurveRecord { preset: n, curve: c }).collect();
    art.csv("sensitivity", table);
    art.csv("dfsz", dfsz);
    art.json("sensitivity", &serde_json::json!({ "curves": records, "dfsz": band }))?;
    art.svg(
        "sensitivity",
        &Plot {
            title: "Minimum detectable g_ae".into(),
            x_label: "m_a (µeV)".into(),
            y_label: "g_ae".into(),
            log_x: true,
            log_y: true,
            series: plot_series,
            ..Default::default()
        },
    );
    Ok(art)
}

fn gain_label(mode: GainMode) -> &'static str {
    match mode {
        GainMode::None => "none",
        GainMode::Matched => "matched",
        GainMode::ThreeAxis => "three-axis",
        GainMode::All => "all",
    }
}
