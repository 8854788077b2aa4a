//! Minimum detectable coupling versus axion mass.
//!
//! Each mass gets an adaptive coherent segment `T_seg = min(ε τ_a, T_cap)`,
//! a look-elsewhere threshold from `BW·T_seg` trials, and a closed-form
//! inversion of the (linear in g) SNR for the coupling.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::geometry::{geometric_gains, SiteGeometry};
use crate::halo::{self, AxionParams, HaloParams};
use crate::signal::QubitParams;
use crate::units;
use crate::{Error, Result};

/// m_a·f_a in µeV·GeV for the DFSZ overlay.
pub const DFSZ_MA_FA: f64 = 5.7e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Safety factor ε keeping segments inside the coherence time.
    pub epsilon_safety: f64,
    pub t_cap: f64,
    pub t_tot: f64,
    /// Scanned bandwidth, Hz.
    pub bandwidth: f64,
    /// Global false-positive rate.
    pub alpha: f64,
    pub n_sigma: f64,
    /// Wind speed entering B_eff, km/s.
    pub v_km_s: f64,
    /// Stack segment powers, giving (T_seg·T_tot)^{1/4} instead of √T_tot.
    pub radiometer: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            epsilon_safety: 0.5,
            t_cap: 1e-3,
            t_tot: 86_400.0,
            bandwidth: 2e9,
            alpha: 0.01,
            n_sigma: 5.0,
            v_km_s: 1e-3 * units::C_KM_S,
            radiometer: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_safety > 0.0 && self.epsilon_safety < 1.0) {
            return Err(Error::invalid("search.epsilon_safety", "must lie in (0, 1)"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.1) {
            return Err(Error::invalid("search.alpha", "must lie in (0, 0.1]"));
        }
        for (name, v) in [
            ("search.t_cap", self.t_cap),
            ("search.t_tot", self.t_tot),
            ("search.bandwidth", self.bandwidth),
            ("search.n_sigma", self.n_sigma),
            ("search.v_km_s", self.v_km_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The segment cap binds; g_min is nearly mass independent.
    Flat,
    /// ε τ_a binds; g_min grows as √m_a.
    TauLimited,
}

/// `min(ε τ_a, T_cap)` together with the branch that bound.
pub fn adaptive_segment(axion: &AxionParams, halo: &HaloParams, cfg: &SearchConfig) -> Result<(f64, Regime)> {
    let tau = halo::coherence_time(axion, halo)?;
    let t = cfg.epsilon_safety * tau;
    Ok(if t < cfg.t_cap { (t, Regime::TauLimited) } else { (cfg.t_cap, Regime::Flat) })
}

/// Upper-tail standard normal quantile: z with P(Z > z) = p.
pub fn normal_upper_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    if p >= 1e-280 {
        let z = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
        if z.is_finite() {
            return z;
        }
    }
    // Asymptotic tail: ln Q(z) ≈ −z²/2 − ln(z√2π) + ln(1 − z⁻² + 3z⁻⁴).
    let ln_p = p.ln();
    let mut z = (-2.0 * ln_p).sqrt();
    for _ in 0..50 {
        let corr = (1.0 - 1.0 / (z * z) + 3.0 / z.powi(4)).ln();
        let next = (-2.0 * (ln_p + (z * (2.0 * std::f64::consts::PI).sqrt()).ln() - corr)).sqrt();
        if (next - z).abs() < 1e-14 * z {
            return next;
        }
        z = next;
    }
    z
}

/// One-sided threshold at per-trial level α/N.
pub fn look_elsewhere_threshold(alpha: f64, trials: f64) -> Result<f64> {
    if !(trials >= 1.0) {
        return Err(Error::invalid("trials", "BW·T_seg must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("search.alpha", "must lie in (0, 1)"));
    }
    Ok(normal_upper_quantile(alpha / trials))
}

/// z-threshold at frequency set by `axion`, with N = BW·T_seg trials.
pub fn trials_threshold(axion: &AxionParams, halo: &HaloParams, cfg: &SearchConfig) -> Result<(f64, f64)> {
    let (t_seg, _) = adaptive_segment(axion, halo, cfg)?;
    let n = cfg.bandwidth * t_seg;
    Ok((n, look_elsewhere_threshold(cfg.alpha, n)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainMode {
    #[default]
    None,
    /// Matched daily/annual weighting, G_daily.
    Matched,
    /// Three orthogonal axes: G_3axis·√3.
    ThreeAxis,
    /// Everything: √3·G_daily·G_3axis.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedGains {
    pub mode: GainMode,
    pub matched: f64,
    pub three_axis: f64,
    pub resource: f64,
    pub total: f64,
}

impl AppliedGains {
    pub fn unity() -> Self {
        Self { mode: GainMode::None, matched: 1.0, three_axis: 1.0, resource: 1.0, total: 1.0 }
    }

    pub fn for_site(mode: GainMode, site: &SiteGeometry) -> Result<Self> {
        if mode == GainMode::None {
            return Ok(Self::unity());
        }
        let g = geometric_gains(site)?;
        let (matched, three_axis, resource) = match mode {
            GainMode::None => (1.0, 1.0, 1.0),
            GainMode::Matched => (g.g_daily, 1.0, 1.0),
            GainMode::ThreeAxis => (1.0, g.g_three_axis, 3f64.sqrt()),
            GainMode::All => (g.g_daily, g.g_three_axis, 3f64.sqrt()),
        };
        Ok(Self { mode, matched, three_axis, resource, total: matched * three_axis * resource })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Current,
    Future,
}

impl Preset {
    pub fn qubit(self) -> QubitParams {
        match self {
            Preset::Current => QubitParams { n_spins: 10, q_resonator: 1e4, eta_b: 1e-15, ..QubitParams::default() },
            Preset::Future => QubitParams { n_spins: 1_000_000, q_resonator: 1e6, eta_b: 1e-16, ..QubitParams::default() },
        }
    }

    pub fn default_gains(self) -> GainMode {
        match self {
            Preset::Current => GainMode::None,
            Preset::Future => GainMode::ThreeAxis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub m_a: f64,
    pub nu_a: f64,
    pub tau_a: f64,
    pub t_seg: f64,
    pub regime: Regime,
    pub n_trials: f64,
    pub z_threshold: f64,
    pub snr_required: f64,
    pub g_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub points: Vec<SensitivityPoint>,
    pub gains: AppliedGains,
    pub search: SearchConfig,
    pub qubit: QubitParams,
}

impl SensitivityCurve {
    pub fn masses(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.m_a).collect()
    }

    pub fn g_min(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.g_min).collect()
    }
}

/// Log-spaced mass grid including both end points, µeV.
pub fn log_grid(m_min: f64, m_max: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(m_min > 0.0 && m_max >= m_min) {
        return Err(Error::invalid("grid", "need 0 < m_min ≤ m_max"));
    }
    if n == 1 {
        return Ok(vec![m_min]);
    }
    let (a, b) = (m_min.ln(), m_max.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// SNR accumulated for coupling `g` at mass `m_a` with total gain `gain`.
pub fn snr_for_coupling(
    g: f64,
    m_a: f64,
    qubit: &QubitParams,
    halo: &HaloParams,
    cfg: &SearchConfig,
    gain: f64,
) -> Result<f64> {
    let axion = AxionParams { m_a, g_ae: g, phase: 0.0 };
    axion.validate()?;
    let (t_seg, _) = adaptive_segment(&axion, halo, cfg)?;
    let b = halo::effective_field_with_gamma(&axion, halo, cfg.v_km_s, qubit.gamma_e);
    Ok(gain * b / effective_eta(qubit) * time_factor(t_seg, cfg))
}

fn effective_eta(qubit: &QubitParams) -> f64 {
    qubit.eta_b / (qubit.n_spins as f64).sqrt()
}

fn time_factor(t_seg: f64, cfg: &SearchConfig) -> f64 {
    if cfg.radiometer {
        (t_seg * cfg.t_tot).powf(0.25)
    } else {
        // Coherent √T_seg per segment, then √T_tot/T_cap of stacking.
        t_seg.sqrt() * (cfg.t_tot / cfg.t_cap).sqrt()
    }
}

/// Inverts SNR(g) = max(n_σ, z_LEE) at each mass with an explicit total gain.
pub fn g_min_curve_with_gain(
    masses: &[f64],
    qubit: &QubitParams,
    halo: &HaloParams,
    cfg: &SearchConfig,
    gains: AppliedGains,
) -> Result<SensitivityCurve> {
    if masses.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if masses.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("grid", "masses must be strictly increasing"));
    }
    if !(gains.total > 0.0 && gains.total.is_finite()) {
        return Err(Error::invalid("gains", "total gain must be positive"));
    }
    qubit.validate()?;
    halo.validate()?;
    cfg.validate()?;
    let eta = effective_eta(qubit);
    let points = masses
        .iter()
        .map(|&m_a| {
            let unit = AxionParams { m_a, g_ae: 1.0, phase: 0.0 };
            unit.validate()?;
            let tau_a = halo::coherence_time(&unit, halo)?;
            let (t_seg, regime) = adaptive_segment(&unit, halo, cfg)?;
            let n_trials = cfg.bandwidth * t_seg;
            let z = look_elsewhere_threshold(cfg.alpha, n_trials)?;
            let snr_required = cfg.n_sigma.max(z);
            let b_per_g = halo::effective_field_with_gamma(&unit, halo, cfg.v_km_s, qubit.gamma_e);
            let g_min = snr_required * eta / (gains.total * b_per_g * time_factor(t_seg, cfg));
            if !(g_min.is_finite() && g_min > 0.0) {
                return Err(Error::NonPhysical(format!("g_min = {g_min} at m_a = {m_a} µeV")));
            }
            Ok(SensitivityPoint {
                m_a,
                nu_a: unit.frequency(),
                tau_a,
                t_seg,
                regime,
                n_trials,
                z_threshold: z,
                snr_required,
                g_min,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityCurve { points, gains, search: *cfg, qubit: *qubit })
}

pub fn g_min_curve(
    masses: &[f64],
    qubit: &QubitParams,
    halo: &HaloParams,
    site: &SiteGeometry,
    cfg: &SearchConfig,
    gains: GainMode,
) -> Result<SensitivityCurve> {
    g_min_curve_with_gain(masses, qubit, halo, cfg, AppliedGains::for_site(gains, site)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfszPoint {
    pub m_a: f64,
    pub g_low: f64,
    pub g_high: f64,
    /// tan β = 1.
    pub g_benchmark: f64,
}

/// g_ae = (sin²β/3)·m_e/f_a with f_a = DFSZ_MA_FA/m_a.
pub fn dfsz_coupling(m_a: f64, tan_beta: f64) -> f64 {
    let sin2 = tan_beta * tan_beta / (1.0 + tan_beta * tan_beta);
    let f_a = DFSZ_MA_FA / m_a;
    sin2 / 3.0 * units::ELECTRON_MASS_GEV / f_a
}

pub fn dfsz_band(masses: &[f64], tan_beta_min: f64, tan_beta_max: f64) -> Result<Vec<DfszPoint>> {
    if !(tan_beta_min > 0.0 && tan_beta_max >= tan_beta_min) {
        return Err(Error::invalid("dfsz.tan_beta", "need 0 < min ≤ max"));
    }
    Ok(masses
        .iter()
        .map(|&m_a| DfszPoint {
            m_a,
            g_low: dfsz_coupling(m_a, tan_beta_min),
            g_high: dfsz_coupling(m_a, tan_beta_max),
            g_benchmark: dfsz_coupling(m_a, 1.0),
        })
        .collect())
}
