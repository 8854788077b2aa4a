//! Standard Halo Model kinematics.
//!
//! The local axion field is a superposition of plane waves whose speeds follow
//! a Maxwell-Boltzmann distribution truncated at the galactic escape speed,
//! `f(v) ∝ v² exp(−v²/v0²) Θ(v_esc − v)`. This module turns that distribution
//! into the quantities the rest of the pipeline consumes: the mean-square
//! speed, two flavours of fractional linewidth, the coherence time, the
//! spectral line shape and the magnitude of the wind-induced effective field.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::units::{self, C_KM_S};
use crate::{Error, Result};

/// Free-electron gyromagnetic ratio γ/2π, Hz/T.
pub const ELECTRON_GYROMAGNETIC_HZ_PER_T: f64 = 28.0e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HaloParams {
    /// Most probable speed, km/s.
    pub v0: f64,
    /// Galactic escape speed, km/s.
    pub v_esc: f64,
    /// Local dark-matter density, GeV/cm³.
    pub rho_dm: f64,
    /// Reference speed used to normalise the modulation index β0, km/s.
    pub v_ref: f64,
}

impl Default for HaloParams {
    fn default() -> Self {
        Self {
            v0: 230.0,
            v_esc: 544.0,
            rho_dm: 0.4,
            v_ref: 230.0,
        }
    }
}

impl HaloParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(Error::invalid("halo.v0", "must be positive"));
        }
        if !(self.v_esc > self.v0 && self.v_esc.is_finite()) {
            return Err(Error::invalid("halo.v_esc", "must exceed v0"));
        }
        if !(self.rho_dm > 0.0 && self.rho_dm.is_finite()) {
            return Err(Error::invalid("halo.rho_dm", "must be positive"));
        }
        if !(self.v_ref > 0.0 && self.v_ref.is_finite()) {
            return Err(Error::invalid("halo.v_ref", "must be positive"));
        }
        Ok(())
    }

    /// Escape-to-most-probable speed ratio z = v_esc/v0.
    pub fn z(&self) -> f64 {
        self.v_esc / self.v0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AxionParams {
    /// Mass, µeV.
    pub m_a: f64,
    /// Axion-electron coupling (dimensionless).
    pub g_ae: f64,
    /// Field phase, rad.
    pub phase: f64,
}

impl Default for AxionParams {
    fn default() -> Self {
        Self {
            m_a: 1.0,
            g_ae: 1e-13,
            phase: 0.0,
        }
    }
}

impl AxionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m_a > 0.0 && self.m_a.is_finite()) {
            return Err(Error::invalid("axion.m_a", "must be positive"));
        }
        if !(self.g_ae >= 0.0 && self.g_ae.is_finite()) {
            return Err(Error::invalid("axion.g_ae", "must be non-negative"));
        }
        if !self.phase.is_finite() {
            return Err(Error::invalid("axion.phase", "must be finite"));
        }
        Ok(())
    }

    /// ν_a = m_a/h, Hz.
    pub fn frequency(&self) -> f64 {
        units::micro_ev_to_hz(self.m_a)
    }

    /// m_a/ħ, rad/s.
    pub fn angular_frequency(&self) -> f64 {
        units::micro_ev_to_rad_per_s(self.m_a)
    }
}

/// Normalisation of the truncated distribution, N(z) = erf z − 2z e^{−z²}/√π.
fn truncation_norm(z: f64) -> f64 {
    erf(z) - 2.0 * z * (-z * z).exp() / PI.sqrt()
}

/// ⟨v²⟩ of the truncated Maxwell-Boltzmann distribution, km²/s².
pub fn mean_square_speed(halo: &HaloParams) -> Result<f64> {
    halo.validate()?;
    let z = halo.z();
    let n = truncation_norm(z);
    let v2 = halo.v0 * halo.v0
        * (1.5 - 2.0 * z.powi(3) * (-z * z).exp() / (PI.sqrt() * n));
    if !v2.is_finite() || v2 <= 0.0 {
        return Err(Error::NonPhysical(format!("mean-square speed {v2} for z = {z}")));
    }
    Ok(v2)
}

/// Second-moment fractional linewidth Δν/ν = ⟨v²⟩/2c². Drives τ_a.
pub fn fractional_linewidth(halo: &HaloParams) -> Result<f64> {
    Ok(mean_square_speed(halo)? / (2.0 * C_KM_S * C_KM_S))
}

/// Most-probable-speed fractional width v0²/2c², the convention quoted next
/// to the line-shape FWHM.
pub fn fractional_linewidth_v0(halo: &HaloParams) -> Result<f64> {
    halo.validate()?;
    Ok(halo.v0 * halo.v0 / (2.0 * C_KM_S * C_KM_S))
}

/// Absolute second-moment linewidth Δν_a, Hz.
pub fn linewidth(axion: &AxionParams, halo: &HaloParams) -> Result<f64> {
    axion.validate()?;
    Ok(axion.frequency() * fractional_linewidth(halo)?)
}

/// Axion coherence time τ_a = 1/(π Δν_a), s.
pub fn coherence_time(axion: &AxionParams, halo: &HaloParams) -> Result<f64> {
    Ok(1.0 / (PI * linewidth(axion, halo)?))
}

/// Field quality factor Q_a = 2c²/⟨v²⟩.
pub fn quality_factor(halo: &HaloParams) -> Result<f64> {
    Ok(1.0 / fractional_linewidth(halo)?)
}

/// τ_c ≃ Q_a/m_a with m_a as an angular frequency, s.
pub fn quality_coherence_time(axion: &AxionParams, halo: &HaloParams) -> Result<f64> {
    axion.validate()?;
    Ok(quality_factor(halo)? / axion.angular_frequency())
}

/// Line-shape density at a single frequency (1/Hz).
///
/// Maps the speed distribution through ν = ν_a(1 + v²/2c²); with
/// dv/dν = c²/(ν_a v) the density becomes
/// `g(ν) = 4 v c² e^{−v²/v0²} / (√π v0³ N(z) ν_a)` on `[ν_a, ν_a(1 + v_esc²/2c²)]`.
pub fn lineshape_density(nu: f64, axion: &AxionParams, halo: &HaloParams) -> f64 {
    let nu_a = axion.frequency();
    let offset = nu - nu_a;
    if !(offset > 0.0) {
        return 0.0;
    }
    let v = C_KM_S * (2.0 * offset / nu_a).sqrt();
    if v > halo.v_esc {
        return 0.0;
    }
    let n = truncation_norm(halo.z());
    4.0 * v * C_KM_S * C_KM_S * (-(v * v) / (halo.v0 * halo.v0)).exp()
        / (PI.sqrt() * halo.v0.powi(3) * n * nu_a)
}

/// Normalised SHM line shape g(ν) on a strictly increasing frequency grid.
pub fn shm_lineshape(nu: &[f64], axion: &AxionParams, halo: &HaloParams) -> Result<Vec<f64>> {
    axion.validate()?;
    halo.validate()?;
    if nu.is_empty() || nu.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::BadFrequencyGrid);
    }
    Ok(nu.iter().map(|&f| lineshape_density(f, axion, halo)).collect())
}

/// Upper edge of the line-shape support, ν_a(1 + v_esc²/2c²).
pub fn lineshape_upper_edge(axion: &AxionParams, halo: &HaloParams) -> f64 {
    axion.frequency() * (1.0 + halo.v_esc * halo.v_esc / (2.0 * C_KM_S * C_KM_S))
}

/// Full width at half maximum of the line shape, Hz.
pub fn lineshape_fwhm(axion: &AxionParams, halo: &HaloParams) -> Result<f64> {
    axion.validate()?;
    halo.validate()?;
    // g ∝ v e^{−v²/v0²}, peaked at v0/√2.
    let shape = |v: f64| v * (-(v * v) / (halo.v0 * halo.v0)).exp();
    let v_peak = halo.v0 / 2f64.sqrt();
    let half = 0.5 * shape(v_peak);
    let bisect = |mut lo: f64, mut hi: f64, rising: bool| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let above = shape(mid) > half;
            if above == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let v_lo = bisect(0.0, v_peak, true);
    let v_hi = bisect(v_peak, halo.v_esc, false).min(halo.v_esc);
    Ok(axion.frequency() * (v_hi * v_hi - v_lo * v_lo) / (2.0 * C_KM_S * C_KM_S))
}

/// Spin energy shift g_ae v √(2ρ)/m_e carried by the axion wind, GeV.
pub fn wind_energy_shift_gev(axion: &AxionParams, halo: &HaloParams, v_km_s: f64) -> f64 {
    let sqrt_two_rho = (2.0 * units::gev_per_cm3_to_gev4(halo.rho_dm)).sqrt();
    axion.g_ae * units::beta_of(v_km_s) * sqrt_two_rho / units::ELECTRON_MASS_GEV
}

/// Effective field B_eff = g_ae v √(2ρ_DM)/(m_e γ_e) for a spin with
/// gyromagnetic ratio `gamma_hz_per_t` (γ/2π), T.
pub fn effective_field_with_gamma(
    axion: &AxionParams,
    halo: &HaloParams,
    v_km_s: f64,
    gamma_hz_per_t: f64,
) -> f64 {
    wind_energy_shift_gev(axion, halo, v_km_s)
        / units::gyromagnetic_hz_per_t_to_gev_per_t(gamma_hz_per_t)
}

/// Effective field seen by a free-electron spin, T.
pub fn effective_field(axion: &AxionParams, halo: &HaloParams, v_km_s: f64) -> f64 {
    effective_field_with_gamma(axion, halo, v_km_s, ELECTRON_GYROMAGNETIC_HZ_PER_T)
}
