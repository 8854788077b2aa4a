//! Physical constants and natural-unit conversions.
//!
//! All conversions between natural units (ħ = c = 1, energies in eV/GeV) and
//! lab units go through this module.

use std::f64::consts::PI;

/// Speed of light, km/s.
pub const C_KM_S: f64 = 299_792.458;

/// Frequency of a 1 eV quantum, E/h, in Hz.
pub const HZ_PER_EV: f64 = 2.417_989_242e14;

/// 1 µeV expressed as a frequency, Hz (≈ 241.799 MHz).
pub const HZ_PER_MICRO_EV: f64 = HZ_PER_EV * 1e-6;

/// Planck constant, eV·s.
pub const PLANCK_EV_S: f64 = 4.135_667_696e-15;

/// ħc, GeV·cm.
pub const HBARC_GEV_CM: f64 = 1.973_269_804e-14;

/// Electron mass, GeV.
pub const ELECTRON_MASS_GEV: f64 = 0.510_998_95e-3;

/// Sidereal day, s.
pub const SIDEREAL_DAY_S: f64 = 86_164.090_5;

/// Julian year (365.25 d), s.
pub const YEAR_S: f64 = 365.25 * 86_400.0;

/// Linear frequency ν = m/h of a particle of mass `m_micro_ev`.
pub fn micro_ev_to_hz(m_micro_ev: f64) -> f64 {
    m_micro_ev * HZ_PER_MICRO_EV
}

pub fn hz_to_micro_ev(nu: f64) -> f64 {
    nu / HZ_PER_MICRO_EV
}

/// Angular frequency ω = m/ħ, rad/s.
pub fn micro_ev_to_rad_per_s(m_micro_ev: f64) -> f64 {
    2.0 * PI * micro_ev_to_hz(m_micro_ev)
}

/// Energy density GeV/cm³ → GeV⁴.
pub fn gev_per_cm3_to_gev4(rho: f64) -> f64 {
    rho * HBARC_GEV_CM.powi(3)
}

/// Gyromagnetic ratio given as Hz/T → Zeeman energy per tesla in GeV/T.
pub fn gyromagnetic_hz_per_t_to_gev_per_t(gamma_hz_per_t: f64) -> f64 {
    PLANCK_EV_S * gamma_hz_per_t * 1e-9
}

/// Speed in km/s as a fraction of c.
pub fn beta_of(v_km_s: f64) -> f64 {
    v_km_s / C_KM_S
}
