//! Qubit response: FM sidebands at carrier scale and the slow baseband stream.
//!
//! Carrier-scale records (ω0 ~ GHz) are only ever synthesised over short
//! windows to check the Bessel-sideband structure; year-long work happens on
//! the baseband model directly.

mod bessel;
pub mod daily;
mod heterodyne;
pub mod noise;
mod synth;
pub mod timeseries;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::halo::{self, AxionParams, HaloParams};
use crate::{Error, Result};

pub use bessel::{bessel_j, bessel_sideband_table};
pub use heterodyne::{heterodyne, HeterodyneFilter};
pub use noise::NoiseConfig;
pub use synth::{synthesize_baseband, synthesize_observable, BasebandModel, MAX_SAMPLES};
pub use timeseries::{Samples, SeriesMeta, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QubitParams {
    /// γ/2π, Hz/T.
    pub gamma_e: f64,
    pub t1: f64,
    pub t2: f64,
    /// Static field, T.
    pub b0: f64,
    /// Larmor angular frequency override, rad/s. Defaults to 2πγB0.
    #[serde(default)]
    pub omega0: Option<f64>,
    pub n_spins: u64,
    /// Field sensitivity per qubit, T/√Hz.
    pub eta_b: f64,
    /// Carried as metadata only.
    pub q_resonator: f64,
}

impl Default for QubitParams {
    fn default() -> Self {
        Self {
            gamma_e: 28e9,
            t1: 1e-3,
            t2: 100e-6,
            b0: 0.5,
            omega0: None,
            n_spins: 10,
            eta_b: 1e-15,
            q_resonator: 1e4,
        }
    }
}

impl QubitParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("qubit.gamma_e", self.gamma_e),
            ("qubit.t1", self.t1),
            ("qubit.t2", self.t2),
            ("qubit.b0", self.b0),
            ("qubit.eta_b", self.eta_b),
            ("qubit.q_resonator", self.q_resonator),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if self.t2 > 2.0 * self.t1 {
            return Err(Error::invalid("qubit.t2", "T2 must not exceed 2·T1"));
        }
        if self.n_spins == 0 {
            return Err(Error::invalid("qubit.n_spins", "must be at least 1"));
        }
        if let Some(w) = self.omega0 {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid("qubit.omega0", "must be positive"));
            }
        }
        Ok(())
    }

    /// Larmor angular frequency ω0, rad/s.
    pub fn larmor(&self) -> f64 {
        self.omega0.unwrap_or(TAU * self.gamma_e * self.b0)
    }
}

/// Local FM index β_loc = (γ_e B_eff(v)/m_a)·cos θ.
///
/// The ratio is between two angular frequencies, δω = 2πγ B_eff and
/// m_a/ħ, so it reduces to γ B_eff/ν_a.
pub fn modulation_index(
    axion: &AxionParams,
    halo: &HaloParams,
    qubit: &QubitParams,
    cos_theta: f64,
    v_km_s: f64,
) -> f64 {
    let b = halo::effective_field_with_gamma(axion, halo, v_km_s, qubit.gamma_e);
    qubit.gamma_e * b / axion.frequency() * cos_theta
}

/// Reference index β0 at the halo reference speed and full projection.
pub fn reference_index(axion: &AxionParams, halo: &HaloParams, qubit: &QubitParams) -> f64 {
    modulation_index(axion, halo, qubit, 1.0, halo.v_ref)
}

/// ⟨σx(t)⟩ = cos[ω0 t + β_loc sin(m_a t + φ) + φ0].
pub fn spin_expectation(t: f64, omega0: f64, beta_loc: f64, axion: &AxionParams, phi0: f64) -> f64 {
    (omega0 * t + beta_loc * (axion.angular_frequency() * t + axion.phase).sin() + phi0).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units;

    #[test]
    fn modulation_index_cases() {
        let a = AxionParams::default();
        let h = HaloParams::default();
        let q = QubitParams::default();
        let v = 1e-3 * units::C_KM_S;
        assert_eq!(modulation_index(&a, &h, &q, 0.0, v), 0.0);
        let b1 = modulation_index(&a, &h, &q, 1.0, v);
        let b3 = modulation_index(&AxionParams { g_ae: 3e-13, ..a }, &h, &q, 1.0, v);
        assert!((b3 / b1 - 3.0).abs() < 1e-14);

        // Natural units, from scratch: β = g v √(2ρ) / (m_e m_a), all in GeV.
        let hbarc_cm_gev = 1.973_269_804e-14_f64;
        let rho_gev4 = 0.4 * hbarc_cm_gev.powi(3);
        let m_e = 0.510_998_95e-3;
        let m_a = 1e-15; // 1 µeV in GeV
        let oracle = 1e-13 * 1e-3 * (2.0 * rho_gev4).sqrt() / (m_e * m_a);
        assert!((b1 / oracle - 1.0).abs() < 1e-6, "{b1} vs {oracle}");
        // and the index does not depend on the spin's gyromagnetic ratio
        let q2 = QubitParams { gamma_e: 14e9, ..q };
        assert!((modulation_index(&a, &h, &q2, 1.0, v) / b1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spin_expectation_carrier_only() {
        let a = AxionParams::default();
        for i in 0..20 {
            let t = i as f64 * 1.3e-10;
            let s = spin_expectation(t, 8.8e10, 0.0, &a, 0.4);
            assert!((s - (8.8e10 * t + 0.4).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_validation() {
        assert!(QubitParams::default().validate().is_ok());
        let bad = QubitParams { t2: 3e-3, ..Default::default() };
        assert!(bad.validate().is_err());
        let q = QubitParams::default();
        assert!((q.larmor() / TAU - 14e9).abs() < 1.0);
    }
}
