use serde::{Deserialize, Serialize};

use crate::spectral::periodogram::Spectrum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrEstimate {
    pub snr_star: f64,
    pub snr_pm: f64,
}

/// SNR★ = A★ √T_coh / √S(f★) with S read from `spectrum`, and
/// SNR± = (ε/2) SNR★ for the annual sidebands.
pub fn snr_estimate(
    a_star: f64,
    spectrum: &Spectrum,
    f_star: f64,
    t_coh: f64,
    epsilon: f64,
) -> Result<SnrEstimate> {
    if !(t_coh > 0.0) {
        return Err(Error::invalid("t_coh", "must be positive"));
    }
    let s = spectrum.value_at(f_star).ok_or_else(|| {
        Error::invalid("f_star", format!("{f_star:e} Hz is outside the spectrum"))
    })?;
    if !(s > 0.0) {
        return Err(Error::NonPhysical("noise PSD at the sidereal line is not positive".into()));
    }
    let snr_star = a_star.abs() * t_coh.sqrt() / s.sqrt();
    Ok(SnrEstimate { snr_star, snr_pm: 0.5 * epsilon.abs() * snr_star })
}

/// min(T2, τ_a, T_obs).
pub fn coherent_integration_time(t2: f64, tau_a: f64, t_obs: f64) -> f64 {
    t2.min(tau_a).min(t_obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::WindowKind;

    #[test]
    fn flat_spectrum() {
        let s = Spectrum { f0: 0.0, df: 1e-6, psd: vec![4.0; 100], two_sided: false, window: WindowKind::Rectangular, segments: 1, segment_duration: 1e6 };
        let e = snr_estimate(0.5, &s, 1.16e-5, 100.0, 0.1).unwrap();
        assert!((e.snr_star - 2.5).abs() < 1e-12);
        assert!((e.snr_pm - 0.125).abs() < 1e-12);
        assert!(snr_estimate(0.5, &s, 1.0, 100.0, 0.1).is_err());
        assert_eq!(coherent_integration_time(1e-4, 3e-3, 1.0), 1e-4);
    }
}
