//! Baseband synthesis: the slowly varying observable plus noise.

use serde::{Deserialize, Serialize};

use crate::geometry::{self, EphemerisConstants, ModulationCoefficients, SiteGeometry};
use crate::halo::{AxionParams, HaloParams};
use crate::rng::stream_rng;
use crate::signal::noise::{binomial_readout, pink_noise, telegraph_noise, white_noise, NoiseConfig};
use crate::signal::timeseries::{content_hash, Samples, SeriesMeta, TimeSeries};
use crate::signal::{reference_index, QubitParams};
use crate::{Error, Result};

/// Upper bound on samples in one synthesised series (2²⁷ ≈ 1 GiB of f64).
pub const MAX_SAMPLES: usize = 1 << 27;

/// Sampling interval used when fitting coefficients from a site geometry.
const FIT_DT: f64 = 1800.0;

/// Deterministic part of the baseband stream in β0 units:
/// `w(t) · [μ_d(t) + K(t) cos(Ω★t − ψ★)]`, where `w` is |v_lab|/v_ref when
/// speed weighting is enabled and 1 otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasebandModel {
    pub coefficients: ModulationCoefficients,
    pub ephemeris: EphemerisConstants,
    /// Wind geometry used for speed weighting; `None` disables it.
    pub speed_site: Option<SiteGeometry>,
    pub v_ref: f64,
}

impl BasebandModel {
    /// Pure coefficient model, no speed weighting.
    pub fn from_coefficients(coefficients: ModulationCoefficients, ephemeris: EphemerisConstants) -> Self {
        Self { coefficients, ephemeris, speed_site: None, v_ref: 1.0 }
    }

    /// Fits the expansion for `site` over one year and enables speed weighting.
    pub fn for_site(site: &SiteGeometry, eph: &EphemerisConstants, halo: &HaloParams) -> Result<Self> {
        let site = site.normalized()?;
        halo.validate()?;
        let fit = geometry::coefficients_for_site(&site, eph, 1.0, FIT_DT)?;
        Ok(Self {
            coefficients: fit.coefficients,
            ephemeris: *eph,
            speed_site: Some(site),
            v_ref: halo.v_ref,
        })
    }

    pub fn speed_weight(&self, t: f64) -> f64 {
        match &self.speed_site {
            Some(site) => geometry::wind_equatorial(t, site, &self.ephemeris).norm() / self.v_ref,
            None => 1.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.speed_weight(t) * self.coefficients.eval(t, &self.ephemeris)
    }

    /// Sidereal/annual expansion of the full stream, speed weighting included,
    /// fitted over one year.
    pub fn effective_coefficients(&self) -> Result<ModulationCoefficients> {
        if self.speed_site.is_none() {
            return Ok(self.coefficients);
        }
        let n = (self.ephemeris.year() / FIT_DT).ceil() as usize + 1;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * FIT_DT).collect();
        let values: Vec<f64> = times.iter().map(|&t| self.eval(t)).collect();
        Ok(geometry::fit_modulation_coefficients(&times, &values, &self.ephemeris)?.coefficients)
    }

    /// Expected daily RMS of the noiseless stream for sidereal day `day`.
    pub fn daily_rms(&self, day: i64) -> f64 {
        let mid = geometry::day_midpoint(day, &self.ephemeris);
        self.speed_weight(mid) * geometry::daily_rms(day, &self.coefficients, &self.ephemeris)
    }
}

fn sample_count(span: f64, dt: f64, eph: &EphemerisConstants) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::invalid("span", "must be positive"));
    }
    let limit = 0.1 * eph.sidereal_day();
    if dt > limit {
        return Err(Error::Aliasing { dt, limit });
    }
    let n = (span / dt).floor();
    if n > MAX_SAMPLES as f64 {
        return Err(Error::TooManySamples { requested: n, limit: MAX_SAMPLES });
    }
    let n = n as usize;
    if n < 2 {
        return Err(Error::invalid("span", "shorter than two samples"));
    }
    Ok(n)
}

/// Samples `model` on `[t0, t0 + span)` and corrupts it with `noise`.
///
/// Noise components use independent streams of the configured seed, so
/// switching one component off leaves the others' realisations unchanged.
pub fn synthesize_baseband(
    model: &BasebandModel,
    noise: &NoiseConfig,
    n_spins: u64,
    t0: f64,
    span: f64,
    dt: f64,
) -> Result<TimeSeries> {
    noise.validate()?;
    let n = sample_count(span, dt, &model.ephemeris)?;
    let mut x: Vec<f64> = (0..n).map(|k| model.eval(t0 + k as f64 * dt)).collect();
    if noise.white_psd > 0.0 {
        let w = white_noise(n, dt, noise.white_psd, &mut stream_rng(noise.seed, 1));
        x.iter_mut().zip(w).for_each(|(a, b)| *a += b);
    }
    if noise.pink_amplitude > 0.0 {
        let p = pink_noise(n, dt, noise.pink_amplitude, noise.pink_exponent, &mut stream_rng(noise.seed, 2));
        x.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    if noise.rtn_amplitude > 0.0 {
        let r = telegraph_noise(n, dt, noise.rtn_amplitude, noise.rtn_rate, &mut stream_rng(noise.seed, 3));
        x.iter_mut().zip(r).for_each(|(a, b)| *a += b);
    }
    if noise.readout {
        x = binomial_readout(
            &x,
            n_spins,
            noise.readout_f0,
            noise.readout_f1,
            noise.readout_full_scale,
            &mut stream_rng(noise.seed, 4),
        )?;
    }
    let meta = SeriesMeta {
        units: "beta0".into(),
        seed: Some(noise.seed),
        ..SeriesMeta::default()
    };
    TimeSeries::new(t0, dt, Samples::Real(x), meta)
}

/// Full pipeline from physical inputs: fits the site geometry, synthesises
/// the baseband stream, and records β0 and the geometry hash in the metadata.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_observable(
    site: &SiteGeometry,
    eph: &EphemerisConstants,
    axion: &AxionParams,
    halo: &HaloParams,
    qubit: &QubitParams,
    noise: &NoiseConfig,
    span: f64,
    dt: f64,
) -> Result<TimeSeries> {
    axion.validate()?;
    qubit.validate()?;
    eph.validate()?;
    // Cheap checks before the year-long coefficient fit.
    sample_count(span, dt, eph)?;
    let model = BasebandModel::for_site(site, eph, halo)?;
    let mut ts = synthesize_baseband(&model, noise, qubit.n_spins, 0.0, span, dt)?;
    ts.meta.geometry_hash = Some(content_hash(&(model.speed_site, eph)));
    ts.meta.axion = Some(*axion);
    ts.meta.beta0 = Some(reference_index(axion, halo, qubit));
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guards() {
        let eph = EphemerisConstants::default();
        let m = BasebandModel::from_coefficients(
            ModulationCoefficients { c0: 0.1, c_star: 0.5, c_annual: 0.0, c_cross: 0.0, psi_star: 0.0, psi_annual: 0.0 },
            eph,
        );
        let noise = NoiseConfig::silent();
        assert!(matches!(
            synthesize_baseband(&m, &noise, 10, 0.0, 1e6, 0.2 * eph.sidereal_day()),
            Err(Error::Aliasing { .. })
        ));
        assert!(matches!(
            synthesize_baseband(&m, &noise, 10, 0.0, 1e12, 1.0),
            Err(Error::TooManySamples { .. })
        ));
        assert!(synthesize_baseband(&m, &noise, 10, 0.0, 1e5, 0.0).is_err());
    }

    #[test]
    fn noiseless_stream_follows_model() {
        let eph = EphemerisConstants::default();
        let c = ModulationCoefficients { c0: 0.2, c_star: 0.5, c_annual: 0.01, c_cross: 0.03, psi_star: 1.0, psi_annual: 2.0 };
        let m = BasebandModel::from_coefficients(c, eph);
        let ts = synthesize_baseband(&m, &NoiseConfig::silent(), 10, 0.0, 86400.0, 60.0).unwrap();
        let x = ts.samples.as_real().unwrap();
        for k in (0..x.len()).step_by(97) {
            assert_eq!(x[k], c.eval(ts.time(k), &eph));
        }
    }

    #[test]
    fn noise_streams_are_independent() {
        let eph = EphemerisConstants::default();
        let c = ModulationCoefficients { c0: 0.0, c_star: 0.0, c_annual: 0.0, c_cross: 0.0, psi_star: 0.0, psi_annual: 0.0 };
        let m = BasebandModel::from_coefficients(c, eph);
        let a = NoiseConfig { readout: false, rtn_amplitude: 0.0, ..NoiseConfig::default() };
        let b = NoiseConfig { pink_amplitude: 0.0, ..a };
        let only_pink = NoiseConfig { white_psd: 0.0, ..a };
        let ta = synthesize_baseband(&m, &a, 10, 0.0, 1e5, 100.0).unwrap();
        let tb = synthesize_baseband(&m, &b, 10, 0.0, 1e5, 100.0).unwrap();
        let tp = synthesize_baseband(&m, &only_pink, 10, 0.0, 1e5, 100.0).unwrap();
        let (xa, xb, xp) = (
            ta.samples.as_real().unwrap(),
            tb.samples.as_real().unwrap(),
            tp.samples.as_real().unwrap(),
        );
        for k in 0..xa.len() {
            assert!((xa[k] - xb[k] - xp[k]).abs() < 1e-12);
        }
    }
}
