//! Per-sidereal-day RMS of the baseband stream and its Monte-Carlo study.

use serde::{Deserialize, Serialize};

use crate::geometry::{day_midpoint, EphemerisConstants};
use crate::linalg::NormalEquations;
use crate::rng::derive_seed;
use crate::signal::noise::NoiseConfig;
use crate::signal::synth::{synthesize_baseband, BasebandModel};
use crate::signal::timeseries::TimeSeries;
use crate::{Error, Result};

/// How a day of samples is reduced to one RMS value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DailyRmsEstimator {
    /// Root mean square of the raw samples. Biased upward by the noise variance.
    Plain,
    /// Fits μ + a cos Ω★t + b sin Ω★t and returns √(μ² + (a² + b²)/2),
    /// which only picks up noise at the sidereal harmonic.
    #[default]
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyRms {
    pub day: i64,
    pub t_mid: f64,
    pub rms: f64,
    pub samples: usize,
}

/// Splits the series on sidereal-day boundaries counted from t = 0 and
/// reduces every day with at least 90 % coverage.
pub fn daily_rms_series(
    series: &TimeSeries,
    eph: &EphemerisConstants,
    estimator: DailyRmsEstimator,
) -> Result<Vec<DailyRms>> {
    let x = series
        .samples
        .as_real()
        .ok_or_else(|| Error::invalid("series", "daily RMS needs a real-valued stream"))?;
    let t_sid = eph.sidereal_day();
    let expected = t_sid / series.dt;
    if expected < 8.0 {
        return Err(Error::InsufficientCoverage(format!(
            "{expected:.1} samples per sidereal day; at least 8 are needed"
        )));
    }
    let mut out = Vec::new();
    let mut k = 0;
    while k < x.len() {
        let day = (series.time(k) / t_sid).floor() as i64;
        let start = k;
        while k < x.len() && (series.time(k) / t_sid).floor() as i64 == day {
            k += 1;
        }
        let count = k - start;
        if (count as f64) < 0.9 * expected {
            continue;
        }
        let rms = match estimator {
            DailyRmsEstimator::Plain => {
                (x[start..k].iter().map(|v| v * v).sum::<f64>() / count as f64).sqrt()
            }
            DailyRmsEstimator::Harmonic => {
                let mut ne = NormalEquations::new(3);
                for (i, &v) in x[start..k].iter().enumerate() {
                    let (s, c) = (eph.sidereal_rate * series.time(start + i)).sin_cos();
                    ne.add(&[1.0, c, s], v, 1.0);
                }
                let c = ne.solve(1e8)?.coefficients;
                (c[0] * c[0] + 0.5 * (c[1] * c[1] + c[2] * c[2])).sqrt()
            }
        };
        out.push(DailyRms { day, t_mid: day_midpoint(day, eph), rms, samples: count });
    }
    if out.is_empty() {
        return Err(Error::InsufficientCoverage("no complete sidereal day in the series".into()));
    }
    Ok(out)
}

/// Divides by the mean so curves with different overall scale compare directly.
pub fn normalize_by_mean(values: &[f64]) -> Result<Vec<f64>> {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if !(mean.abs() > 0.0) || !mean.is_finite() {
        return Err(Error::NonPhysical("daily RMS mean is zero".into()));
    }
    Ok(values.iter().map(|v| v / mean).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyRmsStudy {
    pub days: Vec<i64>,
    /// Noiseless expectation, normalised to unit mean.
    pub theory: Vec<f64>,
    /// Per-trial normalised estimates, `trials[i][d]`.
    pub trials: Vec<Vec<f64>>,
    pub trial_seeds: Vec<u64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl DailyRmsStudy {
    /// Fraction of days whose theory value lies within `mean ± k·std`.
    pub fn coverage(&self, k: f64) -> f64 {
        let inside = self
            .theory
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .filter(|(t, (m, s))| (*t - *m).abs() <= k * *s)
            .count();
        inside as f64 / self.theory.len() as f64
    }

    /// Largest |theory − mean| over all days.
    pub fn max_abs_deviation(&self) -> f64 {
        self.theory
            .iter()
            .zip(&self.mean)
            .map(|(t, m)| (t - m).abs())
            .fold(0.0, f64::max)
    }
}

/// Runs `trials` noisy realisations of `span` seconds and compares each
/// day's normalised RMS to the noiseless expectation.
pub fn daily_rms_monte_carlo(
    model: &BasebandModel,
    noise: &NoiseConfig,
    n_spins: u64,
    span: f64,
    dt: f64,
    trials: usize,
    estimator: DailyRmsEstimator,
) -> Result<DailyRmsStudy> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let mut days: Option<Vec<i64>> = None;
    let mut runs = Vec::with_capacity(trials);
    let mut seeds = Vec::with_capacity(trials);
    for i in 0..trials {
        let seed = derive_seed(noise.seed, i as u64);
        let cfg = NoiseConfig { seed, ..*noise };
        let ts = synthesize_baseband(model, &cfg, n_spins, 0.0, span, dt)?;
        let est = daily_rms_series(&ts, &model.ephemeris, estimator)?;
        let d: Vec<i64> = est.iter().map(|e| e.day).collect();
        if let Some(prev) = &days {
            debug_assert_eq!(prev, &d);
        } else {
            days = Some(d);
        }
        runs.push(normalize_by_mean(&est.iter().map(|e| e.rms).collect::<Vec<_>>())?);
        seeds.push(seed);
    }
    let days = days.expect("at least one trial");
    let theory = normalize_by_mean(&days.iter().map(|&d| model.daily_rms(d)).collect::<Vec<_>>())?;
    let nd = days.len();
    let mut mean = vec![0.0; nd];
    let mut std = vec![0.0; nd];
    for d in 0..nd {
        let col: Vec<f64> = runs.iter().map(|r| r[d]).collect();
        let m = col.iter().sum::<f64>() / trials as f64;
        mean[d] = m;
        std[d] = if trials > 1 {
            (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
        } else {
            0.0
        };
    }
    Ok(DailyRmsStudy { days, theory, trials: runs, trial_seeds: seeds, mean, std })
}
