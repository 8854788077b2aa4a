//! Complex down-conversion to baseband with a linear-phase Kaiser low-pass.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::signal::timeseries::{Samples, TimeSeries};
use crate::{Error, Result};

/// Stopband attenuation of the anti-alias filter, dB.
const ATTENUATION_DB: f64 = 70.0;

/// Zero-phase FIR low-pass with a transition band of `BW/4`. The −6 dB point
/// sits `BW/40` above `BW/2`, which puts the noise-equivalent bandwidth
/// ∫|H|² df of the two-sided response at `BW` to a few parts in a thousand.
/// The passband is flat to about `0.4·BW` and the stopband starts near
/// `0.65·BW`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterodyneFilter {
    pub taps: Vec<f64>,
    pub cutoff_hz: f64,
    pub transition_hz: f64,
    pub decimation: usize,
}

impl HeterodyneFilter {
    pub fn design(sample_rate: f64, bandwidth: f64) -> Self {
        let transition = 0.25 * bandwidth;
        // The Kaiser roll-off removes about a tenth of the transition width
        // from ∫|H|² on each side; shifting the cutoff out restores it.
        let cutoff = 0.5 * bandwidth + 0.1 * transition;
        let beta = 0.1102 * (ATTENUATION_DB - 8.7);
        let dw = TAU * transition / sample_rate;
        let mut len = ((ATTENUATION_DB - 8.0) / (2.285 * dw)).ceil() as usize + 1;
        if len.is_multiple_of(2) {
            len += 1;
        }
        let m = (len / 2) as f64;
        let fc = cutoff / sample_rate;
        let i0_beta = bessel_i0(beta);
        let mut taps: Vec<f64> = (0..len)
            .map(|i| {
                let k = i as f64 - m;
                let sinc = if k == 0.0 { 2.0 * fc } else { (TAU * fc * k).sin() / (PI * k) };
                let r = k / m;
                sinc * bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0_beta
            })
            .collect();
        let dc: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|h| *h /= dc);
        let decimation = ((sample_rate / (2.0 * bandwidth)).floor() as usize).max(1);
        Self { taps, cutoff_hz: cutoff, transition_hz: transition, decimation }
    }

    /// |H(f)| of the continuous response.
    pub fn magnitude(&self, f: f64, sample_rate: f64) -> f64 {
        let m = (self.taps.len() / 2) as f64;
        let w = TAU * f / sample_rate;
        self.taps
            .iter()
            .enumerate()
            .map(|(i, h)| h * (w * (i as f64 - m)).cos())
            .sum::<f64>()
            .abs()
    }
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = 0.25 * x * x;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Mixes `series` down by `f_center`, low-pass filters to `bandwidth` and
/// decimates. Real input is scaled by two so a tone of amplitude A becomes a
/// phasor of modulus A. Time stamps and the absolute phase reference are
/// preserved: output sample k sits at input time `t0 + k·D·dt`.
pub fn heterodyne(series: &TimeSeries, f_center: f64, bandwidth: f64) -> Result<TimeSeries> {
    let fs = series.sample_rate();
    let nyquist = 0.5 * fs;
    let out_of_band = || Error::OutOfBand { f_center, bandwidth, nyquist };
    if !(f_center.is_finite() && bandwidth.is_finite()) || bandwidth <= 0.0 || f_center < 0.0 {
        return Err(out_of_band());
    }
    if f_center + 0.5 * bandwidth > nyquist {
        return Err(out_of_band());
    }
    let real_input = !series.samples.is_complex();
    if real_input && f_center < 0.5 * bandwidth {
        return Err(out_of_band());
    }
    let filter = HeterodyneFilter::design(fs, bandwidth);
    let scale = if real_input { 2.0 } else { 1.0 };
    let x = series.samples.to_complex();
    let n = x.len();
    let step = f_center * series.dt;
    let t0_cycles = f_center * series.t0;
    let mixed: Vec<Complex64> = x
        .iter()
        .enumerate()
        .map(|(j, z)| {
            // Phase reduced modulo one cycle before scaling keeps precision on long records.
            let cycles = (t0_cycles.fract() + (step * j as f64).fract()).fract();
            z * Complex64::from_polar(scale, -TAU * cycles)
        })
        .collect();
    let d = filter.decimation;
    let half = filter.taps.len() / 2;
    let n_out = n.div_ceil(d);
    if n_out < 2 {
        return Err(Error::invalid("series", "too short for the requested decimation"));
    }
    let out: Vec<Complex64> = (0..n_out)
        .map(|k| {
            let j = k * d;
            let lo = j.saturating_sub(half);
            let hi = (j + half).min(n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, m) in mixed.iter().enumerate().take(hi + 1).skip(lo) {
                acc += m * filter.taps[i + half - j];
            }
            acc
        })
        .collect();
    let mut ts = TimeSeries::new(series.t0, series.dt * d as f64, Samples::Complex(out), series.meta.clone())?;
    ts.meta.note = Some(format!("heterodyne f_c={f_center:e} Hz, BW={bandwidth:e} Hz"));
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_shape() {
        let fs = 1000.0;
        let f = HeterodyneFilter::design(fs, 20.0);
        assert!((f.magnitude(0.0, fs) - 1.0).abs() < 1e-12);
        assert!((f.magnitude(10.5, fs) - 0.5).abs() < 1e-3);
        assert!((f.magnitude(8.0, fs) - 1.0).abs() < 1e-3);
        let df = 1e-3;
        let enbw: f64 = 2.0 * (0..20_000).map(|i| f.magnitude((i as f64 + 0.5) * df, fs).powi(2) * df).sum::<f64>();
        assert!((enbw / 20.0 - 1.0).abs() < 0.01, "{enbw}");
        for k in 0..50 {
            let ff = 13.0 + k as f64 * 5.0;
            assert!(f.magnitude(ff, fs) < 10f64.powf(-60.0 / 20.0), "{ff}");
        }
        assert_eq!(f.decimation, 25);
    }

    #[test]
    fn band_checks() {
        let ts = TimeSeries::real(0.0, 1e-3, vec![0.0; 1000]).unwrap();
        assert!(heterodyne(&ts, 600.0, 10.0).is_err());
        assert!(heterodyne(&ts, 495.0, 20.0).is_err());
        assert!(heterodyne(&ts, 5.0, 20.0).is_err());
        assert!(heterodyne(&ts, 100.0, -1.0).is_err());
        assert!(heterodyne(&ts, 100.0, 20.0).is_ok());
    }
}
