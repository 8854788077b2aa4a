use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::signal::{Samples, TimeSeries};
use crate::spectral::window::{window_coefficients, WindowKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeriodogramConfig {
    pub window: WindowKind,
    /// Segment length in samples; `None` uses the whole record.
    pub segment: Option<usize>,
    /// Fractional overlap between consecutive segments.
    pub overlap: f64,
    /// Subtract each segment's mean before transforming.
    pub detrend: bool,
}

impl Default for PeriodogramConfig {
    fn default() -> Self {
        Self { window: WindowKind::Rectangular, segment: None, overlap: 0.5, detrend: false }
    }
}

/// Averaged PSD estimate. Real input gives a one-sided spectrum on
/// `[0, f_Nyquist]`; complex input a two-sided spectrum starting at the most
/// negative frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub f0: f64,
    pub df: f64,
    pub psd: Vec<f64>,
    pub two_sided: bool,
    pub window: WindowKind,
    pub segments: usize,
    pub segment_duration: f64,
}

impl Spectrum {
    pub fn frequency(&self, k: usize) -> f64 {
        self.f0 + k as f64 * self.df
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.psd.len()).map(|k| self.frequency(k)).collect()
    }

    /// Linear interpolation; `None` outside the covered band.
    pub fn value_at(&self, f: f64) -> Option<f64> {
        let x = (f - self.f0) / self.df;
        if x < 0.0 || x > (self.psd.len() - 1) as f64 {
            return None;
        }
        let i = (x.floor() as usize).min(self.psd.len() - 2);
        let u = x - i as f64;
        Some(self.psd[i] * (1.0 - u) + self.psd[i + 1] * u)
    }

    /// Σ S·df over bins whose centre lies in `[f_lo, f_hi]`.
    pub fn band_power(&self, f_lo: f64, f_hi: f64) -> f64 {
        self.psd
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = self.frequency(*k);
                f >= f_lo && f <= f_hi
            })
            .map(|(_, s)| s * self.df)
            .sum()
    }

    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.df
    }

    /// Largest bin in `[f_lo, f_hi]` as `(frequency, psd)`.
    pub fn peak_in(&self, f_lo: f64, f_hi: f64) -> Option<(f64, f64)> {
        self.psd
            .iter()
            .enumerate()
            .map(|(k, &s)| (self.frequency(k), s))
            .filter(|(f, _)| *f >= f_lo && *f <= f_hi)
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("frequency_hz,psd\n");
        for (k, p) in self.psd.iter().enumerate() {
            let _ = writeln!(s, "{:.12e},{:.12e}", self.frequency(k), p);
        }
        s
    }
}

/// Welch periodogram normalised so that Σ S·df equals the window-weighted
/// mean square of the data. DC and Nyquist bins are not doubled.
pub fn periodogram(series: &TimeSeries, config: &PeriodogramConfig) -> Result<Spectrum> {
    let n = series.len();
    let len = config.segment.unwrap_or(n);
    if len > n {
        return Err(Error::SegmentTooLong { segment: len, record: n });
    }
    if len < 2 {
        return Err(Error::invalid("periodogram.segment", "must be at least 2 samples"));
    }
    if !(0.0..1.0).contains(&config.overlap) {
        return Err(Error::invalid("periodogram.overlap", "must lie in [0, 1)"));
    }
    let step = (((1.0 - config.overlap) * len as f64).round() as usize).max(1);
    let w = window_coefficients(config.window, len);
    let w2: f64 = w.iter().map(|v| v * v).sum();
    let x = series.samples.to_complex();
    let complex = matches!(series.samples, Samples::Complex(_));
    let fft = FftPlanner::new().plan_fft_forward(len);
    let mut acc = vec![0.0; len];
    let mut segments = 0;
    let mut start = 0;
    while start + len <= n {
        let seg = &x[start..start + len];
        let mean = if config.detrend {
            seg.iter().sum::<Complex64>() / len as f64
        } else {
            Complex64::new(0.0, 0.0)
        };
        let mut buf: Vec<Complex64> = seg.iter().zip(&w).map(|(z, wk)| (z - mean) * wk).collect();
        fft.process(&mut buf);
        for (a, z) in acc.iter_mut().zip(&buf) {
            *a += z.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let norm = series.dt / (w2 * segments as f64);
    let df = 1.0 / (len as f64 * series.dt);
    let (f0, psd) = if complex {
        let half = len / 2;
        let psd = (0..len).map(|i| acc[(i + len - half) % len] * norm).collect();
        (-(half as f64) * df, psd)
    } else {
        let m = len / 2 + 1;
        let psd = (0..m)
            .map(|k| {
                let edge = k == 0 || (len.is_multiple_of(2) && k == len / 2);
                acc[k] * norm * if edge { 1.0 } else { 2.0 }
            })
            .collect();
        (0.0, psd)
    };
    Ok(Spectrum {
        f0,
        df,
        psd,
        two_sided: complex,
        window: config.window,
        segments,
        segment_duration: len as f64 * series.dt,
    })
}
