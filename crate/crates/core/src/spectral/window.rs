use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    #[default]
    Rectangular,
    Hann,
}

impl WindowKind {
    /// Nominal resolution in units of 1/T. For Hann this is the half-power
    /// width of the main lobe; for the rectangular window it is 1/T.
    pub fn resolution_factor(self) -> f64 {
        match self {
            WindowKind::Rectangular => 1.0,
            WindowKind::Hann => 1.44,
        }
    }
}

/// Periodic window samples for an `n`-point segment.
pub fn window_coefficients(kind: WindowKind, n: usize) -> Vec<f64> {
    match kind {
        WindowKind::Rectangular => vec![1.0; n],
        WindowKind::Hann => (0..n)
            .map(|k| 0.5 * (1.0 - (TAU * k as f64 / n as f64).cos()))
            .collect(),
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// W(Ω) = ∫₀^T w(t) e^{−iΩt} dt for the continuous window on [0, T].
pub fn window_transform(kind: WindowKind, segment: f64, omega: f64) -> Complex64 {
    let x = 0.5 * omega * segment;
    let shape = match kind {
        WindowKind::Rectangular => sinc(x),
        WindowKind::Hann => 0.5 * sinc(x) + 0.25 * (sinc(x - PI) + sinc(x + PI)),
    };
    Complex64::from_polar(segment * shape, -x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowResponse {
    pub kind: WindowKind,
    pub segment: f64,
    /// Nominal resolution `factor / T`, Hz.
    pub resolution_hz: f64,
    /// Equivalent noise bandwidth ∫w²/(∫w)², Hz.
    pub enbw_hz: f64,
    /// Full width of the main lobe at half power, Hz.
    pub half_power_width_hz: f64,
}

impl WindowResponse {
    pub fn eval(&self, omega: f64) -> Complex64 {
        window_transform(self.kind, self.segment, omega)
    }
}

pub fn window_response(kind: WindowKind, segment: f64) -> Result<WindowResponse> {
    if !(segment > 0.0 && segment.is_finite()) {
        return Err(Error::invalid("segment", "must be positive"));
    }
    let enbw_factor = match kind {
        WindowKind::Rectangular => 1.0,
        WindowKind::Hann => 1.5,
    };
    let p0 = window_transform(kind, segment, 0.0).norm_sqr();
    let excess = |f: f64| window_transform(kind, segment, TAU * f).norm_sqr() - 0.5 * p0;
    // The half-power point lies inside the first null, which is at ≤ 2/T.
    let (mut lo, mut hi) = (0.0, 2.0 / segment);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(WindowResponse {
        kind,
        segment,
        resolution_hz: kind.resolution_factor() / segment,
        enbw_hz: enbw_factor / segment,
        half_power_width_hz: lo + hi,
    })
}
