//! Noise generators and the spin-to-charge readout channel.
//!
//! All amplitudes are in the units of the stream they corrupt (β0 units for
//! the baseband observable). PSDs are one-sided.

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// One-sided white PSD, units²/Hz.
    pub white_psd: f64,
    /// 1/f^α PSD at 1 Hz, units²/Hz.
    pub pink_amplitude: f64,
    pub pink_exponent: f64,
    /// Telegraph level ±A.
    pub rtn_amplitude: f64,
    /// Mean switching rate, 1/s.
    pub rtn_rate: f64,
    /// Pass the stream through the binomial readout channel.
    pub readout: bool,
    pub readout_f0: f64,
    pub readout_f1: f64,
    /// Stream value mapped to a bright-state probability of one.
    pub readout_full_scale: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            white_psd: 500.0,
            pink_amplitude: 1e-3,
            pink_exponent: 1.0,
            rtn_amplitude: 0.2,
            rtn_rate: 1.0 / 3600.0,
            readout: true,
            readout_f0: 0.95,
            readout_f1: 0.95,
            readout_full_scale: 2.0,
            seed: 2025,
        }
    }
}

impl NoiseConfig {
    /// No noise at all; handy for deterministic checks.
    pub fn silent() -> Self {
        Self {
            white_psd: 0.0,
            pink_amplitude: 0.0,
            rtn_amplitude: 0.0,
            readout: false,
            ..Self::default()
        }
    }

    /// White noise only.
    pub fn white(psd: f64, seed: u64) -> Self {
        Self { white_psd: psd, seed, ..Self::silent() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("noise.white_psd", self.white_psd),
            ("noise.pink_amplitude", self.pink_amplitude),
            ("noise.rtn_amplitude", self.rtn_amplitude),
            ("noise.rtn_rate", self.rtn_rate),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be non-negative"));
            }
        }
        if !(0.0..=3.0).contains(&self.pink_exponent) {
            return Err(Error::invalid("noise.pink_exponent", "must lie in [0, 3]"));
        }
        if self.readout {
            for (name, f) in [("noise.readout_f0", self.readout_f0), ("noise.readout_f1", self.readout_f1)] {
                if !(0.5..=1.0).contains(&f) {
                    return Err(Error::invalid(name, "assignment fidelity must lie in [0.5, 1]"));
                }
            }
            if self.readout_f0 + self.readout_f1 <= 1.0 + 1e-12 {
                return Err(Error::invalid(
                    "noise.readout_f1",
                    "f0 + f1 must exceed 1 for the readout to be invertible",
                ));
            }
            if !(self.readout_full_scale > 0.0) {
                return Err(Error::invalid("noise.readout_full_scale", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Gaussian white noise with one-sided PSD `psd`: σ² = psd/(2 dt).
pub fn white_noise(n: usize, dt: f64, psd: f64, rng: &mut impl Rng) -> Vec<f64> {
    let sigma = (psd / (2.0 * dt)).sqrt();
    (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Gaussian 1/f^α noise by spectral shaping of white noise.
///
/// The target one-sided PSD is `amplitude / f^α`; the DC bin is zeroed so the
/// realisation has no arbitrary offset.
pub fn pink_noise(n: usize, dt: f64, amplitude: f64, exponent: f64, rng: &mut impl Rng) -> Vec<f64> {
    if n == 0 || amplitude == 0.0 {
        return vec![0.0; n];
    }
    let mut buf: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt);
    // Unit-variance white noise has one-sided PSD 2 dt; scale by √(S/2dt).
    for (k, z) in buf.iter_mut().enumerate() {
        let kk = k.min(n - k);
        if kk == 0 {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        let f = kk as f64 * df;
        *z *= (amplitude / f.powf(exponent) / (2.0 * dt)).sqrt();
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.re / n as f64).collect()
}

/// Symmetric random telegraph signal ±`amplitude` with mean switching rate
/// `rate`. The initial state is drawn from the stationary distribution.
pub fn telegraph_noise(n: usize, dt: f64, amplitude: f64, rate: f64, rng: &mut impl Rng) -> Vec<f64> {
    if amplitude == 0.0 {
        return vec![0.0; n];
    }
    // Probability that an odd number of switches happens within dt.
    let p_flip = 0.5 * (1.0 - (-2.0 * rate * dt).exp());
    let mut state = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(state * amplitude);
        if rng.random::<f64>() < p_flip {
            state = -state;
        }
    }
    out
}

/// Maps each stream value to a bright-state probability, simulates the
/// assignment of `n_spins` independent spins with fidelities `(f0, f1)`, and
/// returns the fidelity-corrected estimate in the input units.
pub fn binomial_readout(
    values: &[f64],
    n_spins: u64,
    f0: f64,
    f1: f64,
    full_scale: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if n_spins == 0 {
        return Err(Error::invalid("qubit.n_spins", "must be at least 1"));
    }
    let contrast = f0 + f1 - 1.0;
    if contrast <= 0.0 {
        return Err(Error::invalid("noise.readout_f1", "f0 + f1 must exceed 1"));
    }
    let n = n_spins as f64;
    values
        .iter()
        .map(|&x| {
            let p = 0.5 * (1.0 + (x / full_scale).clamp(-1.0, 1.0));
            let p_read = p * f1 + (1.0 - p) * (1.0 - f0);
            let dist = Binomial::new(n_spins, p_read.clamp(0.0, 1.0))
                .map_err(|e| Error::NonPhysical(e.to_string()))?;
            let m = dist.sample(rng) as f64 / n;
            let p_hat = (m - (1.0 - f0)) / contrast;
            Ok(full_scale * (2.0 * p_hat - 1.0))
        })
        .collect()
}

/// Standard deviation added by the readout channel at stream value `x`.
pub fn readout_sigma(x: f64, n_spins: u64, f0: f64, f1: f64, full_scale: f64) -> f64 {
    let p = 0.5 * (1.0 + (x / full_scale).clamp(-1.0, 1.0));
    let p_read = p * f1 + (1.0 - p) * (1.0 - f0);
    let var_m = p_read * (1.0 - p_read) / n_spins as f64;
    2.0 * full_scale * var_m.sqrt() / (f0 + f1 - 1.0)
}
