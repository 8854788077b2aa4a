//! Lab-frame axion-wind geometry.
//!
//! The galactic wind direction (α_w, δ_w) is fixed in equatorial coordinates.
//! Earth's circular orbit adds a slowly rotating velocity, and the sidereal
//! rotation carries the result into the local East-North-Up frame where it is
//! projected on the sensor axis. The projection cos θ(t) is then summarised by
//! the six-parameter expansion
//!
//! ```text
//! cos θ(t) ≈ c0 + c★ cos(Ω★t − ψ★) + c⊕ cos(Ω⊕t − ψ⊕)
//!               + c× cos(Ω★t − ψ★) cos(Ω⊕t − ψ⊕)
//! ```
//!
//! Epoch: at t = 0 the local sidereal angle equals `lst0` and the orbital
//! longitude equals `orbital_phase`; every fitted phase is relative to it.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::linalg::NormalEquations;
use crate::units::{SIDEREAL_DAY_S, YEAR_S};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SiteGeometry {
    pub latitude_deg: f64,
    /// Carried for provenance; `lst0` already encodes the local sidereal phase.
    pub longitude_deg: f64,
    pub wind_ra_deg: f64,
    pub wind_dec_deg: f64,
    pub elevation_deg: f64,
    /// Sensor azimuth at t = 0, degrees east of north.
    pub azimuth_deg: f64,
    /// Turntable azimuth rate, rad/s.
    pub turntable_rate: f64,
    /// Local sidereal angle at t = 0, rad.
    pub lst0: f64,
}

impl Default for SiteGeometry {
    /// Beijing, zenith-pointing sensor.
    fn default() -> Self {
        Self {
            latitude_deg: 39.9042,
            longitude_deg: 116.4074,
            wind_ra_deg: 270.0,
            wind_dec_deg: 30.0,
            elevation_deg: 90.0,
            azimuth_deg: 0.0,
            turntable_rate: 0.0,
            lst0: 0.0,
        }
    }
}

fn wrap_deg_360(x: f64) -> f64 {
    x.rem_euclid(360.0)
}

fn wrap_deg_180(x: f64) -> f64 {
    let w = x.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

impl SiteGeometry {
    /// Validates and maps every angle onto its canonical range.
    pub fn normalized(self) -> Result<Self> {
        let all = [
            self.latitude_deg,
            self.longitude_deg,
            self.wind_ra_deg,
            self.wind_dec_deg,
            self.elevation_deg,
            self.azimuth_deg,
            self.turntable_rate,
            self.lst0,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("geometry", "all fields must be finite"));
        }
        if self.latitude_deg.abs() > 90.0 {
            return Err(Error::invalid("geometry.latitude_deg", "|latitude| must be ≤ 90°"));
        }
        if self.wind_dec_deg.abs() > 90.0 {
            return Err(Error::invalid("geometry.wind_dec_deg", "|declination| must be ≤ 90°"));
        }
        if self.elevation_deg.abs() > 90.0 {
            return Err(Error::invalid("geometry.elevation_deg", "elevation must be in [−90°, 90°]"));
        }
        Ok(Self {
            longitude_deg: wrap_deg_180(self.longitude_deg),
            wind_ra_deg: wrap_deg_360(self.wind_ra_deg),
            azimuth_deg: wrap_deg_360(self.azimuth_deg),
            lst0: self.lst0.rem_euclid(TAU),
            ..self
        })
    }

    pub fn latitude(&self) -> f64 {
        self.latitude_deg.to_radians()
    }

    /// Unit vector of the galactic wind in equatorial coordinates.
    pub fn wind_direction_equatorial(&self) -> Vector3<f64> {
        unit_from_ra_dec(self.wind_ra_deg.to_radians(), self.wind_dec_deg.to_radians())
    }

    /// Sensor quantisation axis in the local East-North-Up frame.
    pub fn sensor_axis(&self, t: f64) -> Vector3<f64> {
        let el = self.elevation_deg.to_radians();
        let az = self.azimuth_deg.to_radians() + self.turntable_rate * t;
        Vector3::new(el.cos() * az.sin(), el.cos() * az.cos(), el.sin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EphemerisConstants {
    /// Ω★, rad/s.
    pub sidereal_rate: f64,
    /// Ω⊕, rad/s.
    pub annual_rate: f64,
    /// Solar-system speed through the halo, km/s.
    pub v_sun: f64,
    /// Earth orbital speed, km/s.
    pub v_orbit: f64,
    pub obliquity_deg: f64,
    /// Orbital longitude at t = 0, rad.
    pub orbital_phase: f64,
}

impl Default for EphemerisConstants {
    fn default() -> Self {
        Self {
            sidereal_rate: TAU / SIDEREAL_DAY_S,
            annual_rate: TAU / YEAR_S,
            v_sun: 230.0,
            v_orbit: 30.0,
            obliquity_deg: 23.44,
            orbital_phase: 0.0,
        }
    }
}

impl EphemerisConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.annual_rate > 0.0 && self.sidereal_rate > self.annual_rate) {
            return Err(Error::invalid("ephemeris", "require Ω★ > Ω⊕ > 0"));
        }
        if !(self.v_sun > 0.0) || !(self.v_orbit >= 0.0) {
            return Err(Error::invalid("ephemeris", "speeds must be non-negative, v_sun positive"));
        }
        if !self.obliquity_deg.is_finite() || !self.orbital_phase.is_finite() {
            return Err(Error::invalid("ephemeris", "angles must be finite"));
        }
        Ok(())
    }

    pub fn sidereal_day(&self) -> f64 {
        TAU / self.sidereal_rate
    }

    pub fn year(&self) -> f64 {
        TAU / self.annual_rate
    }

    pub fn sidereal_frequency(&self) -> f64 {
        self.sidereal_rate / TAU
    }

    pub fn annual_frequency(&self) -> f64 {
        self.annual_rate / TAU
    }

    /// Earth's orbital velocity in equatorial coordinates, km/s.
    pub fn earth_velocity(&self, t: f64) -> Vector3<f64> {
        let l = self.annual_rate * t + self.orbital_phase;
        let ecliptic = Vector3::new(-l.sin(), l.cos(), 0.0);
        rot_x(self.obliquity_deg.to_radians()) * ecliptic * self.v_orbit
    }
}

fn unit_from_ra_dec(ra: f64, dec: f64) -> Vector3<f64> {
    Vector3::new(dec.cos() * ra.cos(), dec.cos() * ra.sin(), dec.sin())
}

pub fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Local sidereal rotation: equatorial → East-North-Up at latitude `lat`
/// and sidereal angle `lst` (both rad).
pub fn equatorial_to_horizontal(lat: f64, lst: f64) -> Matrix3<f64> {
    let (s, c) = lat.sin_cos();
    let enu = Matrix3::new(0.0, 1.0, 0.0, -s, 0.0, c, c, 0.0, s);
    enu * rot_z(-lst)
}

/// Wind velocity in equatorial coordinates, km/s: the Sun's contribution along
/// the galactic wind direction minus Earth's orbital velocity.
pub fn wind_equatorial(t: f64, site: &SiteGeometry, eph: &EphemerisConstants) -> Vector3<f64> {
    site.wind_direction_equatorial() * eph.v_sun - eph.earth_velocity(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabWind {
    /// Unit direction in the East-North-Up frame.
    pub direction: Vector3<f64>,
    /// |v_lab|, km/s.
    pub speed: f64,
}

pub fn lab_wind(t: f64, site: &SiteGeometry, eph: &EphemerisConstants) -> LabWind {
    let v = wind_equatorial(t, site, eph);
    let lst = site.lst0 + eph.sidereal_rate * t;
    let lab = equatorial_to_horizontal(site.latitude(), lst) * v;
    let speed = lab.norm();
    LabWind {
        direction: lab / speed,
        speed,
    }
}

/// cos θ(t) = v̂_lab(t)·q̂ for an explicit unit axis in the ENU frame.
pub fn projection(t: f64, site: &SiteGeometry, eph: &EphemerisConstants, axis: &Vector3<f64>) -> f64 {
    lab_wind(t, site, eph).direction.dot(axis).clamp(-1.0, 1.0)
}

/// cos θ(t) along the site's own (possibly rotating) sensor axis.
pub fn sensor_projection(t: f64, site: &SiteGeometry, eph: &EphemerisConstants) -> f64 {
    projection(t, site, eph, &site.sensor_axis(t))
}

pub fn projection_series(times: &[f64], site: &SiteGeometry, eph: &EphemerisConstants) -> Vec<f64> {
    times.iter().map(|&t| sensor_projection(t, site, eph)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationCoefficients {
    pub c0: f64,
    pub c_star: f64,
    pub c_annual: f64,
    pub c_cross: f64,
    pub psi_star: f64,
    pub psi_annual: f64,
}

impl ModulationCoefficients {
    fn phases(&self, t: f64, eph: &EphemerisConstants) -> (f64, f64) {
        (
            eph.sidereal_rate * t - self.psi_star,
            eph.annual_rate * t - self.psi_annual,
        )
    }

    /// Daily mean μ_d(t) = c0 + c⊕ cos(Ω⊕t − ψ⊕).
    pub fn daily_mean(&self, t: f64, eph: &EphemerisConstants) -> f64 {
        self.c0 + self.c_annual * self.phases(t, eph).1.cos()
    }

    /// Daily excursion K(t) = c★ + c× cos(Ω⊕t − ψ⊕).
    pub fn daily_amplitude(&self, t: f64, eph: &EphemerisConstants) -> f64 {
        self.c_star + self.c_cross * self.phases(t, eph).1.cos()
    }

    pub fn eval(&self, t: f64, eph: &EphemerisConstants) -> f64 {
        let (ps, _) = self.phases(t, eph);
        self.daily_mean(t, eph) + self.daily_amplitude(t, eph) * ps.cos()
    }

    /// Annual depth ε⊕ = c×/c★; `None` when there is no daily term.
    pub fn annual_depth(&self) -> Option<f64> {
        (self.c_star.abs() > 1e-12).then(|| self.c_cross / self.c_star)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            c0: self.c0 * k,
            c_star: self.c_star * k,
            c_annual: self.c_annual * k,
            c_cross: self.c_cross * k,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFit {
    pub coefficients: ModulationCoefficients,
    /// RMS of data minus the six-parameter reconstruction.
    pub residual_rms: f64,
    /// RMS of data minus the full nine-term least-squares fit.
    pub basis_residual_rms: f64,
    pub samples: usize,
}

fn basis(t: f64, eph: &EphemerisConstants) -> [f64; 9] {
    let (ss, cs) = (eph.sidereal_rate * t).sin_cos();
    let (se, ce) = (eph.annual_rate * t).sin_cos();
    [1.0, cs, ss, ce, se, cs * ce, cs * se, ss * ce, ss * se]
}

/// Least-squares fit of the sidereal/annual expansion to a sampled cos θ(t).
///
/// The fit runs on the nine-term product basis; the cross coefficient is the
/// projection of the 2×2 product block onto the fitted daily and annual phases.
pub fn fit_modulation_coefficients(
    times: &[f64],
    values: &[f64],
    eph: &EphemerisConstants,
) -> Result<CoefficientFit> {
    eph.validate()?;
    if times.len() != values.len() {
        return Err(Error::invalid("series", "times and values differ in length"));
    }
    if times.len() < 9 {
        return Err(Error::InsufficientCoverage("fewer samples than regressors".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneTime);
    }
    let span = times[times.len() - 1] - times[0];
    if span < eph.year() * (1.0 - 1e-6) {
        return Err(Error::InsufficientCoverage(format!(
            "series spans {:.4} years, need at least one",
            span / eph.year()
        )));
    }
    let max_gap = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if max_gap > eph.sidereal_day() / 8.0 {
        return Err(Error::InsufficientCoverage(format!(
            "largest gap {max_gap:.1} s leaves fewer than 8 samples per sidereal day"
        )));
    }

    let mut ne = NormalEquations::new(9);
    for (&t, &y) in times.iter().zip(values) {
        ne.add(&basis(t, eph), y, 1.0);
    }
    let ls = ne.solve(1e10)?;
    let b = &ls.coefficients;

    let c_star = b[1].hypot(b[2]);
    let psi_star = b[2].atan2(b[1]).rem_euclid(TAU);
    let c_annual = b[3].hypot(b[4]);
    let psi_annual = b[4].atan2(b[3]).rem_euclid(TAU);
    let (us, uc) = psi_star.sin_cos();
    let (es, ec) = psi_annual.sin_cos();
    let c_cross = uc * (b[5] * ec + b[6] * es) + us * (b[7] * ec + b[8] * es);

    let coefficients = ModulationCoefficients {
        c0: b[0],
        c_star,
        c_annual,
        c_cross,
        psi_star,
        psi_annual,
    };
    let n = times.len() as f64;
    let residual_rms = (times
        .iter()
        .zip(values)
        .map(|(&t, &y)| (y - coefficients.eval(t, eph)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(CoefficientFit {
        coefficients,
        residual_rms,
        basis_residual_rms: (ls.rss / n).sqrt(),
        samples: times.len(),
    })
}

/// Samples the site projection over `years` at `dt` and fits the expansion.
pub fn coefficients_for_site(
    site: &SiteGeometry,
    eph: &EphemerisConstants,
    years: f64,
    dt: f64,
) -> Result<CoefficientFit> {
    let n = (years * eph.year() / dt).ceil() as usize + 1;
    let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    let values = projection_series(&times, site, eph);
    fit_modulation_coefficients(&times, &values, eph)
}

/// Midpoint of sidereal day `day` counted from the epoch, s.
pub fn day_midpoint(day: i64, eph: &EphemerisConstants) -> f64 {
    (day as f64 + 0.5) * eph.sidereal_day()
}

/// Daily extremes μ_d ± |K| at time `t`.
pub fn envelope_at(t: f64, coeffs: &ModulationCoefficients, eph: &EphemerisConstants) -> (f64, f64) {
    let mu = coeffs.daily_mean(t, eph);
    let k = coeffs.daily_amplitude(t, eph).abs();
    (mu - k, mu + k)
}

/// `(min, max)` of cos θ over sidereal day `day`.
pub fn daily_envelope(day: i64, coeffs: &ModulationCoefficients, eph: &EphemerisConstants) -> (f64, f64) {
    envelope_at(day_midpoint(day, eph), coeffs, eph)
}

/// R_d = √(μ_d² + K²/2) at time `t`.
pub fn daily_rms_at(t: f64, coeffs: &ModulationCoefficients, eph: &EphemerisConstants) -> f64 {
    let mu = coeffs.daily_mean(t, eph);
    let k = coeffs.daily_amplitude(t, eph);
    (mu * mu + 0.5 * k * k).sqrt()
}

pub fn daily_rms(day: i64, coeffs: &ModulationCoefficients, eph: &EphemerisConstants) -> f64 {
    daily_rms_at(day_midpoint(day, eph), coeffs, eph)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricGains {
    /// Time-averaged projection p0.
    pub p0: f64,
    /// Mean-square projection ⟨P²⟩.
    pub mean_square_projection: f64,
    /// Matched daily/annual weighting gain √⟨P²⟩/|p0|.
    pub g_daily: f64,
    /// Three-axis readout gain 1/√⟨P²⟩.
    pub g_three_axis: f64,
}

impl GeometricGains {
    /// √N_axes · G_daily · G_3axis.
    pub fn total(&self, n_axes: u32) -> f64 {
        (n_axes as f64).sqrt() * self.g_daily * self.g_three_axis
    }
}

/// Closed-form geometric gains from the sidereal rotation alone.
///
/// For a fixed sensor axis whose equatorial declination has sine `s_q`
/// (s_q = sin λ for a zenith sensor), the projection is
/// `sin δ_w s_q + cos δ_w √(1 − s_q²) cos(H)`. The turntable is ignored.
pub fn geometric_gains(site: &SiteGeometry) -> Result<GeometricGains> {
    let site = site.normalized()?;
    let axis_eq = equatorial_to_horizontal(site.latitude(), 0.0).transpose() * site.sensor_axis(0.0);
    let s_q = axis_eq.z.clamp(-1.0, 1.0);
    let dec = site.wind_dec_deg.to_radians();
    let p0 = dec.sin() * s_q;
    let amp = dec.cos() * (1.0 - s_q * s_q).sqrt();
    let p2 = p0 * p0 + 0.5 * amp * amp;
    if p0.abs() < 1e-12 {
        return Err(Error::UnboundedMatchedGain);
    }
    Ok(GeometricGains {
        p0,
        mean_square_projection: p2,
        g_daily: p2.sqrt() / p0.abs(),
        g_three_axis: 1.0 / p2.sqrt(),
    })
}

/// Mean of cos θ over a whole number of sidereal days starting at `t0`,
/// sampled with `per_day` points per day. Used as a sanity cross-check.
pub fn mean_projection(site: &SiteGeometry, eph: &EphemerisConstants, t0: f64, days: usize, per_day: usize) -> f64 {
    let dt = eph.sidereal_day() / per_day as f64;
    let n = days * per_day;
    (0..n)
        .map(|i| sensor_projection(t0 + i as f64 * dt, site, eph))
        .sum::<f64>()
        / n as f64
}
