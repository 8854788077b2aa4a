//! Run configuration: one strict JSON document plus dotted-key overrides.

use std::fs;
use std::path::{Path, PathBuf};

use axionkit_core::geometry::{EphemerisConstants, SiteGeometry};
use axionkit_core::halo::{AxionParams, HaloParams};
use axionkit_core::sensitivity::{GainMode, SearchConfig};
use axionkit_core::signal::daily::DailyRmsEstimator;
use axionkit_core::signal::{NoiseConfig, QubitParams};
use axionkit_core::spectral::PeriodogramConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: SiteGeometry,
    pub ephemeris: EphemerisConstants,
    pub halo: HaloParams,
    pub axion: AxionParams,
    pub qubit: QubitParams,
    pub noise: NoiseConfig,
    pub search: SearchConfig,
    pub periodogram: PeriodogramConfig,
    pub envelope: EnvelopeConfig,
    pub daily_rms: DailyRmsConfig,
    pub psd: PsdConfig,
    pub triplet: TripletConfig,
    pub linewidth: LinewidthConfig,
    pub sensitivity: SensitivityRunConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeConfig {
    pub years: f64,
    /// Sampling of the instantaneous |β|/β0 trace, s.
    pub dt: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { years: 1.0, dt: 1800.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DailyRmsConfig {
    pub span_days: f64,
    pub dt: f64,
    pub trials: usize,
    /// Half-width of the band around the Monte-Carlo mean, in σ.
    pub k_sigma: f64,
    pub estimator: DailyRmsEstimator,
}

impl Default for DailyRmsConfig {
    fn default() -> Self {
        Self { span_days: 365.25, dt: 600.0, trials: 20, k_sigma: 5.0, estimator: DailyRmsEstimator::Harmonic }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsdConfig {
    pub span_days: f64,
    pub dt: f64,
    /// Skip the noise model entirely.
    pub noiseless: bool,
    /// Override the geometric annual depth with an injected value.
    pub epsilon_inject: Option<f64>,
}

impl Default for PsdConfig {
    fn default() -> Self {
        Self { span_days: 4.0 * 365.25, dt: 1000.0, noiseless: false, epsilon_inject: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TripletConfig {
    /// CSV or binary series to analyse instead of synthesising one.
    pub input: Option<PathBuf>,
    /// Sidereal phase ψ★ of the data, rad.
    pub psi_star: Option<f64>,
    /// Annual phase ψ⊕ of the data, rad.
    pub psi_annual: Option<f64>,
    /// Use raw Fourier sums; phases are then not needed.
    pub agnostic: bool,
    pub window_days: f64,
    /// Start of the synthetic window; by default centred where the annual
    /// phase is π/2, i.e. where the depth is best constrained.
    pub start_days: Option<f64>,
    pub dt: f64,
    pub epsilon_inject: Option<f64>,
    pub noiseless: bool,
}

impl Default for TripletConfig {
    fn default() -> Self {
        Self {
            input: None,
            psi_star: None,
            psi_annual: None,
            agnostic: false,
            window_days: 60.0,
            start_days: None,
            dt: 1000.0,
            epsilon_inject: None,
            noiseless: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinewidthConfig {
    /// Axion masses, µeV.
    pub masses: Vec<f64>,
    pub points: usize,
}

impl Default for LinewidthConfig {
    fn default() -> Self {
        Self { masses: vec![1.0, 2.0, 5.0, 10.0], points: 400 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PresetChoice {
    Current,
    Future,
    /// Both presets.
    Both,
    /// The `qubit` section as given.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GainChoice {
    None,
    Matched,
    ThreeAxis,
    All,
    /// One curve per gain mode.
    Every,
}

impl GainChoice {
    pub fn modes(self) -> Vec<GainMode> {
        match self {
            GainChoice::None => vec![GainMode::None],
            GainChoice::Matched => vec![GainMode::Matched],
            GainChoice::ThreeAxis => vec![GainMode::ThreeAxis],
            GainChoice::All => vec![GainMode::All],
            GainChoice::Every => vec![GainMode::None, GainMode::Matched, GainMode::ThreeAxis, GainMode::All],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivityRunConfig {
    pub preset: PresetChoice,
    pub gains: GainChoice,
    pub m_min: f64,
    pub m_max: f64,
    pub points: usize,
    pub tan_beta_min: f64,
    pub tan_beta_max: f64,
}

impl Default for SensitivityRunConfig {
    fn default() -> Self {
        Self {
            preset: PresetChoice::Both,
            gains: GainChoice::Every,
            m_min: 0.1,
            m_max: 10.0,
            points: 81,
            tan_beta_min: 0.28,
            tan_beta_max: 140.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("axionkit-out"), formats: vec![Format::Csv, Format::Json, Format::Svg] }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.geometry.normalized()?;
        self.ephemeris.validate()?;
        self.halo.validate()?;
        self.axion.validate()?;
        self.qubit.validate()?;
        self.noise.validate()?;
        self.search.validate()?;
        let positive = [
            ("envelope.years", self.envelope.years),
            ("envelope.dt", self.envelope.dt),
            ("daily_rms.span_days", self.daily_rms.span_days),
            ("daily_rms.dt", self.daily_rms.dt),
            ("daily_rms.k_sigma", self.daily_rms.k_sigma),
            ("psd.span_days", self.psd.span_days),
            ("psd.dt", self.psd.dt),
            ("triplet.window_days", self.triplet.window_days),
            ("triplet.dt", self.triplet.dt),
            ("sensitivity.m_min", self.sensitivity.m_min),
            ("sensitivity.m_max", self.sensitivity.m_max),
            ("sensitivity.tan_beta_min", self.sensitivity.tan_beta_min),
            ("sensitivity.tan_beta_max", self.sensitivity.tan_beta_max),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("`{key}` must be positive, got {v}")));
            }
        }
        if self.daily_rms.trials == 0 {
            return Err(CliError::Config("`daily_rms.trials` must be at least 1".into()));
        }
        if self.linewidth.masses.is_empty() || self.linewidth.masses.iter().any(|m| m.is_nan() || *m <= 0.0) {
            return Err(CliError::Config("`linewidth.masses` must be a non-empty list of positive masses".into()));
        }
        if self.linewidth.points < 2 {
            return Err(CliError::Config("`linewidth.points` must be at least 2".into()));
        }
        if self.sensitivity.points == 0 || self.sensitivity.m_max < self.sensitivity.m_min {
            return Err(CliError::Config("`sensitivity` grid needs points ≥ 1 and m_min ≤ m_max".into()));
        }
        if self.output.formats.is_empty() {
            return Err(CliError::Config("`output.formats` must list at least one of csv, json, svg".into()));
        }
        Ok(())
    }
}

/// Parses a JSON document into a [`RunConfig`] with path-qualified errors.
pub fn from_value(value: Value) -> Result<RunConfig, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.into_inner()))
    })
}

pub fn read_value(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.into_inner())))
}

/// Applies `key=value` with a dotted key. The key must already exist in the
/// document, so typos are rejected rather than silently ignored. The value is
/// parsed as JSON when possible and taken as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    set_path(doc, key, value)
}

pub fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("`{}` is not a section", parts[..i].join("."))))?;
        if !obj.contains_key(*part) {
            return Err(CliError::Config(format!("unknown configuration key `{key}`")));
        }
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.get_mut(*part).expect("checked above");
    }
    Err(CliError::Config("empty configuration key".into()))
}

/// Merges `patch` into `base`, keeping keys absent from the patch.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// Defaults, then the file, then each override in order.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut doc = serde_json::to_value(RunConfig::default()).expect("defaults serialise");
    if let Some(p) = path {
        let file = read_value(p)?;
        // Strictness is enforced on the file alone before merging.
        from_value(file.clone())?;
        merge(&mut doc, file);
    }
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg = from_value(doc)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Every settable key with its default, one `key = value` per line.
pub fn key_listing() -> String {
    let doc = serde_json::to_value(RunConfig::default()).expect("defaults serialise");
    let mut out = Vec::new();
    flatten("", &doc, &mut out);
    out.join("\n")
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        leaf => out.push(format!("  {prefix} = {leaf}")),
    }
}
