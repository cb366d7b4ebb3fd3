//! Scenario configuration file: TOML, unknown keys rejected.
//!
//! ```toml
//! scenario_id = "ism-0db"
//! n_bins = 512
//! n_frames = 200
//! sample_rate_hz = 10e6
//! reference_noise_power_mw = 1.0
//! subband_count = 4
//!
//! [noise]
//! kind = "white-gaussian"      # or "surrogate-industrial", "trace-file"
//! seed = 1
//!
//! [[signals]]
//! subband_index = 2
//! occupancy_fraction = 1.0
//! target_snr_db = 0.0          # or amplitude_mv = 63.2
//!
//! [[noise_steps]]              # optional noise power schedule
//! frame_start = 100
//! gain_db = 3.0
//!
//! [run]                        # optional benchmark settings
//! window_frames = 100
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::noise::IndustrialParams;
use crate::harness::RunOptions;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    WhiteGaussian,
    SurrogateIndustrial,
    TraceFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSource {
    pub kind: NoiseKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default = "default_impulse_rate")]
    pub impulse_rate: f64,
    #[serde(default = "default_impulse_factor")]
    pub impulse_factor: f64,
    #[serde(default = "default_tilt")]
    pub tilt_db_per_decade: f64,
}

fn default_impulse_rate() -> f64 {
    IndustrialParams::default().impulse_rate
}
fn default_impulse_factor() -> f64 {
    IndustrialParams::default().impulse_factor
}
fn default_tilt() -> f64 {
    IndustrialParams::default().tilt_db_per_decade
}

impl NoiseSource {
    pub fn white(seed: u64) -> Self {
        NoiseSource {
            kind: NoiseKind::WhiteGaussian,
            seed,
            path: None,
            impulse_rate: default_impulse_rate(),
            impulse_factor: default_impulse_factor(),
            tilt_db_per_decade: default_tilt(),
        }
    }

    pub fn industrial_params(&self) -> IndustrialParams {
        IndustrialParams {
            impulse_rate: self.impulse_rate,
            impulse_factor: self.impulse_factor,
            tilt_db_per_decade: self.tilt_db_per_decade,
        }
    }
}

/// Signal level: a fixed amplitude or a whole-band SNR target against the
/// reference noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalLevel {
    AmplitudeMv(f64),
    TargetSnrDb(f64),
}

/// A rectangular signal in one subband, active on frames `frame_start..frame_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubbandSignal {
    pub subband_index: usize,
    #[serde(default = "one")]
    pub occupancy_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_mv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_snr_db: Option<f64>,
    #[serde(default)]
    pub frame_start: usize,
    /// Exclusive; defaults to the end of the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_end: Option<usize>,
}

impl SubbandSignal {
    pub fn new(subband_index: usize, occupancy_fraction: f64, level: SignalLevel) -> Self {
        let (amplitude_mv, target_snr_db) = match level {
            SignalLevel::AmplitudeMv(a) => (Some(a), None),
            SignalLevel::TargetSnrDb(s) => (None, Some(s)),
        };
        SubbandSignal {
            subband_index,
            occupancy_fraction,
            amplitude_mv,
            target_snr_db,
            frame_start: 0,
            frame_end: None,
        }
    }

    pub fn frames(mut self, start: usize, end: usize) -> Self {
        self.frame_start = start;
        self.frame_end = Some(end);
        self
    }

    pub fn level(&self) -> Result<SignalLevel> {
        match (self.amplitude_mv, self.target_snr_db) {
            (Some(a), None) if a.is_finite() && a >= 0.0 => Ok(SignalLevel::AmplitudeMv(a)),
            (None, Some(s)) if s.is_finite() => Ok(SignalLevel::TargetSnrDb(s)),
            (Some(_), Some(_)) => Err(Error::Config(
                "signal sets both amplitude_mv and target_snr_db".into(),
            )),
            (None, None) => Err(Error::Config(
                "signal needs amplitude_mv or target_snr_db".into(),
            )),
            _ => Err(Error::Config(
                "signal level must be finite (amplitude >= 0)".into(),
            )),
        }
    }
}

/// Noise power gain applied to frames `frame_start..frame_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseStep {
    #[serde(default)]
    pub frame_start: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_end: Option<usize>,
    pub gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_id")]
    pub scenario_id: String,
    pub n_bins: usize,
    pub n_frames: usize,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
    pub noise: NoiseSource,
    #[serde(default = "one")]
    pub reference_noise_power_mw: f64,
    #[serde(default = "default_subbands")]
    pub subband_count: usize,
    #[serde(default)]
    pub signals: Vec<SubbandSignal>,
    #[serde(default)]
    pub noise_steps: Vec<NoiseStep>,
    #[serde(default)]
    pub run: RunOptions,
}

fn one() -> f64 {
    1.0
}
fn default_id() -> String {
    "scenario".into()
}
fn default_rate() -> f64 {
    10e6
}
fn default_subbands() -> usize {
    4
}

/// Half-open bin range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinRange {
    pub start: usize,
    pub end: usize,
}

impl BinRange {
    pub fn width(&self) -> usize {
        self.end - self.start
    }
    pub fn contains(&self, bin: usize) -> bool {
        (self.start..self.end).contains(&bin)
    }
}

impl ScenarioConfig {
    /// White Gaussian noise at 1 mW with no signals.
    pub fn white(n_bins: usize, n_frames: usize, seed: u64) -> Self {
        ScenarioConfig {
            scenario_id: default_id(),
            n_bins,
            n_frames,
            sample_rate_hz: default_rate(),
            noise: NoiseSource::white(seed),
            reference_noise_power_mw: 1.0,
            subband_count: 4,
            signals: Vec::new(),
            noise_steps: Vec::new(),
            run: RunOptions::default(),
        }
    }

    /// Four subbands, the third one fully occupied at `snr_db` over white noise.
    pub fn ism_single_band(n_bins: usize, n_frames: usize, snr_db: f64, seed: u64) -> Self {
        let mut c = Self::white(n_bins, n_frames, seed);
        c.scenario_id = format!("ism-{snr_db}db");
        c.signals
            .push(SubbandSignal::new(2, 1.0, SignalLevel::TargetSnrDb(snr_db)));
        c
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.noise.seed = seed;
        c
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: ScenarioConfig = table
            .try_into()
            .map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file. A relative `noise.path` is resolved against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, overrides)?;
        if let (Some(p), Some(dir)) = (cfg.noise.path.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_bins < 4 {
            return bad(format!("n_bins must be >= 4, got {}", self.n_bins));
        }
        if self.n_frames < 1 {
            return bad("n_frames must be >= 1".into());
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return bad("sample_rate_hz must be positive".into());
        }
        if !(self.reference_noise_power_mw > 0.0 && self.reference_noise_power_mw.is_finite()) {
            return bad("reference_noise_power_mw must be positive".into());
        }
        if self.subband_count == 0 || !self.n_bins.is_multiple_of(self.subband_count) {
            return bad(format!(
                "subband_count {} must divide n_bins {}",
                self.subband_count, self.n_bins
            ));
        }
        match self.noise.kind {
            NoiseKind::TraceFile if self.noise.path.is_none() => {
                return bad("noise.kind = trace-file needs noise.path".into())
            }
            NoiseKind::SurrogateIndustrial => self.noise.industrial_params().validate()?,
            _ => {}
        }
        for (i, s) in self.signals.iter().enumerate() {
            if s.subband_index >= self.subband_count {
                return bad(format!(
                    "signals[{i}]: subband_index {} out of range",
                    s.subband_index
                ));
            }
            if !(s.occupancy_fraction > 0.0 && s.occupancy_fraction <= 1.0) {
                return bad(format!(
                    "signals[{i}]: occupancy_fraction must be in (0, 1]"
                ));
            }
            s.level()?;
            let end = s.frame_end.unwrap_or(self.n_frames);
            if s.frame_start >= end || end > self.n_frames {
                return bad(format!(
                    "signals[{i}]: frame range {}..{end} is empty or too long",
                    s.frame_start
                ));
            }
        }
        for (i, st) in self.noise_steps.iter().enumerate() {
            let end = st.frame_end.unwrap_or(self.n_frames);
            if st.frame_start >= end || end > self.n_frames || !st.gain_db.is_finite() {
                return bad(format!("noise_steps[{i}]: invalid frame range or gain"));
            }
        }
        self.run.validate()?;
        Ok(())
    }

    pub fn subband_width(&self) -> usize {
        self.n_bins / self.subband_count
    }

    pub fn subband_range(&self, index: usize) -> BinRange {
        let w = self.subband_width();
        BinRange {
            start: index * w,
            end: (index + 1) * w,
        }
    }

    /// Occupied bins of a signal, centred in its subband.
    pub fn occupied_range(&self, signal: &SubbandSignal) -> BinRange {
        let sub = self.subband_range(signal.subband_index);
        let w = sub.width();
        let width = ((signal.occupancy_fraction * w as f64).round() as usize).clamp(1, w);
        let start = sub.start + (w - width) / 2;
        BinRange {
            start,
            end: start + width,
        }
    }

    pub fn signal_frames(&self, signal: &SubbandSignal) -> std::ops::Range<usize> {
        signal.frame_start..signal.frame_end.unwrap_or(self.n_frames)
    }

    /// Noise power gain per frame from `noise_steps` (later steps win).
    pub fn noise_gain(&self, frame: usize) -> f64 {
        self.noise_steps
            .iter()
            .rfind(|s| (s.frame_start..s.frame_end.unwrap_or(self.n_frames)).contains(&frame))
            .map_or(1.0, |s| 10f64.powf(s.gain_db / 10.0))
    }
}

/// Applies `key=value`; `key` is a dotted path, array elements are addressed
/// by index (`signals.0.target_snr_db=-3`). The value is parsed as a TOML
/// literal, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key `{key}` is malformed")));
    }
    set_path(table, &parts, value).map_err(|m| Error::Config(format!("override `{key}`: {m}")))
}

fn set_path(
    table: &mut toml::Table,
    parts: &[&str],
    value: toml::Value,
) -> std::result::Result<(), String> {
    let (head, rest) = parts.split_first().expect("non-empty path");
    if rest.is_empty() {
        table.insert(head.to_string(), value);
        return Ok(());
    }
    let child = table
        .entry(head.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    set_value(child, head, rest, value)
}

fn set_value(
    node: &mut toml::Value,
    name: &str,
    parts: &[&str],
    value: toml::Value,
) -> std::result::Result<(), String> {
    match node {
        toml::Value::Table(t) => set_path(t, parts, value),
        toml::Value::Array(a) => {
            let (head, rest) = parts.split_first().expect("non-empty path");
            let idx: usize = head
                .parse()
                .map_err(|_| format!("`{head}` is not an index"))?;
            let len = a.len();
            let slot = a
                .get_mut(idx)
                .ok_or_else(|| format!("index {idx} >= {len}"))?;
            if rest.is_empty() {
                *slot = value;
                Ok(())
            } else {
                set_value(slot, head, rest, value)
            }
        }
        _ => Err(format!("`{name}` is not a table")),
    }
}
