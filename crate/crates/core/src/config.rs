//! Run configuration: one JSON document with `constants`, `particle`,
//! `scenario`, `integrator`, `fluctuation`, `design`, `analytics` and `outputs`
//! sections. Every section is optional and defaults to the reference scenario.
//!
//! Numeric fields accept plain SI numbers or strings with a unit suffix such as
//! `"490 um"`, `"10 ms"` or `"45 T/m"`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::dynamics::IntegratorOptions;
use crate::protocol::ScenarioConfig;
use crate::sensitivity::FluctuationSpec;
use crate::types::{ParticleSpec, PhysicalConstants};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value at `{path}`: {message}")]
    Field { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// Limits on the current density a wire can carry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignOptions {
    /// Feasibility threshold (A/m^2).
    pub max_current_density: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            max_current_density: 10e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NvOptions {
    pub mass: f64,
    /// Field gradient (T/m).
    pub gradient: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for NvOptions {
    fn default() -> Self {
        Self {
            mass: 1e-15,
            gradient: 45.0,
            t_max: 0.5,
            points: 501,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavePacketOptions {
    /// Trap angular frequency (rad/s).
    pub trap_omega: f64,
    /// Initial packet width for the free-spread table (m); the trap ground
    /// width when absent.
    pub initial_width: Option<f64>,
    /// Times at which the free spread is tabulated (s).
    pub spread_times: Vec<f64>,
    /// Distance from the wire used for the velocity kick (m).
    pub kick_reference_distance: f64,
    /// Extra masses for the post-scattering width table (kg).
    pub extra_masses: Vec<f64>,
}

impl Default for WavePacketOptions {
    fn default() -> Self {
        Self {
            trap_omega: 100.0,
            initial_width: Some(2e-11),
            spread_times: vec![0.0, 0.01, 0.02],
            kick_reference_distance: 1e-6,
            extra_masses: vec![1e-22],
        }
    }
}

/// Closed-form inputs. Sub-sections left out of an explicit `analytics`
/// section are left out of the output as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticsOptions {
    /// Closest approaches used for the current densities (m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closest_approach_split: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closest_approach_side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nv: Option<NvOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave_packet: Option<WavePacketOptions>,
}

impl Default for AnalyticsOptions {
    fn default() -> Self {
        Self {
            closest_approach_split: Some(1.00081e-6),
            closest_approach_side: Some(1.32289e-6),
            nv: Some(NvOptions::default()),
            wave_packet: Some(WavePacketOptions::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    /// Points in the superposition-size series.
    pub superposition_points: usize,
    /// Segment lengths for the current-stability table (m).
    pub limit_lengths: Vec<f64>,
    /// Tolerated final offset for the stability table (m).
    pub limit_target: f64,
    /// Range of final offsets for the stability curve (m).
    pub limit_curve_range: [f64; 2],
    pub limit_curve_points: usize,
    /// Fixed relative offsets for the linear-response check; empty to skip.
    pub linearity_offsets: Vec<f64>,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            superposition_points: 2000,
            limit_lengths: vec![50e-6, 500e-6],
            limit_target: 2e-11,
            limit_curve_range: [1e-13, 1e-9],
            limit_curve_points: 41,
            linearity_offsets: vec![1e-9, 1e-8, 1e-7, 1e-6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub particle: ParticleSpec,
    pub scenario: ScenarioConfig,
    pub integrator: IntegratorOptions,
    pub fluctuation: FluctuationSpec,
    pub design: DesignOptions,
    pub analytics: AnalyticsOptions,
    pub outputs: OutputOptions,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e
                .to_string()
                .split(" at line ")
                .next()
                .unwrap_or_default()
                .to_string(),
        })?;
        convert_quantities(&mut value, &mut String::new())?;
        let cfg: RunConfig =
            serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Field {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The scenario with the top-level particle, integrator and constants applied.
    pub fn scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            particle: self.particle,
            integrator: self.integrator,
            constants: self.constants,
            ..self.scenario.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: crate::Error| ConfigError::Invalid(e.to_string());
        self.scenario().validate().map_err(invalid)?;
        self.fluctuation.validate().map_err(invalid)?;
        if !(self.design.max_current_density > 0.0) {
            return Err(ConfigError::Invalid(
                "design.max_current_density must be > 0".into(),
            ));
        }
        let o = &self.outputs;
        if o.superposition_points < 2 || o.limit_curve_points < 2 {
            return Err(ConfigError::Invalid(
                "outputs point counts must be at least 2".into(),
            ));
        }
        if o.limit_lengths.iter().any(|l| !(*l > 0.0)) || !(o.limit_target > 0.0) {
            return Err(ConfigError::Invalid(
                "outputs.limit_lengths and limit_target must be > 0".into(),
            ));
        }
        let [lo, hi] = o.limit_curve_range;
        if !(lo > 0.0 && hi > lo) {
            return Err(ConfigError::Invalid(
                "outputs.limit_curve_range must satisfy 0 < lo < hi".into(),
            ));
        }
        if let Some(nv) = &self.analytics.nv {
            if !(nv.mass > 0.0 && nv.gradient > 0.0 && nv.t_max >= 0.0) || nv.points < 2 {
                return Err(ConfigError::Invalid(
                    "analytics.nv needs mass > 0, gradient > 0, t_max >= 0, points >= 2".into(),
                ));
            }
        }
        Ok(())
    }
}

const UNITS: &[(&str, f64)] = &[
    ("m", 1.0),
    ("cm", 1e-2),
    ("mm", 1e-3),
    ("um", 1e-6),
    ("µm", 1e-6),
    ("nm", 1e-9),
    ("s", 1.0),
    ("ms", 1e-3),
    ("us", 1e-6),
    ("µs", 1e-6),
    ("ns", 1e-9),
    ("A", 1.0),
    ("mA", 1e-3),
    ("uA", 1e-6),
    ("kg", 1.0),
    ("g", 1e-3),
    ("mg", 1e-6),
    ("ug", 1e-9),
    ("T", 1.0),
    ("mT", 1e-3),
    ("T/m", 1.0),
    ("m/s", 1.0),
    ("mm/s", 1e-3),
    ("m/s^2", 1.0),
    ("rad", 1.0),
    ("mrad", 1e-3),
    ("rad/s", 1.0),
    ("A/m^2", 1.0),
    ("A/um^2", 1e12),
];

/// Parse `"<number> <unit>"` into SI. Returns `None` when the string does not
/// start with a number, so enum tags pass through untouched.
pub fn parse_quantity(text: &str) -> Option<Result<f64, String>> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| c.is_whitespace() || (c.is_alphabetic() && !is_exponent(t, i)) || c == 'µ')
        .map_or(t.len(), |(i, _)| i);
    let number: f64 = t[..split].parse().ok()?;
    let unit = t[split..].trim();
    if unit.is_empty() {
        return Some(Ok(number));
    }
    Some(
        UNITS
            .iter()
            .find(|(u, _)| *u == unit)
            .map(|(_, scale)| number * scale)
            .ok_or_else(|| format!("unknown unit `{unit}` in `{text}`")),
    )
}

fn is_exponent(t: &str, i: usize) -> bool {
    let bytes = t.as_bytes();
    matches!(bytes[i], b'e' | b'E')
        && i > 0
        && bytes[i - 1].is_ascii_digit()
        && bytes
            .get(i + 1)
            .is_some_and(|b| b.is_ascii_digit() || *b == b'-' || *b == b'+')
}

fn convert_quantities(value: &mut Value, path: &mut String) -> Result<(), ConfigError> {
    match value {
        Value::String(s) => {
            if let Some(parsed) = parse_quantity(s) {
                let v = parsed.map_err(|message| ConfigError::Field {
                    path: path.clone(),
                    message,
                })?;
                *value = serde_json::Number::from_f64(v)
                    .map(Value::Number)
                    .ok_or_else(|| ConfigError::Field {
                        path: path.clone(),
                        message: "quantity is not finite".into(),
                    })?;
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter_mut().enumerate() {
                let len = path.len();
                path.push_str(&format!("[{i}]"));
                convert_quantities(item, path)?;
                path.truncate(len);
            }
        }
        Value::Object(map) => {
            for (k, item) in map.iter_mut() {
                let len = path.len();
                if !path.is_empty() {
                    path.push('.');
                }
                path.push_str(k);
                convert_quantities(item, path)?;
                path.truncate(len);
            }
        }
        _ => {}
    }
    Ok(())
}
