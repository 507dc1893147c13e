//! Scenario files (TOML). See `docs/formats.md` for the schema.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::engine::{ConfigError, EngineConfig, EngineParams, RootScreenDef};
use crate::intensity::Intensity;
use crate::model::{Datum, DeviceId};

/// A scripted sensor: emits the scheduled datum at each scheduled tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceSchedule {
    pub device_id: DeviceId,
    pub schedule: BTreeMap<u64, Datum>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub config: EngineConfig,
    /// Sorted by device id.
    pub devices: Vec<DeviceSchedule>,
    pub run_ticks: u64,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Validation { field: field.into(), message: message.into() }
    }
}

impl From<ConfigError> for ScenarioError {
    fn from(e: ConfigError) -> Self {
        ScenarioError::invalid(format!("config.{}", e.field), format!("value {} violates bound {}", e.value, e.bound))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    run_ticks: i64,
    #[serde(default)]
    config: RawConfig,
    #[serde(default)]
    roots: Vec<RawRoot>,
    #[serde(default)]
    devices: Vec<RawDevice>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    capacity: Option<i64>,
    i_max: Option<toml::Value>,
    i_known: Option<toml::Value>,
    r: Option<toml::Value>,
    decay_period: Option<i64>,
    ingest_period: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoot {
    trigger: Option<String>,
    pixels: Vec<RawPixel>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPixel {
    device: i64,
    datum: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    id: i64,
    #[serde(default)]
    schedule: Vec<RawEmission>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmission {
    tick: i64,
    datum: String,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioSpec, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((1, 1));
        ScenarioError::Parse { line, column, message: e.message().to_string() }
    })?;
    build(raw)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn intensity(field: &str, value: &toml::Value) -> Result<Intensity, ScenarioError> {
    let literal = match value {
        toml::Value::Integer(i) => i.to_string(),
        // f64 Display is the shortest round-trip form, so 0.5 prints as "0.5".
        toml::Value::Float(f) if f.is_finite() => f.to_string(),
        toml::Value::String(s) => s.clone(),
        other => return Err(ScenarioError::invalid(field, format!("expected a decimal number, got {other}"))),
    };
    literal.parse().map_err(|e| ScenarioError::invalid(field, format!("{e}")))
}

fn count<T: TryFrom<i64>>(field: &str, v: i64) -> Result<T, ScenarioError> {
    T::try_from(v).map_err(|_| ScenarioError::invalid(field, format!("{v} is not a valid non-negative integer")))
}

fn datum(field: &str, s: &str) -> Result<Datum, ScenarioError> {
    Datum::new(s.as_bytes()).map_err(|e| ScenarioError::invalid(field, e.to_string()))
}

fn build(raw: RawScenario) -> Result<ScenarioSpec, ScenarioError> {
    let defaults = EngineParams::default();
    let c = &raw.config;
    let params = EngineParams {
        capacity: c.capacity.map(|v| count("config.capacity", v)).transpose()?.unwrap_or(defaults.capacity),
        i_max: c.i_max.as_ref().map(|v| intensity("config.i_max", v)).transpose()?.unwrap_or(defaults.i_max),
        i_known: c.i_known.as_ref().map(|v| intensity("config.i_known", v)).transpose()?.unwrap_or(defaults.i_known),
        r: c.r.as_ref().map(|v| intensity("config.r", v)).transpose()?.unwrap_or(defaults.r),
        decay_period: c
            .decay_period
            .map(|v| count("config.decay_period", v))
            .transpose()?
            .unwrap_or(defaults.decay_period),
        ingest_period: c
            .ingest_period
            .map(|v| count("config.ingest_period", v))
            .transpose()?
            .unwrap_or(defaults.ingest_period),
    };

    let mut roots = Vec::with_capacity(raw.roots.len());
    for (i, r) in raw.roots.iter().enumerate() {
        let trigger = r.trigger.as_deref().map(|t| datum(&format!("roots[{i}].trigger"), t)).transpose()?;
        let pixels = r
            .pixels
            .iter()
            .enumerate()
            .map(|(j, p)| {
                Ok((
                    DeviceId(count(&format!("roots[{i}].pixels[{j}].device"), p.device)?),
                    datum(&format!("roots[{i}].pixels[{j}].datum"), &p.datum)?,
                ))
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        roots.push(RootScreenDef { trigger, pixels });
    }
    let config = EngineConfig { params, roots };
    config.validate()?;

    if raw.run_ticks <= 0 {
        return Err(ScenarioError::invalid("run_ticks", format!("{} must be positive", raw.run_ticks)));
    }
    let run_ticks = raw.run_ticks as u64;

    let mut seen = BTreeSet::new();
    let mut devices = Vec::with_capacity(raw.devices.len());
    for (i, d) in raw.devices.iter().enumerate() {
        let device_id = DeviceId(count(&format!("devices[{i}].id"), d.id)?);
        if !seen.insert(device_id) {
            return Err(ScenarioError::invalid(
                format!("devices[{i}].id"),
                format!("duplicate device id {}", device_id.0),
            ));
        }
        let mut schedule = BTreeMap::new();
        for (j, e) in d.schedule.iter().enumerate() {
            let field = format!("devices[{i}].schedule[{j}]");
            let tick: u64 = count(&format!("{field}.tick"), e.tick)?;
            if tick >= run_ticks {
                return Err(ScenarioError::invalid(&field, format!("tick {tick} is not below run_ticks {run_ticks}")));
            }
            if tick % params.ingest_period != 0 {
                return Err(ScenarioError::invalid(
                    &field,
                    format!("tick {tick} is not an ingest tick (multiple of p = {})", params.ingest_period),
                ));
            }
            if schedule.insert(tick, datum(&format!("{field}.datum"), &e.datum)?).is_some() {
                return Err(ScenarioError::invalid(&field, format!("device emits twice at tick {tick}")));
            }
        }
        devices.push(DeviceSchedule { device_id, schedule });
    }
    devices.sort_by_key(|d| d.device_id);

    Ok(ScenarioSpec { config, devices, run_ticks })
}

impl ScenarioSpec {
    /// Changes the run length, dropping emissions that fall past the end.
    pub fn with_run_ticks(mut self, run_ticks: u64) -> Self {
        self.run_ticks = run_ticks;
        for d in &mut self.devices {
            d.schedule.retain(|&t, _| t < run_ticks);
        }
        self
    }
}
