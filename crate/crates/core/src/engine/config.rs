use thiserror::Error;

use crate::intensity::Intensity;
use crate::model::{Datum, DeviceId};

/// Scalar engine parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineParams {
    /// Number of dynamic pixels in the pixel pool.
    pub capacity: usize,
    /// Intensity given to a pixel whose datum gets a fresh color.
    pub i_max: Intensity,
    /// Intensity given to a pixel whose color is already known (`0 < I < I_max`).
    pub i_known: Intensity,
    /// Per-sweep reinforcement for table-referenced screens, `0 < r < 1`.
    pub r: Intensity,
    /// Ticks between decay sweeps (`w`).
    pub decay_period: u64,
    /// Ticks between ingests (`p`).
    pub ingest_period: u64,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            capacity: 64,
            i_max: Intensity::from_whole(5),
            i_known: Intensity::from_whole(3),
            r: Intensity::from_milli(500),
            decay_period: 4,
            ingest_period: 1,
        }
    }
}

/// A built-in stimulus→action mapping installed before the first tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootScreenDef {
    /// Screen-level datum, i.e. the stimulus that selects this root. Defaults
    /// to the mode datum of `pixels`.
    pub trigger: Option<Datum>,
    pub pixels: Vec<(DeviceId, Datum)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EngineConfig {
    pub params: EngineParams,
    pub roots: Vec<RootScreenDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field} = {value} violates bound {bound}")]
pub struct ConfigError {
    pub field: &'static str,
    pub bound: &'static str,
    pub value: String,
}

impl EngineParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |field, bound, value: String| Err(ConfigError { field, bound, value });
        if self.capacity == 0 {
            return fail("capacity", "C > 0", self.capacity.to_string());
        }
        if self.i_max <= Intensity::ZERO {
            return fail("i_max", "I_max > 0", self.i_max.to_string());
        }
        if self.i_known <= Intensity::ZERO || self.i_known >= self.i_max {
            return fail("i_known", "0 < I < I_max", self.i_known.to_string());
        }
        if self.r <= Intensity::ZERO || self.r >= Intensity::ONE {
            return fail("r", "0 < r < 1", self.r.to_string());
        }
        if self.decay_period == 0 {
            return fail("decay_period", "w > 0", self.decay_period.to_string());
        }
        if self.ingest_period == 0 {
            return fail("ingest_period", "p > 0", self.ingest_period.to_string());
        }
        Ok(())
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate()?;
        for (i, root) in self.roots.iter().enumerate() {
            if root.pixels.is_empty() {
                return Err(ConfigError {
                    field: "roots",
                    bound: "root screen pixels non-empty",
                    value: format!("root {i} has no pixels"),
                });
            }
        }
        Ok(())
    }
}
