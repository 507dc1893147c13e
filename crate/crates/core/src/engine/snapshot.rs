//! `MEMPIX-SNAPSHOT v1`: a header line followed by a pretty-printed JSON
//! body with lexicographically sorted keys. Intensities are integer
//! milli-units and data lowercase hex, so equal states always serialize to
//! identical bytes. See `docs/formats.md` for the schema.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{check_state, Engine, EngineParams, EngineState};
use crate::intensity::Intensity;
use crate::model::{ColorId, Datum, DeviceId, MemoryPixel, MemoryScreen, SeqNo};
use crate::pools::{PixelPool, ScreenPool};
use crate::table::{ColorTable, ColorTableEntry};

pub const SNAPSHOT_HEADER: &str = "MEMPIX-SNAPSHOT v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SnapshotError {
    #[error("malformed snapshot at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("inconsistent snapshot: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    clock: ClockDoc,
    color_table: Vec<EntryDoc>,
    config: ConfigDoc,
    pixel_pool: PoolDoc,
    screens: Vec<ScreenDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClockDoc {
    next_color: u64,
    next_seq: u64,
    tick: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    capacity: usize,
    decay_period: u64,
    i_known: i64,
    i_max: i64,
    ingest_period: u64,
    r: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolDoc {
    capacity: usize,
    free: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScreenDoc {
    color: u64,
    datum: String,
    is_root: bool,
    pixels: Vec<PixelDoc>,
    seq: u64,
    tick: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PixelDoc {
    color: u64,
    datum: String,
    device: u32,
    intensity: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    color: u64,
    datum: String,
    screen: u64,
}

impl Engine {
    /// Canonical text snapshot of parameters and state.
    pub fn snapshot(&self) -> String {
        let st = &self.state;
        let p = &self.params;
        let doc = Doc {
            clock: ClockDoc { next_color: st.next_color.0, next_seq: st.next_seq.0, tick: st.tick },
            color_table: st
                .color_table
                .iter()
                .map(|e| EntryDoc { color: e.color.0, datum: e.datum.to_hex(), screen: e.screen_no.0 })
                .collect(),
            config: ConfigDoc {
                capacity: p.capacity,
                decay_period: p.decay_period,
                i_known: p.i_known.milli(),
                i_max: p.i_max.milli(),
                ingest_period: p.ingest_period,
                r: p.r.milli(),
            },
            pixel_pool: PoolDoc { capacity: st.pixel_pool.capacity(), free: st.pixel_pool.free_count() },
            screens: st
                .screen_pool
                .iter()
                .map(|s| ScreenDoc {
                    color: s.color.0,
                    datum: s.datum.to_hex(),
                    is_root: s.is_root,
                    pixels: s
                        .pixels
                        .iter()
                        .map(|px| PixelDoc {
                            color: px.color.0,
                            datum: px.datum.to_hex(),
                            device: px.device_id.0,
                            intensity: px.intensity.milli(),
                        })
                        .collect(),
                    seq: s.seq.0,
                    tick: s.tick,
                })
                .collect(),
        };
        // Going through `Value` sorts object keys (serde_json maps are ordered).
        let value = serde_json::to_value(&doc).expect("snapshot doc is plain data");
        let body = serde_json::to_string_pretty(&value).expect("value serializes");
        format!("{SNAPSHOT_HEADER}\n{body}\n")
    }

    /// Rebuilds an engine from [`Engine::snapshot`] output. The restored
    /// engine uses the default exact colorizer.
    pub fn restore(blob: &str) -> Result<Engine, SnapshotError> {
        let header_end = match blob.find('\n') {
            Some(i) => i,
            None => {
                return Err(SnapshotError::Format { offset: blob.len(), message: "missing header line".into() });
            }
        };
        if &blob[..header_end] != SNAPSHOT_HEADER {
            return Err(SnapshotError::Format { offset: 0, message: format!("expected header `{SNAPSHOT_HEADER}`") });
        }
        let body = &blob[header_end + 1..];
        let doc: Doc = serde_json::from_str(body).map_err(|e| SnapshotError::Format {
            offset: header_end + 1 + byte_offset(body, e.line(), e.column()),
            message: e.to_string(),
        })?;
        let (params, state) = from_doc(doc)?;
        params.validate().map_err(|e| SnapshotError::Invalid(e.to_string()))?;
        check_state(&params, &state).map_err(SnapshotError::Invalid)?;
        Ok(Engine::from_parts(params, state))
    }
}

/// Converts serde_json's 1-based line/column into a byte offset.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

fn datum(hex: &str) -> Result<Datum, SnapshotError> {
    Datum::from_hex(hex).map_err(|e| SnapshotError::Invalid(format!("datum `{hex}`: {e}")))
}

fn from_doc(doc: Doc) -> Result<(EngineParams, EngineState), SnapshotError> {
    let params = EngineParams {
        capacity: doc.config.capacity,
        i_max: Intensity::from_milli(doc.config.i_max),
        i_known: Intensity::from_milli(doc.config.i_known),
        r: Intensity::from_milli(doc.config.r),
        decay_period: doc.config.decay_period,
        ingest_period: doc.config.ingest_period,
    };
    let invalid = |e: &dyn std::fmt::Display| SnapshotError::Invalid(e.to_string());

    let pixel_pool = PixelPool::with_free(doc.pixel_pool.capacity, doc.pixel_pool.free).map_err(|e| invalid(&e))?;
    let mut screens = Vec::with_capacity(doc.screens.len());
    for s in doc.screens {
        let pixels = s
            .pixels
            .into_iter()
            .map(|p| {
                Ok(MemoryPixel {
                    color: ColorId(p.color),
                    intensity: Intensity::from_milli(p.intensity),
                    device_id: DeviceId(p.device),
                    datum: datum(&p.datum)?,
                })
            })
            .collect::<Result<Vec<_>, SnapshotError>>()?;
        screens.push(MemoryScreen {
            seq: SeqNo(s.seq),
            tick: s.tick,
            color: ColorId(s.color),
            datum: datum(&s.datum)?,
            is_root: s.is_root,
            pixels,
        });
    }
    let screen_pool = ScreenPool::from_screens(screens).map_err(|e| invalid(&e))?;
    let mut color_table = ColorTable::new();
    for e in doc.color_table {
        color_table
            .insert(ColorTableEntry { color: ColorId(e.color), screen_no: SeqNo(e.screen), datum: datum(&e.datum)? })
            .map_err(|e| invalid(&e))?;
    }
    let state = EngineState {
        tick: doc.clock.tick,
        next_seq: SeqNo(doc.clock.next_seq),
        next_color: ColorId(doc.clock.next_color),
        pixel_pool,
        screen_pool,
        color_table,
    };
    Ok((params, state))
}
