//! Deterministic artificial memory and decision engine.
//!
//! Sensed data arrives as [`MemoryPixel`]s, is grouped per ingest tick into
//! a [`MemoryScreen`] and committed to the [`ScreenPool`]. A [`ColorTable`]
//! maps each known datum to a color and the screen where it first appeared.
//! A periodic decay sweep weakens pixels (less so for screens the table
//! still references) and forgets those that reach -1. Each new screen runs
//! through a decision cascade that either issues action commands, copies
//! associated pixels, or does nothing.
//!
//! Time is a virtual tick counter and intensities are exact fixed-point, so
//! runs are byte-reproducible.

pub mod decision;
pub mod engine;
pub mod event;
pub mod harness;
pub mod intensity;
pub mod model;
pub mod pools;
pub mod table;

pub use decision::{candidate_colors, ActionCommand, DecisionOutcome};
pub use engine::{
    Colorizer, ConfigError, DeviceInput, Engine, EngineConfig, EngineError, EngineParams, EngineState, ExactColorizer,
    RootScreenDef, SnapshotError, TickReport,
};
pub use event::{Event, EventKind, OutcomeKind, RemovalCause};
pub use intensity::Intensity;
pub use model::{majority_color, mode_datum, ColorId, Datum, DeviceId, MemoryPixel, MemoryScreen, SeqNo};
pub use pools::{PixelPool, ScreenPool};
pub use table::{ColorTable, ColorTableEntry};
