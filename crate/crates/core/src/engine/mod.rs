//! The memory engine: virtual clock, ingest, decay and decision wiring.
//!
//! One call to [`Engine::tick`] runs, in order:
//!
//! 1. a decay sweep, when `tick > 0` and `tick % decay_period == 0`;
//! 2. on ingest ticks (`tick % ingest_period == 0`), device polling, screen
//!    formation and the decision cascade on the committed screen;
//! 3. the clock advance.
//!
//! All events produced by a tick carry the tick value before the advance.

mod config;
mod snapshot;

pub use config::{ConfigError, EngineConfig, EngineParams, RootScreenDef};
pub use snapshot::{SnapshotError, SNAPSHOT_HEADER};

use thiserror::Error;

use crate::decision::{self, ActionCommand, DecisionOutcome};
use crate::event::{Event, EventKind, RemovalCause};
use crate::intensity::Intensity;
use crate::model::{majority_color, mode_datum, ColorId, Datum, DeviceId, MemoryPixel, MemoryScreen, SeqNo};
use crate::pools::{Acquire, Eviction, PixelPool, PoolError, ScreenPool, ScreenRemoval};
use crate::table::{ColorTable, ColorTableEntry, TableError};

/// Failures that indicate a broken engine invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error("internal corruption: {0}")]
    Table(#[from] TableError),
    #[error("internal corruption: {0}")]
    Corruption(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceInput {
    pub device_id: DeviceId,
    pub datum: Datum,
}

/// Chooses an existing color for data the table does not hold verbatim.
///
/// The default [`ExactColorizer`] never does, so every novel datum gets a
/// fresh color. Alternatives that group related data under one color also
/// get a table entry per datum, all sharing that color.
pub trait Colorizer: Send {
    fn related_color(&self, table: &ColorTable, datum: &Datum) -> Option<ColorId>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactColorizer;

impl Colorizer for ExactColorizer {
    fn related_color(&self, _table: &ColorTable, _datum: &Datum) -> Option<ColorId> {
        None
    }
}

/// Mutable engine state. Everything a snapshot captures besides parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineState {
    pub(crate) tick: u64,
    pub(crate) next_seq: SeqNo,
    pub(crate) next_color: ColorId,
    pub(crate) pixel_pool: PixelPool,
    pub(crate) screen_pool: ScreenPool,
    pub(crate) color_table: ColorTable,
}

impl EngineState {
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn next_seq(&self) -> SeqNo {
        self.next_seq
    }

    pub fn next_color(&self) -> ColorId {
        self.next_color
    }

    pub fn pixel_pool(&self) -> &PixelPool {
        &self.pixel_pool
    }

    pub fn screen_pool(&self) -> &ScreenPool {
        &self.screen_pool
    }

    pub fn color_table(&self) -> &ColorTable {
        &self.color_table
    }

    fn allocate_color(&mut self) -> ColorId {
        let c = self.next_color;
        self.next_color = ColorId(c.0 + 1);
        c
    }
}

/// Accumulates events stamped with the current tick.
#[derive(Debug)]
pub(crate) struct Emitter {
    tick: u64,
    pub(crate) events: Vec<Event>,
}

impl Emitter {
    pub(crate) fn new(tick: u64) -> Self {
        Emitter { tick, events: Vec::new() }
    }

    pub(crate) fn emit(&mut self, kind: EventKind) {
        self.events.push(Event { tick: self.tick, kind });
    }

    fn removal(&mut self, removal: &ScreenRemoval, cause: RemovalCause) {
        self.emit(EventKind::ScreenRemoved { seq: removal.seq, cause });
        for e in &removal.entries {
            self.emit(EventKind::EntryRemoved { color: e.color, seq: e.screen_no, datum: e.datum.clone() });
        }
    }

    fn evictions(&mut self, evictions: &[Eviction]) {
        for ev in evictions {
            self.emit(EventKind::Evicted { seq: ev.seq, device: ev.pixel.device_id, intensity: ev.pixel.intensity });
            if let Some(r) = &ev.removed_screen {
                self.removal(r, RemovalCause::Evict);
            }
        }
    }
}

/// What one tick did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickReport {
    pub tick: u64,
    pub swept: bool,
    pub committed: Option<SeqNo>,
    pub outcome: Option<DecisionOutcome>,
    pub commands: Vec<ActionCommand>,
    pub events: Vec<Event>,
}

/// Outcome of colorizing one pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Colorization {
    pub color: ColorId,
    pub intensity: Intensity,
    /// Whether the color was freshly allocated.
    pub novel: bool,
    pub new_entry: Option<ColorTableEntry>,
}

pub struct Engine {
    params: EngineParams,
    state: EngineState,
    colorizer: Box<dyn Colorizer>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("params", &self.params).field("state", &self.state).finish_non_exhaustive()
    }
}

impl Engine {
    /// Installs root screens at `0..R` and fills the pixel pool.
    pub fn new(config: &EngineConfig) -> Result<Self, ConfigError> {
        Self::with_colorizer(config, Box::new(ExactColorizer))
    }

    pub fn with_colorizer(config: &EngineConfig, colorizer: Box<dyn Colorizer>) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut engine = Engine {
            params: config.params,
            state: EngineState {
                tick: 0,
                next_seq: SeqNo(0),
                next_color: ColorId(0),
                pixel_pool: PixelPool::new(config.params.capacity),
                screen_pool: ScreenPool::new(),
                color_table: ColorTable::new(),
            },
            colorizer,
        };
        for root in &config.roots {
            engine.install_root(root).expect("fresh engine cannot be corrupt");
        }
        Ok(engine)
    }

    /// Root pixels all take the color of the root's trigger datum, which is
    /// colorized like any sensed datum and indexed at the root's seq.
    fn install_root(&mut self, def: &RootScreenDef) -> Result<(), EngineError> {
        let seq = self.state.next_seq;
        self.state.next_seq = SeqNo(seq.0 + 1);

        let mut pixels: Vec<(DeviceId, Datum)> = def.pixels.clone();
        pixels.sort_by_key(|(dev, _)| *dev);
        let trigger = match &def.trigger {
            Some(t) => t.clone(),
            None => {
                let probe: Vec<MemoryPixel> = pixels
                    .iter()
                    .map(|(dev, datum)| MemoryPixel {
                        color: ColorId(0),
                        intensity: Intensity::ZERO,
                        device_id: *dev,
                        datum: datum.clone(),
                    })
                    .collect();
                mode_datum(&probe, None)
            }
        };
        let color = self.colorize(&trigger, seq)?.color;
        let pixels = pixels
            .into_iter()
            .map(|(device_id, datum)| MemoryPixel { color, intensity: self.params.i_max, device_id, datum })
            .collect();
        self.state.screen_pool.commit(MemoryScreen { seq, tick: 0, color, datum: trigger, is_root: true, pixels })?;
        Ok(())
    }

    pub(crate) fn from_parts(params: EngineParams, state: EngineState) -> Self {
        Engine { params, state, colorizer: Box::new(ExactColorizer) }
    }

    pub fn set_colorizer(&mut self, colorizer: Box<dyn Colorizer>) {
        self.colorizer = colorizer;
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn current_tick(&self) -> u64 {
        self.state.tick
    }

    pub fn is_ingest_tick(&self, tick: u64) -> bool {
        tick % self.params.ingest_period == 0
    }

    pub fn is_decay_tick(&self, tick: u64) -> bool {
        tick > 0 && tick % self.params.decay_period == 0
    }

    /// Runs one tick. `poll` is invoked only on ingest ticks and must return
    /// at most one input per device.
    pub fn tick<F>(&mut self, poll: F) -> Result<TickReport, EngineError>
    where
        F: FnOnce(u64) -> Vec<DeviceInput>,
    {
        let tick = self.state.tick;
        let mut out = Emitter::new(tick);
        let mut report =
            TickReport { tick, swept: false, committed: None, outcome: None, commands: Vec::new(), events: Vec::new() };

        if self.is_decay_tick(tick) {
            self.decay_sweep_into(&mut out)?;
            report.swept = true;
        }

        if self.is_ingest_tick(tick) {
            let inputs = poll(tick);
            if let Some(seq) = self.ingest_into(inputs, &mut out)? {
                report.committed = Some(seq);
                let outcome = decision::decide(&mut self.state, seq, &mut out)?;
                report.commands = outcome.commands.clone();
                report.outcome = Some(outcome);
            }
        }

        self.state.tick += 1;
        report.events = out.events;
        Ok(report)
    }

    /// Colorization: exact datum match → that color at `i_known`; else a
    /// related color from the colorizer at `i_known`; else a fresh color at
    /// `i_max`. New table entries point at `in_progress`.
    pub fn colorize(&mut self, datum: &Datum, in_progress: SeqNo) -> Result<Colorization, EngineError> {
        if let Some(e) = self.state.color_table.lookup_by_datum(datum) {
            return Ok(Colorization { color: e.color, intensity: self.params.i_known, novel: false, new_entry: None });
        }
        let (color, intensity, novel) = match self.colorizer.related_color(&self.state.color_table, datum) {
            Some(c) => (c, self.params.i_known, false),
            None => (self.state.allocate_color(), self.params.i_max, true),
        };
        let entry = ColorTableEntry { color, screen_no: in_progress, datum: datum.clone() };
        self.state.color_table.insert(entry.clone())?;
        Ok(Colorization { color, intensity, novel, new_entry: Some(entry) })
    }

    /// Forms a screen from device inputs and commits it. Returns `None` when
    /// there was nothing to ingest.
    pub fn ingest(&mut self, inputs: Vec<DeviceInput>) -> Result<(Option<SeqNo>, Vec<Event>), EngineError> {
        let mut out = Emitter::new(self.state.tick);
        let seq = self.ingest_into(inputs, &mut out)?;
        Ok((seq, out.events))
    }

    fn ingest_into(&mut self, mut inputs: Vec<DeviceInput>, out: &mut Emitter) -> Result<Option<SeqNo>, EngineError> {
        if inputs.is_empty() {
            return Ok(None);
        }
        inputs.sort_by_key(|i| i.device_id);
        let wanted = inputs.len();

        let st = &mut self.state;
        if st.pixel_pool.free_count() < wanted {
            let evicted = st.screen_pool.evict_for(&mut st.pixel_pool, &mut st.color_table, wanted)?;
            out.evictions(&evicted);
        }
        let take = wanted.min(st.pixel_pool.free_count());
        for dropped in inputs.drain(take..) {
            out.emit(EventKind::DroppedInput { device: dropped.device_id, datum: dropped.datum });
        }
        if take == 0 {
            return Ok(None);
        }
        let blanks = match st.pixel_pool.acquire(take) {
            Acquire::Granted(b) => b,
            Acquire::Shortfall(n) => {
                return Err(EngineError::Corruption(format!("pool short by {n} after eviction")));
            }
        };

        let seq = st.next_seq;
        st.next_seq = SeqNo(seq.0 + 1);

        let mut pixels = Vec::with_capacity(take);
        for (blank, input) in blanks.into_iter().zip(inputs) {
            let loaded = blank.load(input.device_id, input.datum);
            let c = self.colorize(&loaded.datum, seq)?;
            out.emit(EventKind::PixelColorized {
                seq,
                device: loaded.device_id,
                color: c.color,
                intensity: c.intensity,
                datum: loaded.datum.clone(),
                novel: c.novel,
            });
            if let Some(e) = c.new_entry {
                out.emit(EventKind::EntryAdded { color: e.color, seq: e.screen_no, datum: e.datum });
            }
            pixels.push(loaded.colorize(c.color, c.intensity));
        }

        let screen = MemoryScreen {
            seq,
            tick: self.state.tick,
            color: majority_color(&pixels),
            datum: mode_datum(&pixels, None),
            is_root: false,
            pixels,
        };
        out.emit(EventKind::ScreenCommitted {
            seq,
            color: screen.color,
            datum: screen.datum.clone(),
            pixels: screen.pixels.len(),
        });
        self.state.screen_pool.commit(screen)?;
        Ok(Some(seq))
    }

    /// Decrements every non-root pixel by 1 (net `1 - r` for screens the
    /// color table references), forgets pixels at or below -1 and removes
    /// screens left empty.
    pub fn decay_sweep(&mut self) -> Result<Vec<Event>, EngineError> {
        let mut out = Emitter::new(self.state.tick);
        self.decay_sweep_into(&mut out)?;
        Ok(out.events)
    }

    fn decay_sweep_into(&mut self, out: &mut Emitter) -> Result<(), EngineError> {
        let st = &mut self.state;
        let seqs = st.screen_pool.dynamic_seqs();
        let referenced: std::collections::BTreeSet<SeqNo> = st.color_table.iter().map(|e| e.screen_no).collect();
        out.emit(EventKind::DecaySweep { screens: seqs.len(), pixels: st.screen_pool.dynamic_pixel_count() });

        for seq in seqs {
            let delta = if referenced.contains(&seq) { self.params.r - Intensity::ONE } else { -Intensity::ONE };
            let screen = st.screen_pool.get_dynamic_mut(seq)?;
            let mut forgotten = 0;
            let mut kept = Vec::with_capacity(screen.pixels.len());
            for mut p in std::mem::take(&mut screen.pixels) {
                p.intensity = p.intensity + delta;
                if p.intensity.is_forgotten() {
                    out.emit(EventKind::PixelRemoved { seq, device: p.device_id, intensity: p.intensity });
                    forgotten += 1;
                } else {
                    kept.push(p);
                }
            }
            let emptied = kept.is_empty();
            screen.pixels = kept;
            st.pixel_pool.release_count(forgotten)?;
            if emptied {
                let removal = st
                    .screen_pool
                    .remove_screen(&mut st.pixel_pool, &mut st.color_table, seq)?
                    .ok_or_else(|| EngineError::Corruption(format!("screen {seq} vanished mid-sweep")))?;
                out.removal(&removal, RemovalCause::Decay);
            }
        }
        Ok(())
    }

    /// Checks the cross-structure invariants. Used by tests and snapshot restore.
    pub fn check_invariants(&self) -> Result<(), String> {
        check_state(&self.params, &self.state)
    }
}

pub(crate) fn check_state(params: &EngineParams, st: &EngineState) -> Result<(), String> {
    let pool = &st.pixel_pool;
    if pool.capacity() != params.capacity {
        return Err(format!("pixel pool capacity {} != configured {}", pool.capacity(), params.capacity));
    }
    let dynamic = st.screen_pool.dynamic_pixel_count();
    if pool.free_count() + dynamic != pool.capacity() {
        return Err(format!(
            "conservation broken: free {} + dynamic {} != capacity {}",
            pool.free_count(),
            dynamic,
            pool.capacity()
        ));
    }
    let mut seen_runtime = false;
    for s in st.screen_pool.iter() {
        if s.seq >= st.next_seq {
            return Err(format!("screen {} not below next_seq {}", s.seq, st.next_seq));
        }
        if s.pixels.is_empty() {
            return Err(format!("screen {} has no pixels", s.seq));
        }
        if s.is_root && seen_runtime {
            return Err(format!("root screen {} follows a runtime screen", s.seq));
        }
        seen_runtime |= !s.is_root;
        for p in &s.pixels {
            if p.color >= st.next_color || s.color >= st.next_color {
                return Err(format!("screen {} uses color not below next_color", s.seq));
            }
            if p.intensity.is_forgotten() || p.intensity > params.i_max {
                return Err(format!("screen {} pixel intensity {} out of range", s.seq, p.intensity));
            }
        }
        if s.pixels.windows(2).any(|w| w[0].device_id > w[1].device_id) {
            return Err(format!("screen {} pixels out of device order", s.seq));
        }
    }
    for e in st.color_table.iter() {
        if !st.screen_pool.contains(e.screen_no) {
            return Err(format!("table entry {:?} points at missing screen {}", e.datum, e.screen_no));
        }
        if e.color >= st.next_color {
            return Err(format!("table entry {:?} uses color not below next_color", e.datum));
        }
    }
    Ok(())
}
