//! Memory pixels, memory screens and the pure header derivations over them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intensity::Intensity;

/// Opaque identifier expressing relatedness of data. Allocated monotonically
/// by the engine and never reused within a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorId(pub u64);

/// Identifier of a registered peripheral device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub u32);

/// Sequence number of a memory screen. Root screens occupy `0..R`; runtime
/// screens follow in strictly ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeqNo(pub u64);

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dev{}", self.0)
    }
}

impl fmt::Display for SeqNo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub const MAX_DATUM_LEN: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatumError {
    #[error("datum must not be empty")]
    Empty,
    #[error("datum is {0} bytes, limit is {MAX_DATUM_LEN}")]
    TooLong(usize),
}

/// Opaque payload of a pixel, compared by exact byte equality and ordered
/// lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Datum(Box<[u8]>);

impl Datum {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, DatumError> {
        let bytes = bytes.into();
        match bytes.len() {
            0 => Err(DatumError::Empty),
            n if n > MAX_DATUM_LEN => Err(DatumError::TooLong(n)),
            _ => Ok(Datum(bytes.into_boxed_slice())),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, String> {
        let bytes = hex::decode(s).map_err(|e| e.to_string())?;
        if s.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err("hex must be lowercase".into());
        }
        Datum::new(bytes).map_err(|e| e.to_string())
    }
}

impl TryFrom<&str> for Datum {
    type Error = DatumError;
    fn try_from(s: &str) -> Result<Self, DatumError> {
        Datum::new(s.as_bytes())
    }
}

impl fmt::Debug for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match std::str::from_utf8(&self.0) {
            Ok(s) => write!(f, "{s:?}"),
            Err(_) => write!(f, "0x{}", self.to_hex()),
        }
    }
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match std::str::from_utf8(&self.0) {
            Ok(s) if s.chars().all(|c| !c.is_control()) => f.write_str(s),
            _ => write!(f, "0x{}", self.to_hex()),
        }
    }
}

/// A free pixel handed out by the pixel pool. Carries no fields.
#[derive(Debug)]
pub struct BlankPixel {
    _private: (),
}

impl BlankPixel {
    pub(crate) fn new() -> Self {
        BlankPixel { _private: () }
    }

    /// Stores sensed data and its source device in the pixel.
    pub fn load(self, device_id: DeviceId, datum: Datum) -> LoadedPixel {
        LoadedPixel { device_id, datum }
    }
}

/// A pixel holding data and device id, awaiting colorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedPixel {
    pub device_id: DeviceId,
    pub datum: Datum,
}

impl LoadedPixel {
    pub fn colorize(self, color: ColorId, intensity: Intensity) -> MemoryPixel {
        MemoryPixel { color, intensity, device_id: self.device_id, datum: self.datum }
    }
}

/// The atomic memory unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryPixel {
    pub color: ColorId,
    pub intensity: Intensity,
    pub device_id: DeviceId,
    pub datum: Datum,
}

/// Pixels collected at one ingest tick, with their derived header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryScreen {
    pub seq: SeqNo,
    pub tick: u64,
    /// Majority color at commit time.
    pub color: ColorId,
    /// Mode datum at commit time.
    pub datum: Datum,
    pub is_root: bool,
    /// Ascending device id, ties in arrival order.
    pub pixels: Vec<MemoryPixel>,
}

impl MemoryScreen {
    /// Inserts after every pixel whose device id is `<=` the new one, which
    /// keeps device order and arrival order among equal ids.
    pub(crate) fn insert_pixel(&mut self, pixel: MemoryPixel) {
        let at = self.pixels.partition_point(|p| p.device_id <= pixel.device_id);
        self.pixels.insert(at, pixel);
    }
}

/// Most frequent color; ties go to the smallest id.
///
/// Panics on an empty slice.
pub fn majority_color(pixels: &[MemoryPixel]) -> ColorId {
    assert!(!pixels.is_empty(), "majority_color called on an empty pixel list");
    let mut counts: BTreeMap<ColorId, usize> = BTreeMap::new();
    for p in pixels {
        *counts.entry(p.color).or_default() += 1;
    }
    // BTreeMap iterates ascending, so keeping the first strict maximum picks the smallest id.
    let mut best = None::<(ColorId, usize)>;
    for (color, n) in counts {
        if best.map_or(true, |(_, m)| n > m) {
            best = Some((color, n));
        }
    }
    best.expect("non-empty").0
}

/// Most frequent datum, optionally among pixels of one color only; ties go to
/// the lexicographically smallest bytes.
///
/// Panics if no pixel qualifies.
pub fn mode_datum(pixels: &[MemoryPixel], restrict_color: Option<ColorId>) -> Datum {
    let mut counts: BTreeMap<&Datum, usize> = BTreeMap::new();
    for p in pixels.iter().filter(|p| restrict_color.map_or(true, |c| p.color == c)) {
        *counts.entry(&p.datum).or_default() += 1;
    }
    let mut best = None::<(&Datum, usize)>;
    for (datum, n) in counts {
        if best.map_or(true, |(_, m)| n > m) {
            best = Some((datum, n));
        }
    }
    best.expect("mode_datum: no pixel matches the requested color").0.clone()
}
