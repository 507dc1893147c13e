//! Engine events and their canonical one-line text form.
//!
//! Each record is `<tick> <Kind> key=value ...` with keys in a fixed order.
//! Data are lowercase hex, intensities integer milli-units, absent values `-`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::intensity::Intensity;
use crate::model::{ColorId, Datum, DeviceId, SeqNo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RemovalCause {
    Decay,
    Evict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeKind {
    Action,
    Associated,
    NoAction,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeKind::Action => "Action",
            OutcomeKind::Associated => "Associated",
            OutcomeKind::NoAction => "NoAction",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    ScreenCommitted {
        seq: SeqNo,
        color: ColorId,
        datum: Datum,
        pixels: usize,
    },
    PixelColorized {
        seq: SeqNo,
        device: DeviceId,
        color: ColorId,
        intensity: Intensity,
        datum: Datum,
        novel: bool,
    },
    EntryAdded {
        color: ColorId,
        seq: SeqNo,
        datum: Datum,
    },
    DecaySweep {
        screens: usize,
        pixels: usize,
    },
    PixelRemoved {
        seq: SeqNo,
        device: DeviceId,
        intensity: Intensity,
    },
    ScreenRemoved {
        seq: SeqNo,
        cause: RemovalCause,
    },
    EntryRemoved {
        color: ColorId,
        seq: SeqNo,
        datum: Datum,
    },
    Evicted {
        seq: SeqNo,
        device: DeviceId,
        intensity: Intensity,
    },
    DroppedInput {
        device: DeviceId,
        datum: Datum,
    },
    Decision {
        seq: SeqNo,
        outcome: OutcomeKind,
        color: Option<ColorId>,
        target: Option<SeqNo>,
        copied: usize,
        tried: Vec<ColorId>,
        label: Option<Datum>,
    },
    ActionIssued {
        device: DeviceId,
        payload: Datum,
        source: SeqNo,
    },
    CopySkipped {
        from: SeqNo,
        into: SeqNo,
        skipped: usize,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::ScreenCommitted { .. } => "ScreenCommitted",
            EventKind::PixelColorized { .. } => "PixelColorized",
            EventKind::EntryAdded { .. } => "EntryAdded",
            EventKind::DecaySweep { .. } => "DecaySweep",
            EventKind::PixelRemoved { .. } => "PixelRemoved",
            EventKind::ScreenRemoved { .. } => "ScreenRemoved",
            EventKind::EntryRemoved { .. } => "EntryRemoved",
            EventKind::Evicted { .. } => "Evicted",
            EventKind::DroppedInput { .. } => "DroppedInput",
            EventKind::Decision { .. } => "Decision",
            EventKind::ActionIssued { .. } => "ActionIssued",
            EventKind::CopySkipped { .. } => "CopySkipped",
        }
    }
}

pub const EVENT_KINDS: [&str; 12] = [
    "ScreenCommitted",
    "PixelColorized",
    "EntryAdded",
    "DecaySweep",
    "PixelRemoved",
    "ScreenRemoved",
    "EntryRemoved",
    "Evicted",
    "DroppedInput",
    "Decision",
    "ActionIssued",
    "CopySkipped",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub tick: u64,
    pub kind: EventKind,
}

struct Opt<'a, T>(&'a Option<T>);

impl<T: fmt::Display> fmt::Display for Opt<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => v.fmt(f),
            None => f.write_str("-"),
        }
    }
}

struct Hex<'a>(&'a Datum);

impl fmt::Display for Hex<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_hex())
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.tick, self.kind.name())?;
        match &self.kind {
            EventKind::ScreenCommitted { seq, color, datum, pixels } => {
                write!(f, " seq={} color={} datum={} pixels={}", seq.0, color.0, Hex(datum), pixels)
            }
            EventKind::PixelColorized { seq, device, color, intensity, datum, novel } => write!(
                f,
                " seq={} device={} color={} intensity={} datum={} novel={}",
                seq.0,
                device.0,
                color.0,
                intensity.milli(),
                Hex(datum),
                u8::from(*novel)
            ),
            EventKind::EntryAdded { color, seq, datum } | EventKind::EntryRemoved { color, seq, datum } => {
                write!(f, " color={} seq={} datum={}", color.0, seq.0, Hex(datum))
            }
            EventKind::DecaySweep { screens, pixels } => write!(f, " screens={screens} pixels={pixels}"),
            EventKind::PixelRemoved { seq, device, intensity } | EventKind::Evicted { seq, device, intensity } => {
                write!(f, " seq={} device={} intensity={}", seq.0, device.0, intensity.milli())
            }
            EventKind::ScreenRemoved { seq, cause } => {
                let cause = match cause {
                    RemovalCause::Decay => "decay",
                    RemovalCause::Evict => "evict",
                };
                write!(f, " seq={} cause={}", seq.0, cause)
            }
            EventKind::DroppedInput { device, datum } => write!(f, " device={} datum={}", device.0, Hex(datum)),
            EventKind::Decision { seq, outcome, color, target, copied, tried, label } => {
                let tried = if tried.is_empty() {
                    "-".to_string()
                } else {
                    tried.iter().map(|c| c.0.to_string()).collect::<Vec<_>>().join(",")
                };
                write!(
                    f,
                    " seq={} outcome={} color={} target={} copied={} tried={} label={}",
                    seq.0,
                    outcome,
                    Opt(&color.map(|c| c.0)),
                    Opt(&target.map(|s| s.0)),
                    copied,
                    tried,
                    Opt(&label.as_ref().map(Datum::to_hex)),
                )
            }
            EventKind::ActionIssued { device, payload, source } => {
                write!(f, " device={} payload={} source={}", device.0, Hex(payload), source.0)
            }
            EventKind::CopySkipped { from, into, skipped } => {
                write!(f, " from={} into={} skipped={}", from.0, into.0, skipped)
            }
        }
    }
}

/// Renders events as newline-terminated log lines.
pub fn render_log<'a>(events: impl IntoIterator<Item = &'a Event>) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

/// A log line read back without interpreting kind-specific fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub tick: u64,
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LogParseError {
    pub line: usize,
    pub message: String,
}

impl LogRecord {
    pub fn field(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn field_u64(&self, key: &str) -> Option<u64> {
        self.field(key)?.parse().ok()
    }
}

impl FromStr for LogRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, String> {
        let mut parts = line.split(' ');
        let tick = parts
            .next()
            .filter(|s| !s.is_empty())
            .ok_or("missing tick")?
            .parse::<u64>()
            .map_err(|e| format!("bad tick: {e}"))?;
        let kind = parts.next().ok_or("missing event kind")?;
        if !EVENT_KINDS.contains(&kind) {
            return Err(format!("unknown event kind `{kind}`"));
        }
        let fields = parts
            .map(|p| {
                p.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| format!("field `{p}` is not key=value"))
            })
            .collect::<Result<_, _>>()?;
        Ok(LogRecord { tick, kind: kind.to_string(), fields })
    }
}

pub fn parse_log(text: &str) -> Result<Vec<LogRecord>, LogParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| l.parse().map_err(|message| LogParseError { line: i + 1, message }))
        .collect()
}
