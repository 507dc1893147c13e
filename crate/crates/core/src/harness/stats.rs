//! Summary statistics over an event log.

use std::collections::BTreeMap;
use std::fmt;

use crate::event::{LogRecord, EVENT_KINDS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenLifetime {
    pub seq: u64,
    pub committed: u64,
    /// Removal tick and cause (`decay` or `evict`); `None` if still live at the end of the log.
    pub removed: Option<(u64, String)>,
}

impl ScreenLifetime {
    pub fn ticks(&self) -> Option<u64> {
        self.removed.as_ref().map(|(t, _)| t - self.committed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogStats {
    /// Every known kind, including zero counts.
    pub counts: BTreeMap<String, usize>,
    pub lifetimes: Vec<ScreenLifetime>,
    /// Lifetime in ticks → number of screens forgotten after exactly that long.
    pub forgetting_histogram: BTreeMap<u64, usize>,
    pub last_tick: Option<u64>,
}

impl LogStats {
    pub fn from_records(records: &[LogRecord]) -> Self {
        let mut counts: BTreeMap<String, usize> = EVENT_KINDS.iter().map(|k| (k.to_string(), 0)).collect();
        let mut live: BTreeMap<u64, ScreenLifetime> = BTreeMap::new();
        let mut done = Vec::new();

        for r in records {
            *counts.entry(r.kind.clone()).or_default() += 1;
            match r.kind.as_str() {
                "ScreenCommitted" => {
                    if let Some(seq) = r.field_u64("seq") {
                        live.insert(seq, ScreenLifetime { seq, committed: r.tick, removed: None });
                    }
                }
                "ScreenRemoved" => {
                    if let Some(mut l) = r.field_u64("seq").and_then(|s| live.remove(&s)) {
                        l.removed = Some((r.tick, r.field("cause").unwrap_or("?").to_string()));
                        done.push(l);
                    }
                }
                _ => {}
            }
        }

        let mut forgetting_histogram = BTreeMap::new();
        for l in &done {
            if l.removed.as_ref().is_some_and(|(_, c)| c == "decay") {
                *forgetting_histogram.entry(l.ticks().expect("removed")).or_default() += 1;
            }
        }
        let mut lifetimes = done;
        lifetimes.extend(live.into_values());
        lifetimes.sort_by_key(|l| l.seq);

        LogStats { counts, lifetimes, forgetting_histogram, last_tick: records.last().map(|r| r.tick) }
    }
}

impl fmt::Display for LogStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "event counts")?;
        for (kind, n) in &self.counts {
            writeln!(f, "  {kind:<16} {n:>8}")?;
        }
        writeln!(f, "screen lifetimes")?;
        for l in &self.lifetimes {
            match &l.removed {
                Some((t, cause)) => writeln!(
                    f,
                    "  #{:<6} committed {:>6}  removed {:>6} ({cause})  {} ticks",
                    l.seq,
                    l.committed,
                    t,
                    t - l.committed
                )?,
                None => writeln!(f, "  #{:<6} committed {:>6}  live", l.seq, l.committed)?,
            }
        }
        writeln!(f, "forgetting histogram (ticks → screens)")?;
        for (ticks, n) in &self.forgetting_histogram {
            writeln!(f, "  {ticks:>6} {n:>6} {}", "*".repeat((*n).min(60)))?;
        }
        Ok(())
    }
}
