//! The color table: an associative index from each known datum to its color
//! and the screen where it was first seen.

use indexmap::IndexMap;
use thiserror::Error;

use crate::model::{ColorId, Datum, SeqNo};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorTableEntry {
    pub color: ColorId,
    pub screen_no: SeqNo,
    pub datum: Datum,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("color table already holds an entry for datum {0:?}")]
    DuplicateDatum(Datum),
}

/// Entries in insertion order, keyed by datum.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColorTable {
    entries: IndexMap<Datum, (ColorId, SeqNo)>,
}

impl ColorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ColorTableEntry> + '_ {
        self.entries.iter().map(|(datum, &(color, screen_no))| ColorTableEntry {
            color,
            screen_no,
            datum: datum.clone(),
        })
    }

    pub fn lookup_by_datum(&self, datum: &Datum) -> Option<ColorTableEntry> {
        self.entries.get(datum).map(|&(color, screen_no)| ColorTableEntry { color, screen_no, datum: datum.clone() })
    }

    /// All entries of one color, in insertion order.
    pub fn lookup_by_color(&self, color: ColorId) -> Vec<ColorTableEntry> {
        self.iter().filter(|e| e.color == color).collect()
    }

    pub fn contains_color(&self, color: ColorId) -> bool {
        self.entries.values().any(|&(c, _)| c == color)
    }

    pub fn references(&self, seq: SeqNo) -> bool {
        self.entries.values().any(|&(_, s)| s == seq)
    }

    pub fn insert(&mut self, entry: ColorTableEntry) -> Result<(), TableError> {
        if self.entries.contains_key(&entry.datum) {
            return Err(TableError::DuplicateDatum(entry.datum));
        }
        self.entries.insert(entry.datum, (entry.color, entry.screen_no));
        Ok(())
    }

    /// Drops every entry pointing at `seq`, returning them in table order.
    pub fn remove_screen(&mut self, seq: SeqNo) -> Vec<ColorTableEntry> {
        let mut removed = Vec::new();
        self.entries.retain(|datum, &mut (color, screen_no)| {
            if screen_no == seq {
                removed.push(ColorTableEntry { color, screen_no, datum: datum.clone() });
                false
            } else {
                true
            }
        });
        removed
    }
}
