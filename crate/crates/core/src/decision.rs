//! Decision cascade over a freshly committed screen.
//!
//! Candidates are tried in order of decreasing color frequency. For each
//! candidate `(color, datum)`:
//!
//! * an entry with both that color and that datum is a full match: the
//!   pixels of the entry's screen are issued as action commands;
//! * otherwise any entry of that color is a color-only match: that color's
//!   pixels in the entry's screen are copied into the new screen;
//! * otherwise the next candidate is tried.
//!
//! Exhausting the candidates means no action.

use std::collections::BTreeMap;

use crate::engine::{Emitter, EngineError, EngineState};
use crate::event::{EventKind, OutcomeKind};
use crate::model::{mode_datum, ColorId, Datum, DeviceId, MemoryScreen, SeqNo};
use crate::pools::Acquire;

/// A command routed to a peripheral device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCommand {
    pub device_id: DeviceId,
    pub payload: Datum,
    pub source_seq: SeqNo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionOutcome {
    pub kind: OutcomeKind,
    pub matched_color: Option<ColorId>,
    pub target_seq: Option<SeqNo>,
    /// Non-empty only for [`OutcomeKind::Action`].
    pub commands: Vec<ActionCommand>,
    pub copied_count: usize,
    pub colors_tried: Vec<ColorId>,
}

/// Distinct colors of the screen by descending pixel count, ties by
/// ascending id, each paired with the mode datum among that color's pixels.
/// The first candidate is always the screen header itself.
pub fn candidate_colors(screen: &MemoryScreen) -> Vec<(ColorId, Datum)> {
    let mut counts: BTreeMap<ColorId, usize> = BTreeMap::new();
    for p in &screen.pixels {
        *counts.entry(p.color).or_default() += 1;
    }
    let mut order: Vec<(ColorId, usize)> = counts.into_iter().collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    order
        .into_iter()
        .map(
            |(c, _)| {
                if c == screen.color {
                    (c, screen.datum.clone())
                } else {
                    (c, mode_datum(&screen.pixels, Some(c)))
                }
            },
        )
        .collect()
}

/// One command per pixel of the target screen, in pixel order.
pub fn perform_action(state: &EngineState, target: SeqNo) -> Result<Vec<ActionCommand>, EngineError> {
    let screen = state
        .screen_pool
        .get(target)
        .ok_or_else(|| EngineError::Corruption(format!("action target {target} is not in the screen pool")))?;
    Ok(screen
        .pixels
        .iter()
        .map(|p| ActionCommand { device_id: p.device_id, payload: p.datum.clone(), source_seq: target })
        .collect())
}

/// Result of an associative copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyReport {
    pub copied: usize,
    pub skipped: usize,
}

/// Copies every pixel of `color` in screen `from` into screen `into`,
/// keeping the source intensity. Copies draw from the free pixels only and
/// never trigger eviction; once the pool is dry the rest are skipped.
/// The target screen's header is left untouched.
pub fn copy_pixels(
    state: &mut EngineState,
    from: SeqNo,
    color: ColorId,
    into: SeqNo,
) -> Result<CopyReport, EngineError> {
    let source = state
        .screen_pool
        .get(from)
        .ok_or_else(|| EngineError::Corruption(format!("copy source {from} is not in the screen pool")))?;
    // Collected up front so a screen copying from itself sees only its original pixels.
    let wanted: Vec<_> = source.pixels.iter().filter(|p| p.color == color).cloned().collect();

    let mut copied = 0;
    for pixel in &wanted {
        match state.pixel_pool.acquire(1) {
            Acquire::Granted(mut blank) => {
                let blank = blank.pop().expect("granted one pixel");
                let filled = blank.load(pixel.device_id, pixel.datum.clone()).colorize(pixel.color, pixel.intensity);
                state.screen_pool.get_dynamic_mut(into)?.insert_pixel(filled);
                copied += 1;
            }
            Acquire::Shortfall(_) => break,
        }
    }
    Ok(CopyReport { copied, skipped: wanted.len() - copied })
}

/// Runs the cascade for the screen just committed at `seq`.
pub(crate) fn decide(state: &mut EngineState, seq: SeqNo, out: &mut Emitter) -> Result<DecisionOutcome, EngineError> {
    let screen = state
        .screen_pool
        .get(seq)
        .ok_or_else(|| EngineError::Corruption(format!("decided screen {seq} is not in the screen pool")))?;
    let candidates = candidate_colors(screen);

    let mut tried = Vec::with_capacity(candidates.len());
    for (color, datum) in candidates {
        tried.push(color);

        if let Some(entry) = state.color_table.lookup_by_datum(&datum).filter(|e| e.color == color) {
            let target = entry.screen_no;
            let commands = perform_action(state, target)?;
            let label = state.screen_pool.get(target).map(|s| s.datum.clone());
            out.emit(EventKind::Decision {
                seq,
                outcome: OutcomeKind::Action,
                color: Some(color),
                target: Some(target),
                copied: 0,
                tried: tried.clone(),
                label,
            });
            for c in &commands {
                out.emit(EventKind::ActionIssued {
                    device: c.device_id,
                    payload: c.payload.clone(),
                    source: c.source_seq,
                });
            }
            return Ok(DecisionOutcome {
                kind: OutcomeKind::Action,
                matched_color: Some(color),
                target_seq: Some(target),
                commands,
                copied_count: 0,
                colors_tried: tried,
            });
        }

        if let Some(entry) = state.color_table.lookup_by_color(color).into_iter().next() {
            let target = entry.screen_no;
            let report = copy_pixels(state, target, color, seq)?;
            if report.skipped > 0 {
                out.emit(EventKind::CopySkipped { from: target, into: seq, skipped: report.skipped });
            }
            out.emit(EventKind::Decision {
                seq,
                outcome: OutcomeKind::Associated,
                color: Some(color),
                target: Some(target),
                copied: report.copied,
                tried: tried.clone(),
                label: None,
            });
            return Ok(DecisionOutcome {
                kind: OutcomeKind::Associated,
                matched_color: Some(color),
                target_seq: Some(target),
                commands: Vec::new(),
                copied_count: report.copied,
                colors_tried: tried,
            });
        }
    }

    out.emit(EventKind::Decision {
        seq,
        outcome: OutcomeKind::NoAction,
        color: None,
        target: None,
        copied: 0,
        tried: tried.clone(),
        label: None,
    });
    Ok(DecisionOutcome {
        kind: OutcomeKind::NoAction,
        matched_color: None,
        target_seq: None,
        commands: Vec::new(),
        copied_count: 0,
        colors_tried: tried,
    })
}
