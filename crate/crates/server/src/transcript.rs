// SPDX-License-Identifier: Apache-2.0

//! Offline verification of a session log: recompute every footprint from the
//! logged token usage and check it against what the service recorded.

use std::path::Path;

use ecoprompt_core::footprint::{estimate_footprint, DatacenterProfile, FootprintEstimate, ModelProfile};
use thiserror::Error;

use crate::session::{FootprintLogged, PromptLogged, SessionCreated};
use crate::store::{parse_lines, EventKind, StoreError};

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptRow {
    pub prompt_id: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub estimate: FootprintEstimate,
    pub totals: FootprintEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptSummary {
    pub rows: Vec<TranscriptRow>,
    pub totals: FootprintEstimate,
    pub logged_totals: FootprintEstimate,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: {what} differs: recomputed {recomputed:?}, logged {logged:?}")]
    Mismatch {
        line: usize,
        what: &'static str,
        recomputed: FootprintEstimate,
        logged: FootprintEstimate,
    },
}

/// Replays `text`, using the profiles pinned in the `created` record or
/// `fallback` when the transcript has none.
pub fn verify(
    path: &Path,
    text: &str,
    fallback: (&ModelProfile, &DatacenterProfile),
) -> Result<TranscriptSummary, TranscriptError> {
    let records = parse_lines(path, text).map_err(|e| match e {
        StoreError::Corrupt { line, message, .. } => TranscriptError::Schema { line, message },
        other => TranscriptError::Schema {
            line: 0,
            message: other.to_string(),
        },
    })?;
    // Map record index back to the 1-based file line.
    let line_numbers: Vec<usize> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, _)| i + 1)
        .collect();

    let (mut model, mut dc) = (fallback.0.clone(), fallback.1.clone());
    let mut pending: Option<(PromptLogged, FootprintEstimate)> = None;
    let mut rows = Vec::new();
    let mut totals = FootprintEstimate::ZERO;
    let mut logged_totals = FootprintEstimate::ZERO;

    for (record, &line) in records.iter().zip(&line_numbers) {
        let schema = |e: StoreError| TranscriptError::Schema {
            line,
            message: e.to_string(),
        };
        match record.kind {
            EventKind::Created => {
                let c: SessionCreated = record.payload_as().map_err(schema)?;
                model = c.model;
                dc = c.datacenter;
            }
            EventKind::Prompt => {
                let p: PromptLogged = record.payload_as().map_err(schema)?;
                let estimate = estimate_footprint(&model, &dc, &p.usage);
                pending = Some((p, estimate));
            }
            EventKind::Footprint => {
                let f: FootprintLogged = record.payload_as().map_err(schema)?;
                let (p, estimate) = pending.take().filter(|(p, _)| p.prompt_id == f.prompt_id).ok_or(
                    TranscriptError::Schema {
                        line,
                        message: format!("footprint for {} has no matching prompt record", f.prompt_id),
                    },
                )?;
                if estimate != f.estimate {
                    return Err(TranscriptError::Mismatch {
                        line,
                        what: "footprint",
                        recomputed: estimate,
                        logged: f.estimate,
                    });
                }
                totals += estimate;
                if totals != f.totals {
                    return Err(TranscriptError::Mismatch {
                        line,
                        what: "running totals",
                        recomputed: totals,
                        logged: f.totals,
                    });
                }
                logged_totals = f.totals;
                rows.push(TranscriptRow {
                    prompt_id: p.prompt_id,
                    input_tokens: p.usage.input_tokens,
                    output_tokens: p.usage.output_tokens,
                    estimate,
                    totals,
                });
            }
            EventKind::LimitChange | EventKind::Deleted => {}
            EventKind::GameAction | EventKind::GameEvent => {
                return Err(TranscriptError::Schema {
                    line,
                    message: "game records found; replay expects a session transcript".into(),
                })
            }
        }
    }
    if let Some((p, _)) = pending {
        return Err(TranscriptError::Schema {
            line: line_numbers.last().copied().unwrap_or(0),
            message: format!("prompt {} has no footprint record", p.prompt_id),
        });
    }
    Ok(TranscriptSummary {
        rows,
        totals,
        logged_totals,
    })
}

pub fn verify_file(
    path: &Path,
    fallback: (&ModelProfile, &DatacenterProfile),
) -> Result<TranscriptSummary, TranscriptError> {
    let text = std::fs::read_to_string(path).map_err(|source| TranscriptError::Io {
        path: path.display().to_string(),
        source,
    })?;
    verify(path, &text, fallback)
}
