//! Two-timepoint CSV ingestion.
//!
//! Expected layout: header `subject_id,time,y` with time ∈ {1, 2} and one
//! row per (subject, time). Subjects missing either time point are dropped
//! and counted; malformed rows fail with their line number.

use crate::distributions::LongitudinalSample;
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub n_subjects: usize,
    pub dropped_incomplete: usize,
}

pub fn ingest_csv(path: &Path) -> Result<(LongitudinalSample, IngestReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::config(format!("cannot open {}: {e}", path.display())))?;

    {
        let headers = reader
            .headers()
            .map_err(|e| Error::config(format!("no header row: {e}")))?;
        let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
        if names != ["subject_id", "time", "y"] {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header 'subject_id,time,y', got '{}'",
                    names.join(",")
                ),
            });
        }
    }

    // (y1, y2) per subject, in first-appearance order
    let mut order: Vec<String> = Vec::new();
    let mut seen: HashMap<String, (Option<f64>, Option<f64>)> = HashMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0);
            Error::Parse {
                line,
                message: format!("malformed CSV row: {e}"),
            }
        })?;
        let line = rec
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(0);
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, got {}", rec.len()),
            });
        }
        let subject = rec[0].to_string();
        if subject.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty subject_id".into(),
            });
        }
        let time: u8 = rec[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("time must be 1 or 2, got '{}'", &rec[1]),
        })?;
        if time != 1 && time != 2 {
            return Err(Error::Parse {
                line,
                message: format!("time must be 1 or 2, got {time}"),
            });
        }
        let y: f64 = rec[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("non-numeric response '{}'", &rec[2]),
        })?;
        if !y.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("non-finite response {y}"),
            });
        }
        let entry = seen.entry(subject.clone()).or_insert_with(|| {
            order.push(subject.clone());
            (None, None)
        });
        let slot = if time == 1 { &mut entry.0 } else { &mut entry.1 };
        if slot.is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate (subject {subject}, time {time})"),
            });
        }
        *slot = Some(y);
    }

    let mut y1 = Vec::new();
    let mut y2 = Vec::new();
    let mut dropped = 0usize;
    for subject in &order {
        match seen[subject] {
            (Some(a), Some(b)) => {
                y1.push(a);
                y2.push(b);
            }
            _ => dropped += 1,
        }
    }
    if y1.len() < 2 {
        return Err(Error::domain(format!(
            "need at least 2 complete subjects, found {} ({} dropped)",
            y1.len(),
            dropped
        )));
    }
    let n = y1.len();
    Ok((
        LongitudinalSample::new(y1, y2)?,
        IngestReport {
            n_subjects: n,
            dropped_incomplete: dropped,
        },
    ))
}
