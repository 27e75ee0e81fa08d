//! CSV schemas for annotation records.
//!
//! All files carry a header row.
//!
//! * SPA estimates: `annotator_id,system_x,system_y,p_estimate,m_seen` with
//!   `p_estimate` on a 0-to-100 scale.
//! * Likert ratings: `annotator_id,system_id,item_id,rating,k`.
//! * Annotator metadata: `annotator_id,native_speaker,submission_count`;
//!   extra columns load into the record's tag map.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::experiments::{AnnotatorMeta, LikertRecord};
use crate::protocols::spa::SpaEstimate;
use crate::{Error, Result};

pub const SPA_HEADER: &str = "annotator_id,system_x,system_y,p_estimate,m_seen";
pub const LIKERT_HEADER: &str = "annotator_id,system_id,item_id,rating,k";
pub const META_HEADER: &str = "annotator_id,native_speaker,submission_count";

/// Loaded records plus non-fatal warnings (e.g. an empty file).
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub rows: Vec<T>,
    pub warnings: Vec<String>,
}

/// Snaps a probability to the value that survives the 0-to-100 CSV scale
/// conversion unchanged, so generated datasets round-trip bit-for-bit.
pub fn canonical_probability(p: f64) -> f64 {
    let mut current = p;
    for _ in 0..4 {
        let through_wire = (current * 100.0) / 100.0;
        if through_wire == current {
            return current;
        }
        current = through_wire;
    }
    current
}

pub fn load_spa_records(path: impl AsRef<Path>) -> Result<Loaded<SpaEstimate>> {
    let path = path.as_ref();
    parse_spa_records(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn parse_spa_records(text: &str, source: &str) -> Result<Loaded<SpaEstimate>> {
    let mut reader = reader(text);
    expect_header(
        &mut reader,
        source,
        &[
            "annotator_id",
            "system_x",
            "system_y",
            "p_estimate",
            "m_seen",
        ],
    )?;
    let mut rows = Vec::new();
    let mut seen: BTreeSet<(String, String, String)> = BTreeSet::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| data_error(source, line, e.to_string()))?;
        let annotator = field(&record, 0, source, line)?;
        let system_x = field(&record, 1, source, line)?;
        let system_y = field(&record, 2, source, line)?;
        let p_estimate: f64 = parse_number(&record, 3, source, line)?;
        if !(0.0..=100.0).contains(&p_estimate) {
            return Err(data_error(
                source,
                line,
                format!("p_estimate {p_estimate} outside [0, 100]"),
            ));
        }
        let m_seen: u32 = parse_number(&record, 4, source, line)?;
        if !seen.insert((annotator.clone(), system_x.clone(), system_y.clone())) {
            return Err(data_error(
                source,
                line,
                format!(
                    "duplicate row for annotator `{annotator}` and pair ({system_x}, {system_y})"
                ),
            ));
        }
        rows.push(SpaEstimate {
            annotator: annotator.into(),
            system_x,
            system_y,
            p_hat: p_estimate / 100.0,
            m_seen,
        });
    }
    let warnings = if rows.is_empty() {
        vec![format!("{source}: no data rows")]
    } else {
        Vec::new()
    };
    Ok(Loaded { rows, warnings })
}

pub fn write_spa_records(path: impl AsRef<Path>, records: &[SpaEstimate]) -> Result<()> {
    fs::write(path, spa_records_to_csv(records))?;
    Ok(())
}

pub fn spa_records_to_csv(records: &[SpaEstimate]) -> String {
    let mut out = String::from(SPA_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.annotator,
            r.system_x,
            r.system_y,
            r.p_hat * 100.0,
            r.m_seen
        ));
    }
    out
}

pub fn load_likert_records(path: impl AsRef<Path>) -> Result<Loaded<LikertRecord>> {
    let path = path.as_ref();
    parse_likert_records(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn parse_likert_records(text: &str, source: &str) -> Result<Loaded<LikertRecord>> {
    let mut reader = reader(text);
    expect_header(
        &mut reader,
        source,
        &["annotator_id", "system_id", "item_id", "rating", "k"],
    )?;
    let mut rows: Vec<LikertRecord> = Vec::new();
    let mut seen: BTreeSet<(String, String, String)> = BTreeSet::new();
    let mut scale_k: Option<u32> = None;
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| data_error(source, line, e.to_string()))?;
        let annotator = field(&record, 0, source, line)?;
        let system = field(&record, 1, source, line)?;
        let item = field(&record, 2, source, line)?;
        let rating: u32 = parse_number(&record, 3, source, line)?;
        let k: u32 = parse_number(&record, 4, source, line)?;
        match scale_k {
            None => scale_k = Some(k),
            Some(existing) if existing != k => {
                return Err(data_error(
                    source,
                    line,
                    format!("mixed scales: k={k} after k={existing}"),
                ))
            }
            _ => {}
        }
        if !seen.insert((annotator.clone(), system.clone(), item.clone())) {
            return Err(data_error(
                source,
                line,
                format!("duplicate rating for annotator `{annotator}`, system `{system}`, item `{item}`"),
            ));
        }
        let row = LikertRecord::new(annotator, system, item, rating, k)
            .map_err(|e| data_error(source, line, e.to_string()))?;
        rows.push(row);
    }
    let warnings = if rows.is_empty() {
        vec![format!("{source}: no data rows")]
    } else {
        Vec::new()
    };
    Ok(Loaded { rows, warnings })
}

pub fn write_likert_records(path: impl AsRef<Path>, records: &[LikertRecord]) -> Result<()> {
    fs::write(path, likert_records_to_csv(records))?;
    Ok(())
}

pub fn likert_records_to_csv(records: &[LikertRecord]) -> String {
    let mut out = String::from(LIKERT_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.annotator, r.system, r.item, r.rating, r.k
        ));
    }
    out
}

pub fn load_annotator_meta(path: impl AsRef<Path>) -> Result<Vec<AnnotatorMeta>> {
    let path = path.as_ref();
    parse_annotator_meta(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn parse_annotator_meta(text: &str, source: &str) -> Result<Vec<AnnotatorMeta>> {
    let mut reader = reader(text);
    let headers: Vec<String> = {
        let h = reader
            .headers()
            .map_err(|e| data_error(source, 1, e.to_string()))?;
        h.iter().map(|s| s.trim().to_string()).collect()
    };
    for (i, want) in ["annotator_id", "native_speaker", "submission_count"]
        .iter()
        .enumerate()
    {
        if headers.get(i).map(String::as_str) != Some(*want) {
            return Err(data_error(
                source,
                1,
                format!(
                    "expected header column {i} to be `{want}`, got {:?}",
                    headers.get(i)
                ),
            ));
        }
    }
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| data_error(source, line, e.to_string()))?;
        let annotator = field(&record, 0, source, line)?;
        let native_raw = field(&record, 1, source, line)?;
        let native_speaker = match native_raw.as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(data_error(
                    source,
                    line,
                    format!("native_speaker must be `true` or `false`, got `{other}`"),
                ))
            }
        };
        let submission_count: u32 = parse_number(&record, 2, source, line)?;
        if submission_count < 1 {
            return Err(data_error(
                source,
                line,
                "submission_count must be >= 1".into(),
            ));
        }
        if !seen.insert(annotator.clone()) {
            return Err(data_error(
                source,
                line,
                format!("duplicate metadata for annotator `{annotator}`"),
            ));
        }
        let mut tags = BTreeMap::new();
        for (i, header) in headers.iter().enumerate().skip(3) {
            if let Some(value) = record.get(i) {
                tags.insert(header.clone(), value.trim().to_string());
            }
        }
        rows.push(AnnotatorMeta {
            annotator: annotator.into(),
            native_speaker,
            submission_count,
            tags,
        });
    }
    Ok(rows)
}

pub fn write_annotator_meta(path: impl AsRef<Path>, meta: &[AnnotatorMeta]) -> Result<()> {
    fs::write(path, annotator_meta_to_csv(meta))?;
    Ok(())
}

pub fn annotator_meta_to_csv(meta: &[AnnotatorMeta]) -> String {
    let mut out = String::from(META_HEADER);
    out.push('\n');
    for m in meta {
        out.push_str(&format!(
            "{},{},{}\n",
            m.annotator, m.native_speaker, m.submission_count
        ));
    }
    out
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn expect_header(reader: &mut csv::Reader<&[u8]>, source: &str, expected: &[&str]) -> Result<()> {
    let headers = reader
        .headers()
        .map_err(|e| data_error(source, 1, e.to_string()))?;
    for (i, want) in expected.iter().enumerate() {
        match headers.get(i) {
            Some(got) if got.trim() == *want => {}
            got => {
                return Err(data_error(
                    source,
                    1,
                    format!("expected header column {i} to be `{want}`, got {got:?}"),
                ))
            }
        }
    }
    Ok(())
}

fn field(record: &csv::StringRecord, idx: usize, source: &str, line: u64) -> Result<String> {
    match record.get(idx) {
        Some(s) if !s.trim().is_empty() => Ok(s.trim().to_string()),
        _ => Err(data_error(source, line, format!("missing column {idx}"))),
    }
}

fn parse_number<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    source: &str,
    line: u64,
) -> Result<T> {
    let raw = field(record, idx, source, line)?;
    raw.parse()
        .map_err(|_| data_error(source, line, format!("`{raw}` is not a valid number")))
}

fn data_error(source: &str, line: u64, message: String) -> Error {
    Error::Data {
        path: source.to_string(),
        line,
        message,
    }
}
