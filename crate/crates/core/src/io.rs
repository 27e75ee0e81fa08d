//! CSV forms for lotteries, utility functions, and outcome universes.
//!
//! Lottery files: header `outcome_id,probability`, one outcome per line.
//! Utility files: header `outcome_id,utility`.
//! Universe files: header `outcome_id,label` (label may be empty).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::lottery::{Lottery, Outcome, OutcomeUniverse};
use crate::utility::UtilityFunction;
use crate::{Error, Result};

/// Parses a lottery from CSV text. `source` names the input in errors.
pub fn parse_lottery(text: &str, source: &str) -> Result<Lottery> {
    let rows = two_column_rows(text, source, "outcome_id", "probability")?;
    let support = rows.into_iter().map(|(id, p, _)| (id.into(), p)).collect();
    Lottery::new(support)
}

pub fn load_lottery(path: impl AsRef<Path>) -> Result<Lottery> {
    let path = path.as_ref();
    parse_lottery(&fs::read_to_string(path)?, &path.display().to_string())
}

/// Parses a utility function from CSV text.
pub fn parse_utility(text: &str, source: &str) -> Result<UtilityFunction> {
    let rows = two_column_rows(text, source, "outcome_id", "utility")?;
    let mut values = BTreeMap::new();
    for (id, value, line) in rows {
        if values.insert(id.clone().into(), value).is_some() {
            return Err(Error::Data {
                path: source.to_string(),
                line,
                message: format!("duplicate outcome `{id}`"),
            });
        }
    }
    UtilityFunction::new(values)
}

pub fn load_utility(path: impl AsRef<Path>) -> Result<UtilityFunction> {
    let path = path.as_ref();
    parse_utility(&fs::read_to_string(path)?, &path.display().to_string())
}

/// Parses an outcome universe from CSV text.
pub fn parse_universe(text: &str, source: &str) -> Result<OutcomeUniverse> {
    let mut reader = csv_reader(text);
    check_header(&mut reader, source, &["outcome_id", "label"])?;
    let mut outcomes = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| data_error(source, line, e.to_string()))?;
        let id = field(&record, 0, source, line)?;
        let label = record.get(1).unwrap_or("").trim();
        outcomes.push(if label.is_empty() {
            Outcome::new(id)
        } else {
            Outcome::labeled(id, label)
        });
    }
    OutcomeUniverse::new(outcomes)
}

pub fn load_universe(path: impl AsRef<Path>) -> Result<OutcomeUniverse> {
    let path = path.as_ref();
    parse_universe(&fs::read_to_string(path)?, &path.display().to_string())
}

/// Renders a lottery in its CSV form.
pub fn lottery_to_csv(lottery: &Lottery) -> String {
    let mut out = String::from("outcome_id,probability\n");
    for (id, p) in lottery.support() {
        out.push_str(&format!("{id},{p}\n"));
    }
    out
}

/// Renders a utility function in its CSV form.
pub fn utility_to_csv(utility: &UtilityFunction) -> String {
    let mut out = String::from("outcome_id,utility\n");
    for (id, v) in utility.values() {
        out.push_str(&format!("{id},{v}\n"));
    }
    out
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn check_header(reader: &mut csv::Reader<&[u8]>, source: &str, expected: &[&str]) -> Result<()> {
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

fn data_error(source: &str, line: u64, message: String) -> Error {
    Error::Data {
        path: source.to_string(),
        line,
        message,
    }
}

/// Shared helper for two-column numeric CSV files. Returns `(id, value,
/// line)` triples.
fn two_column_rows(
    text: &str,
    source: &str,
    id_header: &str,
    value_header: &str,
) -> Result<Vec<(String, f64, u64)>> {
    let mut reader = csv_reader(text);
    check_header(&mut reader, source, &[id_header, value_header])?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| data_error(source, line, e.to_string()))?;
        let id = field(&record, 0, source, line)?;
        let raw = field(&record, 1, source, line)?;
        let value: f64 = raw
            .parse()
            .map_err(|_| data_error(source, line, format!("`{raw}` is not a number")))?;
        rows.push((id, value, line));
    }
    if rows.is_empty() {
        return Err(data_error(source, 1, "no data rows".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lottery_round_trip() {
        let text = "outcome_id,probability\na,0.25\nb,0.75\n";
        let lottery = parse_lottery(text, "test").unwrap();
        assert_eq!(lottery_to_csv(&lottery), text);
    }

    #[test]
    fn utility_round_trip() {
        let text = "outcome_id,utility\na,1.9\nb,-2.5\n";
        let utility = parse_utility(text, "test").unwrap();
        assert_eq!(utility_to_csv(&utility), text);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_lottery("outcome_id,probability\na,0.5\nb,oops\n", "f.csv").unwrap_err();
        match err {
            Error::Data { path, line, .. } => {
                assert_eq!(path, "f.csv");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn header_is_required() {
        assert!(parse_lottery("a,0.5\nb,0.5\n", "f.csv").is_err());
    }

    #[test]
    fn universe_parses_optional_labels() {
        let u = parse_universe("outcome_id,label\na,first\nb,\n", "f.csv").unwrap();
        assert_eq!(u.outcomes()[0].label.as_deref(), Some("first"));
        assert_eq!(u.outcomes()[1].label, None);
    }
}
