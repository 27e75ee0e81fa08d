//! Table-style comparison reports: one row per directed system pair, a
//! stated-probability column tested against chance and a Likert rating-delta
//! column tested against zero, each Holm-corrected as a family and starred.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent::AgentId;
use crate::protocols::spa::SpaEstimate;
use crate::stats::{holm_bonferroni, one_sample_t, paired_t, stars_for_adjusted, TestResult};
use crate::{Error, Result};

use super::{ExperimentDesign, LikertRecord};

/// How the Holm families are grouped: one family per column (default), or
/// both columns pooled into one family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolmFamily {
    #[default]
    PerColumn,
    Pooled,
}

/// Report construction options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub holm_family: HolmFamily,
    /// Allow multiple rated items per (annotator, system), averaged into one
    /// rating per annotator. Off by default: the protocol collects exactly
    /// one rating per system per annotator.
    pub multi_item_mean: bool,
    /// Family-wise rejection level recorded in the corrected families.
    pub alpha: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            holm_family: HolmFamily::PerColumn,
            multi_item_mean: false,
            alpha: 0.05,
        }
    }
}

/// One directed comparison row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub system_x: String,
    pub system_y: String,
    /// Mean stated probability that X is preferred to Y.
    pub spa_mean: Option<f64>,
    pub spa_n: usize,
    pub spa_test: Option<TestResult>,
    pub spa_adjusted_p: Option<f64>,
    pub spa_stars: String,
    pub spa_error: Option<String>,
    /// Mean per-annotator Likert delta (rating of X minus rating of Y).
    pub likert_delta: Option<f64>,
    pub likert_n: usize,
    pub likert_test: Option<TestResult>,
    pub likert_adjusted_p: Option<f64>,
    pub likert_stars: String,
    pub likert_error: Option<String>,
}

/// Record counts and filter notes carried alongside the rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub spa_records: usize,
    pub likert_records: usize,
    pub notes: Vec<String>,
}

/// A full comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub meta: ReportMeta,
    pub alpha: f64,
}

/// Builds the comparison report for every directed pair in the design.
///
/// Per-row degeneracies (no records, zero variance) are recorded on the row
/// without aborting the others. Records are sorted internally, so the report
/// is invariant to input record order.
pub fn comparison_report(
    spa: &[SpaEstimate],
    likert: &[LikertRecord],
    design: &ExperimentDesign,
    options: &ReportOptions,
) -> Result<ComparisonReport> {
    design.validate()?;
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: options.alpha,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let mut spa = spa.to_vec();
    spa.sort_by(|a, b| {
        (
            &a.annotator,
            &a.system_x,
            &a.system_y,
            a.m_seen,
            a.p_hat.to_bits(),
        )
            .cmp(&(
                &b.annotator,
                &b.system_x,
                &b.system_y,
                b.m_seen,
                b.p_hat.to_bits(),
            ))
    });
    let mut likert = likert.to_vec();
    likert.sort();

    let ratings = per_annotator_ratings(&likert, options.multi_item_mean)?;

    let mut rows = Vec::with_capacity(design.comparisons.len());
    for (x, y) in &design.comparisons {
        rows.push(build_row(x, y, &spa, &ratings));
    }

    apply_holm(&mut rows, options)?;

    Ok(ComparisonReport {
        rows,
        meta: ReportMeta {
            spa_records: spa.len(),
            likert_records: likert.len(),
            notes: Vec::new(),
        },
        alpha: options.alpha,
    })
}

/// Mean rating per (annotator, system). Without the multi-item flag an
/// annotator may rate each system at most once.
fn per_annotator_ratings(
    likert: &[LikertRecord],
    multi_item_mean: bool,
) -> Result<BTreeMap<(AgentId, String), f64>> {
    let mut sums: BTreeMap<(AgentId, String), (f64, u32)> = BTreeMap::new();
    for record in likert {
        let entry = sums
            .entry((record.annotator.clone(), record.system.clone()))
            .or_insert((0.0, 0));
        entry.0 += record.rating as f64;
        entry.1 += 1;
        if entry.1 > 1 && !multi_item_mean {
            return Err(Error::Validation(format!(
                "annotator `{}` rated system `{}` more than once; enable multi-item means to average",
                record.annotator, record.system
            )));
        }
    }
    Ok(sums
        .into_iter()
        .map(|(key, (sum, n))| (key, sum / n as f64))
        .collect())
}

fn build_row(
    x: &str,
    y: &str,
    spa: &[SpaEstimate],
    ratings: &BTreeMap<(AgentId, String), f64>,
) -> ComparisonRow {
    let estimates: Vec<&SpaEstimate> = spa
        .iter()
        .filter(|e| e.system_x == x && e.system_y == y)
        .collect();
    let (spa_mean, spa_test, spa_error) = if estimates.is_empty() {
        (None, None, Some("no estimates for this pair".to_string()))
    } else {
        let p_hats: Vec<f64> = estimates.iter().map(|e| e.p_hat).collect();
        let mean = p_hats.iter().sum::<f64>() / p_hats.len() as f64;
        match one_sample_t(&p_hats, 0.5) {
            Ok(test) => (Some(mean), Some(test), None),
            Err(e) => (Some(mean), None, Some(e.to_string())),
        }
    };

    // Annotators with a rating for both systems, in id order.
    let mut x_ratings = Vec::new();
    let mut y_ratings = Vec::new();
    for ((annotator, system), rating) in ratings {
        if system == x {
            if let Some(other) = ratings.get(&(annotator.clone(), y.to_string())) {
                x_ratings.push(*rating);
                y_ratings.push(*other);
            }
        }
    }
    let (likert_delta, likert_test, likert_error) = if x_ratings.is_empty() {
        (
            None,
            None,
            Some("no paired ratings for this pair".to_string()),
        )
    } else {
        let delta = x_ratings
            .iter()
            .zip(&y_ratings)
            .map(|(a, b)| a - b)
            .sum::<f64>()
            / x_ratings.len() as f64;
        match paired_t(&x_ratings, &y_ratings) {
            Ok(test) => (Some(delta), Some(test), None),
            Err(e) => (Some(delta), None, Some(e.to_string())),
        }
    };

    ComparisonRow {
        system_x: x.to_string(),
        system_y: y.to_string(),
        spa_mean,
        spa_n: estimates.len(),
        spa_test,
        spa_adjusted_p: None,
        spa_stars: String::new(),
        spa_error,
        likert_delta,
        likert_n: x_ratings.len(),
        likert_test,
        likert_adjusted_p: None,
        likert_stars: String::new(),
        likert_error,
    }
}

/// Runs the Holm correction over the testable rows and writes adjusted
/// p-values and stars back. Untestable rows keep empty stars.
fn apply_holm(rows: &mut [ComparisonRow], options: &ReportOptions) -> Result<()> {
    let spa_ps: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.spa_test.as_ref().map(|t| (i, t.p_value)))
        .collect();
    let likert_ps: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.likert_test.as_ref().map(|t| (i, t.p_value)))
        .collect();

    match options.holm_family {
        HolmFamily::PerColumn => {
            if !spa_ps.is_empty() {
                let family = holm_bonferroni(
                    &spa_ps.iter().map(|(_, p)| *p).collect::<Vec<_>>(),
                    options.alpha,
                )?;
                for ((row_idx, _), adjusted) in spa_ps.iter().zip(&family.adjusted) {
                    rows[*row_idx].spa_adjusted_p = Some(*adjusted);
                    rows[*row_idx].spa_stars = stars_for_adjusted(*adjusted).to_string();
                }
            }
            if !likert_ps.is_empty() {
                let family = holm_bonferroni(
                    &likert_ps.iter().map(|(_, p)| *p).collect::<Vec<_>>(),
                    options.alpha,
                )?;
                for ((row_idx, _), adjusted) in likert_ps.iter().zip(&family.adjusted) {
                    rows[*row_idx].likert_adjusted_p = Some(*adjusted);
                    rows[*row_idx].likert_stars = stars_for_adjusted(*adjusted).to_string();
                }
            }
        }
        HolmFamily::Pooled => {
            let mut pooled: Vec<f64> = spa_ps.iter().map(|(_, p)| *p).collect();
            pooled.extend(likert_ps.iter().map(|(_, p)| *p));
            if pooled.is_empty() {
                return Ok(());
            }
            let family = holm_bonferroni(&pooled, options.alpha)?;
            let (spa_adjusted, likert_adjusted) = family.adjusted.split_at(spa_ps.len());
            for ((row_idx, _), adjusted) in spa_ps.iter().zip(spa_adjusted) {
                rows[*row_idx].spa_adjusted_p = Some(*adjusted);
                rows[*row_idx].spa_stars = stars_for_adjusted(*adjusted).to_string();
            }
            for ((row_idx, _), adjusted) in likert_ps.iter().zip(likert_adjusted) {
                rows[*row_idx].likert_adjusted_p = Some(*adjusted);
                rows[*row_idx].likert_stars = stars_for_adjusted(*adjusted).to_string();
            }
        }
    }
    Ok(())
}

impl ComparisonReport {
    /// Renders the aligned text table: system pair, stated preference
    /// probability with stars, Likert delta with stars.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<16} {:<16} {:>6} {:>12} {:>6} {:>14}\n",
            "system_x", "system_y", "n", "P[X>Y]", "n", "likert_delta"
        ));
        for row in &self.rows {
            let spa_cell = match row.spa_mean {
                Some(mean) => format!("{:.3}{}", mean, row.spa_stars),
                None => "n/a".to_string(),
            };
            let likert_cell = match row.likert_delta {
                Some(delta) => format!("{:+.3}{}", delta, row.likert_stars),
                None => "n/a".to_string(),
            };
            out.push_str(&format!(
                "{:<16} {:<16} {:>6} {:>12} {:>6} {:>14}\n",
                row.system_x, row.system_y, row.spa_n, spa_cell, row.likert_n, likert_cell
            ));
        }
        for row in &self.rows {
            for (column, error) in [
                ("P[X>Y]", &row.spa_error),
                ("likert_delta", &row.likert_error),
            ] {
                if let Some(error) = error {
                    out.push_str(&format!(
                        "note: ({}, {}) {column}: {error}\n",
                        row.system_x, row.system_y
                    ));
                }
            }
        }
        if self.meta.spa_records > 0 || self.meta.likert_records > 0 {
            out.push_str(&format!(
                "records: {} stated-probability, {} likert\n",
                self.meta.spa_records, self.meta.likert_records
            ));
        }
        for note in &self.meta.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}
