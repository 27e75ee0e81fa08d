//! Annotation-data analysis: ingestion, annotator filters, and the
//! comparison report.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use preflab::experiments::io::{load_annotator_meta, load_likert_records, load_spa_records};
use preflab::experiments::report::{HolmFamily, ReportOptions};
use preflab::experiments::{
    comparison_report, concurrence_filter, exclude_annotators, ComparisonReport, ExperimentDesign,
};
use preflab::protocols::SpaEstimate;

use crate::config::parse_float_list;
use crate::{CliError, Context, OutputFormat, GLOBAL_KEYS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum FilterArg {
    #[default]
    None,
    Exclusion,
    Concurrence,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum FamilyArg {
    #[default]
    Column,
    Pooled,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Stated-probability records CSV.
    #[arg(long)]
    spa: Option<PathBuf>,

    /// Likert rating records CSV.
    #[arg(long)]
    likert: Option<PathBuf>,

    /// Annotator metadata CSV (required for the exclusion filter).
    #[arg(long)]
    meta: Option<PathBuf>,

    /// Annotator filters to apply before testing.
    #[arg(long, value_enum)]
    filter: Option<FilterArg>,

    /// Holm family grouping across the two report columns.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,

    /// Average multiple rated items per (annotator, system).
    #[arg(long)]
    multi_item: bool,

    /// Likert points assumed when no rating records are supplied.
    #[arg(long)]
    likert_k: Option<u32>,

    /// Significance levels; the smallest is the family-wise rejection level.
    #[arg(long)]
    alphas: Option<String>,
}

const ANALYZE_KEYS: [&str; 8] = [
    "spa",
    "likert",
    "meta",
    "filter",
    "family",
    "multi_item",
    "likert_k",
    "alphas",
];

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    design: &'a ExperimentDesign,
    report: &'a ComparisonReport,
    filter_log: &'a [String],
}

pub fn run(context: &Context, args: &AnalyzeArgs) -> Result<(), CliError> {
    let mut known = GLOBAL_KEYS.to_vec();
    known.extend(ANALYZE_KEYS);
    context.file.ensure_known_keys(&known)?;
    let file = &context.file;

    let spa_path = args
        .spa
        .clone()
        .or_else(|| file.get("spa").map(PathBuf::from))
        .ok_or_else(|| CliError::usage("analyze requires --spa <path>"))?;
    let likert_path = args
        .likert
        .clone()
        .or_else(|| file.get("likert").map(PathBuf::from));
    let meta_path = args
        .meta
        .clone()
        .or_else(|| file.get("meta").map(PathBuf::from));
    let filter = match (args.filter, file.get("filter")) {
        (Some(f), _) => f,
        (None, Some("none")) | (None, None) => FilterArg::None,
        (None, Some("exclusion")) => FilterArg::Exclusion,
        (None, Some("concurrence")) => FilterArg::Concurrence,
        (None, Some("both")) => FilterArg::Both,
        (None, Some(other)) => {
            return Err(CliError::usage(format!(
                "config key `filter`: `{other}` is not none|exclusion|concurrence|both"
            )))
        }
    };
    let family = match (args.family, file.get("family")) {
        (Some(FamilyArg::Column), _) | (None, Some("column")) | (None, None) => {
            HolmFamily::PerColumn
        }
        (Some(FamilyArg::Pooled), _) | (None, Some("pooled")) => HolmFamily::Pooled,
        (None, Some(other)) => {
            return Err(CliError::usage(format!(
                "config key `family`: `{other}` is not column|pooled"
            )))
        }
    };
    let multi_item = args.multi_item || file.get("multi_item") == Some("true");
    let fallback_k = crate::config::resolve(args.likert_k, file.parse_value("likert_k")?, 5);
    let alphas = match args
        .alphas
        .clone()
        .or_else(|| file.get("alphas").map(str::to_string))
    {
        Some(raw) => parse_float_list(&raw, "alphas")?,
        None => vec![0.10, 0.05, 0.01],
    };
    if alphas.is_empty() {
        return Err(CliError::usage("alphas must not be empty"));
    }
    let family_alpha = alphas.iter().copied().fold(f64::INFINITY, f64::min);

    let needs_exclusion = matches!(filter, FilterArg::Exclusion | FilterArg::Both);
    let needs_concurrence = matches!(filter, FilterArg::Concurrence | FilterArg::Both);
    if needs_exclusion && meta_path.is_none() {
        return Err(CliError::usage(
            "the exclusion filter requires --meta <path>",
        ));
    }
    if needs_concurrence && likert_path.is_none() {
        return Err(CliError::usage(
            "the concurrence filter requires --likert <path>",
        ));
    }

    let loaded_spa = load_spa_records(&spa_path)?;
    // Per-decision lines go to stderr (and the structured output); the
    // report itself only carries the before/after summaries.
    let mut filter_log: Vec<String> = Vec::new();
    let mut summary: Vec<String> = loaded_spa.warnings.clone();
    let mut spa = loaded_spa.rows;
    let mut likert = match &likert_path {
        Some(path) => {
            let loaded = load_likert_records(path)?;
            summary.extend(loaded.warnings);
            loaded.rows
        }
        None => Vec::new(),
    };

    if needs_exclusion {
        let meta = load_annotator_meta(meta_path.as_ref().expect("checked above"))?;
        let spa_before = spa.len();
        let (kept_spa, exclusions) = exclude_annotators(spa, &meta)?;
        spa = kept_spa;
        let likert_before = likert.len();
        let (kept_likert, _) = exclude_annotators(likert, &meta)?;
        likert = kept_likert;
        for exclusion in &exclusions {
            let rules: Vec<String> = exclusion.rules.iter().map(|r| r.to_string()).collect();
            filter_log.push(format!(
                "excluded annotator {}: {}",
                exclusion.annotator,
                rules.join(", ")
            ));
        }
        summary.push(format!(
            "exclusion filter: kept {} of {spa_before} stated-probability records, {} of {likert_before} likert records",
            spa.len(),
            likert.len()
        ));
    }

    if needs_concurrence {
        let before = spa.len();
        let (kept, dropped) = concurrence_filter(spa, &likert)?;
        spa = kept;
        for estimate in &dropped {
            filter_log.push(format!(
                "concurrence filter dropped annotator {} on pair ({}, {})",
                estimate.annotator, estimate.system_x, estimate.system_y
            ));
        }
        summary.push(format!(
            "concurrence filter: kept {} of {before} stated-probability records",
            spa.len()
        ));
    }

    let design = derive_design(&spa, &likert, fallback_k, &alphas)?;
    let options = ReportOptions {
        holm_family: family,
        multi_item_mean: multi_item,
        alpha: family_alpha,
    };
    let mut report = comparison_report(&spa, &likert, &design, &options)?;
    report.meta.notes = summary;

    match context.format {
        OutputFormat::Text => {
            for line in &filter_log {
                eprintln!("{line}");
            }
            print!("{}", report.render_text());
        }
        OutputFormat::Structured => {
            let output = AnalyzeOutput {
                design: &design,
                report: &report,
                filter_log: &filter_log,
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&output).map_err(|e| CliError::data(e.to_string()))?
            );
        }
    }
    Ok(())
}

/// Derives the experiment design from the records: comparisons in first
/// appearance order, annotator count, exposure, and scale.
fn derive_design(
    spa: &[SpaEstimate],
    likert: &[preflab::experiments::LikertRecord],
    fallback_k: u32,
    alphas: &[f64],
) -> Result<ExperimentDesign, CliError> {
    if spa.is_empty() {
        return Err(CliError::data(
            "no stated-probability records left to analyze",
        ));
    }
    let mut comparisons: Vec<(String, String)> = Vec::new();
    for record in spa {
        let pair = (record.system_x.clone(), record.system_y.clone());
        if !comparisons.contains(&pair) {
            comparisons.push(pair);
        }
    }
    let mut annotators: Vec<&str> = spa.iter().map(|r| r.annotator.as_str()).collect();
    annotators.sort_unstable();
    annotators.dedup();
    let n_a = annotators.len() as u32;
    if n_a < 2 {
        return Err(CliError::data(
            "analysis needs at least 2 distinct annotators",
        ));
    }
    let m = spa.iter().map(|r| r.m_seen).max().unwrap_or(1).max(1);
    let k = likert.first().map_or(fallback_k, |r| r.k);
    ExperimentDesign::new(m, n_a, k, comparisons)
        .and_then(|d| d.with_alphas(alphas.to_vec()))
        .map_err(|e| CliError::data(e.to_string()))
}
