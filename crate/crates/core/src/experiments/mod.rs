//! Annotation-data experiments: annotator filters, synthetic populations
//! and datasets, comparison reports, and Monte Carlo power analysis.

pub mod io;
pub mod power;
pub mod report;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentId, AgentPopulation};
use crate::lottery::OutcomeUniverse;
use crate::protocols::spa::SpaEstimate;
use crate::seed::derive_seed;
use crate::utility::UtilityFunction;
use crate::{Error, Result};

pub use power::{power_analysis, Effect, PowerEstimate};
pub use report::{comparison_report, ComparisonReport, ComparisonRow, HolmFamily, ReportOptions};

/// Per-annotator metadata used by the exclusion rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorMeta {
    pub annotator: AgentId,
    pub native_speaker: bool,
    /// Number of separate submissions by this annotator; more than one
    /// breaks the fixed-exposure design.
    pub submission_count: u32,
    /// Extra columns from the metadata file, keyed by header name.
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
}

/// One Likert rating of one item from one annotator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LikertRecord {
    pub annotator: AgentId,
    pub system: String,
    pub item: String,
    pub rating: u32,
    pub k: u32,
}

impl LikertRecord {
    pub fn new(
        annotator: impl Into<AgentId>,
        system: impl Into<String>,
        item: impl Into<String>,
        rating: u32,
        k: u32,
    ) -> Result<Self> {
        if rating < 1 || rating > k {
            return Err(Error::OutOfRange {
                what: "likert rating",
                value: rating as f64,
                lo: 1.0,
                hi: k as f64,
            });
        }
        Ok(LikertRecord {
            annotator: annotator.into(),
            system: system.into(),
            item: item.into(),
            rating,
            k,
        })
    }
}

/// The shape of one comparison experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentDesign {
    /// Outputs observed from each system per annotator.
    pub m: u32,
    /// Number of unique annotators.
    pub n_a: u32,
    /// Likert points.
    pub k: u32,
    /// Significance levels of interest.
    pub alphas: Vec<f64>,
    /// Directed system pairs to compare.
    pub comparisons: Vec<(String, String)>,
}

impl ExperimentDesign {
    pub fn new(m: u32, n_a: u32, k: u32, comparisons: Vec<(String, String)>) -> Result<Self> {
        let design = ExperimentDesign {
            m,
            n_a,
            k,
            alphas: vec![0.10, 0.05, 0.01],
            comparisons,
        };
        design.validate()?;
        Ok(design)
    }

    pub fn with_alphas(mut self, alphas: Vec<f64>) -> Result<Self> {
        self.alphas = alphas;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::Precondition("design requires m >= 1".into()));
        }
        if self.n_a < 2 {
            return Err(Error::Precondition("design requires n_A >= 2".into()));
        }
        if self.comparisons.is_empty() {
            return Err(Error::Validation("design lists no comparisons".into()));
        }
        for alpha in &self.alphas {
            if !(*alpha > 0.0 && *alpha < 1.0) {
                return Err(Error::OutOfRange {
                    what: "alpha",
                    value: *alpha,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(())
    }
}

/// Records that carry an annotator id, so the exclusion rules can apply to
/// any record type.
pub trait AnnotatorKeyed {
    fn annotator_id(&self) -> &AgentId;
}

impl AnnotatorKeyed for SpaEstimate {
    fn annotator_id(&self) -> &AgentId {
        &self.annotator
    }
}

impl AnnotatorKeyed for LikertRecord {
    fn annotator_id(&self) -> &AgentId {
        &self.annotator
    }
}

/// Why an annotator was excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionRule {
    NotNativeSpeaker,
    MultipleSubmissions,
}

impl fmt::Display for ExclusionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExclusionRule::NotNativeSpeaker => f.write_str("not a native speaker"),
            ExclusionRule::MultipleSubmissions => f.write_str("multiple submissions"),
        }
    }
}

/// One exclusion decision: an annotator and every rule they violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub annotator: AgentId,
    pub rules: Vec<ExclusionRule>,
}

/// Drops records from annotators who are not native speakers or who
/// submitted more than once. Every record's annotator must have metadata.
/// An annotator violating both rules is excluded once, with both rules
/// logged.
pub fn exclude_annotators<T: AnnotatorKeyed>(
    records: Vec<T>,
    meta: &[AnnotatorMeta],
) -> Result<(Vec<T>, Vec<Exclusion>)> {
    let by_id: BTreeMap<&AgentId, &AnnotatorMeta> =
        meta.iter().map(|m| (&m.annotator, m)).collect();
    let mut excluded: BTreeMap<AgentId, Vec<ExclusionRule>> = BTreeMap::new();
    let mut kept = Vec::with_capacity(records.len());
    for record in records {
        let id = record.annotator_id();
        let meta = by_id
            .get(id)
            .ok_or_else(|| Error::Validation(format!("no metadata for annotator `{id}`")))?;
        let mut rules = Vec::new();
        if !meta.native_speaker {
            rules.push(ExclusionRule::NotNativeSpeaker);
        }
        if meta.submission_count > 1 {
            rules.push(ExclusionRule::MultipleSubmissions);
        }
        if rules.is_empty() {
            kept.push(record);
        } else {
            excluded.entry(id.clone()).or_insert(rules);
        }
    }
    let log = excluded
        .into_iter()
        .map(|(annotator, rules)| Exclusion { annotator, rules })
        .collect();
    Ok((kept, log))
}

/// Keeps an annotator's estimate for a directed pair only when the sign of
/// their stated probability against chance agrees with the sign of their own
/// Likert rating delta for the same two systems. Either side sitting exactly
/// at zero counts as agreeing with anything.
///
/// Returns kept and dropped estimates; the concatenation is a permutation of
/// the input, so the filter is idempotent.
pub fn concurrence_filter(
    spa: Vec<SpaEstimate>,
    likert: &[LikertRecord],
) -> Result<(Vec<SpaEstimate>, Vec<SpaEstimate>)> {
    let mut rating_sums: BTreeMap<(&AgentId, &str), (f64, u32)> = BTreeMap::new();
    for record in likert {
        let entry = rating_sums
            .entry((&record.annotator, record.system.as_str()))
            .or_insert((0.0, 0));
        entry.0 += record.rating as f64;
        entry.1 += 1;
    }
    let mean_rating = |annotator: &AgentId, system: &str| -> Option<f64> {
        rating_sums
            .get(&(annotator, system))
            .map(|(sum, n)| sum / *n as f64)
    };
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for estimate in spa {
        let x = mean_rating(&estimate.annotator, &estimate.system_x);
        let y = mean_rating(&estimate.annotator, &estimate.system_y);
        let (x, y) = match (x, y) {
            (Some(x), Some(y)) => (x, y),
            _ => {
                return Err(Error::Validation(format!(
                    "annotator `{}` has no Likert ratings for both systems of pair ({}, {})",
                    estimate.annotator, estimate.system_x, estimate.system_y
                )))
            }
        };
        let p_sign = sign(estimate.p_hat - 0.5);
        let delta_sign = sign(x - y);
        if p_sign == 0 || delta_sign == 0 || p_sign == delta_sign {
            kept.push(estimate);
        } else {
            dropped.push(estimate);
        }
    }
    Ok((kept, dropped))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Generates a population of expected-utility agents whose utilities are
/// drawn uniformly within declared ranges, reproducing scoring-magnitude
/// heterogeneity across annotators.
///
/// `ranges` holds either one range for all agents or one per agent.
pub fn synth_population(
    universe: &OutcomeUniverse,
    ranges: &[(f64, f64)],
    count: usize,
    seed: u64,
) -> Result<AgentPopulation> {
    if count == 0 {
        return Err(Error::Precondition("population count must be >= 1".into()));
    }
    if universe.is_empty() {
        return Err(Error::Validation("empty outcome universe".into()));
    }
    if ranges.is_empty() || (ranges.len() != 1 && ranges.len() != count) {
        return Err(Error::Validation(format!(
            "expected 1 or {count} utility ranges, got {}",
            ranges.len()
        )));
    }
    for (lo, hi) in ranges {
        if !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(Error::Validation(format!(
                "empty utility range [{lo}, {hi}]"
            )));
        }
    }
    let width = count.saturating_sub(1).to_string().len().max(2);
    let mut agents = Vec::with_capacity(count);
    for i in 0..count {
        let (lo, hi) = if ranges.len() == 1 {
            ranges[0]
        } else {
            ranges[i]
        };
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[i as u64]));
        let values: BTreeMap<_, _> = universe
            .ids()
            .map(|id| (id.clone(), lo + rng.random::<f64>() * (hi - lo)))
            .collect();
        let utility = UtilityFunction::with_bounds(values, lo, hi)?;
        agents.push(Agent::expected_utility_maximizer(
            format!("a{i:0width$}"),
            utility,
        )?);
    }
    AgentPopulation::uniform(agents)
}

/// Generates directed SPA estimates with stated probabilities drawn from a
/// normal distribution truncated to [0, 1] around per-pair true means: the
/// annotator noise model used for calibration studies and power analysis.
pub fn synth_spa_records(
    comparisons: &[(String, String)],
    true_means: &[f64],
    sd: f64,
    n_a: u32,
    m_label: u32,
    seed: u64,
) -> Result<Vec<SpaEstimate>> {
    if comparisons.len() != true_means.len() {
        return Err(Error::Validation(format!(
            "{} comparisons but {} true means",
            comparisons.len(),
            true_means.len()
        )));
    }
    if !sd.is_finite() || sd <= 0.0 {
        return Err(Error::OutOfRange {
            what: "annotator noise sd",
            value: sd,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    for mean in true_means {
        if !(0.0..=1.0).contains(mean) {
            return Err(Error::OutOfRange {
                what: "true mean probability",
                value: *mean,
                lo: 0.0,
                hi: 1.0,
            });
        }
    }
    let width = n_a.saturating_sub(1).to_string().len().max(2);
    let mut records = Vec::with_capacity(comparisons.len() * n_a as usize);
    for (pair_idx, ((x, y), mean)) in comparisons.iter().zip(true_means).enumerate() {
        for j in 0..n_a {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, &[pair_idx as u64, j as u64]));
            let p = power::truncated_normal(&mut rng, *mean, sd, 0.0, 1.0);
            records.push(SpaEstimate {
                annotator: format!("a{j:0width$}").into(),
                system_x: x.clone(),
                system_y: y.clone(),
                p_hat: io::canonical_probability(p),
                m_seen: m_label,
            });
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn meta(id: &str, native: bool, submissions: u32) -> AnnotatorMeta {
        AnnotatorMeta {
            annotator: id.into(),
            native_speaker: native,
            submission_count: submissions,
            tags: BTreeMap::new(),
        }
    }

    fn spa(annotator: &str, x: &str, y: &str, p: f64) -> SpaEstimate {
        SpaEstimate {
            annotator: annotator.into(),
            system_x: x.into(),
            system_y: y.into(),
            p_hat: p,
            m_seen: 5,
        }
    }

    #[test]
    fn exclusion_drops_violators() {
        // 10 annotators, 1 non-native and 1 multi-submitter: 8 kept.
        let mut metas = Vec::new();
        let mut records = Vec::new();
        for i in 0..10 {
            let id = format!("a{i}");
            metas.push(meta(&id, i != 3, if i == 7 { 2 } else { 1 }));
            records.push(spa(&id, "x", "y", 0.6));
        }
        let (kept, log) = exclude_annotators(records, &metas).unwrap();
        assert_eq!(kept.len(), 8);
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn exclusion_is_identity_when_compliant() {
        let metas = vec![meta("a0", true, 1), meta("a1", true, 1)];
        let records = vec![spa("a0", "x", "y", 0.6), spa("a1", "x", "y", 0.4)];
        let (kept, log) = exclude_annotators(records.clone(), &metas).unwrap();
        assert_eq!(kept, records);
        assert!(log.is_empty());
    }

    #[test]
    fn exclusion_logs_both_rules_once() {
        let metas = vec![meta("bad", false, 3)];
        let records = vec![spa("bad", "x", "y", 0.6), spa("bad", "y", "z", 0.7)];
        let (kept, log) = exclude_annotators(records, &metas).unwrap();
        assert!(kept.is_empty());
        assert_eq!(log.len(), 1);
        assert_eq!(
            log[0].rules,
            vec![
                ExclusionRule::NotNativeSpeaker,
                ExclusionRule::MultipleSubmissions
            ]
        );
    }

    #[test]
    fn exclusion_requires_metadata() {
        let err = exclude_annotators(vec![spa("ghost", "x", "y", 0.5)], &[]).unwrap_err();
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn exclusion_is_idempotent() {
        let metas = vec![meta("a0", true, 1), meta("a1", false, 1)];
        let records = vec![spa("a0", "x", "y", 0.6), spa("a1", "x", "y", 0.4)];
        let (kept, _) = exclude_annotators(records, &metas).unwrap();
        let (kept_again, log) = exclude_annotators(kept.clone(), &metas).unwrap();
        assert_eq!(kept, kept_again);
        assert!(log.is_empty());
    }

    fn likert(annotator: &str, system: &str, rating: u32) -> LikertRecord {
        LikertRecord::new(annotator, system, "i0", rating, 5).unwrap()
    }

    #[test]
    fn concurrence_keeps_agreement() {
        let ratings = vec![likert("a0", "x", 4), likert("a0", "y", 2)];
        let (kept, dropped) = concurrence_filter(vec![spa("a0", "x", "y", 0.7)], &ratings).unwrap();
        assert_eq!(kept.len(), 1);
        assert!(dropped.is_empty());
    }

    #[test]
    fn concurrence_drops_contradiction() {
        let ratings = vec![likert("a0", "x", 2), likert("a0", "y", 4)];
        let (kept, dropped) = concurrence_filter(vec![spa("a0", "x", "y", 0.7)], &ratings).unwrap();
        assert!(kept.is_empty());
        assert_eq!(dropped.len(), 1);
    }

    #[test]
    fn concurrence_zero_agrees_with_anything() {
        let ratings = vec![likert("a0", "x", 2), likert("a0", "y", 4)];
        let (kept, _) = concurrence_filter(vec![spa("a0", "x", "y", 0.5)], &ratings).unwrap();
        assert_eq!(kept.len(), 1);
        let tied = vec![likert("a1", "x", 3), likert("a1", "y", 3)];
        let (kept, _) = concurrence_filter(vec![spa("a1", "x", "y", 0.9)], &tied).unwrap();
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn concurrence_requires_coverage() {
        let ratings = vec![likert("a0", "x", 4)];
        let err = concurrence_filter(vec![spa("a0", "x", "y", 0.7)], &ratings).unwrap_err();
        assert!(err.to_string().contains("a0"));
        assert!(err.to_string().contains("y"));
    }

    #[test]
    fn concurrence_is_idempotent() {
        let ratings = vec![
            likert("a0", "x", 4),
            likert("a0", "y", 2),
            likert("a1", "x", 1),
            likert("a1", "y", 5),
        ];
        let estimates = vec![spa("a0", "x", "y", 0.7), spa("a1", "x", "y", 0.8)];
        let (kept, _) = concurrence_filter(estimates, &ratings).unwrap();
        let (kept_again, dropped) = concurrence_filter(kept.clone(), &ratings).unwrap();
        assert_eq!(kept, kept_again);
        assert!(dropped.is_empty());
    }

    #[test]
    fn synth_population_disjoint_ranges() {
        let universe = OutcomeUniverse::from_ids(["s", "t", "u"]).unwrap();
        let pop = synth_population(&universe, &[(0.0, 10.0), (90.0, 100.0)], 2, 7).unwrap();
        let low = pop.agents()[0].utility();
        let high = pop.agents()[1].utility();
        for id in universe.ids() {
            assert!(low.value(id).unwrap() < high.value(id).unwrap());
        }
    }

    #[test]
    fn synth_population_is_deterministic() {
        let universe = OutcomeUniverse::from_ids(["s", "t"]).unwrap();
        let a = synth_population(&universe, &[(0.0, 1.0)], 5, 9).unwrap();
        let b = synth_population(&universe, &[(0.0, 1.0)], 5, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn synth_population_respects_bounds() {
        let universe = OutcomeUniverse::from_ids(["s", "t", "u"]).unwrap();
        let pop = synth_population(&universe, &[(0.0, 1.0)], 50, 3).unwrap();
        for agent in pop.agents() {
            for id in universe.ids() {
                let v = agent.utility().value(id).unwrap();
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn synth_population_rejects_empty_range() {
        let universe = OutcomeUniverse::from_ids(["s"]).unwrap();
        assert!(synth_population(&universe, &[(1.0, 1.0)], 2, 0).is_err());
        assert!(synth_population(&universe, &[(2.0, 1.0)], 2, 0).is_err());
    }

    #[test]
    fn synth_spa_records_shape() {
        let comparisons = vec![("x".to_string(), "y".to_string())];
        let records = synth_spa_records(&comparisons, &[0.6], 0.15, 90, 5, 0).unwrap();
        assert_eq!(records.len(), 90);
        assert!(records.iter().all(|r| (0.0..=1.0).contains(&r.p_hat)));
        assert!(records.iter().all(|r| r.m_seen == 5));
        let ids: BTreeSet<_> = records.iter().map(|r| r.annotator.clone()).collect();
        assert_eq!(ids.len(), 90);
    }

    #[test]
    fn synth_spa_records_concentrate_near_mean() {
        let comparisons = vec![("x".to_string(), "y".to_string())];
        let records = synth_spa_records(&comparisons, &[0.6], 0.15, 5000, 5, 1).unwrap();
        let mean: f64 = records.iter().map(|r| r.p_hat).sum::<f64>() / records.len() as f64;
        assert!((mean - 0.6).abs() < 0.01, "mean {mean}");
    }
}
