//! Outcomes, lotteries, and compound lotteries.
//!
//! A lottery is a probability distribution over a finite outcome universe;
//! a generation system under a fixed prompt prior is modeled as one. A
//! compound lottery (a distribution over lotteries, e.g. a prompt
//! distribution over per-prompt output distributions) reduces to a simple
//! lottery by marginalization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for probability-mass validation. Exact renormalization is
/// available as an explicit operation ([`Lottery::renormalized`]), never
/// applied silently.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Opaque identifier for an outcome, unique within a universe.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeId(String);

impl OutcomeId {
    pub fn new(id: impl Into<String>) -> Self {
        OutcomeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OutcomeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for OutcomeId {
    fn from(s: &str) -> Self {
        OutcomeId(s.to_owned())
    }
}

impl From<String> for OutcomeId {
    fn from(s: String) -> Self {
        OutcomeId(s)
    }
}

/// An outcome with an optional display label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: OutcomeId,
    pub label: Option<String>,
}

impl Outcome {
    pub fn new(id: impl Into<OutcomeId>) -> Self {
        Outcome {
            id: id.into(),
            label: None,
        }
    }

    pub fn labeled(id: impl Into<OutcomeId>, label: impl Into<String>) -> Self {
        Outcome {
            id: id.into(),
            label: Some(label.into()),
        }
    }
}

/// The finite, explicit set of outcomes a scenario ranges over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeUniverse {
    outcomes: Vec<Outcome>,
}

impl OutcomeUniverse {
    /// Builds a universe, rejecting duplicate outcome ids.
    pub fn new(outcomes: Vec<Outcome>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for outcome in &outcomes {
            if !seen.insert(outcome.id.clone()) {
                return Err(Error::Validation(format!(
                    "duplicate outcome id `{}` in universe",
                    outcome.id
                )));
            }
        }
        Ok(OutcomeUniverse { outcomes })
    }

    /// Convenience constructor from bare ids.
    pub fn from_ids<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<OutcomeId>,
    {
        Self::new(ids.into_iter().map(|id| Outcome::new(id)).collect())
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn ids(&self) -> impl Iterator<Item = &OutcomeId> {
        self.outcomes.iter().map(|o| &o.id)
    }

    pub fn contains(&self, id: &OutcomeId) -> bool {
        self.outcomes.iter().any(|o| &o.id == id)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// A probability distribution over outcomes.
///
/// Invariants, enforced at construction: probabilities are nonnegative and
/// sum to one within [`PROBABILITY_TOLERANCE`], and no outcome id repeats.
/// The support is kept sorted by outcome id so equality, iteration, and
/// sampling are order-independent of how the lottery was assembled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lottery {
    support: Vec<(OutcomeId, f64)>,
}

impl Lottery {
    pub fn new(mut support: Vec<(OutcomeId, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution(
                "lottery support is empty".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        let mut total = 0.0;
        for (id, p) in &support {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} for outcome `{id}` is negative or non-finite"
                )));
            }
            if !seen.insert(id.clone()) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate outcome `{id}` in support"
                )));
            }
            total += *p;
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1 within {PROBABILITY_TOLERANCE}"
            )));
        }
        support.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Lottery { support })
    }

    /// The degenerate lottery placing all mass on one outcome.
    pub fn point_mass(id: impl Into<OutcomeId>) -> Self {
        Lottery {
            support: vec![(id.into(), 1.0)],
        }
    }

    /// Uniform lottery over the given outcomes.
    pub fn uniform<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<OutcomeId>,
    {
        let ids: Vec<OutcomeId> = ids.into_iter().map(Into::into).collect();
        if ids.is_empty() {
            return Err(Error::InvalidDistribution(
                "uniform lottery over empty set".into(),
            ));
        }
        let p = 1.0 / ids.len() as f64;
        Self::new(ids.into_iter().map(|id| (id, p)).collect())
    }

    /// Support entries, sorted by outcome id.
    pub fn support(&self) -> &[(OutcomeId, f64)] {
        &self.support
    }

    pub fn probability(&self, id: &OutcomeId) -> f64 {
        self.support
            .iter()
            .find(|(s, _)| s == id)
            .map_or(0.0, |(_, p)| *p)
    }

    /// Total mass on a set of outcomes.
    pub fn mass_on(&self, ids: &BTreeSet<OutcomeId>) -> f64 {
        self.support
            .iter()
            .filter(|(id, _)| ids.contains(id))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn outcome_ids(&self) -> impl Iterator<Item = &OutcomeId> {
        self.support.iter().map(|(id, _)| id)
    }

    /// Explicitly rescales the support so it sums to exactly one.
    pub fn renormalized(&self) -> Result<Self> {
        let total: f64 = self.support.iter().map(|(_, p)| p).sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution(
                "cannot renormalize zero total mass".into(),
            ));
        }
        Ok(Lottery {
            support: self
                .support
                .iter()
                .map(|(id, p)| (id.clone(), p / total))
                .collect(),
        })
    }

    /// Draws one outcome by cumulative inversion.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> &OutcomeId {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (id, p) in &self.support {
            cum += p;
            if u < cum {
                return id;
            }
        }
        // Guards the u ~ 1.0 edge and accumulated rounding: the last
        // positive-mass entry takes the remainder.
        self.support
            .iter()
            .rev()
            .find(|(_, p)| *p > 0.0)
            .map(|(id, _)| id)
            .expect("lottery has positive mass")
    }

    /// Draws `n` outcomes. Deterministic given `(self, n, seed)`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<OutcomeId> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw(&mut rng).clone()).collect()
    }
}

/// Mixes two lotteries: `p·x + (1-p)·z`.
///
/// The support is the union of supports; entries that end up with exactly
/// zero probability are dropped, so `mix(x, z, 1.0) == x` holds exactly.
pub fn mix(x: &Lottery, z: &Lottery, p: f64) -> Result<Lottery> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::OutOfRange {
            what: "mixing probability",
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let mut acc: BTreeMap<OutcomeId, f64> = BTreeMap::new();
    for (id, q) in x.support() {
        *acc.entry(id.clone()).or_insert(0.0) += p * q;
    }
    for (id, q) in z.support() {
        *acc.entry(id.clone()).or_insert(0.0) += (1.0 - p) * q;
    }
    Lottery::new(acc.into_iter().filter(|(_, q)| *q != 0.0).collect())
}

/// A lottery over lotteries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundLottery {
    outer: Vec<(Lottery, f64)>,
}

impl CompoundLottery {
    pub fn new(outer: Vec<(Lottery, f64)>) -> Result<Self> {
        if outer.is_empty() {
            return Err(Error::InvalidDistribution(
                "compound lottery has no branches".into(),
            ));
        }
        let mut total = 0.0;
        for (_, p) in &outer {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "outer probability {p} is negative or non-finite"
                )));
            }
            total += *p;
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "outer probabilities sum to {total}, expected 1 within {PROBABILITY_TOLERANCE}"
            )));
        }
        Ok(CompoundLottery { outer })
    }

    pub fn branches(&self) -> &[(Lottery, f64)] {
        &self.outer
    }
}

/// Reduces a compound lottery to a simple one by marginalization: each
/// outcome gets probability `Σ_j outer_j · inner_j(outcome)`.
pub fn reduce_compound(compound: &CompoundLottery) -> Result<Lottery> {
    let mut acc: BTreeMap<OutcomeId, f64> = BTreeMap::new();
    for (inner, outer_p) in compound.branches() {
        for (id, p) in inner.support() {
            *acc.entry(id.clone()).or_insert(0.0) += outer_p * p;
        }
    }
    Lottery::new(acc.into_iter().filter(|(_, q)| *q != 0.0).collect())
}
