//! Rating scales and residual analysis.
//!
//! Likert tiering maps a normalized utility in `[0, k]` to an integer tier
//! via the ceiling function, so every rated value carries a residual
//! `ceil(u) - u` in `[0, 1)`. The expected residual gap between two systems
//! determines the direction of the rating bias, and when the gap exceeds the
//! expected-utility gap the mean ratings order the systems opposite to their
//! true preference. `analyze_pair` computes all of this by exact enumeration
//! and `construct_reversal` searches for fresh reversal instances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::io::{parse_lottery, parse_utility};
use crate::lottery::Lottery;
use crate::utility::{expected_utility, UtilityFunction};
use crate::{Error, Result};

/// How utilities are snapped to Likert tiers.
///
/// `Ceiling` is the default: `[0,1] -> 1; (1,2] -> 2; ...`. `HalfUp`
/// (round-half-up) exists for comparison experiments only; it makes the
/// bottom bucket half as wide as the rest and is never the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingMode {
    #[default]
    Ceiling,
    HalfUp,
}

/// A rating instrument: discrete 1-to-k Likert or continuous 0-to-k_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingScale {
    Likert { k: u32 },
    Continuous { k_max: f64 },
}

impl RatingScale {
    pub fn likert(k: u32) -> Result<Self> {
        if !(2..=100).contains(&k) {
            return Err(Error::OutOfRange {
                what: "likert points",
                value: k as f64,
                lo: 2.0,
                hi: 100.0,
            });
        }
        Ok(RatingScale::Likert { k })
    }

    pub fn continuous(k_max: f64) -> Result<Self> {
        if !k_max.is_finite() || k_max <= 0.0 {
            return Err(Error::OutOfRange {
                what: "continuous scale maximum",
                value: k_max,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(RatingScale::Continuous { k_max })
    }

    /// Upper end of the scale's value range.
    pub fn max_value(&self) -> f64 {
        match self {
            RatingScale::Likert { k } => *k as f64,
            RatingScale::Continuous { k_max } => *k_max,
        }
    }
}

/// Likert tier of a normalized utility `u` in `[0, k]`: `max(1, ceil(u))`.
pub fn tier(u: f64, k: u32) -> Result<u32> {
    tier_with_mode(u, k, RoundingMode::Ceiling)
}

/// Tiering with an explicit rounding mode.
pub fn tier_with_mode(u: f64, k: u32, mode: RoundingMode) -> Result<u32> {
    if !u.is_finite() || u < 0.0 || u > k as f64 {
        return Err(Error::OutOfRange {
            what: "utility for tiering",
            value: u,
            lo: 0.0,
            hi: k as f64,
        });
    }
    let raw = match mode {
        RoundingMode::Ceiling => u.ceil(),
        RoundingMode::HalfUp => (u + 0.5).floor(),
    };
    Ok((raw as u32).clamp(1, k))
}

/// Tiering residual `ceil(u) - u`, in `[0, 1)`. Requires `u > 0`; zero maps
/// to tier 1 by bucket closure but has no well-defined residual.
pub fn residual(u: f64) -> Result<f64> {
    if !u.is_finite() || u <= 0.0 {
        return Err(Error::OutOfRange {
            what: "utility for residual",
            value: u,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(u.ceil() - u)
}

/// Rates a normalized utility on a scale: Likert tiers it, continuous scales
/// pass it through unchanged.
pub fn rate(u_value: f64, scale: &RatingScale) -> Result<f64> {
    rate_with_mode(u_value, scale, RoundingMode::Ceiling)
}

pub fn rate_with_mode(u_value: f64, scale: &RatingScale, mode: RoundingMode) -> Result<f64> {
    match scale {
        RatingScale::Likert { k } => Ok(tier_with_mode(u_value, *k, mode)? as f64),
        RatingScale::Continuous { k_max } => {
            if !u_value.is_finite() || u_value < 0.0 || u_value > *k_max {
                return Err(Error::OutOfRange {
                    what: "utility for rating",
                    value: u_value,
                    lo: 0.0,
                    hi: *k_max,
                });
            }
            Ok(u_value)
        }
    }
}

/// Direction of the Likert rating bias between two systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasDirection {
    /// Ratings overestimate the first system relative to the second.
    OverestimatesX,
    UnderestimatesX,
    Unbiased,
}

/// Exact enumeration results for one pair of systems under one utility
/// function and a k-point Likert scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub eu_x: f64,
    pub eu_y: f64,
    pub expected_residual_x: f64,
    pub expected_residual_y: f64,
    pub mean_tier_x: f64,
    pub mean_tier_y: f64,
    pub bias: BiasDirection,
    pub reversal: bool,
}

/// Computes expected utilities, expected residuals, and mean tiers for both
/// lotteries by exact enumeration; all utilities must lie in `(0, k]`.
///
/// The bias direction follows the expected residual gap, and `reversal` is
/// true exactly when the mean-tier order contradicts the expected-utility
/// order.
pub fn analyze_pair(
    x: &Lottery,
    y: &Lottery,
    utility: &UtilityFunction,
    k: u32,
) -> Result<ResidualSummary> {
    analyze_pair_with_mode(x, y, utility, k, RoundingMode::Ceiling)
}

pub fn analyze_pair_with_mode(
    x: &Lottery,
    y: &Lottery,
    utility: &UtilityFunction,
    k: u32,
    mode: RoundingMode,
) -> Result<ResidualSummary> {
    for lottery in [x, y] {
        for (id, _) in lottery.support() {
            let u = utility.value(id)?;
            if u <= 0.0 || u > k as f64 {
                return Err(Error::OutOfRange {
                    what: "utility for pair analysis",
                    value: u,
                    lo: 0.0,
                    hi: k as f64,
                });
            }
        }
    }
    let eu_x = expected_utility(x, utility)?;
    let eu_y = expected_utility(y, utility)?;
    let expected_residual = |l: &Lottery| -> Result<f64> {
        let mut total = 0.0;
        for (id, p) in l.support() {
            let u = utility.value(id)?;
            total += p * (tier_with_mode(u, k, mode)? as f64 - u);
        }
        Ok(total)
    };
    let expected_residual_x = expected_residual(x)?;
    let expected_residual_y = expected_residual(y)?;
    let mean_tier = |l: &Lottery| -> Result<f64> {
        let mut total = 0.0;
        for (id, p) in l.support() {
            total += p * tier_with_mode(utility.value(id)?, k, mode)? as f64;
        }
        Ok(total)
    };
    let mean_tier_x = mean_tier(x)?;
    let mean_tier_y = mean_tier(y)?;

    let bias = if expected_residual_x > expected_residual_y {
        BiasDirection::OverestimatesX
    } else if expected_residual_x < expected_residual_y {
        BiasDirection::UnderestimatesX
    } else {
        BiasDirection::Unbiased
    };
    let eu_gap = eu_x - eu_y;
    let tier_gap = mean_tier_x - mean_tier_y;
    let reversal = eu_gap != 0.0 && tier_gap != 0.0 && (eu_gap > 0.0) != (tier_gap > 0.0);

    Ok(ResidualSummary {
        eu_x,
        eu_y,
        expected_residual_x,
        expected_residual_y,
        mean_tier_x,
        mean_tier_y,
        bias,
        reversal,
    })
}

/// The bundled reversal instance: a point mass against an even two-outcome
/// mixture whose mean Likert tiers order the systems opposite to their
/// expected utilities. Shipped as data files so documentation examples are
/// reproducible bit-for-bit.
pub fn bundled_reversal_instance() -> (Lottery, Lottery, UtilityFunction) {
    let x = parse_lottery(
        include_str!("../data/reversal/system_x.csv"),
        "data/reversal/system_x.csv",
    )
    .expect("bundled lottery x");
    let y = parse_lottery(
        include_str!("../data/reversal/system_y.csv"),
        "data/reversal/system_y.csv",
    )
    .expect("bundled lottery y");
    let u = parse_utility(
        include_str!("../data/reversal/utility.csv"),
        "data/reversal/utility.csv",
    )
    .expect("bundled utility");
    (x, y, u)
}

/// Deterministic reversal instance for `k = 2`: a point mass inside the top
/// tier against a mixture straddling both tiers.
fn two_tier_instance() -> (Lottery, Lottery, UtilityFunction) {
    let x = Lottery::point_mass("a");
    let y = Lottery::new(vec![("b".into(), 0.5), ("c".into(), 0.5)]).expect("static lottery");
    let u =
        UtilityFunction::from_pairs([("a", 1.05), ("b", 1.0), ("c", 2.0)]).expect("static utility");
    (x, y, u)
}

/// Randomized search for a preference-reversal instance on a k-point scale.
///
/// Utilities are drawn on a 0.1 grid with supports of at most 4 outcomes; up
/// to 10,000 draws are verified by [`analyze_pair`] before falling back to
/// the bundled deterministic instance. The returned triple always satisfies
/// `analyze_pair(..).reversal`.
pub fn construct_reversal(k: u32, seed: u64) -> Result<(Lottery, Lottery, UtilityFunction)> {
    if k < 2 {
        return Err(Error::OutOfRange {
            what: "likert points",
            value: k as f64,
            lo: 2.0,
            hi: 100.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let candidate = random_candidate(&mut rng, k)?;
        let summary = analyze_pair(&candidate.0, &candidate.1, &candidate.2, k)?;
        if summary.reversal {
            return Ok(candidate);
        }
    }
    let fallback = if k >= 3 {
        bundled_reversal_instance()
    } else {
        two_tier_instance()
    };
    debug_assert!(analyze_pair(&fallback.0, &fallback.1, &fallback.2, k)?.reversal);
    Ok(fallback)
}

fn random_candidate(rng: &mut ChaCha8Rng, k: u32) -> Result<(Lottery, Lottery, UtilityFunction)> {
    let support_x = rng.random_range(1..=4usize);
    let support_y = rng.random_range(1..=4usize);
    let mut pairs = Vec::new();
    let mut make_lottery = |count: usize, prefix: &str, rng: &mut ChaCha8Rng| {
        let ids: Vec<String> = (0..count).map(|i| format!("{prefix}{i}")).collect();
        // Probabilities on a coarse simplex grid, utilities on a 0.1 grid in
        // (0, k] so the instance verifies by exact enumeration.
        let mut weights: Vec<f64> = (0..count).map(|_| rng.random_range(1..=8) as f64).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        for id in &ids {
            let grid_max = 10 * k;
            let u = rng.random_range(1..=grid_max) as f64 / 10.0;
            pairs.push((id.clone(), u));
        }
        Lottery::new(ids.into_iter().map(Into::into).zip(weights).collect())
    };
    let x = make_lottery(support_x, "x", rng)?;
    let y = make_lottery(support_y, "y", rng)?;
    let utility = UtilityFunction::from_pairs(pairs)?;
    Ok((x, y, utility))
}
