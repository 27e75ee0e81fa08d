//! Monte Carlo power analysis for the SPA significance test.
//!
//! Each replication simulates one experiment: `n_A` stated probabilities are
//! drawn from a normal distribution truncated to [0, 1] around the true
//! effect mean, and a two-sided one-sample t-test against chance is run.
//! Power at a level is the fraction of replications rejecting at that level.
//! Replications parallelize over derived seeds, so results are identical
//! regardless of scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::derive_seed;
use crate::stats::one_sample_t;
use crate::{Error, Result};

use super::ExperimentDesign;

/// A true effect for power simulation: the mean stated probability and the
/// annotator noise standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub mean: f64,
    pub sd: f64,
}

/// Estimated power at one grid point and level, with its Monte Carlo
/// standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub m: u32,
    pub n_a: u32,
    pub alpha: f64,
    pub power: f64,
    pub std_error: f64,
    pub replications: u32,
}

/// Runs the Monte Carlo power analysis over a grid of `(m, n_A)` points.
///
/// `m` tags grid rows for exposure-level sweeps; the annotator noise model
/// itself is exposure-agnostic, so power varies through `n_A` and the
/// effect. Requires at least 100 replications.
pub fn power_analysis(
    design: &ExperimentDesign,
    grid: &[(u32, u32)],
    effect: Effect,
    replications: u32,
    seed: u64,
) -> Result<Vec<PowerEstimate>> {
    design.validate()?;
    if replications < 100 {
        return Err(Error::Precondition(format!(
            "power analysis needs at least 100 replications, got {replications}"
        )));
    }
    if !(0.0..=1.0).contains(&effect.mean) {
        return Err(Error::OutOfRange {
            what: "effect mean",
            value: effect.mean,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if !effect.sd.is_finite() || effect.sd <= 0.0 {
        return Err(Error::OutOfRange {
            what: "effect sd",
            value: effect.sd,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let grid: Vec<(u32, u32)> = if grid.is_empty() {
        vec![(design.m, design.n_a)]
    } else {
        grid.to_vec()
    };
    let mut estimates = Vec::new();
    for (point_idx, &(m, n_a)) in grid.iter().enumerate() {
        if n_a < 2 {
            return Err(Error::Precondition(format!(
                "grid point ({m}, {n_a}) has n_A < 2"
            )));
        }
        let p_values: Vec<f64> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[point_idx as u64, rep as u64]));
                let sample: Vec<f64> = (0..n_a)
                    .map(|_| truncated_normal(&mut rng, effect.mean, effect.sd, 0.0, 1.0))
                    .collect();
                // A degenerate draw cannot reject.
                one_sample_t(&sample, 0.5).map_or(1.0, |t| t.p_value)
            })
            .collect();
        for &alpha in &design.alphas {
            let hits = p_values.iter().filter(|p| **p < alpha).count();
            let power = hits as f64 / replications as f64;
            let std_error = (power * (1.0 - power) / replications as f64).sqrt();
            estimates.push(PowerEstimate {
                m,
                n_a,
                alpha,
                power,
                std_error,
                replications,
            });
        }
    }
    Ok(estimates)
}

/// Normal draw by the polar (Marsaglia) method.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Normal draw truncated to `[lo, hi]` by rejection.
pub fn truncated_normal<R: Rng>(rng: &mut R, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    loop {
        let x = mean + sd * standard_normal(rng);
        if (lo..=hi).contains(&x) {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> ExperimentDesign {
        ExperimentDesign::new(5, 90, 5, vec![("x".into(), "y".into())]).unwrap()
    }

    #[test]
    fn null_effect_power_matches_alpha() {
        let effect = Effect {
            mean: 0.5,
            sd: 0.15,
        };
        let estimates = power_analysis(&design(), &[(5, 90)], effect, 2000, 0).unwrap();
        for estimate in estimates {
            // Size of the test: within 3 standard errors of alpha, padded
            // for the error of the alpha-hat itself.
            let se = (estimate.alpha * (1.0 - estimate.alpha) / 2000.0).sqrt();
            assert!(
                (estimate.power - estimate.alpha).abs() <= 3.0 * se + 1e-9,
                "alpha {} power {}",
                estimate.alpha,
                estimate.power
            );
        }
    }

    #[test]
    fn power_grows_with_sample_size() {
        let effect = Effect {
            mean: 0.575,
            sd: 0.15,
        };
        let estimates = power_analysis(&design(), &[(5, 30), (5, 90)], effect, 800, 1).unwrap();
        let at = |n_a: u32, alpha: f64| {
            estimates
                .iter()
                .find(|e| e.n_a == n_a && e.alpha == alpha)
                .unwrap()
                .power
        };
        assert!(at(90, 0.01) > at(30, 0.01));
        assert!(at(90, 0.05) >= at(30, 0.05));
    }

    #[test]
    fn tiny_samples_have_little_power() {
        let effect = Effect {
            mean: 0.52,
            sd: 0.15,
        };
        let estimates = power_analysis(&design(), &[(5, 2)], effect, 1000, 2).unwrap();
        for estimate in estimates {
            assert!(
                estimate.power < estimate.alpha + 0.05,
                "alpha {} power {}",
                estimate.alpha,
                estimate.power
            );
        }
    }

    #[test]
    fn analysis_is_deterministic() {
        let effect = Effect {
            mean: 0.6,
            sd: 0.15,
        };
        let a = power_analysis(&design(), &[(5, 20)], effect, 200, 3).unwrap();
        let b = power_analysis(&design(), &[(5, 20)], effect, 200, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn replication_counts_agree_within_monte_carlo_error() {
        let effect = Effect {
            mean: 0.56,
            sd: 0.15,
        };
        let coarse = power_analysis(&design(), &[(5, 40)], effect, 100, 11).unwrap();
        let fine = power_analysis(&design(), &[(5, 40)], effect, 10_000, 12).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!(
                (a.power - b.power).abs() <= 3.0 * combined + 1e-9,
                "alpha {}: {} vs {}",
                a.alpha,
                a.power,
                b.power
            );
        }
    }

    #[test]
    fn replication_floor_is_enforced() {
        let effect = Effect {
            mean: 0.6,
            sd: 0.15,
        };
        assert!(power_analysis(&design(), &[(5, 20)], effect, 99, 0).is_err());
    }

    #[test]
    fn truncated_draws_stay_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let x = truncated_normal(&mut rng, 0.9, 0.3, 0.0, 1.0);
            assert!((0.0..=1.0).contains(&x));
        }
    }
}
