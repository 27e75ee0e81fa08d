//! Outcome-level relative assessment: paired forced-choice collection and
//! Bradley-Terry strength fitting.
//!
//! The fit uses minorize-maximize iteration, which is globally convergent on
//! connected comparison graphs and increases the log-likelihood at every
//! step. Ties are recorded during collection, may be reallocated with
//! [`forced_choice`], and are always excluded from the fit itself.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::AgentPopulation;
use crate::lottery::Lottery;
use crate::{Error, Result};

/// Convergence tolerance for the maximum strength change per MM iteration.
const MM_TOLERANCE: f64 = 1e-10;
const MM_MAX_ITERATIONS: usize = 10_000;

/// Tally of one directed pair of systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComparisonCounts {
    pub wins_x: u64,
    pub wins_y: u64,
    pub ties: u64,
}

impl ComparisonCounts {
    pub fn total(&self) -> u64 {
        self.wins_x + self.wins_y + self.ties
    }

    pub fn decided(&self) -> u64 {
        self.wins_x + self.wins_y
    }
}

/// Collects `n_pairs` outcome-level comparisons between two systems.
///
/// Each round samples one output from `x` and one from `y`, draws a judging
/// agent from the population weights, and compares the two outcomes by that
/// agent's utility. Equal utilities are recorded as ties; see
/// [`forced_choice`] for the forced-choice reallocation.
pub fn ora_collect(
    population: &AgentPopulation,
    x: &Lottery,
    y: &Lottery,
    n_pairs: usize,
    seed: u64,
) -> Result<ComparisonCounts> {
    if n_pairs == 0 {
        return Err(Error::Precondition("n_pairs must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = population.weights();
    let mut counts = ComparisonCounts::default();
    for _ in 0..n_pairs {
        let out_x = x.draw(&mut rng).clone();
        let out_y = y.draw(&mut rng).clone();
        let judge = &population.agents()[draw_index(&mut rng, weights)];
        let ux = judge.utility().value(&out_x)?;
        let uy = judge.utility().value(&out_y)?;
        if ux > uy {
            counts.wins_x += 1;
        } else if uy > ux {
            counts.wins_y += 1;
        } else {
            counts.ties += 1;
        }
    }
    Ok(counts)
}

/// Reallocates ties uniformly at random, mirroring a forced-choice
/// annotation interface where "no preference" is not offered.
pub fn forced_choice(counts: ComparisonCounts, seed: u64) -> ComparisonCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resolved = ComparisonCounts {
        wins_x: counts.wins_x,
        wins_y: counts.wins_y,
        ties: 0,
    };
    for _ in 0..counts.ties {
        if rng.random::<bool>() {
            resolved.wins_x += 1;
        } else {
            resolved.wins_y += 1;
        }
    }
    resolved
}

fn draw_index<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cum += w;
        if u < cum {
            return i;
        }
    }
    weights.len() - 1
}

/// Pairwise comparison counts over a set of named systems.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparisons {
    entries: Vec<(String, String, ComparisonCounts)>,
}

impl PairwiseComparisons {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: impl Into<String>, y: impl Into<String>, counts: ComparisonCounts) {
        self.entries.push((x.into(), y.into(), counts));
    }

    pub fn entries(&self) -> &[(String, String, ComparisonCounts)] {
        &self.entries
    }

    /// All distinct system names, in first-appearance order.
    pub fn systems(&self) -> Vec<String> {
        let mut systems: Vec<String> = Vec::new();
        for (x, y, _) in &self.entries {
            if !systems.contains(x) {
                systems.push(x.clone());
            }
            if !systems.contains(y) {
                systems.push(y.clone());
            }
        }
        systems
    }
}

/// Result of a Bradley-Terry maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BradleyTerryFit {
    pub systems: Vec<String>,
    /// Strengths normalized to sum to one, aligned with `systems`.
    pub strengths: Vec<f64>,
    /// Log-likelihood after each MM iteration; nondecreasing.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl BradleyTerryFit {
    pub fn strength_of(&self, system: &str) -> Option<f64> {
        self.systems
            .iter()
            .position(|s| s == system)
            .map(|i| self.strengths[i])
    }
}

/// Fits Bradley-Terry strengths by minorize-maximize iteration.
///
/// Requires the graph of decided games to connect all systems; a system with
/// no wins and no losses cannot be placed at all and is rejected. Converges
/// when the largest strength change drops below 1e-10.
pub fn bradley_terry_fit(comparisons: &PairwiseComparisons) -> Result<BradleyTerryFit> {
    let systems = comparisons.systems();
    let n = systems.len();
    if n < 2 {
        return Err(Error::Validation(
            "Bradley-Terry fit needs at least 2 systems".into(),
        ));
    }
    let index = |name: &str| {
        systems
            .iter()
            .position(|s| s == name)
            .expect("known system")
    };

    // Aggregate decided games into a wins matrix; ties carry no information
    // about relative strength and are excluded.
    let mut wins = vec![vec![0.0_f64; n]; n];
    for (x, y, counts) in comparisons.entries() {
        let (i, j) = (index(x), index(y));
        if i == j {
            return Err(Error::Validation(format!(
                "system `{x}` compared against itself"
            )));
        }
        wins[i][j] += counts.wins_x as f64;
        wins[j][i] += counts.wins_y as f64;
    }

    for (i, system) in systems.iter().enumerate() {
        let decided: f64 = (0..n).map(|j| wins[i][j] + wins[j][i]).sum();
        if decided == 0.0 {
            return Err(Error::IsolatedSystem(system.clone()));
        }
    }
    check_connected(&systems, &wins)?;

    let total_wins: Vec<f64> = (0..n).map(|i| wins[i].iter().sum()).collect();
    let games = |i: usize, j: usize| wins[i][j] + wins[j][i];

    let mut strengths = vec![1.0 / n as f64; n];
    let mut log_likelihood = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MM_MAX_ITERATIONS {
        iterations += 1;
        let mut updated = vec![0.0; n];
        for i in 0..n {
            let denom: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let g = games(i, j);
                    if g > 0.0 {
                        g / (strengths[i] + strengths[j])
                    } else {
                        0.0
                    }
                })
                .sum();
            updated[i] = if denom > 0.0 {
                total_wins[i] / denom
            } else {
                0.0
            };
        }
        let total: f64 = updated.iter().sum();
        for s in &mut updated {
            *s /= total;
        }
        log_likelihood.push(log_likelihood_of(&updated, &wins));
        let max_change = strengths
            .iter()
            .zip(&updated)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        strengths = updated;
        if max_change < MM_TOLERANCE {
            converged = true;
            break;
        }
    }

    Ok(BradleyTerryFit {
        systems,
        strengths,
        log_likelihood,
        iterations,
        converged,
    })
}

fn log_likelihood_of(strengths: &[f64], wins: &[Vec<f64>]) -> f64 {
    let n = strengths.len();
    let mut ll = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && wins[i][j] > 0.0 {
                ll += wins[i][j] * (strengths[i] / (strengths[i] + strengths[j])).ln();
            }
        }
    }
    ll
}

/// Connectivity of the undirected decided-games graph; disconnected
/// components are reported by system name.
fn check_connected(systems: &[String], wins: &[Vec<f64>]) -> Result<()> {
    let n = systems.len();
    let mut component = vec![usize::MAX; n];
    let mut current = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = current;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if component[j] == usize::MAX && wins[i][j] + wins[j][i] > 0.0 {
                    component[j] = current;
                    stack.push(j);
                }
            }
        }
        current += 1;
    }
    if current > 1 {
        let mut components = vec![Vec::new(); current];
        for (i, &c) in component.iter().enumerate() {
            components[c].push(systems[i].clone());
        }
        return Err(Error::DisconnectedGraph(components));
    }
    Ok(())
}
