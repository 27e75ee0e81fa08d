//! Utility-theoretic simulation and analysis toolkit for human evaluation
//! protocols.
//!
//! The crate models generation systems as lotteries over a finite outcome
//! universe and annotators as agents with real-valued utility functions. On
//! top of that it provides:
//!
//! * checkers for the four von Neumann-Morgenstern rationality axioms,
//! * rating scales (Likert tiering, continuous assessment) together with the
//!   residual analysis that explains when averaged Likert ratings flip the
//!   direction of a true preference,
//! * the three evaluation protocols: outcome-level absolute assessment (OAA),
//!   outcome-level relative assessment (ORA, fit with Bradley-Terry), and
//!   system-level probabilistic assessment (SPA),
//! * Student's t machinery with Holm-Bonferroni correction,
//! * annotation-data ingestion, annotator filters, Table-style comparison
//!   reports, and Monte Carlo power analysis.

pub mod agent;
pub mod experiments;
pub mod io;
pub mod lottery;
pub mod protocols;
pub mod rationality;
pub mod scales;
pub mod seed;
pub mod stats;
pub mod utility;

pub use agent::{Agent, AgentId, AgentPopulation, Behavior, PreferenceOracle, PreferenceRelation};
pub use lottery::{
    mix, reduce_compound, CompoundLottery, Lottery, Outcome, OutcomeId, OutcomeUniverse,
};
pub use utility::{affine_equivalent, expected_utility, ordinally_equivalent, UtilityFunction};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A probability distribution failed validation (mass, sign, duplicates).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// An outcome was referenced that the utility function does not cover.
    #[error("outcome `{0}` missing from utility domain")]
    UnknownOutcome(String),

    /// A value fell outside its documented range.
    #[error("{what} {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A sample was too small or had zero variance for the requested statistic.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// An operation's precondition does not hold for the supplied inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The pairwise comparison graph does not connect all systems.
    #[error("comparison graph not connected: components {0:?}")]
    DisconnectedGraph(Vec<Vec<String>>),

    /// A system appears in the fit but has no decided games at all.
    #[error("system `{0}` has no wins or losses")]
    IsolatedSystem(String),

    /// Structural validation failure (mixed pairs, missing metadata, coverage).
    #[error("validation error: {0}")]
    Validation(String),

    /// A data file could not be parsed; points at the offending line.
    #[error("data error at {path}:{line}: {message}")]
    Data {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
