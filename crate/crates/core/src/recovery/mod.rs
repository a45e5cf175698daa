//! The SBB verification-based recovery algorithm.
//!
//! A variable is *verified* when its value is determined by one of three
//! rules applied to the residual check values:
//!
//! * **ZCN**: every neighbour of a zero-valued check is zero.
//! * **D1CN**: the only unverified neighbour of a degree-1 check takes the
//!   check's value.
//! * **ECN**: given a class of checks sharing one non-zero value, neighbours
//!   not adjacent to every member are zero, and a unique neighbour adjacent
//!   to every member takes the shared value.
//!
//! Verified variables are peeled: their contribution is subtracted from each
//! neighbouring check and their edges stop counting toward check degrees.
//! One iteration is two rounds. Round 1 verifies non-zero variables (D1CN
//! and the second ECN rule); round 2 verifies zeros (ZCN and the first ECN
//! rule).

mod engine;
mod export;
mod partitions;
mod radix;
mod state;

pub use engine::{run_sbb, run_sbb_observed, RecoveryObserver};
pub use export::{write_events_csv, write_trajectory_csv};
pub use partitions::{
    compute_partitions, predicted_round_one, predicted_round_two, PartitionSnapshot,
};
pub use state::RecoveryState;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::{EnsembleError, SignalVector};
use crate::scalar::{Scalar, Tolerances};

/// Default iteration cap.
pub const DEFAULT_MAX_ITERATIONS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecoveryError {
    #[error("measurement vector has length {measurements}, graph has {checks} checks")]
    DimensionMismatch { measurements: usize, checks: usize },
    #[error("oracle signal has length {oracle}, graph has {variables} variables")]
    OracleMismatch { oracle: usize, variables: usize },
    #[error("variable {0} is already verified")]
    AlreadyVerified(usize),
    #[error("variable {variable} is assigned both {first} and {second}")]
    ConflictingAssignment {
        variable: usize,
        first: f64,
        second: f64,
    },
    #[error("operation needs the true signal")]
    OracleRequired,
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// Verification rule that fixed a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    D1cn,
    EcnUnique,
    Zcn,
    EcnZero,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::D1cn => "D1CN",
            Rule::EcnUnique => "ECN-unique",
            Rule::Zcn => "ZCN",
            Rule::EcnZero => "ECN-zero",
        }
    }
}

/// Round within an iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Round {
    /// Non-zero verification (D1CN, ECN unique common neighbour).
    One,
    /// Zero verification (ZCN, ECN non-common neighbours).
    Two,
}

impl Round {
    pub fn number(self) -> u8 {
        match self {
            Round::One => 1,
            Round::Two => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationEvent<T> {
    pub variable: usize,
    pub value: T,
    pub rule: Rule,
    pub iteration: usize,
    pub round: u8,
    pub half_round: u8,
}

/// How rules are scheduled inside a round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Each round evaluates its rules once on the residuals as they stood at
    /// the start of the round, then peels everything it verified. This is
    /// the message-passing iteration the per-iteration analysis describes.
    #[default]
    Parallel,
    /// Each round repeats its rules until nothing more verifies.
    FixedPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub schedule: Schedule,
    pub max_iterations: usize,
    pub tolerances: Tolerances,
    /// Keep every verification event in the report.
    pub record_events: bool,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            schedule: Schedule::Parallel,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerances: Tolerances::default(),
            record_events: true,
        }
    }
}

impl RecoveryOptions {
    /// Options for simulation runs: exact comparisons (sound for unit
    /// weights and grid-snapped signals) and no event log.
    pub fn simulation() -> Self {
        RecoveryOptions {
            tolerances: Tolerances::exact(),
            record_events: false,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AllVerified,
    Stalled,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport<T> {
    /// Every variable verified and, with an oracle, every value correct.
    pub success: bool,
    pub stop_reason: StopReason,
    pub iterations_run: usize,
    pub events: Vec<VerificationEvent<T>>,
    /// Fraction of unverified non-zero variables after each iteration,
    /// starting with iteration 0. Empty without an oracle.
    pub trajectory: Vec<f64>,
    /// Fraction of unverified variables after each iteration.
    pub unverified_trajectory: Vec<f64>,
    pub verified_count: usize,
    /// Final estimate; unverified entries are left at zero.
    pub estimate: Vec<T>,
}

impl<T> RecoveryReport<T> {
    pub fn final_alpha(&self) -> Option<f64> {
        self.trajectory.last().copied()
    }

    pub fn final_unverified_fraction(&self) -> f64 {
        self.unverified_trajectory.last().copied().unwrap_or(0.0)
    }
}

/// True iff every recorded event assigned the oracle value (within the
/// equality tolerance).
pub fn check_false_verification<T: Scalar>(
    report: &RecoveryReport<T>,
    oracle: &SignalVector<T>,
    tolerances: &Tolerances,
) -> bool {
    report
        .events
        .iter()
        .all(|e| value_matches(tolerances, e.value, oracle.values()[e.variable]))
}

pub(crate) fn value_matches<T: Scalar>(tol: &Tolerances, assigned: T, truth: T) -> bool {
    if truth.is_zero() || assigned.is_zero() {
        // A relative test is meaningless against zero.
        if tol.is_exact() {
            assigned == truth
        } else {
            (assigned - truth).abs().to_real() <= tol.eq_rel.max(tol.zero_rel)
        }
    } else {
        tol.approx_eq(assigned, truth)
    }
}
