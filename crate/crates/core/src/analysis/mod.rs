//! Monte Carlo estimation over sampled ensembles: success fractions,
//! averaged trajectories and empirical success thresholds.

mod threshold;
mod trials;

pub use threshold::{
    find_threshold, write_probes_csv, Fidelity, Probe, ThresholdConfig, ThresholdResult,
    EARLY_EXIT_CHUNK, EARLY_EXIT_Z,
};
pub use trials::{
    run_trial, run_trials, trajectory, trial_seed, SuccessRule, TrajectoryStats, TrialOutcome,
    TrialSummary,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::EnsembleError;
use crate::recovery::RecoveryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("stopping criteria need 0 < stall_tol < success_tol < 1")]
    InvalidCriteria,
    #[error("resolution must be positive, got {0}")]
    InvalidResolution(f64),
    #[error("success level must lie in (0, 1], got {0}")]
    InvalidSuccessLevel(f64),
    #[error("{}", describe_bracket(*.lo, *.hi, *.lo_fraction, *.hi_fraction))]
    BadBracket {
        lo: f64,
        hi: f64,
        lo_fraction: Option<f64>,
        hi_fraction: Option<f64>,
    },
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
}

fn describe_bracket(lo: f64, hi: f64, lf: Option<f64>, hf: Option<f64>) -> String {
    match (lf, hf) {
        (Some(lf), Some(hf)) => format!(
            "bracket ({lo}, {hi}) does not straddle the transition \
             (success fractions {lf} and {hf})"
        ),
        _ => format!("bracket ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1"),
    }
}

/// Thresholds on the unverified non-zero fraction that end a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingCriteria {
    /// At or below this the run has succeeded.
    pub success_tol: f64,
    /// A step smaller than this above `success_tol` means the run is stuck.
    pub stall_tol: f64,
}

impl Default for StoppingCriteria {
    fn default() -> Self {
        StoppingCriteria {
            success_tol: 1e-7,
            stall_tol: 1e-8,
        }
    }
}

impl StoppingCriteria {
    pub fn new(success_tol: f64, stall_tol: f64) -> Result<Self, AnalysisError> {
        if 0.0 < stall_tol && stall_tol < success_tol && success_tol < 1.0 {
            Ok(StoppingCriteria {
                success_tol,
                stall_tol,
            })
        } else {
            Err(AnalysisError::InvalidCriteria)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    Failure,
    /// Neither criterion holds yet; more iterations are needed.
    Undecided,
}

/// Verdict on a trajectory of unverified non-zero fractions.
pub fn classify_trajectory(traj: &[f64], criteria: &StoppingCriteria) -> Verdict {
    let Some(&last) = traj.last() else {
        return Verdict::Undecided;
    };
    if last <= criteria.success_tol {
        return Verdict::Success;
    }
    match traj.len().checked_sub(2).map(|i| traj[i]) {
        Some(prev) if (last - prev).abs() < criteria.stall_tol => Verdict::Failure,
        _ => Verdict::Undecided,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        let c = StoppingCriteria::default();
        assert_eq!(classify_trajectory(&[0.4, 0.1, 0.0], &c), Verdict::Success);
        assert_eq!(
            classify_trajectory(&[0.4, 0.30, 0.299999999, 0.2999999899], &c),
            Verdict::Failure
        );
        assert_eq!(classify_trajectory(&[0.4, 0.2], &c), Verdict::Undecided);
        assert_eq!(classify_trajectory(&[0.0], &c), Verdict::Success);
        assert_eq!(classify_trajectory(&[0.3], &c), Verdict::Undecided);
    }

    #[test]
    fn criteria_validation() {
        assert!(StoppingCriteria::new(1e-7, 1e-8).is_ok());
        assert_eq!(
            StoppingCriteria::new(1e-8, 1e-7),
            Err(AnalysisError::InvalidCriteria)
        );
        assert!(StoppingCriteria::new(1.0, 1e-8).is_err());
        assert!(StoppingCriteria::new(1e-7, 0.0).is_err());
    }
}
