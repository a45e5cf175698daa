use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, StoppingCriteria};
use crate::ensemble::{
    measure, sample_graph_with, sample_signal, EnsemblePlan, EnsembleSpec, SamplerOptions,
};
use crate::recovery::{run_sbb, RecoveryOptions, StopReason};
use crate::rng;
use crate::scalar::Scalar;

const TRIAL: u64 = 0x0074_7269_616c;

/// Seed of trial `t` under `seed`.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    rng::derive_seed(seed, &[TRIAL, t])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessRule {
    /// Every variable verified with its true value.
    #[default]
    PerfectRecovery,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub seed: u64,
    pub success: bool,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// Unverified non-zero fraction at the end.
    pub final_alpha: f64,
    /// Unverified fraction at the end.
    pub final_unverified: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub outcomes: Vec<TrialOutcome>,
    pub successes: usize,
}

impl TrialSummary {
    pub(crate) fn from_outcomes(outcomes: Vec<TrialOutcome>) -> Self {
        let successes = outcomes.iter().filter(|o| o.success).count();
        TrialSummary {
            outcomes,
            successes,
        }
    }

    pub fn trials(&self) -> usize {
        self.outcomes.len()
    }

    pub fn success_fraction(&self) -> f64 {
        self.successes as f64 / self.trials() as f64
    }

    /// `sqrt(p(1-p)/trials)`.
    pub fn stderr(&self) -> f64 {
        let p = self.success_fraction();
        (p * (1.0 - p) / self.trials() as f64).sqrt()
    }

    /// Mean final unverified fraction.
    pub fn mean_unverified(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.final_unverified)
            .sum::<f64>()
            / self.trials() as f64
    }
}

/// One fresh graph and signal drawn from `trial_seed`, recovered with the
/// oracle attached. Returns the outcome and the unverified non-zero
/// trajectory.
pub fn run_trial<T: Scalar>(
    spec: &EnsembleSpec,
    plan: &EnsemblePlan,
    trial: u64,
    seed: u64,
) -> Result<(TrialOutcome, Vec<f64>), AnalysisError> {
    let ts = trial_seed(seed, trial);
    let graph = sample_graph_with::<T>(spec, plan, ts, SamplerOptions::default())?;
    let signal = sample_signal::<T>(spec.n, spec.alpha, &spec.signal_model, ts)?;
    let checks = measure(&graph, &signal)?;
    let report = run_sbb(
        &graph,
        &checks,
        &RecoveryOptions::simulation(),
        Some(&signal),
    )?;
    let outcome = TrialOutcome {
        trial,
        seed: ts,
        success: report.success,
        iterations: report.iterations_run,
        stop_reason: report.stop_reason,
        final_alpha: report.final_alpha().unwrap_or(0.0),
        final_unverified: report.final_unverified_fraction(),
    };
    Ok((outcome, report.trajectory))
}

pub(crate) fn run_range<T: Scalar>(
    spec: &EnsembleSpec,
    plan: &EnsemblePlan,
    seed: u64,
    range: std::ops::Range<u64>,
) -> Result<Vec<TrialOutcome>, AnalysisError> {
    range
        .into_par_iter()
        .map(|t| run_trial::<T>(spec, plan, t, seed).map(|(o, _)| o))
        .collect()
}

/// Runs trials `0..trials`, trial `t` on its own stream derived from
/// `(seed, t)`.
pub fn run_trials<T: Scalar>(
    spec: &EnsembleSpec,
    trials: usize,
    seed: u64,
    rule: SuccessRule,
) -> Result<TrialSummary, AnalysisError> {
    let SuccessRule::PerfectRecovery = rule;
    if trials == 0 {
        return Err(AnalysisError::NoTrials);
    }
    let plan = spec.plan()?;
    Ok(TrialSummary::from_outcomes(run_range::<T>(
        spec,
        &plan,
        seed,
        0..trials as u64,
    )?))
}

/// Per-iteration mean of the unverified non-zero fraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub mean_alpha: Vec<f64>,
    /// Standard error of each mean.
    pub stderr: Vec<f64>,
    pub trial_count: usize,
    pub n: usize,
    pub seed: u64,
    pub spec: EnsembleSpec,
}

/// Averages trial trajectories element-wise. A trajectory ends at its first
/// value within the success tolerance; shorter ones are padded with their
/// final value.
pub fn trajectory<T: Scalar>(
    spec: &EnsembleSpec,
    trials: usize,
    seed: u64,
    criteria: &StoppingCriteria,
) -> Result<TrajectoryStats, AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::NoTrials);
    }
    let plan = spec.plan()?;
    let mut trajs: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial::<T>(spec, &plan, t, seed).map(|(_, tr)| tr))
        .collect::<Result<_, _>>()?;
    for tr in trajs.iter_mut() {
        if let Some(i) = tr.iter().position(|&a| a <= criteria.success_tol) {
            tr.truncate(i + 1);
        }
    }
    let len = trajs.iter().map(Vec::len).max().unwrap_or(0);
    let at = |tr: &Vec<f64>, i: usize| tr.get(i).or(tr.last()).copied().unwrap_or(0.0);
    let k = trials as f64;
    let mut mean_alpha = Vec::with_capacity(len);
    let mut stderr = Vec::with_capacity(len);
    for i in 0..len {
        let mean = trajs.iter().map(|tr| at(tr, i)).sum::<f64>() / k;
        let var = trajs
            .iter()
            .map(|tr| (at(tr, i) - mean).powi(2))
            .sum::<f64>()
            / k;
        mean_alpha.push(mean);
        stderr.push((var / k).sqrt());
    }
    Ok(TrajectoryStats {
        mean_alpha,
        stderr,
        trial_count: trials,
        n: spec.n,
        seed,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, alpha: f64) -> EnsembleSpec {
        EnsembleSpec::new(n, "x^4".parse().unwrap(), "x^5".parse().unwrap(), alpha)
    }

    #[test]
    fn zero_density_always_succeeds() {
        let s = run_trials::<f64>(&spec(1000, 0.0), 10, 3, SuccessRule::PerfectRecovery).unwrap();
        assert_eq!(s.success_fraction(), 1.0);
        let t = trajectory::<f64>(&spec(1000, 0.0), 5, 3, &StoppingCriteria::default()).unwrap();
        assert_eq!(t.mean_alpha, vec![0.0]);
    }

    #[test]
    fn trials_are_deterministic() {
        let a = run_trials::<f64>(&spec(2000, 0.42), 12, 9, SuccessRule::PerfectRecovery).unwrap();
        let b = run_trials::<f64>(&spec(2000, 0.42), 12, 9, SuccessRule::PerfectRecovery).unwrap();
        assert_eq!(a, b);
        let seeds: std::collections::HashSet<u64> = a.outcomes.iter().map(|o| o.seed).collect();
        assert_eq!(seeds.len(), 12);
        assert_eq!(
            run_trials::<f64>(&spec(10, 0.1), 0, 0, SuccessRule::PerfectRecovery),
            Err(AnalysisError::NoTrials)
        );
    }

    #[test]
    fn trajectory_is_non_increasing_and_starts_near_alpha() {
        let t = trajectory::<f64>(&spec(5000, 0.3), 20, 1, &StoppingCriteria::default()).unwrap();
        assert!(t.mean_alpha.windows(2).all(|w| w[1] <= w[0]));
        let se = (0.3f64 * 0.7 / (5000.0 * 20.0)).sqrt();
        assert!((t.mean_alpha[0] - 0.3).abs() < 3.0 * se);
        assert_eq!(*t.mean_alpha.last().unwrap(), 0.0);
    }
}
