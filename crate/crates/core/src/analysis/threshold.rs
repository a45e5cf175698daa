use std::io::Write;

use serde::{Deserialize, Serialize};

use super::trials::{run_range, TrialSummary};
use super::AnalysisError;
use crate::ensemble::{DegreeDistribution, EnsemblePlan, EnsembleSpec};
use crate::rng;
use crate::scalar::Scalar;

/// Trials per batch between early-exit checks.
pub const EARLY_EXIT_CHUNK: usize = 25;
/// Width, in standard deviations, of the interval that must clear the
/// success level before a probe stops early.
pub const EARLY_EXIT_Z: f64 = 3.0;

const PROBE: u64 = 0x0070_726f_6265;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// `n = 10^4`, 50 trials per probe, resolution `2e-3`.
    Quick,
    /// `n = 10^5`, 200 trials per probe, resolution `1e-3`.
    Paper,
}

impl Fidelity {
    pub fn n(self) -> usize {
        match self {
            Fidelity::Quick => 10_000,
            Fidelity::Paper => 100_000,
        }
    }

    pub fn trials(self) -> usize {
        match self {
            Fidelity::Quick => 50,
            Fidelity::Paper => 200,
        }
    }

    pub fn resolution(self) -> f64 {
        match self {
            Fidelity::Quick => 2e-3,
            Fidelity::Paper => 1e-3,
        }
    }

    pub fn config(self, seed: u64) -> ThresholdConfig {
        ThresholdConfig {
            trials_per_probe: self.trials(),
            resolution: self.resolution(),
            seed,
            ..ThresholdConfig::default()
        }
    }
}

impl std::str::FromStr for Fidelity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quick" => Ok(Fidelity::Quick),
            "paper" => Ok(Fidelity::Paper),
            _ => Err(format!("unknown fidelity '{s}' (expected quick or paper)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub trials_per_probe: usize,
    pub bracket: (f64, f64),
    pub resolution: f64,
    /// A probe succeeds when its success fraction is at least this.
    pub success_level: f64,
    pub seed: u64,
    /// Stop a probe once its verdict is decided at `EARLY_EXIT_Z`.
    pub early_exit: bool,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            trials_per_probe: Fidelity::Paper.trials(),
            bracket: (0.05, 0.95),
            resolution: Fidelity::Paper.resolution(),
            success_level: 0.5,
            seed: 0,
            early_exit: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub alpha: f64,
    pub success_fraction: f64,
    pub trials: usize,
    pub successes: usize,
    pub stderr: f64,
    /// Mean final unverified fraction over the probe's trials.
    pub mean_unverified: f64,
    pub seed: u64,
}

impl Probe {
    fn from_summary(alpha: f64, seed: u64, s: &TrialSummary) -> Self {
        Probe {
            alpha,
            success_fraction: s.success_fraction(),
            trials: s.trials(),
            successes: s.successes,
            stderr: s.stderr(),
            mean_unverified: s.mean_unverified(),
            seed,
        }
    }

    pub fn succeeded(&self, level: f64) -> bool {
        self.success_fraction >= level
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub lambda: DegreeDistribution,
    pub rho: DegreeDistribution,
    pub n: usize,
    /// Largest probed density that met the success level.
    pub lower: f64,
    /// Smallest probed density that missed it.
    pub upper: f64,
    pub estimate: f64,
    pub probes: Vec<Probe>,
    /// `(lower, upper)` after each probe, starting with the initial bracket.
    pub bracket_history: Vec<(f64, f64)>,
    pub config: ThresholdConfig,
}

impl ThresholdResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn wilson(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let k = trials as f64;
    let p = successes as f64 / k;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * k)) / (1.0 + z2 / k);
    let half = z / (1.0 + z2 / k) * (p * (1.0 - p) / k + z2 / (4.0 * k * k)).sqrt();
    (centre - half, centre + half)
}

fn probe<T: Scalar>(
    spec: &EnsembleSpec,
    plan: &EnsemblePlan,
    alpha: f64,
    seed: u64,
    cfg: &ThresholdConfig,
) -> Result<Probe, AnalysisError> {
    let spec = spec.with_alpha(alpha);
    let total = cfg.trials_per_probe as u64;
    let chunk = if cfg.early_exit {
        EARLY_EXIT_CHUNK as u64
    } else {
        total
    };
    let mut outcomes = Vec::with_capacity(cfg.trials_per_probe);
    let mut done = 0;
    while done < total {
        let end = (done + chunk).min(total);
        outcomes.extend(run_range::<T>(&spec, plan, seed, done..end)?);
        done = end;
        if cfg.early_exit && done < total {
            let successes = outcomes.iter().filter(|o| o.success).count();
            let (lo, hi) = wilson(successes, outcomes.len(), EARLY_EXIT_Z);
            if lo >= cfg.success_level || hi < cfg.success_level {
                break;
            }
        }
    }
    Ok(Probe::from_summary(
        alpha,
        seed,
        &TrialSummary::from_outcomes(outcomes),
    ))
}

/// Bisects the initial density between a succeeding and a failing endpoint
/// until the bracket is no wider than `cfg.resolution`. `base.alpha` is
/// ignored; `base.n` sets the graph size.
pub fn find_threshold<T: Scalar>(
    base: &EnsembleSpec,
    cfg: &ThresholdConfig,
) -> Result<ThresholdResult, AnalysisError> {
    if cfg.trials_per_probe == 0 {
        return Err(AnalysisError::NoTrials);
    }
    if !(cfg.resolution > 0.0 && cfg.resolution.is_finite()) {
        return Err(AnalysisError::InvalidResolution(cfg.resolution));
    }
    if !(cfg.success_level > 0.0 && cfg.success_level <= 1.0) {
        return Err(AnalysisError::InvalidSuccessLevel(cfg.success_level));
    }
    let (mut lo, mut hi) = cfg.bracket;
    let bad = |lo_fraction, hi_fraction| AnalysisError::BadBracket {
        lo: cfg.bracket.0,
        hi: cfg.bracket.1,
        lo_fraction,
        hi_fraction,
    };
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(bad(None, None));
    }
    let plan = base.with_alpha(lo).plan()?;
    let mut probes = Vec::new();
    let next = |alpha: f64, probes: &mut Vec<Probe>| -> Result<bool, AnalysisError> {
        let seed = rng::derive_seed(cfg.seed, &[PROBE, probes.len() as u64]);
        let p = probe::<T>(base, &plan, alpha, seed, cfg)?;
        let ok = p.succeeded(cfg.success_level);
        probes.push(p);
        Ok(ok)
    };
    let lo_ok = next(lo, &mut probes)?;
    let hi_ok = next(hi, &mut probes)?;
    if !lo_ok || hi_ok {
        return Err(bad(
            Some(probes[0].success_fraction),
            Some(probes[1].success_fraction),
        ));
    }
    let mut history = vec![(lo, hi)];
    while hi - lo > cfg.resolution {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if next(mid, &mut probes)? {
            lo = mid;
        } else {
            hi = mid;
        }
        history.push((lo, hi));
    }
    Ok(ThresholdResult {
        lambda: base.lambda.clone(),
        rho: base.rho.clone(),
        n: base.n,
        lower: lo,
        upper: hi,
        estimate: 0.5 * (lo + hi),
        probes,
        bracket_history: history,
        config: cfg.clone(),
    })
}

/// CSV with one row per probe.
pub fn write_probes_csv<W: Write>(probes: &[Probe], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "alpha",
        "success_fraction",
        "trials",
        "stderr",
        "mean_unverified",
    ])?;
    for p in probes {
        w.write_record([
            p.alpha.to_string(),
            p.success_fraction.to_string(),
            p.trials.to_string(),
            p.stderr.to_string(),
            p.mean_unverified.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
