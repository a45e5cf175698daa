use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{enumerate_bimodal, enumerate_sparse, OptimizerError};
use crate::analysis::{find_threshold, AnalysisError, Fidelity, ThresholdConfig, ThresholdResult};
use crate::ensemble::{DegreeDistribution, EnsembleError, EnsemblePlan, EnsembleSpec};
use crate::rng;
use crate::scalar::Scalar;

const SCREEN: u64 = 0x7363_7265_656e;
const REFINE: u64 = 0x7265_6669_6e65;

/// How far a stage's graph size may move to reach one the candidate can
/// realize exactly.
pub const SIZE_SEARCH_RADIUS: usize = 1000;

/// Constraints on one side of the graph when its distribution is searched.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideConstraint {
    pub mean_degree: f64,
    pub max_degree: u32,
    /// 1 gives only the regular distribution, 2 the bimodal family.
    pub max_components: usize,
    /// Resolution of the interior fractions when `max_components > 2`.
    pub grid_step: f64,
}

impl SideConstraint {
    pub fn bimodal(mean_degree: f64) -> Self {
        SideConstraint {
            mean_degree,
            max_degree: 20,
            max_components: 2,
            grid_step: 1e-3,
        }
    }

    fn validate(&self) -> Result<(), OptimizerError> {
        let d = self.mean_degree;
        if !(d.is_finite() && d >= 1.0) {
            return Err(OptimizerError::InvalidSpace(format!(
                "mean degree {d} is below 1"
            )));
        }
        if (self.max_degree as f64) < d.ceil() {
            return Err(OptimizerError::InvalidSpace(format!(
                "max degree {} is below mean degree {d}",
                self.max_degree
            )));
        }
        if !(1..=4).contains(&self.max_components) {
            return Err(OptimizerError::InvalidSpace(format!(
                "max components must be 1 to 4, got {}",
                self.max_components
            )));
        }
        if !(self.grid_step > 0.0 && self.grid_step < 1.0) {
            return Err(OptimizerError::InvalidSpace(format!(
                "grid step must lie in (0, 1), got {}",
                self.grid_step
            )));
        }
        Ok(())
    }

    fn enumerate(&self) -> Vec<DegreeDistribution> {
        match self.max_components {
            1 => enumerate_bimodal(self.mean_degree, self.max_degree)
                .into_iter()
                .filter(|d| d.is_regular())
                .collect(),
            2 => enumerate_bimodal(self.mean_degree, self.max_degree),
            k => enumerate_sparse(self.mean_degree, self.max_degree, k, self.grid_step),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Fixed(DegreeDistribution),
    Search(SideConstraint),
}

impl Side {
    fn enumerate(&self) -> Result<Vec<DegreeDistribution>, OptimizerError> {
        match self {
            Side::Fixed(d) => Ok(vec![d.clone()]),
            Side::Search(c) => {
                c.validate()?;
                Ok(c.enumerate())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub lambda: Side,
    pub rho: Side,
}

impl SearchSpace {
    /// Every `(λ, ρ)` pair in the space, λ varying slowest.
    pub fn candidates(
        &self,
    ) -> Result<Vec<(DegreeDistribution, DegreeDistribution)>, OptimizerError> {
        let lambdas = self.lambda.enumerate()?;
        let rhos = self.rho.enumerate()?;
        let pairs: Vec<_> = lambdas
            .iter()
            .flat_map(|l| rhos.iter().map(move |r| (l.clone(), r.clone())))
            .collect();
        if pairs.is_empty() {
            return Err(OptimizerError::EmptySpace);
        }
        Ok(pairs)
    }
}

/// One stage of threshold estimation. The `seed` inside `threshold` is
/// replaced by a stream derived from the optimizer seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub n: usize,
    pub threshold: ThresholdConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub screen: StageConfig,
    pub refine: StageConfig,
    /// Share of screened candidates (at least one) that is refined.
    pub refine_fraction: f64,
    /// Total probes allowed over both stages; checked between evaluations.
    pub probe_budget: Option<usize>,
    pub seed: u64,
}

impl OptimizerConfig {
    /// Screens at `n ≤ 10^4` with 50 trials and resolution `1e-2`, then
    /// refines at `fidelity`.
    pub fn for_fidelity(fidelity: Fidelity, seed: u64) -> Self {
        OptimizerConfig {
            screen: StageConfig {
                n: fidelity.n().min(10_000),
                threshold: ThresholdConfig {
                    trials_per_probe: 50,
                    resolution: 1e-2,
                    ..ThresholdConfig::default()
                },
            },
            refine: StageConfig {
                n: fidelity.n(),
                threshold: fidelity.config(0),
            },
            refine_fraction: 0.05,
            probe_budget: None,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub probes: usize,
    pub seed: u64,
    /// `None` when the bracket did not straddle the transition; the estimate
    /// is then the bracket end it fell beyond.
    pub result: Option<ThresholdResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub lambda: DegreeDistribution,
    pub rho: DegreeDistribution,
    pub threshold_estimate: f64,
    pub screening: Option<Evaluation>,
    pub refinement: Option<Evaluation>,
}

impl Candidate {
    /// The latest evaluation.
    pub fn evidence(&self) -> Option<&Evaluation> {
        self.refinement.as_ref().or(self.screening.as_ref())
    }

    pub fn is_refined(&self) -> bool {
        self.refinement.is_some()
    }

    fn components(&self) -> usize {
        self.lambda.components() + self.rho.components()
    }

    fn max_degree(&self) -> u32 {
        self.lambda.max_degree().max(self.rho.max_degree())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    /// Refined candidates first, each group best first.
    pub ranked: Vec<Candidate>,
    pub budget_exhausted: bool,
    pub probes_used: usize,
    pub config: OptimizerConfig,
}

impl OptimizeResult {
    pub fn best(&self) -> Option<&Candidate> {
        self.ranked.first()
    }
}

/// Higher estimate first; ties go to fewer components, then lower maximum
/// degree, then the text of the pair.
fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.threshold_estimate
        .total_cmp(&a.threshold_estimate)
        .then(a.components().cmp(&b.components()))
        .then(a.max_degree().cmp(&b.max_degree()))
        .then_with(|| {
            (a.lambda.to_string(), a.rho.to_string())
                .cmp(&(b.lambda.to_string(), b.rho.to_string()))
        })
}

fn evaluate<T: Scalar>(
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
    stage: &StageConfig,
    seed: u64,
) -> Result<Evaluation, OptimizerError> {
    let n = EnsemblePlan::nearest_feasible_size(stage.n, lambda, rho, SIZE_SEARCH_RADIUS).ok_or(
        OptimizerError::Analysis(AnalysisError::Ensemble(EnsembleError::NoCommonBudget {
            target: stage.n,
        })),
    )?;
    let spec = EnsembleSpec::new(n, lambda.clone(), rho.clone(), 0.0);
    let cfg = ThresholdConfig {
        seed,
        ..stage.threshold.clone()
    };
    match find_threshold::<T>(&spec, &cfg) {
        Ok(r) => Ok(Evaluation {
            estimate: r.estimate,
            lower: r.lower,
            upper: r.upper,
            probes: r.probes.len(),
            seed,
            result: Some(r),
        }),
        Err(AnalysisError::BadBracket {
            lo,
            hi,
            lo_fraction: Some(lf),
            hi_fraction: Some(_),
        }) => {
            let (estimate, lower, upper) = if lf < cfg.success_level {
                (lo, 0.0, lo)
            } else {
                (hi, hi, 1.0)
            };
            Ok(Evaluation {
                estimate,
                lower,
                upper,
                probes: 2,
                seed,
                result: None,
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// Screens every candidate cheaply, then re-estimates the best share and
/// everything within one standard error of the screening leader at full
/// fidelity. The standard error of an estimate is half its final bracket,
/// but never less than the screening resolution.
pub fn optimize<T: Scalar>(
    space: &SearchSpace,
    cfg: &OptimizerConfig,
) -> Result<OptimizeResult, OptimizerError> {
    if !(cfg.refine_fraction > 0.0 && cfg.refine_fraction <= 1.0) {
        return Err(OptimizerError::InvalidSpace(format!(
            "refine fraction must lie in (0, 1], got {}",
            cfg.refine_fraction
        )));
    }
    let pairs = space.candidates()?;
    let screen_seed = rng::derive_seed(cfg.seed, &[SCREEN]);
    let refine_seed = rng::derive_seed(cfg.seed, &[REFINE]);
    let mut used = 0usize;
    let mut exhausted = false;
    let over = |used: usize| cfg.probe_budget.is_some_and(|b| used >= b);

    let mut screened = Vec::with_capacity(pairs.len());
    let mut pending = Vec::new();
    for (lambda, rho) in pairs.iter() {
        if pairs.len() == 1 {
            pending.push(Candidate {
                lambda: lambda.clone(),
                rho: rho.clone(),
                threshold_estimate: f64::NAN,
                screening: None,
                refinement: None,
            });
            break;
        }
        if over(used) {
            exhausted = true;
            break;
        }
        let e = evaluate::<T>(lambda, rho, &cfg.screen, screen_seed)?;
        used += e.probes;
        screened.push(Candidate {
            lambda: lambda.clone(),
            rho: rho.clone(),
            threshold_estimate: e.estimate,
            screening: Some(e),
            refinement: None,
        });
    }
    screened.sort_by(rank);

    if !exhausted && pending.is_empty() && !screened.is_empty() {
        let quota = ((screened.len() as f64 * cfg.refine_fraction).ceil() as usize).max(1);
        let leader = screened[0].threshold_estimate;
        let se = |c: &Candidate| {
            let e = c.screening.as_ref().expect("screened");
            (0.5 * (e.upper - e.lower)).max(cfg.screen.threshold.resolution)
        };
        let split = screened
            .iter()
            .enumerate()
            .take_while(|(i, c)| *i < quota || leader - c.threshold_estimate <= se(c))
            .count();
        pending = screened.drain(..split).collect();
    }

    let mut refined = Vec::with_capacity(pending.len());
    let mut rest = Vec::new();
    for mut c in pending {
        if exhausted || over(used) {
            exhausted = true;
            if c.screening.is_some() {
                rest.push(c);
            }
            continue;
        }
        let e = evaluate::<T>(&c.lambda, &c.rho, &cfg.refine, refine_seed)?;
        used += e.probes;
        c.threshold_estimate = e.estimate;
        c.refinement = Some(e);
        refined.push(c);
    }
    refined.sort_by(rank);
    rest.extend(screened);
    rest.sort_by(rank);
    refined.extend(rest);
    Ok(OptimizeResult {
        ranked: refined,
        budget_exhausted: exhausted,
        probes_used: used,
        config: cfg.clone(),
    })
}

/// One row per ranked candidate.
pub fn write_candidates_csv<W: Write>(ranked: &[Candidate], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "lambda_text",
        "rho_text",
        "threshold_estimate",
        "lower",
        "upper",
        "probes",
        "seed",
        "refined",
    ])?;
    for c in ranked {
        let (lower, upper, probes, seed) = c.evidence().map_or((f64::NAN, f64::NAN, 0, 0), |e| {
            (e.lower, e.upper, e.probes, e.seed)
        });
        w.write_record([
            c.lambda.to_string(),
            c.rho.to_string(),
            c.threshold_estimate.to_string(),
            lower.to_string(),
            upper.to_string(),
            probes.to_string(),
            seed.to_string(),
            c.is_refined().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
