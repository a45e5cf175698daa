#![allow(dead_code)]

use std::collections::BTreeSet;

use nbvb::ensemble::{
    measure, sample_graph_with, sample_signal, EnsembleSpec, MeasurementVector, SamplerOptions,
    SensingGraph, SignalVector,
};
use nbvb::recovery::{
    check_false_verification, predicted_round_one, predicted_round_two, run_sbb_observed,
    RecoveryObserver, RecoveryOptions, RecoveryState, Round, VerificationEvent,
};
use nbvb::scalar::Tolerances;

pub const LISTED: [(&str, &str, &str); 4] = [
    ("regular", "x^4", "x^5"),
    ("right_regular", "0.931x^3+0.035x^17+0.034x^18", "x^5"),
    ("left_regular", "x^4", "0.71x^3+0.183x^5+0.107x^20"),
    ("bi_irregular", "0.9x^3+0.1x^13", "0.9375x^4+0.0625x^20"),
];

pub fn spec(lambda: &str, rho: &str, n: usize, alpha: f64) -> EnsembleSpec {
    EnsembleSpec::new(n, lambda.parse().unwrap(), rho.parse().unwrap(), alpha)
}

pub struct Instance {
    pub graph: SensingGraph<f64>,
    pub signal: SignalVector<f64>,
    pub checks: MeasurementVector<f64>,
}

pub fn instance(spec: &EnsembleSpec, seed: u64, girth_six: bool) -> Instance {
    let plan = spec.plan().unwrap();
    let graph = sample_graph_with::<f64>(
        spec,
        &plan,
        seed,
        SamplerOptions {
            avoid_four_cycles: girth_six,
        },
    )
    .unwrap();
    let signal = sample_signal::<f64>(spec.n, spec.alpha, &spec.signal_model, seed).unwrap();
    let checks = measure(&graph, &signal).unwrap();
    Instance {
        graph,
        signal,
        checks,
    }
}

/// Compares each round's verified sets with the sets predicted from the
/// state just before the round.
#[derive(Default)]
pub struct RoundPrediction {
    predicted: Vec<usize>,
    pub rounds: usize,
    /// `(iteration, round, predicted only, verified only)`.
    pub mismatches: Vec<(usize, u8, Vec<usize>, Vec<usize>)>,
}

impl RecoveryObserver<f64> for RoundPrediction {
    fn before_round(&mut self, s: &RecoveryState<'_, f64>, r: Round) {
        self.predicted = match r {
            Round::One => predicted_round_one(s).unwrap(),
            Round::Two => predicted_round_two(s).unwrap(),
        };
    }

    fn after_round(&mut self, s: &RecoveryState<'_, f64>, r: Round, ev: &[VerificationEvent<f64>]) {
        self.rounds += 1;
        let truth = s.oracle().unwrap().values();
        let want_nonzero = r == Round::One;
        let got: BTreeSet<usize> = ev
            .iter()
            .map(|e| e.variable)
            .filter(|&v| (truth[v] != 0.0) == want_nonzero)
            .collect();
        let want: BTreeSet<usize> = self.predicted.iter().copied().collect();
        if got != want {
            self.mismatches.push((
                s.iteration(),
                r.number(),
                want.difference(&got).copied().collect(),
                got.difference(&want).copied().collect(),
            ));
        }
    }
}

pub fn prediction_run(inst: &Instance) -> RoundPrediction {
    let mut obs = RoundPrediction::default();
    run_sbb_observed(
        &inst.graph,
        &inst.checks,
        &RecoveryOptions::simulation(),
        Some(&inst.signal),
        &mut obs,
    )
    .unwrap();
    obs
}

/// Compares incremental residuals with a from-scratch recomputation at the
/// end of every iteration.
pub struct Bookkeeping<'a> {
    pub checks: &'a MeasurementVector<f64>,
    pub rel_tol: f64,
    pub boundaries: usize,
    pub failures: Vec<String>,
}

impl RecoveryObserver<f64> for Bookkeeping<'_> {
    fn wants_events(&self) -> bool {
        false
    }

    fn end_iteration(&mut self, s: &RecoveryState<'_, f64>) {
        self.boundaries += 1;
        let (values, degrees) = s.recompute_residuals(self.checks);
        if degrees != s.residual_degrees() {
            self.failures
                .push(format!("iteration {}: degrees differ", s.iteration()));
        }
        for (c, (&want, got)) in values.iter().zip(s.residual_values()).enumerate() {
            if (want - got).abs() > self.rel_tol * want.abs().max(got.abs()).max(1.0) {
                self.failures.push(format!(
                    "iteration {}: check {c} residual {got} != {want}",
                    s.iteration()
                ));
            }
        }
    }
}

pub fn bookkeeping_run(inst: &Instance, oracle: bool, tol: Tolerances) -> (usize, Vec<String>) {
    let mut obs = Bookkeeping {
        checks: &inst.checks,
        rel_tol: 1e-6,
        boundaries: 0,
        failures: Vec::new(),
    };
    let opts = RecoveryOptions {
        tolerances: tol,
        ..RecoveryOptions::simulation()
    };
    run_sbb_observed(
        &inst.graph,
        &inst.checks,
        &opts,
        oracle.then_some(&inst.signal),
        &mut obs,
    )
    .unwrap();
    (obs.boundaries, obs.failures)
}

/// Whether every recorded event matches the true value.
pub fn events_correct(inst: &Instance) -> (usize, bool) {
    let opts = RecoveryOptions {
        record_events: true,
        ..RecoveryOptions::simulation()
    };
    let r = nbvb::recovery::run_sbb(&inst.graph, &inst.checks, &opts, Some(&inst.signal)).unwrap();
    let ok = check_false_verification(&r, &inst.signal, &opts.tolerances)
        && r.events.iter().all(|e| {
            let t = inst.signal.values()[e.variable];
            (e.value - t).abs() <= Tolerances::default().eq_rel * e.value.abs().max(t.abs())
        });
    (r.events.len(), ok)
}
