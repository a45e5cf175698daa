use super::{
    value_matches, RecoveryError, RecoveryOptions, RecoveryReport, RecoveryState, Round, Rule,
    Schedule, StopReason, VerificationEvent,
};
use crate::ensemble::{MeasurementVector, SensingGraph, SignalVector};
use crate::prefetch::prefetch;
use crate::scalar::Scalar;

/// Hooks called by the engine around every round.
pub trait RecoveryObserver<T: Scalar> {
    fn before_round(&mut self, _state: &RecoveryState<'_, T>, _round: Round) {}

    /// `events` holds exactly the verifications made in this round.
    fn after_round(
        &mut self,
        _state: &RecoveryState<'_, T>,
        _round: Round,
        _events: &[VerificationEvent<T>],
    ) {
    }

    fn end_iteration(&mut self, _state: &RecoveryState<'_, T>) {}

    /// Whether `after_round` reads its events. When false, and the run does
    /// not record events, rounds skip building them.
    fn wants_events(&self) -> bool {
        true
    }
}

struct NoObserver;

/// Buffers reused by every round 1 of a run.
#[derive(Default)]
struct Scratch {
    in_class: Vec<bool>,
    parent: Vec<u32>,
    links: Vec<(u32, u32)>,
    members: Vec<(u32, u32)>,
    seen: Vec<u32>,
    class: Vec<usize>,
    touched: Vec<usize>,
    deferred_zeros: Vec<usize>,
}

impl<T: Scalar> RecoveryObserver<T> for NoObserver {
    fn wants_events(&self) -> bool {
        false
    }
}

/// Runs SBB to completion.
pub fn run_sbb<T: Scalar>(
    graph: &SensingGraph<T>,
    measurements: &MeasurementVector<T>,
    options: &RecoveryOptions,
    oracle: Option<&SignalVector<T>>,
) -> Result<RecoveryReport<T>, RecoveryError> {
    run_sbb_observed(graph, measurements, options, oracle, &mut NoObserver)
}

pub fn run_sbb_observed<T: Scalar, O: RecoveryObserver<T> + ?Sized>(
    graph: &SensingGraph<T>,
    measurements: &MeasurementVector<T>,
    options: &RecoveryOptions,
    oracle: Option<&SignalVector<T>>,
    observer: &mut O,
) -> Result<RecoveryReport<T>, RecoveryError> {
    run_with(graph, measurements, options, oracle, observer, None)
}

fn run_with<T: Scalar, O: RecoveryObserver<T> + ?Sized>(
    graph: &SensingGraph<T>,
    measurements: &MeasurementVector<T>,
    options: &RecoveryOptions,
    oracle: Option<&SignalVector<T>>,
    observer: &mut O,
    dense_override: Option<bool>,
) -> Result<RecoveryReport<T>, RecoveryError> {
    let mut state = RecoveryState::new(graph, measurements, oracle, options.tolerances)?;
    state.dense_override = dense_override;
    state.record_events = options.record_events;
    state.emit = options.record_events || observer.wants_events();
    let mut trajectory = Vec::new();
    let mut unverified = vec![state.unverified_fraction()];
    if let Some(a) = state.unverified_nonzero_fraction() {
        trajectory.push(a);
    }
    let mut scratch = Scratch::default();
    let stop_reason = loop {
        if state.all_verified() {
            break StopReason::AllVerified;
        }
        if state.iteration >= options.max_iterations {
            break StopReason::IterationCap;
        }
        state.iteration += 1;
        let before = state.verified_count();

        state.round = Round::One;
        observer.before_round(&state, Round::One);
        let ev = match options.schedule {
            Schedule::Parallel => round_one(&mut state, &mut scratch)?,
            Schedule::FixedPoint => fixed_point(&mut state, Round::One)?,
        };
        observer.after_round(&state, Round::One, &ev);

        state.round = Round::Two;
        observer.before_round(&state, Round::Two);
        let ev = match options.schedule {
            Schedule::Parallel => round_two(&mut state, &mut scratch.deferred_zeros)?,
            Schedule::FixedPoint => fixed_point(&mut state, Round::Two)?,
        };
        observer.after_round(&state, Round::Two, &ev);
        observer.end_iteration(&state);

        unverified.push(state.unverified_fraction());
        if let Some(a) = state.unverified_nonzero_fraction() {
            trajectory.push(a);
        }
        if state.verified_count() == before {
            break if state.all_verified() {
                StopReason::AllVerified
            } else {
                StopReason::Stalled
            };
        }
    };

    let correct = match oracle {
        Some(o) => o
            .values()
            .iter()
            .zip(&state.value)
            .all(|(&t, &x)| value_matches(&state.tol, x, t)),
        None => true,
    };
    Ok(RecoveryReport {
        success: state.all_verified() && correct,
        stop_reason,
        iterations_run: state.iteration,
        verified_count: state.verified_count(),
        estimate: std::mem::take(&mut state.value),
        events: std::mem::take(&mut state.events),
        trajectory,
        unverified_trajectory: unverified,
    })
}

/// One evaluation of D1CN and ECN on the residuals as they stand. Classes
/// are checks with equal residuals linked through shared unverified
/// variables, so only classes containing a check changed since the last
/// round 1 can yield anything new. Non-zero verifications are applied; the
/// ECN zero verifications are kept for round 2.
fn round_one<T: Scalar>(
    state: &mut RecoveryState<'_, T>,
    scratch: &mut Scratch,
) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
    let dirty = state.take_dirty(Round::One);
    let graph = state.graph;
    if scratch.in_class.len() != graph.m() {
        scratch.in_class = vec![false; graph.m()];
        scratch.parent = (0..graph.m() as u32).collect();
    }
    let mut proposals = std::mem::take(&mut state.batch.proposals);
    proposals.clear();
    if state.is_dense(dirty.len()) {
        scan_variables(state, scratch, &mut proposals);
    } else {
        search_from_dirty(state, scratch, &dirty, &mut proposals);
    }
    state.batch.proposals = proposals;
    state.apply_batch()
}

const PREFETCH_AHEAD: usize = 16;

/// Hints the cells of the checks adjacent to `v` into cache.
#[inline]
fn prefetch_checks<T: Scalar>(state: &RecoveryState<'_, T>, v: usize) {
    if v < state.graph.n() && !state.verified[v] {
        for &c in state.graph.var_adj(v).0 {
            prefetch(&state.checks, c as usize);
        }
    }
}

/// Round 1 by one pass over the unverified variables: each proposes itself
/// to degree-1 neighbours and links its equal-valued neighbours.
fn scan_variables<T: Scalar>(
    state: &RecoveryState<'_, T>,
    scratch: &mut Scratch,
    proposals: &mut Vec<(u32, (T, Rule))>,
) {
    let graph = state.graph;
    scratch.links.clear();
    for v in 0..graph.n() {
        prefetch_checks(state, v + PREFETCH_AHEAD);
        if state.verified[v] {
            continue;
        }
        let (cs, ws) = graph.var_adj(v);
        for i in 0..cs.len() {
            let cell = &state.checks[cs[i] as usize];
            if cell.degree == 0 || state.is_zero(cell.residual) {
                continue;
            }
            if cell.degree == 1 {
                proposals.push((v as u32, (cell.residual / ws[i], Rule::D1cn)));
            }
            for j in 0..i {
                let other = &state.checks[cs[j] as usize];
                if other.degree > 0 && state.tol.approx_eq(other.residual, cell.residual) {
                    scratch.links.push((cs[i], cs[j]));
                }
            }
        }
    }
    let parent = &mut scratch.parent;
    let find = |parent: &mut Vec<u32>, mut x: u32| {
        while parent[x as usize] != x {
            let up = parent[parent[x as usize] as usize];
            parent[x as usize] = up;
            x = up;
        }
        x
    };
    for &(a, b) in &scratch.links {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb) as usize] = ra.min(rb);
        }
    }
    scratch.members.clear();
    for &(a, b) in &scratch.links {
        for x in [a, b] {
            let root = find(parent, x);
            scratch.members.push((root, x));
        }
    }
    for &(a, b) in &scratch.links {
        parent[a as usize] = a;
        parent[b as usize] = b;
    }
    let mut members = std::mem::take(&mut scratch.members);
    members.sort_unstable();
    members.dedup();
    let mut starts: Vec<usize> = Vec::new();
    for k in 0..members.len() {
        if k == 0 || members[k].0 != members[k - 1].0 {
            starts.push(k);
        }
    }
    starts.push(members.len());
    for g in 0..starts.len() - 1 {
        for (ahead, row) in [(2 * PREFETCH_AHEAD, false), (PREFETCH_AHEAD, true)] {
            if g + ahead + 1 < starts.len() {
                for &(_, c) in &members[starts[g + ahead]..starts[g + ahead + 1]] {
                    if row {
                        graph.prefetch_chk_row(c as usize);
                        prefetch(&state.checks, c as usize);
                    } else {
                        graph.prefetch_chk_offset(c as usize);
                    }
                }
            }
        }
        scratch.class.clear();
        scratch.class.extend(
            members[starts[g]..starts[g + 1]]
                .iter()
                .map(|&(_, c)| c as usize),
        );
        process_class(state, scratch, proposals);
    }
    scratch.members = members;
}

/// Round 1 restricted to dirty checks: D1CN on each, and a search for the
/// class of each through neighbouring variables.
fn search_from_dirty<T: Scalar>(
    state: &RecoveryState<'_, T>,
    scratch: &mut Scratch,
    dirty: &[u32],
    proposals: &mut Vec<(u32, (T, Rule))>,
) {
    let graph = state.graph;
    let mut from_classes = Vec::new();
    for &c in dirty {
        let c = c as usize;
        if !state.is_active_nonzero(c) {
            continue;
        }
        let r = state.checks[c].residual;
        if state.checks[c].degree == 1 {
            let (v, w) = state
                .unverified_neighbors(c)
                .next()
                .expect("degree-1 check");
            proposals.push((v as u32, (r / w, Rule::D1cn)));
        }
        if scratch.in_class[c] {
            continue;
        }
        scratch.class.clear();
        scratch.class.push(c);
        scratch.in_class[c] = true;
        scratch.seen.push(c as u32);
        let mut head = 0;
        while head < scratch.class.len() {
            let a = scratch.class[head];
            head += 1;
            for (v, _) in state.unverified_neighbors(a) {
                for &b in graph.var_adj(v).0 {
                    let b = b as usize;
                    let cell = &state.checks[b];
                    if !scratch.in_class[b]
                        && cell.degree > 0
                        && state.tol.approx_eq(cell.residual, r)
                    {
                        scratch.in_class[b] = true;
                        scratch.seen.push(b as u32);
                        scratch.class.push(b);
                    }
                }
            }
        }
        process_class(state, scratch, &mut from_classes);
    }
    for c in scratch.seen.drain(..) {
        scratch.in_class[c as usize] = false;
    }
    proposals.append(&mut from_classes);
}

/// ECN on `scratch.class`: a unique common neighbour is proposed with the
/// shared value, the other neighbours are deferred as zeros.
fn process_class<T: Scalar>(
    state: &RecoveryState<'_, T>,
    scratch: &mut Scratch,
    proposals: &mut Vec<(u32, (T, Rule))>,
) {
    let Scratch {
        class,
        touched,
        deferred_zeros,
        ..
    } = scratch;
    if class.len() < 2 {
        return;
    }
    class.sort_unstable();
    touched.clear();
    for &a in class.iter() {
        touched.extend(state.unverified_neighbors(a).map(|(v, _)| v));
    }
    touched.sort_unstable();
    let size = class.len();
    let mut common = None;
    let mut unique = true;
    for run in touched.chunk_by(|a, b| a == b) {
        if run.len() == size {
            unique &= common.is_none();
            common = Some(run[0]);
        } else {
            deferred_zeros.push(run[0]);
        }
    }
    if let (Some(u), true) = (common, unique) {
        let w = state
            .graph
            .weight(class[0], u)
            .expect("common neighbour is adjacent");
        proposals.push((
            u as u32,
            (state.checks[class[0]].residual / w, Rule::EcnUnique),
        ));
    }
}

/// ZCN on checks changed since the last round 2, plus the deferred ECN zeros.
fn round_two<T: Scalar>(
    state: &mut RecoveryState<'_, T>,
    deferred_zeros: &mut Vec<usize>,
) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
    let dirty = state.take_dirty(Round::Two);
    let mut events = Vec::new();
    let mut targets = Vec::new();
    // Zero peels leave every residual unchanged, so verifying in place
    // matches a batched evaluation.
    if state.is_dense(dirty.len()) {
        let graph = state.graph;
        for v in 0..graph.n() {
            prefetch_checks(state, v + PREFETCH_AHEAD);
            if state.verified[v] {
                continue;
            }
            let hit = graph.var_adj(v).0.iter().any(|&c| {
                let cell = &state.checks[c as usize];
                cell.degree > 0 && state.is_zero(cell.residual)
            });
            if hit {
                if let Some(e) = state.verify_batched(v, T::zero(), Rule::Zcn)? {
                    if state.emit {
                        events.push(e);
                    }
                }
            }
        }
    } else {
        for &c in &dirty {
            let c = c as usize;
            if state.checks[c].degree == 0 || !state.is_zero(state.checks[c].residual) {
                continue;
            }
            targets.clear();
            targets.extend(state.unverified_neighbors(c).map(|(v, _)| v));
            for &v in &targets {
                if let Some(e) = state.verify_batched(v, T::zero(), Rule::Zcn)? {
                    if state.emit {
                        events.push(e);
                    }
                }
            }
        }
    }
    for v in deferred_zeros.drain(..) {
        if let Some(e) = state.verify_batched(v, T::zero(), Rule::EcnZero)? {
            if state.emit {
                events.push(e);
            }
        }
    }
    Ok(events)
}

/// The round's rules applied in their fixed order until none fires.
fn fixed_point<T: Scalar>(
    state: &mut RecoveryState<'_, T>,
    round: Round,
) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
    let mut all = Vec::new();
    loop {
        let before = all.len();
        match round {
            Round::One => {
                all.extend(state.apply_d1cn()?);
                all.extend(state.apply_ecn_unique()?);
            }
            Round::Two => {
                all.extend(state.apply_zcn()?);
                all.extend(state.apply_ecn_zero()?);
            }
        }
        if all.len() == before {
            return Ok(all);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{
        measure, sample_graph, sample_signal, DegreeDistribution, EnsembleSpec, SignalModel,
    };
    use crate::recovery::check_false_verification;
    use crate::scalar::Tolerances;
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn hand() -> (SensingGraph<f64>, SignalVector<f64>) {
        let g = SensingGraph::from_edges(
            4,
            3,
            &[
                (0, 0, 1.0),
                (0, 1, 1.0),
                (1, 1, 1.0),
                (1, 2, 1.0),
                (2, 0, 1.0),
                (2, 2, 1.0),
                (2, 3, 1.0),
            ],
        )
        .unwrap();
        (g, SignalVector::new(vec![5.0, 0.0, 0.0, 7.0]))
    }

    fn instance<T: Scalar>(
        n: usize,
        lambda: &str,
        rho: &str,
        alpha: f64,
        seed: u64,
    ) -> (SensingGraph<T>, SignalVector<T>, MeasurementVector<T>) {
        let spec = EnsembleSpec::new(n, lambda.parse().unwrap(), rho.parse().unwrap(), alpha);
        let g = sample_graph(&spec, seed).unwrap();
        let v = sample_signal(n, alpha, &spec.signal_model, seed).unwrap();
        let c = measure(&g, &v).unwrap();
        (g, v, c)
    }

    #[test]
    fn hand_instance_fixed_point_two_iterations() {
        let (g, v) = hand();
        let c = measure(&g, &v).unwrap();
        let opts = RecoveryOptions {
            schedule: Schedule::FixedPoint,
            ..Default::default()
        };
        let rep = run_sbb(&g, &c, &opts, Some(&v)).unwrap();
        assert!(rep.success);
        assert!(rep.iterations_run <= 2);
        assert_eq!(rep.stop_reason, StopReason::AllVerified);
        assert_eq!(rep.estimate, vec![5.0, 0.0, 0.0, 7.0]);
        assert!(check_false_verification(&rep, &v, &opts.tolerances));
    }

    #[test]
    fn hand_instance_parallel() {
        let (g, v) = hand();
        let c = measure(&g, &v).unwrap();
        let rep = run_sbb(&g, &c, &RecoveryOptions::default(), Some(&v)).unwrap();
        assert!(rep.success);
        assert_eq!(rep.iterations_run, 3);
        let trace: Vec<(usize, usize, Rule, u8)> = rep
            .events
            .iter()
            .map(|e| (e.variable, e.iteration, e.rule, e.round))
            .collect();
        assert_eq!(
            trace,
            vec![
                (1, 1, Rule::Zcn, 2),
                (2, 1, Rule::Zcn, 2),
                (0, 2, Rule::D1cn, 1),
                (3, 3, Rule::D1cn, 1)
            ]
        );
        assert_eq!(rep.trajectory, vec![0.5, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn all_zero_signal_first_iteration() {
        let (g, _) = hand();
        let v = SignalVector::new(vec![0.0; 4]);
        let c = measure(&g, &v).unwrap();
        let rep = run_sbb(&g, &c, &RecoveryOptions::default(), Some(&v)).unwrap();
        assert!(rep.success);
        assert_eq!(rep.iterations_run, 1);
        assert_eq!(rep.stop_reason, StopReason::AllVerified);
        assert_eq!(rep.trajectory, vec![0.0, 0.0]);
    }

    #[test]
    fn runs_without_oracle() {
        let (g, v) = hand();
        let c = measure(&g, &v).unwrap();
        let rep = run_sbb(&g, &c, &RecoveryOptions::default(), None).unwrap();
        assert!(rep.success);
        assert!(rep.trajectory.is_empty());
        assert_eq!(rep.estimate, v.values());
    }

    #[test]
    fn stalls_on_dense_signal() {
        let (g, v, c) = instance::<f64>(2000, "x^3", "x^6", 0.9, 4);
        let rep = run_sbb(&g, &c, &RecoveryOptions::simulation(), Some(&v)).unwrap();
        assert!(!rep.success);
        assert_eq!(rep.stop_reason, StopReason::Stalled);
        assert!(rep.final_alpha().unwrap() > 0.5);
        let t = &rep.trajectory;
        assert_eq!(t[t.len() - 1], t[t.len() - 2]);
    }

    #[test]
    fn iteration_cap_respected() {
        let (g, v, c) = instance::<f64>(2000, "x^4", "x^5", 0.3, 4);
        let opts = RecoveryOptions {
            max_iterations: 1,
            ..RecoveryOptions::simulation()
        };
        let rep = run_sbb(&g, &c, &opts, Some(&v)).unwrap();
        assert_eq!(rep.iterations_run, 1);
        assert_eq!(rep.stop_reason, StopReason::IterationCap);
        assert_eq!(rep.trajectory.len(), 2);
    }

    #[test]
    fn low_density_recovers() {
        let (g, v, c) = instance::<f64>(5000, "x^4", "x^5", 0.3, 11);
        let rep = run_sbb(&g, &c, &RecoveryOptions::simulation(), Some(&v)).unwrap();
        assert!(rep.success);
        assert_eq!(rep.estimate, v.values());
    }

    #[test]
    fn rational_and_float_runs_agree() {
        for seed in 0..5 {
            let (gr, vr, cr) = instance::<Rational64>(400, "x^3", "x^6", 0.35, seed);
            let (gf, vf, cf) = instance::<f64>(400, "x^3", "x^6", 0.35, seed);
            let opts = RecoveryOptions {
                tolerances: Tolerances::exact(),
                ..Default::default()
            };
            let rr = run_sbb(&gr, &cr, &opts, Some(&vr)).unwrap();
            let rf = run_sbb(&gf, &cf, &opts, Some(&vf)).unwrap();
            assert_eq!(rr.success, rf.success);
            assert_eq!(rr.iterations_run, rf.iterations_run);
            assert_eq!(rr.trajectory, rf.trajectory);
            assert_eq!(rr.events.len(), rf.events.len());
        }
    }

    #[test]
    fn f32_runs() {
        let (g, v, c) = instance::<f32>(1000, "x^4", "x^5", 0.2, 3);
        let rep = run_sbb(&g, &c, &RecoveryOptions::default(), Some(&v)).unwrap();
        assert!(check_false_verification(&rep, &v, &Tolerances::default()));
    }

    #[test]
    fn schedules_reach_same_verified_set() {
        let mut differing = 0;
        for seed in 0..100u64 {
            let alpha = 0.25 + 0.4 * (seed as f64 / 100.0);
            let (g, v, c) = instance::<f64>(300, "0.5x^3+0.5x^5", "x^8", alpha, seed);
            let par = run_sbb(&g, &c, &RecoveryOptions::simulation(), Some(&v)).unwrap();
            let fix = run_sbb(
                &g,
                &c,
                &RecoveryOptions {
                    schedule: Schedule::FixedPoint,
                    ..RecoveryOptions::simulation()
                },
                Some(&v),
            )
            .unwrap();
            assert_eq!(par.success, fix.success, "seed {seed}");
            assert!(fix.iterations_run <= par.iterations_run);
            if par.verified_count != fix.verified_count {
                differing += 1;
            }
        }
        assert_eq!(differing, 0);
    }

    #[test]
    fn wide_integer_signal_exact_mode() {
        let spec = EnsembleSpec::new(
            500,
            "x^3".parse::<DegreeDistribution>().unwrap(),
            "x^6".parse().unwrap(),
            0.1,
        );
        let g: SensingGraph<Rational64> = sample_graph(&spec, 9).unwrap();
        let model = SignalModel::Integers {
            lo: -1_000_000_000,
            hi: 1_000_000_000,
        };
        let v = sample_signal(500, 0.1, &model, 9).unwrap();
        let c = measure(&g, &v).unwrap();
        let opts = RecoveryOptions {
            tolerances: Tolerances::exact(),
            ..Default::default()
        };
        let rep = run_sbb(&g, &c, &opts, Some(&v)).unwrap();
        assert!(rep.success);
        assert!(check_false_verification(&rep, &v, &opts.tolerances));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn progress_is_monotone(seed in 0u64..10_000, alpha in 0.05f64..0.9) {
            let (g, v, c) = instance::<f64>(300, "0.7x^3+0.3x^6", "x^7", alpha, seed);
            let rep = run_sbb(&g, &c, &RecoveryOptions::simulation(), Some(&v)).unwrap();
            prop_assert!(rep.trajectory.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(rep.unverified_trajectory.windows(2).all(|w| w[1] <= w[0]));
            prop_assert_eq!(rep.trajectory.len(), rep.iterations_run + 1);
        }

        #[test]
        fn no_false_verification(seed in 0u64..10_000, alpha in 0.05f64..0.9) {
            let (g, v, c) = instance::<f64>(300, "x^4", "0.5x^4+0.5x^6", alpha, seed);
            let opts = RecoveryOptions { record_events: true, ..RecoveryOptions::simulation() };
            let rep = run_sbb(&g, &c, &opts, Some(&v)).unwrap();
            prop_assert!(check_false_verification(&rep, &v, &Tolerances::exact()));
            let mut seen = vec![false; 300];
            for e in &rep.events {
                prop_assert!(!seen[e.variable]);
                seen[e.variable] = true;
            }
            prop_assert_eq!(rep.events.len(), rep.verified_count);
        }

        #[test]
        fn scan_and_search_agree(seed in 0u64..10_000, alpha in 0.05f64..0.8, loose in any::<bool>()) {
            let (g, v, c) = instance::<f64>(400, "0.5x^3+0.5x^5", "x^6", alpha, seed);
            let opts = RecoveryOptions {
                record_events: true,
                tolerances: if loose { Tolerances::default() } else { Tolerances::exact() },
                ..Default::default()
            };
            let mut runs = [true, false].map(|dense| {
                run_with(&g, &c, &opts, Some(&v), &mut NoObserver, Some(dense)).unwrap()
            });
            for r in runs.iter_mut() {
                r.events.sort_by_key(|e| (e.iteration, e.round, e.variable));
            }
            prop_assert_eq!(&runs[0], &runs[1]);
        }

        #[test]
        fn default_tolerances_agree_with_exact(seed in 0u64..10_000, alpha in 0.1f64..0.7) {
            let (g, v, c) = instance::<f64>(300, "x^3", "x^5", alpha, seed);
            let exact = run_sbb(&g, &c, &RecoveryOptions::simulation(), Some(&v)).unwrap();
            let loose = run_sbb(&g, &c, &RecoveryOptions::default(), Some(&v)).unwrap();
            prop_assert_eq!(exact.trajectory, loose.trajectory);
        }
    }
}
