use std::cmp::Ordering;

use super::{RecoveryError, Round, Rule, VerificationEvent};
use crate::ensemble::{MeasurementVector, SensingGraph, SignalVector};
use crate::scalar::{Scalar, Tolerances};

const DIRTY_R1: u8 = 1;
const DIRTY_R2: u8 = 2;

#[derive(Clone, Copy, Debug)]
pub(crate) struct CheckCell<T> {
    pub(crate) residual: T,
    pub(crate) degree: u32,
    // Changed since the last round-1 / round-2 evaluation.
    dirty: u8,
}

/// Reusable buffers for batched verification.
#[derive(Clone, Debug)]
pub(crate) struct Batch<T> {
    pub(crate) proposals: Vec<(u32, (T, Rule))>,
    proposals_tmp: Vec<(u32, (T, Rule))>,
    pub(crate) keys_tmp: Vec<u32>,
}

impl<T> Default for Batch<T> {
    fn default() -> Self {
        Batch {
            proposals: Vec::new(),
            proposals_tmp: Vec::new(),
            keys_tmp: Vec::new(),
        }
    }
}

/// Evolving state of one recovery run over a fixed graph.
///
/// Checks are never removed; peeling a variable lowers the residual degree
/// of its checks and subtracts its weighted value from their residuals.
#[derive(Clone, Debug)]
pub struct RecoveryState<'a, T> {
    pub(crate) graph: &'a SensingGraph<T>,
    pub(crate) oracle: Option<&'a SignalVector<T>>,
    pub(crate) tol: Tolerances,
    pub(crate) scale: f64,
    pub(crate) checks: Vec<CheckCell<T>>,
    pub(crate) verified: Vec<bool>,
    pub(crate) value: Vec<T>,
    verified_count: usize,
    unverified_nonzero: usize,
    pub(crate) iteration: usize,
    pub(crate) round: Round,
    dirty_r1: Vec<u32>,
    dirty_r2: Vec<u32>,
    pub(crate) batch: Batch<T>,
    pub(crate) record_events: bool,
    // Whether batch operations return the events they make.
    pub(crate) emit: bool,
    // Forces whole-graph scans on or off; `None` decides by dirty count.
    pub(crate) dense_override: Option<bool>,
    pub(crate) events: Vec<VerificationEvent<T>>,
}

impl<'a, T: Scalar> RecoveryState<'a, T> {
    /// Residuals start at the measurements and residual degrees at the full
    /// check degrees; nothing is verified.
    pub fn new(
        graph: &'a SensingGraph<T>,
        measurements: &MeasurementVector<T>,
        oracle: Option<&'a SignalVector<T>>,
        tol: Tolerances,
    ) -> Result<Self, RecoveryError> {
        if measurements.len() != graph.m() {
            return Err(RecoveryError::DimensionMismatch {
                measurements: measurements.len(),
                checks: graph.m(),
            });
        }
        if let Some(o) = oracle {
            if o.len() != graph.n() {
                return Err(RecoveryError::OracleMismatch {
                    oracle: o.len(),
                    variables: graph.n(),
                });
            }
        }
        let scale = measurements
            .values()
            .iter()
            .map(|x| x.abs().to_real())
            .fold(0.0, f64::max);
        let checks = measurements
            .values()
            .iter()
            .enumerate()
            .map(|(c, &r)| CheckCell {
                residual: r,
                degree: graph.chk_degree(c) as u32,
                dirty: DIRTY_R1 | DIRTY_R2,
            })
            .collect();
        let m = graph.m();
        Ok(RecoveryState {
            graph,
            oracle,
            tol,
            scale,
            checks,
            verified: vec![false; graph.n()],
            value: vec![T::zero(); graph.n()],
            verified_count: 0,
            unverified_nonzero: oracle.map_or(0, |o| o.k()),
            iteration: 0,
            round: Round::One,
            dirty_r1: (0..m as u32).collect(),
            dirty_r2: (0..m as u32).collect(),
            batch: Batch::default(),
            record_events: true,
            emit: true,
            dense_override: None,
            events: Vec::new(),
        })
    }

    pub fn graph(&self) -> &'a SensingGraph<T> {
        self.graph
    }

    pub fn oracle(&self) -> Option<&'a SignalVector<T>> {
        self.oracle
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn residual_value(&self, c: usize) -> T {
        self.checks[c].residual
    }

    pub fn residual_degree(&self, c: usize) -> u32 {
        self.checks[c].degree
    }

    pub fn residual_values(&self) -> Vec<T> {
        self.checks.iter().map(|k| k.residual).collect()
    }

    pub fn residual_degrees(&self) -> Vec<u32> {
        self.checks.iter().map(|k| k.degree).collect()
    }

    pub fn is_verified(&self, v: usize) -> bool {
        self.verified[v]
    }

    pub fn verified_flags(&self) -> &[bool] {
        &self.verified
    }

    /// Value assigned to `v`, if verified.
    pub fn verified_value(&self, v: usize) -> Option<T> {
        self.verified[v].then_some(self.value[v])
    }

    pub fn verified_count(&self) -> usize {
        self.verified_count
    }

    pub fn all_verified(&self) -> bool {
        self.verified_count == self.graph.n()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn events(&self) -> &[VerificationEvent<T>] {
        &self.events
    }

    /// Fraction of variables that are non-zero and still unverified, when
    /// the true signal is attached.
    pub fn unverified_nonzero_fraction(&self) -> Option<f64> {
        self.oracle
            .map(|_| self.unverified_nonzero as f64 / self.graph.n() as f64)
    }

    pub fn unverified_fraction(&self) -> f64 {
        (self.graph.n() - self.verified_count) as f64 / self.graph.n() as f64
    }

    pub(crate) fn is_zero(&self, x: T) -> bool {
        self.tol.is_zero(x, self.scale)
    }

    /// Residual of `c` is non-zero and it still has unverified neighbours.
    pub(crate) fn is_active_nonzero(&self, c: usize) -> bool {
        self.checks[c].degree > 0 && !self.is_zero(self.checks[c].residual)
    }

    pub(crate) fn unverified_neighbors(&self, c: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let (vars, ws) = self.graph.chk_adj(c);
        vars.iter()
            .zip(ws)
            .filter(move |(&v, _)| !self.verified[v as usize])
            .map(|(&v, &w)| (v as usize, w))
    }

    /// Whether a round over `dirty` checks should scan every variable instead.
    pub(crate) fn is_dense(&self, dirty: usize) -> bool {
        self.dense_override.unwrap_or(dirty > self.graph.m() / 4)
    }

    /// Checks changed since the last evaluation of `round`; ascending unless
    /// the list is dense.
    pub(crate) fn take_dirty(&mut self, round: Round) -> Vec<u32> {
        let (mut list, bit) = match round {
            Round::One => (std::mem::take(&mut self.dirty_r1), DIRTY_R1),
            Round::Two => (std::mem::take(&mut self.dirty_r2), DIRTY_R2),
        };
        if !self.is_dense(list.len()) {
            let max = self.graph.m().saturating_sub(1) as u32;
            super::radix::sort_keys(&mut list, &mut self.batch.keys_tmp, max);
        }
        for &c in &list {
            self.checks[c as usize].dirty &= !bit;
        }
        list
    }

    /// Marks `variable` verified with `value` and peels it: every
    /// neighbouring check loses `weight * value` from its residual and one
    /// from its residual degree.
    pub fn verify_and_peel(
        &mut self,
        variable: usize,
        value: T,
        rule: Rule,
    ) -> Result<VerificationEvent<T>, RecoveryError> {
        if self.verified[variable] {
            return Err(RecoveryError::AlreadyVerified(variable));
        }
        Ok(self
            .verify_batched(variable, value, rule)?
            .expect("unverified variable"))
    }

    /// ZCN over all checks in ascending order: every unverified neighbour of
    /// a zero-valued check is verified as zero.
    pub fn apply_zcn(&mut self) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
        let mut out = Vec::new();
        for c in 0..self.graph.m() {
            if self.checks[c].degree == 0 || !self.is_zero(self.checks[c].residual) {
                continue;
            }
            let targets: Vec<usize> = self.unverified_neighbors(c).map(|(v, _)| v).collect();
            for v in targets {
                out.push(self.verify_and_peel(v, T::zero(), Rule::Zcn)?);
            }
        }
        Ok(out)
    }

    /// D1CN over all checks: each degree-1 check with a non-zero residual
    /// verifies its remaining neighbour with `residual / weight`.
    ///
    /// All assignments are read before any is applied; two checks implying
    /// different values for one variable raise `ConflictingAssignment`.
    pub fn apply_d1cn(&mut self) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
        let mut proposals = Vec::new();
        for c in 0..self.graph.m() {
            if self.checks[c].degree != 1 || self.is_zero(self.checks[c].residual) {
                continue;
            }
            let (v, w) = self
                .unverified_neighbors(c)
                .next()
                .expect("degree-1 check has one unverified neighbour");
            proposals.push((v, self.checks[c].residual / w, Rule::D1cn));
        }
        self.apply_proposals(proposals)
    }

    /// Both ECN rules over all checks.
    pub fn apply_ecn(&mut self) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
        self.apply_ecn_rules(true, true)
    }

    /// Only the zero rule of ECN (non-common neighbours are zero).
    pub fn apply_ecn_zero(&mut self) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
        self.apply_ecn_rules(true, false)
    }

    /// Only the unique-common-neighbour rule of ECN.
    pub fn apply_ecn_unique(&mut self) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
        self.apply_ecn_rules(false, true)
    }

    /// Classes are the maximal runs of sorted non-zero residuals whose
    /// consecutive members compare equal; only classes of two or more
    /// checks are used. Classes are handled in ascending order of their
    /// smallest check index, zero verifications before the unique one.
    fn apply_ecn_rules(
        &mut self,
        zero_rule: bool,
        unique_rule: bool,
    ) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
        let classes = self.equal_value_classes();
        let mut out = Vec::new();
        let mut count = vec![0usize; self.graph.n()];
        for class in classes {
            let mut touched = Vec::new();
            for &c in &class {
                for (v, _) in self.unverified_neighbors(c) {
                    if count[v] == 0 {
                        touched.push(v);
                    }
                    count[v] += 1;
                }
            }
            touched.sort_unstable();
            let common: Vec<usize> = touched
                .iter()
                .copied()
                .filter(|&v| count[v] == class.len())
                .collect();
            if zero_rule {
                for &v in &touched {
                    if count[v] < class.len() && !self.verified[v] {
                        out.push(self.verify_and_peel(v, T::zero(), Rule::EcnZero)?);
                    }
                }
            }
            if unique_rule && common.len() == 1 && !self.verified[common[0]] {
                let u = common[0];
                let c0 = class[0];
                let w = self
                    .graph
                    .weight(c0, u)
                    .expect("common neighbour is adjacent");
                out.push(self.verify_and_peel(u, self.checks[c0].residual / w, Rule::EcnUnique)?);
            }
            for v in touched {
                count[v] = 0;
            }
        }
        Ok(out)
    }

    /// Sort-and-link clustering of active non-zero residuals.
    pub(crate) fn equal_value_classes(&self) -> Vec<Vec<usize>> {
        let mut active: Vec<usize> = (0..self.graph.m())
            .filter(|&c| self.is_active_nonzero(c))
            .collect();
        let r = |c: usize| self.checks[c].residual;
        active.sort_by(|&a, &b| {
            r(a).partial_cmp(&r(b))
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut run: Vec<usize> = Vec::new();
        for c in active {
            if let Some(&last) = run.last() {
                if !self.tol.approx_eq(r(last), r(c)) {
                    if run.len() >= 2 {
                        classes.push(std::mem::take(&mut run));
                    }
                    run.clear();
                }
            }
            run.push(c);
        }
        if run.len() >= 2 {
            classes.push(run);
        }
        for class in &mut classes {
            class.sort_unstable();
        }
        classes.sort_by_key(|class| class[0]);
        classes
    }

    /// Applies `(variable, value, rule)` proposals. A variable proposed more
    /// than once must receive the same value; the first proposal's rule is
    /// recorded.
    pub(crate) fn apply_proposals(
        &mut self,
        proposals: Vec<(usize, T, Rule)>,
    ) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
        let mut batch = std::mem::take(&mut self.batch);
        batch.proposals.clear();
        batch
            .proposals
            .extend(proposals.into_iter().map(|(v, x, r)| (v as u32, (x, r))));
        self.batch = batch;
        self.apply_batch()
    }

    /// Verifies everything in `self.batch.proposals` at once, in ascending
    /// variable order, then peels it.
    pub(crate) fn apply_batch(&mut self) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
        let mut b = std::mem::take(&mut self.batch);
        let result = self.apply_batch_with(&mut b);
        b.proposals.clear();
        self.batch = b;
        result
    }

    fn apply_batch_with(
        &mut self,
        b: &mut Batch<T>,
    ) -> Result<Vec<VerificationEvent<T>>, RecoveryError> {
        let max_var = self.graph.n().saturating_sub(1) as u32;
        super::radix::sort(&mut b.proposals, &mut b.proposals_tmp, max_var);
        let mut events = Vec::new();
        for &(v, (x, rule)) in &b.proposals {
            if let Some(e) = self.verify_batched(v as usize, x, rule)? {
                if self.emit {
                    events.push(e);
                }
            }
        }
        Ok(events)
    }

    /// Verifies and peels `v` unless already verified with the same value.
    pub(crate) fn verify_batched(
        &mut self,
        v: usize,
        x: T,
        rule: Rule,
    ) -> Result<Option<VerificationEvent<T>>, RecoveryError> {
        if self.verified[v] {
            let first = self.value[v];
            if !super::value_matches(&self.tol, first, x) {
                return Err(RecoveryError::ConflictingAssignment {
                    variable: v,
                    first: first.to_real(),
                    second: x.to_real(),
                });
            }
            return Ok(None);
        }
        self.verified[v] = true;
        self.value[v] = x;
        self.verified_count += 1;
        if self.oracle.is_some_and(|o| !o.values()[v].is_zero()) {
            self.unverified_nonzero -= 1;
        }
        let graph = self.graph;
        let (checks, ws) = graph.var_adj(v);
        let nonzero = !x.is_zero();
        for (&c, &w) in checks.iter().zip(ws) {
            let cell = &mut self.checks[c as usize];
            if nonzero {
                cell.residual = cell.residual - w * x;
            }
            cell.degree -= 1;
            if cell.dirty & DIRTY_R1 == 0 {
                self.dirty_r1.push(c);
            }
            if cell.dirty & DIRTY_R2 == 0 {
                self.dirty_r2.push(c);
            }
            cell.dirty = DIRTY_R1 | DIRTY_R2;
        }
        let event = VerificationEvent {
            variable: v,
            value: x,
            rule,
            iteration: self.iteration,
            round: self.round.number(),
            half_round: 2,
        };
        if self.record_events {
            self.events.push(event.clone());
        }
        Ok(Some(event))
    }

    /// Residual values and degrees recomputed from scratch: with an oracle,
    /// `Σ w·v` over unverified neighbours; otherwise the measurement minus
    /// `Σ w·value` over verified neighbours.
    pub fn recompute_residuals(&self, measurements: &MeasurementVector<T>) -> (Vec<T>, Vec<u32>) {
        let m = self.graph.m();
        let mut values = Vec::with_capacity(m);
        let mut degrees = Vec::with_capacity(m);
        for c in 0..m {
            let (vars, ws) = self.graph.chk_adj(c);
            let mut deg = 0;
            let mut acc = match self.oracle {
                Some(_) => T::zero(),
                None => measurements.values()[c],
            };
            for (&v, &w) in vars.iter().zip(ws) {
                let v = v as usize;
                if self.verified[v] {
                    if self.oracle.is_none() {
                        acc = acc - w * self.value[v];
                    }
                } else {
                    deg += 1;
                    if let Some(o) = self.oracle {
                        acc = acc + w * o.values()[v];
                    }
                }
            }
            values.push(acc);
            degrees.push(deg);
        }
        (values, degrees)
    }
}
