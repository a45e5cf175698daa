use std::collections::BTreeMap;

use super::{RecoveryError, RecoveryState};
use crate::scalar::Scalar;

/// Counts of the check and variable classes used by the per-iteration
/// analysis, taken against the true signal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartitionSnapshot {
    /// `(check degree, unverified non-zero neighbours, unverified zero
    /// neighbours)` → number of checks. Every check is counted, fully peeled
    /// ones under `(d, 0, 0)`.
    pub n_counts: BTreeMap<(u32, u32, u32), usize>,
    /// `(variable degree, neighbouring checks with exactly one unverified
    /// non-zero neighbour)` → number of unverified non-zero variables.
    pub k_counts: BTreeMap<(u32, u32), usize>,
    /// `(variable degree, neighbouring zero-valued checks with unverified
    /// neighbours)` → number of unverified zero variables.
    pub delta_counts: BTreeMap<(u32, u32), usize>,
    /// Non-zero variables with exactly one such check, where that check has
    /// no unverified zero neighbour.
    pub k_hat_1: usize,
}

impl PartitionSnapshot {
    pub fn n_count(&self, dc: u32, i: u32, j: u32) -> usize {
        self.n_counts.get(&(dc, i, j)).copied().unwrap_or(0)
    }

    pub fn k_count(&self, dv: u32, i: u32) -> usize {
        self.k_counts.get(&(dv, i)).copied().unwrap_or(0)
    }

    pub fn delta_count(&self, dv: u32, i: u32) -> usize {
        self.delta_counts.get(&(dv, i)).copied().unwrap_or(0)
    }
}

struct Classified {
    // Per check: unverified non-zero and zero neighbour counts.
    nonzero: Vec<u32>,
    zero: Vec<u32>,
}

fn classify<T: Scalar>(state: &RecoveryState<'_, T>) -> Result<Classified, RecoveryError> {
    let oracle = state.oracle.ok_or(RecoveryError::OracleRequired)?;
    let truth = oracle.values();
    let g = state.graph;
    let mut nonzero = vec![0; g.m()];
    let mut zero = vec![0; g.m()];
    for c in 0..g.m() {
        for (v, _) in state.unverified_neighbors(c) {
            if truth[v].is_zero() {
                zero[c] += 1;
            } else {
                nonzero[c] += 1;
            }
        }
    }
    Ok(Classified { nonzero, zero })
}

/// Non-zero unverified variable `v`: its number of neighbouring checks
/// with a single unverified non-zero neighbour, and whether one of them has
/// no unverified zero neighbour.
fn k_index<T: Scalar>(state: &RecoveryState<'_, T>, cl: &Classified, v: usize) -> (u32, bool) {
    let mut i = 0;
    let mut clean = false;
    for &c in state.graph.var_adj(v).0 {
        let c = c as usize;
        if cl.nonzero[c] == 1 {
            i += 1;
            clean |= cl.zero[c] == 0;
        }
    }
    (i, clean)
}

fn delta_index<T: Scalar>(state: &RecoveryState<'_, T>, cl: &Classified, v: usize) -> u32 {
    state
        .graph
        .var_adj(v)
        .0
        .iter()
        .filter(|&&c| cl.nonzero[c as usize] == 0 && cl.zero[c as usize] > 0)
        .count() as u32
}

pub fn compute_partitions<T: Scalar>(
    state: &RecoveryState<'_, T>,
) -> Result<PartitionSnapshot, RecoveryError> {
    let cl = classify(state)?;
    let truth = state.oracle.expect("classified").values();
    let g = state.graph;
    let mut snap = PartitionSnapshot::default();
    for c in 0..g.m() {
        *snap
            .n_counts
            .entry((g.chk_degree(c) as u32, cl.nonzero[c], cl.zero[c]))
            .or_insert(0) += 1;
    }
    #[allow(clippy::needless_range_loop)]
    for v in 0..g.n() {
        if state.verified[v] {
            continue;
        }
        let dv = g.var_degree(v) as u32;
        if truth[v].is_zero() {
            *snap
                .delta_counts
                .entry((dv, delta_index(state, &cl, v)))
                .or_insert(0) += 1;
        } else {
            let (i, clean) = k_index(state, &cl, v);
            *snap.k_counts.entry((dv, i)).or_insert(0) += 1;
            if i == 1 && clean {
                snap.k_hat_1 += 1;
            }
        }
    }
    Ok(snap)
}

/// Unverified non-zero variables that the next round 1 verifies according
/// to the analysis: two or more single-non-zero checks, or exactly one that
/// has no unverified zero neighbour. Ascending.
pub fn predicted_round_one<T: Scalar>(
    state: &RecoveryState<'_, T>,
) -> Result<Vec<usize>, RecoveryError> {
    let cl = classify(state)?;
    let truth = state.oracle.expect("classified").values();
    Ok((0..state.graph.n())
        .filter(|&v| !state.verified[v] && !truth[v].is_zero())
        .filter(|&v| {
            let (i, clean) = k_index(state, &cl, v);
            i >= 2 || (i == 1 && clean)
        })
        .collect())
}

/// Unverified zero variables adjacent to at least one zero-valued check
/// that still has unverified neighbours. Ascending.
pub fn predicted_round_two<T: Scalar>(
    state: &RecoveryState<'_, T>,
) -> Result<Vec<usize>, RecoveryError> {
    let cl = classify(state)?;
    let truth = state.oracle.expect("classified").values();
    Ok((0..state.graph.n())
        .filter(|&v| !state.verified[v] && truth[v].is_zero())
        .filter(|&v| delta_index(state, &cl, v) >= 1)
        .collect())
}
