//! Weighted bipartite sensing graphs and the configuration-model sampler.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::signal::SignalModel;
use super::{DegreeDistribution, EnsembleError};
use crate::rng;
use crate::scalar::Scalar;

/// Edge-swap attempts allowed per edge before sampling gives up.
pub const REPAIR_ATTEMPTS_PER_EDGE: usize = 100;

/// Distribution of the non-zero edge weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightModel {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl Default for WeightModel {
    fn default() -> Self {
        WeightModel::Constant { value: 1.0 }
    }
}

impl WeightModel {
    pub fn is_constant(&self) -> bool {
        matches!(self, WeightModel::Constant { .. })
    }

    fn draw<T: Scalar, R: Rng>(&self, rng: &mut R) -> T {
        loop {
            let w = match *self {
                WeightModel::Constant { value } => return T::from_real(value),
                WeightModel::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
                WeightModel::Gaussian { mean, std } => {
                    mean + std * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
                }
            };
            // Exact types keep weights on a coarse dyadic grid so that
            // products with signal values stay representable.
            let w = if T::EXACT {
                (w * 256.0).round() / 256.0
            } else {
                w
            };
            let w = T::from_real(w);
            if !w.is_zero() {
                return w;
            }
        }
    }
}

/// Parameters of one `(n, λ, ρ)` ensemble together with the input model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub lambda: DegreeDistribution,
    pub rho: DegreeDistribution,
    pub alpha: f64,
    #[serde(default)]
    pub weight_model: WeightModel,
    #[serde(default)]
    pub signal_model: SignalModel,
}

impl EnsembleSpec {
    /// Unit weights and standard Gaussian non-zero signal entries.
    pub fn new(n: usize, lambda: DegreeDistribution, rho: DegreeDistribution, alpha: f64) -> Self {
        EnsembleSpec {
            n,
            lambda,
            rho,
            alpha,
            weight_model: WeightModel::default(),
            signal_model: SignalModel::default(),
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        EnsembleSpec {
            alpha,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.n == 0 {
            return Err(EnsembleError::EmptyGraph);
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(EnsembleError::InvalidAlpha(self.alpha));
        }
        Ok(())
    }

    pub fn plan(&self) -> Result<EnsemblePlan, EnsembleError> {
        self.validate()?;
        EnsemblePlan::new(self.n, &self.lambda, &self.rho)
    }
}

/// Integer realization of a pair of degree distributions for `n` variable
/// nodes: the check count and exact per-degree node counts on both sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePlan {
    pub n: usize,
    pub m: usize,
    pub edges: usize,
    pub var_counts: BTreeMap<u32, usize>,
    pub chk_counts: BTreeMap<u32, usize>,
}

impl EnsemblePlan {
    /// Uses `E = round(n·d̄_v)` and `m = round(E/d̄_c)` when both sides can
    /// carry exactly `E` edges; otherwise the nearest budget that both sides
    /// can realize.
    pub fn new(
        n: usize,
        lambda: &DegreeDistribution,
        rho: &DegreeDistribution,
    ) -> Result<Self, EnsembleError> {
        if n == 0 {
            return Err(EnsembleError::EmptyGraph);
        }
        let target = (n as f64 * lambda.mean_degree()).round() as usize;
        let window = (lambda.max_degree() as usize * rho.max_degree() as usize).max(64);
        let candidates = std::iter::once(target).chain((1..=window).flat_map(|k| {
            [target.checked_add(k), target.checked_sub(k)]
                .into_iter()
                .flatten()
        }));
        for edges in candidates {
            let m = (edges as f64 / rho.mean_degree()).round() as usize;
            if m == 0 || edges == 0 {
                continue;
            }
            let (Ok(var_counts), Ok(chk_counts)) =
                (lambda.node_counts(n, edges), rho.node_counts(m, edges))
            else {
                continue;
            };
            return Ok(EnsemblePlan {
                n,
                m,
                edges,
                var_counts,
                chk_counts,
            });
        }
        Err(EnsembleError::NoCommonBudget { target })
    }

    /// The graph size closest to `n` (the smaller on ties) that admits a
    /// plan, searching at most `radius` either side.
    pub fn nearest_feasible_size(
        n: usize,
        lambda: &DegreeDistribution,
        rho: &DegreeDistribution,
        radius: usize,
    ) -> Option<usize> {
        (0..=radius)
            .flat_map(|k| [n.checked_sub(k), n.checked_add(k)])
            .flatten()
            .find(|&size| size > 0 && Self::new(size, lambda, rho).is_ok())
    }

    fn degree_sequence(counts: &BTreeMap<u32, usize>) -> Vec<u32> {
        counts
            .iter()
            .flat_map(|(&d, &c)| std::iter::repeat_n(d, c))
            .collect()
    }
}

/// Sampler knobs beyond the ensemble itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    /// Additionally remove every 4-cycle (girth at least 6).
    pub avoid_four_cycles: bool,
}

/// Bipartite graph between `n` variable nodes and `m` check nodes with a
/// non-zero weight per edge, stored as compressed adjacency on both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingGraph<T> {
    n: usize,
    m: usize,
    var_offsets: Vec<usize>,
    var_checks: Vec<u32>,
    var_weights: Vec<T>,
    chk_offsets: Vec<usize>,
    chk_vars: Vec<u32>,
    chk_weights: Vec<T>,
    // When every edge carries the same weight the per-edge arrays stay
    // empty and adjacency views borrow a prefix of this run instead.
    shared_weights: Vec<T>,
}

impl<T: Scalar> SensingGraph<T> {
    /// Builds a graph from `(check, variable, weight)` triples. Rejects
    /// out-of-range indices, zero weights and parallel edges.
    pub fn from_edges(
        n: usize,
        m: usize,
        edges: &[(usize, usize, T)],
    ) -> Result<Self, EnsembleError> {
        let mut per_var: Vec<Vec<(u32, T)>> = vec![Vec::new(); n];
        for &(c, v, w) in edges {
            if c >= m || v >= n {
                return Err(EnsembleError::InvalidGraph(format!(
                    "edge ({c}, {v}) outside {m} checks x {n} variables"
                )));
            }
            if w.is_zero() {
                return Err(EnsembleError::InvalidGraph(format!(
                    "zero weight on edge ({c}, {v})"
                )));
            }
            per_var[v].push((c as u32, w));
        }
        for (v, adj) in per_var.iter_mut().enumerate() {
            adj.sort_by_key(|&(c, _)| c);
            if adj.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(EnsembleError::InvalidGraph(format!(
                    "parallel edges at variable {v}"
                )));
            }
        }
        let mut var_offsets = Vec::with_capacity(n + 1);
        var_offsets.push(0);
        let mut var_checks = Vec::with_capacity(edges.len());
        let mut var_weights = Vec::with_capacity(edges.len());
        for adj in &per_var {
            for &(c, w) in adj {
                var_checks.push(c);
                var_weights.push(w);
            }
            var_offsets.push(var_checks.len());
        }
        Ok(Self::from_var_csr(
            n,
            m,
            var_offsets,
            var_checks,
            var_weights,
        ))
    }

    fn from_var_csr(
        n: usize,
        m: usize,
        var_offsets: Vec<usize>,
        var_checks: Vec<u32>,
        var_weights: Vec<T>,
    ) -> Self {
        let mut chk_offsets = vec![0usize; m + 1];
        for &c in &var_checks {
            chk_offsets[c as usize + 1] += 1;
        }
        for c in 0..m {
            chk_offsets[c + 1] += chk_offsets[c];
        }
        let shared = var_weights
            .first()
            .copied()
            .filter(|&w0| var_weights.iter().all(|&w| w == w0));
        let mut fill = chk_offsets.clone();
        let mut chk_vars = vec![0u32; var_checks.len()];
        let mut chk_weights = if shared.is_some() {
            Vec::new()
        } else {
            vec![T::zero(); var_checks.len()]
        };
        for v in 0..n {
            for e in var_offsets[v]..var_offsets[v + 1] {
                let c = var_checks[e] as usize;
                chk_vars[fill[c]] = v as u32;
                if shared.is_none() {
                    chk_weights[fill[c]] = var_weights[e];
                }
                fill[c] += 1;
            }
        }
        let max_deg = (0..n)
            .map(|v| var_offsets[v + 1] - var_offsets[v])
            .chain((0..m).map(|c| chk_offsets[c + 1] - chk_offsets[c]))
            .max()
            .unwrap_or(0);
        let (var_weights, shared_weights) = match shared {
            Some(w) => (Vec::new(), vec![w; max_deg]),
            None => (var_weights, Vec::new()),
        };
        SensingGraph {
            n,
            m,
            var_offsets,
            var_checks,
            var_weights,
            chk_offsets,
            chk_vars,
            chk_weights,
            shared_weights,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_edges(&self) -> usize {
        self.var_checks.len()
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_offsets[v + 1] - self.var_offsets[v]
    }

    pub fn chk_degree(&self, c: usize) -> usize {
        self.chk_offsets[c + 1] - self.chk_offsets[c]
    }

    /// Checks adjacent to `v` (ascending) and the matching edge weights.
    #[inline]
    pub fn var_adj(&self, v: usize) -> (&[u32], &[T]) {
        let r = self.var_offsets[v]..self.var_offsets[v + 1];
        let ws = if self.var_weights.is_empty() {
            &self.shared_weights[..r.len()]
        } else {
            &self.var_weights[r.clone()]
        };
        (&self.var_checks[r], ws)
    }

    /// Hints the offset of check `c` into cache.
    pub(crate) fn prefetch_chk_offset(&self, c: usize) {
        crate::prefetch::prefetch(&self.chk_offsets, c);
    }

    /// Hints the adjacency row of check `c` into cache.
    pub(crate) fn prefetch_chk_row(&self, c: usize) {
        crate::prefetch::prefetch(&self.chk_vars, self.chk_offsets[c]);
    }

    /// Variables adjacent to `c` (ascending) and the matching edge weights.
    #[inline]
    pub fn chk_adj(&self, c: usize) -> (&[u32], &[T]) {
        let r = self.chk_offsets[c]..self.chk_offsets[c + 1];
        let ws = if self.chk_weights.is_empty() {
            &self.shared_weights[..r.len()]
        } else {
            &self.chk_weights[r.clone()]
        };
        (&self.chk_vars[r], ws)
    }

    /// Weight of edge `(c, v)`, if present.
    pub fn weight(&self, c: usize, v: usize) -> Option<T> {
        let (checks, weights) = self.var_adj(v);
        checks.binary_search(&(c as u32)).ok().map(|k| weights[k])
    }

    /// `(check, variable, weight)` in check-major, variable-ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.m).flat_map(move |c| {
            let (vars, ws) = self.chk_adj(c);
            vars.iter().zip(ws).map(move |(&v, &w)| (c, v as usize, w))
        })
    }

    pub fn var_degree_histogram(&self) -> BTreeMap<u32, usize> {
        histogram((0..self.n).map(|v| self.var_degree(v)))
    }

    pub fn chk_degree_histogram(&self) -> BTreeMap<u32, usize> {
        histogram((0..self.m).map(|c| self.chk_degree(c)))
    }

    /// No (variable, check) pair repeats.
    pub fn is_simple(&self) -> bool {
        (0..self.n).all(|v| self.var_adj(v).0.windows(2).all(|p| p[0] < p[1]))
            && (0..self.m).all(|c| self.chk_adj(c).0.windows(2).all(|p| p[0] < p[1]))
    }

    /// Both adjacency views describe the same weighted edge set.
    pub fn is_dual_consistent(&self) -> bool {
        if self.var_checks.len() != self.chk_vars.len() {
            return false;
        }
        (0..self.m).all(|c| {
            let (vars, ws) = self.chk_adj(c);
            vars.iter()
                .zip(ws)
                .all(|(&v, &w)| self.weight(c, v as usize) == Some(w))
        })
    }

    /// Whether edge `(c, v)` lies on a cycle of length 4.
    pub fn edge_in_four_cycle(&self, c: usize, v: usize) -> bool {
        let (v_checks, _) = self.var_adj(v);
        let (c_vars, _) = self.chk_adj(c);
        v_checks.iter().filter(|&&c2| c2 as usize != c).any(|&c2| {
            self.chk_adj(c2 as usize)
                .0
                .iter()
                .any(|&u| u as usize != v && c_vars.binary_search(&u).is_ok())
        })
    }

    /// Whether variable `v` lies on a cycle of length 4.
    pub fn var_in_four_cycle(&self, v: usize) -> bool {
        self.var_adj(v)
            .0
            .iter()
            .any(|&c| self.edge_in_four_cycle(c as usize, v))
    }

    pub fn count_four_cycle_edges(&self) -> usize {
        self.edges()
            .filter(|&(c, v, _)| self.edge_in_four_cycle(c, v))
            .count()
    }
}

fn histogram(degrees: impl Iterator<Item = usize>) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for d in degrees {
        *h.entry(d as u32).or_insert(0) += 1;
    }
    h
}

/// Draws a simple graph from the ensemble described by `spec`.
///
/// Sockets are laid out per node from the integerized degree counts
/// (variables and checks labelled in ascending degree order), check
/// sockets are shuffled into a uniform matching, and parallel edges are
/// removed by random swaps of check endpoints, which preserves both degree
/// sequences. Weights are drawn i.i.d. afterwards. The same `(spec, seed)`
/// always yields the same graph.
pub fn sample_graph<T: Scalar>(
    spec: &EnsembleSpec,
    seed: u64,
) -> Result<SensingGraph<T>, EnsembleError> {
    sample_graph_with(spec, &spec.plan()?, seed, SamplerOptions::default())
}

pub fn sample_graph_with<T: Scalar>(
    spec: &EnsembleSpec,
    plan: &EnsemblePlan,
    seed: u64,
    options: SamplerOptions,
) -> Result<SensingGraph<T>, EnsembleError> {
    let (n, m, e) = (plan.n, plan.m, plan.edges);
    let var_deg = EnsemblePlan::degree_sequence(&plan.var_counts);
    let chk_deg = EnsemblePlan::degree_sequence(&plan.chk_counts);
    if var_deg.last().is_some_and(|&d| d as usize > m)
        || chk_deg.last().is_some_and(|&d| d as usize > n)
    {
        return Err(EnsembleError::RepairStall {
            attempts: 0,
            remaining: e,
        });
    }

    let mut var_offsets = Vec::with_capacity(n + 1);
    var_offsets.push(0usize);
    let mut owner = Vec::with_capacity(e);
    for (v, &d) in var_deg.iter().enumerate() {
        owner.extend(std::iter::repeat_n(v as u32, d as usize));
        var_offsets.push(owner.len());
    }
    let mut target: Vec<u32> = Vec::with_capacity(e);
    for (c, &d) in chk_deg.iter().enumerate() {
        target.extend(std::iter::repeat_n(c as u32, d as usize));
    }
    debug_assert_eq!(owner.len(), target.len());

    let mut rng = rng::stream(seed, &[rng::GRAPH]);
    target.shuffle(&mut rng);

    repair_parallel_edges(&var_offsets, &owner, &mut target, &mut rng)?;

    for v in 0..n {
        target[var_offsets[v]..var_offsets[v + 1]].sort_unstable();
    }

    let mut wrng = rng::stream(seed, &[rng::WEIGHTS]);
    let weights: Vec<T> = match spec.weight_model {
        WeightModel::Constant { value } => vec![T::from_real(value); e],
        _ => (0..e).map(|_| spec.weight_model.draw(&mut wrng)).collect(),
    };
    if options.avoid_four_cycles {
        let g: SensingGraph<T> = remove_four_cycles(n, m, &var_offsets, &owner, target, &mut rng)?;
        Ok(SensingGraph::from_var_csr(
            g.n,
            g.m,
            g.var_offsets,
            g.var_checks,
            weights,
        ))
    } else {
        Ok(SensingGraph::from_var_csr(
            n,
            m,
            var_offsets,
            target,
            weights,
        ))
    }
}

fn block_has(block: &[u32], skip: usize, c: u32) -> bool {
    block.iter().enumerate().any(|(k, &x)| k != skip && x == c)
}

fn repair_parallel_edges<R: Rng>(
    var_offsets: &[usize],
    owner: &[u32],
    target: &mut [u32],
    rng: &mut R,
) -> Result<(), EnsembleError> {
    let e = target.len();
    let duplicated = |target: &[u32], pos: usize| {
        let v = owner[pos] as usize;
        let (s, t) = (var_offsets[v], var_offsets[v + 1]);
        block_has(&target[s..t], pos - s, target[pos])
    };
    let mut bad: Vec<usize> = (0..e).filter(|&p| duplicated(target, p)).collect();
    let cap = REPAIR_ATTEMPTS_PER_EDGE * e.max(1);
    let mut attempts = 0;
    while let Some(&pos) = bad.last() {
        if !duplicated(target, pos) {
            bad.pop();
            continue;
        }
        if attempts >= cap {
            return Err(EnsembleError::RepairStall {
                attempts,
                remaining: bad.len(),
            });
        }
        attempts += 1;
        let other = rng.random_range(0..e);
        let (v1, v2) = (owner[pos] as usize, owner[other] as usize);
        let (c1, c2) = (target[pos], target[other]);
        if v1 == v2 || c1 == c2 {
            continue;
        }
        let b1 = &target[var_offsets[v1]..var_offsets[v1 + 1]];
        let b2 = &target[var_offsets[v2]..var_offsets[v2 + 1]];
        if block_has(b1, pos - var_offsets[v1], c2) || block_has(b2, other - var_offsets[v2], c1) {
            continue;
        }
        target.swap(pos, other);
    }
    Ok(())
}

/// Swap-based removal of 4-cycles on an already simple socket assignment.
fn remove_four_cycles<T: Scalar, R: Rng>(
    n: usize,
    m: usize,
    var_offsets: &[usize],
    owner: &[u32],
    target: Vec<u32>,
    rng: &mut R,
) -> Result<SensingGraph<T>, EnsembleError> {
    let e = target.len();
    let mut var_adj: Vec<Vec<u32>> = (0..n)
        .map(|v| target[var_offsets[v]..var_offsets[v + 1]].to_vec())
        .collect();
    let mut chk_adj: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (pos, &c) in target.iter().enumerate() {
        chk_adj[c as usize].push(owner[pos]);
    }
    let in_cycle = |var_adj: &[Vec<u32>], chk_adj: &[Vec<u32>], c: u32, v: u32| {
        var_adj[v as usize]
            .iter()
            .filter(|&&c2| c2 != c)
            .any(|&c2| {
                chk_adj[c2 as usize]
                    .iter()
                    .any(|&u| u != v && chk_adj[c as usize].contains(&u))
            })
    };
    let replace = |list: &mut Vec<u32>, from: u32, to: u32| {
        let k = list.iter().position(|&x| x == from).unwrap();
        list[k] = to;
    };

    let cap = REPAIR_ATTEMPTS_PER_EDGE * e.max(1);
    let mut attempts = 0;
    loop {
        let bad: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|v| {
                var_adj[v as usize]
                    .iter()
                    .map(move |&c| (c, v))
                    .collect::<Vec<_>>()
            })
            .filter(|&(c, v)| in_cycle(&var_adj, &chk_adj, c, v))
            .collect();
        if bad.is_empty() {
            break;
        }
        let mut progressed = false;
        for &(c1, v1) in &bad {
            if !var_adj[v1 as usize].contains(&c1) || !in_cycle(&var_adj, &chk_adj, c1, v1) {
                continue;
            }
            for _ in 0..64 {
                if attempts >= cap {
                    return Err(EnsembleError::RepairStall {
                        attempts,
                        remaining: bad.len(),
                    });
                }
                attempts += 1;
                let pos = rng.random_range(0..e);
                let v2 = owner[pos];
                let k = pos - var_offsets[v2 as usize];
                let c2 = var_adj[v2 as usize][k];
                if v1 == v2
                    || c1 == c2
                    || var_adj[v1 as usize].contains(&c2)
                    || var_adj[v2 as usize].contains(&c1)
                {
                    continue;
                }
                replace(&mut var_adj[v1 as usize], c1, c2);
                replace(&mut var_adj[v2 as usize], c2, c1);
                replace(&mut chk_adj[c1 as usize], v1, v2);
                replace(&mut chk_adj[c2 as usize], v2, v1);
                if !in_cycle(&var_adj, &chk_adj, c2, v1) && !in_cycle(&var_adj, &chk_adj, c1, v2) {
                    progressed = true;
                    break;
                }
                replace(&mut var_adj[v1 as usize], c2, c1);
                replace(&mut var_adj[v2 as usize], c1, c2);
                replace(&mut chk_adj[c1 as usize], v2, v1);
                replace(&mut chk_adj[c2 as usize], v1, v2);
            }
        }
        if !progressed && attempts >= cap {
            return Err(EnsembleError::RepairStall {
                attempts,
                remaining: bad.len(),
            });
        }
    }

    let mut var_checks = Vec::with_capacity(e);
    for adj in &mut var_adj {
        adj.sort_unstable();
        var_checks.extend_from_slice(adj);
    }
    Ok(SensingGraph::from_var_csr(
        n,
        m,
        var_offsets.to_vec(),
        var_checks,
        vec![T::one(); e],
    ))
}
