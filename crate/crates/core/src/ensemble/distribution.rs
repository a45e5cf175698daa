//! Node-perspective degree distributions `λ(x) = Σ λ_i x^i`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::EnsembleError;

/// Tolerance on `Σ fractions = 1` when validating user input.
pub const MASS_INPUT_TOL: f64 = 1e-9;
/// Tolerance on `Σ fractions = 1` for a stored distribution.
pub const MASS_STORED_TOL: f64 = 1e-12;

/// Fractions of nodes per degree. Degrees are distinct, ascending and at
/// least 1; fractions are positive and sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeDistribution {
    entries: Vec<(u32, f64)>,
}

impl DegreeDistribution {
    /// Validates `entries` without rescaling them (apart from absorbing a
    /// mass error below [`MASS_INPUT_TOL`]).
    pub fn new(entries: Vec<(u32, f64)>) -> Result<Self, EnsembleError> {
        Self::build(entries, false)
    }

    /// Like [`DegreeDistribution::new`], but rescales any positive mass to one.
    pub fn normalized(entries: Vec<(u32, f64)>) -> Result<Self, EnsembleError> {
        Self::build(entries, true)
    }

    /// The single-degree distribution `x^d`.
    pub fn regular(degree: u32) -> Result<Self, EnsembleError> {
        Self::new(vec![(degree, 1.0)])
    }

    fn build(mut entries: Vec<(u32, f64)>, normalize: bool) -> Result<Self, EnsembleError> {
        if entries.is_empty() {
            return Err(EnsembleError::EmptyDistribution);
        }
        for &(d, f) in &entries {
            if d == 0 {
                return Err(EnsembleError::NonPositiveDegree);
            }
            if !(f.is_finite() && f > 0.0) {
                return Err(EnsembleError::NonPositiveFraction {
                    degree: d,
                    fraction: f,
                });
            }
        }
        entries.sort_by_key(|&(d, _)| d);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(EnsembleError::DuplicateDegree(w[0].0));
        }
        let mass: f64 = entries.iter().map(|&(_, f)| f).sum();
        if !normalize && (mass - 1.0).abs() > MASS_INPUT_TOL {
            return Err(EnsembleError::NonUnitMass(mass));
        }
        if mass != 1.0 {
            for e in &mut entries {
                e.1 /= mass;
            }
        }
        Ok(DegreeDistribution { entries })
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(d, _)| d)
    }

    pub fn fraction(&self, degree: u32) -> f64 {
        self.entries
            .iter()
            .find(|&&(d, _)| d == degree)
            .map_or(0.0, |&(_, f)| f)
    }

    /// `Σ i λ_i`.
    pub fn mean_degree(&self) -> f64 {
        self.entries.iter().map(|&(d, f)| d as f64 * f).sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.last().map_or(0, |&(d, _)| d)
    }

    pub fn min_degree(&self) -> u32 {
        self.entries.first().map_or(0, |&(d, _)| d)
    }

    pub fn components(&self) -> usize {
        self.entries.len()
    }

    pub fn is_regular(&self) -> bool {
        self.entries.len() == 1
    }

    /// Evaluates the polynomial `Σ f_i x^i`.
    pub fn eval(&self, x: f64) -> f64 {
        self.entries
            .iter()
            .map(|&(d, f)| f * x.powi(d as i32))
            .sum()
    }

    /// Integer node counts per degree for `count` nodes carrying exactly
    /// `edge_budget` edge endpoints.
    ///
    /// Starts from largest-remainder rounding of `fraction * count`, then
    /// moves single nodes between adjacent support degrees until the
    /// endpoint total matches.
    pub fn node_counts(
        &self,
        count: usize,
        edge_budget: usize,
    ) -> Result<BTreeMap<u32, usize>, EnsembleError> {
        let infeasible = || EnsembleError::InfeasibleEdgeBudget {
            distribution: self.to_string(),
            count,
            edge_budget,
        };
        let degrees: Vec<i64> = self.entries.iter().map(|&(d, _)| d as i64).collect();
        let mut counts = largest_remainder(&self.entries, count);

        let budget = edge_budget as i64;
        let (lo, hi) = (
            degrees[0] * count as i64,
            *degrees.last().unwrap() * count as i64,
        );
        if budget < lo || budget > hi {
            return Err(infeasible());
        }
        let edge_sum = |c: &[i64]| -> i64 { c.iter().zip(&degrees).map(|(&n, &d)| n * d).sum() };
        let mut diff = budget - edge_sum(&counts);
        if diff == 0 {
            return Ok(pack(&self.entries, &counts));
        }
        if degrees.len() == 1 {
            return Err(infeasible());
        }
        // (pair index, gap) for moves between adjacent support degrees.
        let gaps: Vec<i64> = degrees.windows(2).map(|w| w[1] - w[0]).collect();
        let max_gap = *gaps.iter().max().unwrap();

        // Coarse phase: take the largest gap that does not overshoot.
        while diff.abs() > max_gap {
            let up = diff > 0;
            let step = (0..gaps.len())
                .filter(|&k| gaps[k] <= diff.abs())
                .filter(|&k| if up { counts[k] > 0 } else { counts[k + 1] > 0 })
                .max_by_key(|&k| gaps[k]);
            match step {
                Some(k) => {
                    move_node(&mut counts, k, up);
                    diff -= if up { gaps[k] } else { -gaps[k] };
                }
                None => break,
            }
        }
        if diff == 0 {
            return Ok(pack(&self.entries, &counts));
        }

        // Fine phase: shortest sequence of signed gap moves reaching zero,
        // found by breadth-first search over the residual.
        let bound = 2 * max_gap + diff.abs();
        let path = shortest_move_path(diff, &gaps, bound).ok_or_else(infeasible)?;
        for (k, up) in path {
            if up && counts[k] == 0 || !up && counts[k + 1] == 0 {
                return Err(infeasible());
            }
            move_node(&mut counts, k, up);
        }
        debug_assert_eq!(edge_sum(&counts), budget);
        Ok(pack(&self.entries, &counts))
    }
}

fn largest_remainder(entries: &[(u32, f64)], count: usize) -> Vec<i64> {
    let exact: Vec<f64> = entries.iter().map(|&(_, f)| f * count as f64).collect();
    let mut counts: Vec<i64> = exact.iter().map(|x| x.floor() as i64).collect();
    let assigned: i64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..entries.len()).collect();
    // Largest remainder first; ties go to the lower degree.
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let missing = (count as i64 - assigned).max(0) as usize;
    for &k in order.iter().cycle().take(missing) {
        counts[k] += 1;
    }
    counts
}

fn move_node(counts: &mut [i64], pair: usize, up: bool) {
    if up {
        counts[pair] -= 1;
        counts[pair + 1] += 1;
    } else {
        counts[pair + 1] -= 1;
        counts[pair] += 1;
    }
}

fn shortest_move_path(diff: i64, gaps: &[i64], bound: i64) -> Option<Vec<(usize, bool)>> {
    use std::collections::VecDeque;
    let width = (2 * bound + 1) as usize;
    let idx = |r: i64| (r + bound) as usize;
    let mut prev: Vec<Option<(i64, usize, bool)>> = vec![None; width];
    let mut seen = vec![false; width];
    let mut queue = VecDeque::new();
    seen[idx(diff)] = true;
    queue.push_back(diff);
    while let Some(r) = queue.pop_front() {
        if r == 0 {
            let mut path = Vec::new();
            let mut cur = 0;
            while let Some((from, k, up)) = prev[idx(cur)] {
                path.push((k, up));
                cur = from;
            }
            path.reverse();
            return Some(path);
        }
        for (k, &g) in gaps.iter().enumerate() {
            for up in [true, false] {
                let next = if up { r - g } else { r + g };
                if next.abs() <= bound && !seen[idx(next)] {
                    seen[idx(next)] = true;
                    prev[idx(next)] = Some((r, k, up));
                    queue.push_back(next);
                }
            }
        }
    }
    None
}

fn pack(entries: &[(u32, f64)], counts: &[i64]) -> BTreeMap<u32, usize> {
    entries
        .iter()
        .zip(counts)
        .map(|(&(d, _), &c)| (d, c as usize))
        .collect()
}

impl fmt::Display for DegreeDistribution {
    /// Polynomial text such as `0.9x^3+0.1x^13`; unit coefficients are
    /// omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &(d, frac)) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str("+")?;
            }
            if frac == 1.0 {
                write!(f, "x^{d}")?;
            } else {
                write!(f, "{frac}x^{d}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for DegreeDistribution {
    type Err = EnsembleError;

    /// Parses `coef x^degree` terms joined by `+`. Whitespace is ignored;
    /// coefficients may be decimal (`0.9`) or rational (`14/15`), and may be
    /// omitted for a unit coefficient. A bare `x` means `x^1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |why: &str| EnsembleError::Parse {
            input: s.to_string(),
            reason: why.to_string(),
        };
        if compact.is_empty() {
            return Err(bad("empty distribution"));
        }
        let mut entries = Vec::new();
        for term in compact.split('+') {
            let pos = term.find('x').ok_or_else(|| bad("term without `x`"))?;
            let (coef, rest) = term.split_at(pos);
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let fraction = if coef.is_empty() {
                1.0
            } else if let Some((num, den)) = coef.split_once('/') {
                let num: f64 = num.parse().map_err(|_| bad("bad numerator"))?;
                let den: f64 = den.parse().map_err(|_| bad("bad denominator"))?;
                if den == 0.0 {
                    return Err(bad("zero denominator"));
                }
                num / den
            } else {
                coef.parse().map_err(|_| bad("bad coefficient"))?
            };
            let degree = match &rest[1..] {
                "" => 1,
                exp => exp
                    .strip_prefix('^')
                    .ok_or_else(|| bad("expected `^` after `x`"))?
                    .trim_matches(|c| c == '{' || c == '}')
                    .parse::<u32>()
                    .map_err(|_| bad("bad degree"))?,
            };
            entries.push((degree, fraction));
        }
        DegreeDistribution::new(entries)
    }
}

impl Serialize for DegreeDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DegreeDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let entries = Vec::<(u32, f64)>::deserialize(deserializer)?;
        DegreeDistribution::new(entries).map_err(serde::de::Error::custom)
    }
}
