use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};

use crate::ensemble::DegreeDistribution;

pub(crate) fn to_rational(x: f64) -> Option<Rational64> {
    Rational64::approximate_float(x)
}

/// Fraction of degree-`a` nodes in the two-degree mixture of `a < d̄ < b`
/// with mean `d̄`: `(b − d̄)/(b − a)`.
pub fn bimodal_weight(a: u32, b: u32, d_bar: Rational64) -> Rational64 {
    let (a, b) = (Rational64::from(a as i64), Rational64::from(b as i64));
    (b - d_bar) / (b - a)
}

fn build(entries: &[(u32, Rational64)]) -> DegreeDistribution {
    let v = entries
        .iter()
        .map(|&(d, f)| (d, f.to_f64().expect("finite ratio")))
        .collect();
    DegreeDistribution::new(v).expect("exact mixture is a valid distribution")
}

fn regular(d_bar: Rational64) -> Option<DegreeDistribution> {
    d_bar
        .is_integer()
        .then(|| build(&[(d_bar.to_integer() as u32, Rational64::one())]))
}

fn in_range(d_bar: Rational64, max_degree: u32) -> bool {
    d_bar >= Rational64::one() && d_bar <= Rational64::from(max_degree as i64)
}

/// Every one- or two-degree distribution with mean `d_bar` and degrees in
/// `1..=max_degree`: the regular one when `d_bar` is an integer, then each
/// pair `a < d_bar < b` in lexicographic order.
pub fn enumerate_bimodal(d_bar: f64, max_degree: u32) -> Vec<DegreeDistribution> {
    let Some(d) = to_rational(d_bar) else {
        return Vec::new();
    };
    if !in_range(d, max_degree) {
        return Vec::new();
    }
    let mut out: Vec<_> = regular(d).into_iter().collect();
    for a in 1..=max_degree {
        if Rational64::from(a as i64) >= d {
            break;
        }
        for b in a + 1..=max_degree {
            if Rational64::from(b as i64) <= d {
                continue;
            }
            let w = bimodal_weight(a, b, d);
            out.push(build(&[(a, w), (b, Rational64::one() - w)]));
        }
    }
    out
}

/// Distributions with mean `d_bar`, at most `max_components` degrees in
/// `1..=max_degree`, and every interior fraction a positive multiple of
/// `grid_step`. The smallest and largest degree take whatever mass the two
/// constraints leave; supports where either would be non-positive are
/// skipped. Ordered by support size, then support, then grid point.
pub fn enumerate_sparse(
    d_bar: f64,
    max_degree: u32,
    max_components: usize,
    grid_step: f64,
) -> Vec<DegreeDistribution> {
    let mut out = Vec::new();
    for_each_sparse(d_bar, max_degree, max_components, grid_step, |d| {
        out.push(d)
    });
    out
}

/// Visits what [`enumerate_sparse`] would return without collecting it.
pub fn for_each_sparse(
    d_bar: f64,
    max_degree: u32,
    max_components: usize,
    grid_step: f64,
    mut f: impl FnMut(DegreeDistribution),
) {
    let (Some(d), Some(step)) = (to_rational(d_bar), to_rational(grid_step)) else {
        return;
    };
    if !in_range(d, max_degree) || step <= Rational64::zero() || max_components == 0 {
        return;
    }
    if let Some(r) = regular(d) {
        f(r);
    }
    if max_components < 2 {
        return;
    }
    for b in enumerate_bimodal(d_bar, max_degree).into_iter() {
        if b.components() == 2 {
            f(b);
        }
    }
    for size in 3..=max_components.min(max_degree as usize) {
        let mut support = Vec::with_capacity(size);
        supports(1, max_degree, size, &mut support, &mut |s| {
            let (lo, hi) = (s[0], s[size - 1]);
            if Rational64::from(lo as i64) >= d || Rational64::from(hi as i64) <= d {
                return;
            }
            let mut fracs = Vec::with_capacity(size - 2);
            grid(s, d, step, &mut fracs, &mut f);
        });
    }
}

fn supports(from: u32, max: u32, size: usize, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if cur.len() == size {
        f(cur);
        return;
    }
    let need = (size - cur.len()) as u32;
    for d in from..=max {
        if max - d + 1 < need {
            break;
        }
        cur.push(d);
        supports(d + 1, max, size, cur, f);
        cur.pop();
    }
}

/// Masses left for the end degrees once the interior ones are fixed.
fn ends(s: &[u32], d: Rational64, fracs: &[Rational64]) -> (Rational64, Rational64) {
    let r = |x: u32| Rational64::from(x as i64);
    let (lo, hi) = (r(s[0]), r(s[s.len() - 1]));
    let mut low_slack = d - lo;
    let mut high_slack = hi - d;
    for (&deg, &f) in s[1..].iter().zip(fracs) {
        low_slack -= (r(deg) - lo) * f;
        high_slack -= (hi - r(deg)) * f;
    }
    (high_slack / (hi - lo), low_slack / (hi - lo))
}

fn grid(
    s: &[u32],
    d: Rational64,
    step: Rational64,
    fracs: &mut Vec<Rational64>,
    f: &mut impl FnMut(DegreeDistribution),
) {
    let interior = s.len() - 2;
    if fracs.len() == interior {
        let (first, last) = ends(s, d, fracs);
        if first > Rational64::zero() && last > Rational64::zero() {
            let mut entries = Vec::with_capacity(s.len());
            entries.push((s[0], first));
            entries.extend(s[1..=interior].iter().copied().zip(fracs.iter().copied()));
            entries.push((s[s.len() - 1], last));
            f(build(&entries));
        }
        return;
    }
    let mut x = step;
    loop {
        fracs.push(x);
        let (first, last) = ends(s, d, fracs);
        if first <= Rational64::zero() || last <= Rational64::zero() {
            fracs.pop();
            break;
        }
        grid(s, d, step, fracs, f);
        fracs.pop();
        x += step;
    }
}
