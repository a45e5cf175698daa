//! Sparse input signals and the measurement map `c = G v`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{EnsembleError, SensingGraph};
use crate::rng;
use crate::scalar::Scalar;

/// Distribution `g` of the non-zero signal entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalModel {
    Gaussian {
        mean: f64,
        std: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Non-zero integers drawn uniformly from `lo..=hi`. Not continuous, so
    /// only meant for exact-arithmetic checks on small instances.
    Integers {
        lo: i64,
        hi: i64,
    },
}

impl Default for SignalModel {
    fn default() -> Self {
        SignalModel::Gaussian {
            mean: 0.0,
            std: 1.0,
        }
    }
}

impl SignalModel {
    fn draw<T: Scalar, R: Rng>(&self, rng: &mut R) -> T {
        match *self {
            SignalModel::Gaussian { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                T::snap(mean + std * z)
            }
            SignalModel::Uniform { lo, hi } => T::snap(lo + (hi - lo) * rng.random::<f64>()),
            SignalModel::Integers { lo, hi } => loop {
                let x = rng.random_range(lo..=hi);
                if x != 0 {
                    return T::from_real(x as f64);
                }
            },
        }
    }
}

/// A length-`n` signal with its support.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalVector<T> {
    values: Vec<T>,
    support: Vec<usize>,
}

impl<T: Scalar> SignalVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        let support = values
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, _)| i)
            .collect();
        SignalVector { values, support }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices of the non-zero entries, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Number of non-zero entries.
    pub fn k(&self) -> usize {
        self.support.len()
    }

    /// `a·self + other`.
    pub fn axpy(&self, a: T, other: &SignalVector<T>) -> SignalVector<T> {
        SignalVector::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + y)
                .collect(),
        )
    }
}

/// Draws `n` i.i.d. entries that are zero with probability `1 − alpha` and
/// otherwise follow `model`.
///
/// Each position consumes one uniform and one model draw regardless of
/// `alpha`, so under a fixed seed the support grows monotonically in `alpha`
/// and the non-zero values do not change.
pub fn sample_signal<T: Scalar>(
    n: usize,
    alpha: f64,
    model: &SignalModel,
    seed: u64,
) -> Result<SignalVector<T>, EnsembleError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(EnsembleError::InvalidAlpha(alpha));
    }
    let mut rng = rng::stream(seed, &[rng::SIGNAL]);
    let values = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let x: T = model.draw(&mut rng);
            if u < alpha {
                x
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(SignalVector::new(values))
}

/// Measurement vector `c = G v`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> MeasurementVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        MeasurementVector { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `c_i = Σ_j w_ij v_j`, accumulated over each check's neighbours in
/// ascending variable order so repeated runs are bit-identical.
pub fn measure<T: Scalar>(
    graph: &SensingGraph<T>,
    signal: &SignalVector<T>,
) -> Result<MeasurementVector<T>, EnsembleError> {
    if signal.len() != graph.n() {
        return Err(EnsembleError::DimensionMismatch {
            signal: signal.len(),
            graph: graph.n(),
        });
    }
    let v = signal.values();
    let values = (0..graph.m())
        .map(|c| {
            let (vars, ws) = graph.chk_adj(c);
            vars.iter()
                .zip(ws)
                .fold(T::zero(), |acc, (&j, &w)| acc + w * v[j as usize])
        })
        .collect();
    Ok(MeasurementVector { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_graph, DegreeDistribution, EnsembleSpec};
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn hand_graph() -> SensingGraph<f64> {
        // c0 ~ {v0, v1}, c1 ~ {v1, v2}, c2 ~ {v0, v2, v3}
        SensingGraph::from_edges(
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
        .unwrap()
    }

    #[test]
    fn hand_traced_measurements() {
        let g = hand_graph();
        let v = SignalVector::new(vec![5.0, 0.0, 0.0, 7.0]);
        let c = measure(&g, &v).unwrap();
        assert_eq!(c.values(), &[5.0, 0.0, 12.0]);
        assert_eq!(v.k(), 2);
        assert_eq!(v.support(), &[0, 3]);
    }

    #[test]
    fn zero_signal_zero_measurements() {
        let g = hand_graph();
        let c = measure(&g, &SignalVector::new(vec![0.0; 4])).unwrap();
        assert!(c.values().iter().all(|&x| x == 0.0));
        assert!(measure(&g, &SignalVector::new(vec![0.0; 3])).is_err());
    }

    #[test]
    fn alpha_extremes() {
        let zero: SignalVector<f64> = sample_signal(1000, 0.0, &SignalModel::default(), 1).unwrap();
        assert_eq!(zero.k(), 0);
        let full: SignalVector<f64> = sample_signal(1000, 1.0, &SignalModel::default(), 1).unwrap();
        assert_eq!(full.k(), 1000);
        assert!(sample_signal::<f64>(10, 1.5, &SignalModel::default(), 1).is_err());
    }

    #[test]
    fn support_fraction_concentrates() {
        let s: SignalVector<f64> =
            sample_signal(100_000, 0.4225, &SignalModel::default(), 77).unwrap();
        let frac = s.k() as f64 / 1e5;
        assert!((frac - 0.4225).abs() < 0.01, "{frac}");
    }

    #[test]
    fn support_nested_in_alpha() {
        let a: SignalVector<f64> = sample_signal(5000, 0.3, &SignalModel::default(), 5).unwrap();
        let b: SignalVector<f64> = sample_signal(5000, 0.5, &SignalModel::default(), 5).unwrap();
        for &i in a.support() {
            assert_eq!(a.values()[i], b.values()[i]);
        }
        assert!(a.k() < b.k());
    }

    #[test]
    fn unit_weights_sum_neighbours() {
        let spec = EnsembleSpec::new(
            300,
            "x^4".parse::<DegreeDistribution>().unwrap(),
            "x^5".parse().unwrap(),
            0.4,
        );
        let g: SensingGraph<f64> = sample_graph(&spec, 2).unwrap();
        let v: SignalVector<f64> = sample_signal(300, 0.4, &spec.signal_model, 2).unwrap();
        let c = measure(&g, &v).unwrap();
        for (i, &ci) in c.values().iter().enumerate() {
            let (vars, _) = g.chk_adj(i);
            let s: f64 = vars.iter().map(|&j| v.values()[j as usize]).sum();
            assert_eq!(ci, s);
        }
    }

    #[test]
    fn rational_and_float_agree_on_grid_signals() {
        let spec = EnsembleSpec::new(
            200,
            "x^3".parse::<DegreeDistribution>().unwrap(),
            "x^6".parse().unwrap(),
            0.3,
        );
        let gf: SensingGraph<f64> = sample_graph(&spec, 8).unwrap();
        let gr: SensingGraph<Rational64> = sample_graph(&spec, 8).unwrap();
        let vr: SignalVector<Rational64> = sample_signal(200, 0.3, &spec.signal_model, 8).unwrap();
        let vf = SignalVector::new(vr.values().iter().map(|&x| Scalar::to_real(x)).collect());
        let cf = measure(&gf, &vf).unwrap();
        let cr = measure(&gr, &vr).unwrap();
        for (a, b) in cf.values().iter().zip(cr.values()) {
            assert_eq!(*a, Scalar::to_real(*b));
        }
    }

    proptest! {
        #[test]
        fn measurement_is_linear(seed in 0u64..1000, a in -3.0f64..3.0) {
            let spec = EnsembleSpec::new(
                60,
                "0.5x^2+0.5x^4".parse::<DegreeDistribution>().unwrap(),
                "x^6".parse().unwrap(),
                0.5,
            );
            let mut spec = spec;
            spec.weight_model = crate::ensemble::WeightModel::Uniform { lo: 0.5, hi: 2.0 };
            let g: SensingGraph<f64> = sample_graph(&spec, seed).unwrap();
            let v1: SignalVector<f64> = sample_signal(60, 0.5, &spec.signal_model, seed + 1).unwrap();
            let v2: SignalVector<f64> = sample_signal(60, 0.5, &spec.signal_model, seed + 2).unwrap();
            let lhs = measure(&g, &v1.axpy(a, &v2)).unwrap();
            let c1 = measure(&g, &v1).unwrap();
            let c2 = measure(&g, &v2).unwrap();
            for ((l, x), y) in lhs.values().iter().zip(c1.values()).zip(c2.values()) {
                let r = a * x + y;
                prop_assert!((l - r).abs() <= 1e-9 * (1.0 + r.abs()));
            }
        }
    }
}
