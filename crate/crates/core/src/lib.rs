//! Node-based verification recovery of sparse signals over irregular sparse
//! sensing graphs, with Monte Carlo threshold estimation and a search over
//! degree distributions.
//!
//! Core types are generic over [`scalar::Scalar`]; the aliases below cover
//! the usual instantiations.

pub mod analysis;
pub mod cli;
pub mod ensemble;
pub mod optimizer;
mod prefetch;
pub mod recovery;
pub mod rng;
pub mod scalar;

use num_rational::Rational64;

pub type SensingGraph64 = ensemble::SensingGraph<f64>;
pub type SensingGraph32 = ensemble::SensingGraph<f32>;
pub type ExactSensingGraph = ensemble::SensingGraph<Rational64>;

pub type Signal64 = ensemble::SignalVector<f64>;
pub type ExactSignal = ensemble::SignalVector<Rational64>;

pub type Measurements64 = ensemble::MeasurementVector<f64>;
pub type ExactMeasurements = ensemble::MeasurementVector<Rational64>;

pub type RecoveryReport64 = recovery::RecoveryReport<f64>;
pub type ExactRecoveryReport = recovery::RecoveryReport<Rational64>;
