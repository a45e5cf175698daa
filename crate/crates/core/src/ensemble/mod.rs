//! Random objects the recovery runs on: degree distributions, weighted
//! bipartite sensing graphs, sparse signals and their measurements.

mod distribution;
mod graph;
mod signal;

pub use distribution::{DegreeDistribution, MASS_INPUT_TOL, MASS_STORED_TOL};
pub use graph::{
    sample_graph, sample_graph_with, EnsemblePlan, EnsembleSpec, SamplerOptions, SensingGraph,
    WeightModel, REPAIR_ATTEMPTS_PER_EDGE,
};
pub use signal::{measure, sample_signal, MeasurementVector, SignalModel, SignalVector};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("degree distribution has no terms")]
    EmptyDistribution,
    #[error("degrees must be at least 1")]
    NonPositiveDegree,
    #[error("fraction {fraction} for degree {degree} is not positive")]
    NonPositiveFraction { degree: u32, fraction: f64 },
    #[error("degree {0} appears more than once")]
    DuplicateDegree(u32),
    #[error("fractions sum to {0}, not 1")]
    NonUnitMass(f64),
    #[error("cannot parse degree distribution {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("no integer node assignment of {distribution} over {count} nodes carries exactly {edge_budget} edges")]
    InfeasibleEdgeBudget {
        distribution: String,
        count: usize,
        edge_budget: usize,
    },
    #[error("no common edge budget near {target} is feasible for both sides")]
    NoCommonBudget { target: usize },
    #[error("density factor {0} is outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("node count must be positive")]
    EmptyGraph,
    #[error(
        "edge repair did not converge after {attempts} attempts ({remaining} offending edges left)"
    )]
    RepairStall { attempts: usize, remaining: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("signal has length {signal}, graph has {graph} variable nodes")]
    DimensionMismatch { signal: usize, graph: usize },
}
