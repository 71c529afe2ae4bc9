//! Quantum causal models built on SIC-POVM measurements: circuit simulation,
//! quantum d-separation, and the closed-form intervention and un-measurement
//! formulas.

pub mod calculus;
pub mod circuit;
pub mod cli;
pub mod dist;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod sic;

pub use calculus::{
    compatible_qdags, intervene_formula, intervention_partition, markov_check, unmeasure_formula, InterventionResult,
    InterventionVariant, MarkovReport, UnmeasurementResult,
};
pub use circuit::{random_model, simulate, FunctionalModel, Gate, GateSpec, Measurement, UnitarySource, Wire};
pub use dist::{JointDistribution, Variable};
pub use error::{Error, Result};
pub use graph::{BlockingRule, CausalGraph, NodeSet, Slice, UndirectedPath};
pub use sic::{search_fiducial, validate_sic, Fiducial, SicPovm};
