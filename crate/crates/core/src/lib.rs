//! Giant components in random multipartite graphs with prescribed degree
//! distributions.
//!
//! The pipeline: describe a degree model ([`degree`]), derive its mean matrix
//! and spectral threshold ([`spectral`]), solve the companion branching
//! process for the survival probability ([`branching`]), sample matching
//! multigraphs ([`configuration`]), measure their components ([`exploration`]),
//! and reconcile prediction with measurement ([`experiments`]).

pub mod branching;
pub mod configuration;
pub mod degree;
pub mod experiments;
pub mod exploration;
pub mod rng;
pub mod scalar;
pub mod scc;
pub mod spectral;
pub mod union_find;

#[cfg(test)]
pub(crate) mod testgen;

pub use branching::{OffspringLaw, SizeOutcome, SurvivalSolution};
pub use configuration::CloneGraph;
pub use degree::{
    DegreeSequence, DegreeSpec, DegreeVector, RoundingPolicy, SequenceStats, SpecFamily,
    ValidationReport,
};
pub use experiments::{ExperimentPlan, SweepPlan, TrialRow, Verdict, VerdictReport};
pub use exploration::{ComponentCensus, ExplorationEvent, ExplorationState, StepLog};
pub use scalar::Scalar;
pub use spectral::{MeanMatrix, Regime, SpectralResult};
