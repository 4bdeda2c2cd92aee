//! Classical laboratory for multidimensional period-finding post-processing.
//!
//! The crate simulates the per-run outputs of a d-dimensional quantum
//! period-finding circuit (vectors close to cosets of the dual of a hidden
//! relation lattice) and implements the full classical recovery pipeline on
//! top of an exact integer-lattice toolkit:
//!
//! * [`numtheory`] — arbitrary-precision modular arithmetic, instance
//!   generation and brute-force ground-truth oracles,
//! * [`lattice`] — exact LLL reduction, Hermite normal form, determinants
//!   and membership tests,
//! * [`simulate`] — relation-lattice construction and per-run sampling
//!   (good runs near dual cosets, bad runs uniform on the grid),
//! * [`postprocess`] — the embedding-lattice recovery pipeline,
//! * [`solvers`] — factorizations, discrete logarithms, orders and group
//!   orders from recovered relation vectors,
//! * [`experiments`] — a seeded Monte-Carlo harness for robustness studies.

pub mod encode;
pub mod experiments;
pub mod lattice;
pub mod numtheory;
pub mod rng;
pub mod postprocess;
pub mod simulate;
pub mod solvers;
pub mod tasks;

pub use lattice::{IntMatrix, LatticeBasis};
pub use numtheory::{EvalContext, Group, Instance, InstanceKind, OracleBudget};
pub use postprocess::{PostprocessParams, RecoveredLattice};
pub use simulate::{CostEstimate, NoiseModel, RelationLattice, RunRecord, SimParams};
pub use solvers::{DlogAnswer, DlogMethod, FactorAnswer, FactorRoute};
pub use experiments::{ExperimentConfig, ExperimentReport};
