//! Coherence-driven inference over natural-language propositions.
//!
//! Propositions become vertices of a weighted coherence graph; accepting and
//! rejecting them is a constrained maximum-coherence cut. This crate holds
//! the graph model and objective, elementwise-median aggregation of repeated
//! graph samples, exact and annealed solvers, Gibbs weighting of
//! near-optimal cuts, and joint-probability outcome tables.

pub mod aggregate;
pub mod gibbs;
pub mod graph;
pub mod outcome;
pub mod prop;
pub mod solver;

pub use graph::{CoherenceGraph, Cut};
pub use prop::{Category, Proposition, PropositionFile};
pub use solver::{ConstraintSet, RankedCuts};
