//! Random subtrees of finite graphs: samplers, exact enumeration and statistics.
//!
//! The crate is organised around a shared [`graph::Graph`] representation and a
//! mutable [`tree::EmbeddedTree`] that every sampler operates on:
//!
//! * [`spanning`] — uniform spanning tree samplers (Aldous–Broder, Wilson,
//!   cycle popping) and the walk-to-tree constructions behind them.
//! * [`enumeration`] — exact subtree counting by deletion–contraction and the
//!   matrix-tree theorem, plus exact and Boltzmann samplers driven by counts.
//! * [`mcmc`] — Markov kernels on fixed-size and variable-size subtree spaces
//!   with known invariant measures.
//! * [`pioneer`] — the pioneer random tree and the erase-oldest-edge chain.
//! * [`growth`] — growth and extraction models: outgoing-edge models, DLA,
//!   internal DLA, Prim/Kruskal components, first passage percolation, and
//!   subtree extraction from spanning trees.
//! * [`evaporation`] — random subtrees of a fixed tree: leaf evaporation
//!   models, uniform edge removal, and an exact coupling-from-the-past sampler.
//! * [`stats`] — batch measurements, exponent estimators and goodness-of-fit
//!   helpers used by the simulation harness.
//! * [`exhaustive`] — small-instance oracles: exhaustive transition matrices in
//!   exact rational arithmetic, used to audit kernel balance identities.

pub mod enumeration;
pub mod error;
pub mod evaporation;
pub mod exhaustive;
pub mod graph;
pub mod growth;
pub mod mcmc;
pub mod pioneer;
pub mod spanning;
pub mod stats;
pub mod svg;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{GeneratorSpec, Graph, Vertex};
pub use tree::EmbeddedTree;
