//! Laplacian pseudoinverses and random-walk statistics through derandomized
//! squaring chains.
//!
//! A graph is padded to a lazy f-regular graph, its walk matrix is squared
//! repeatedly with small expanders standing in for the complete graph, and
//! the chain is expanded into a constant-accuracy approximation of
//! (I − M)⁺ that Richardson iteration then boosts to any accuracy.

pub mod cli;
pub mod dsquare;
pub mod error;
pub mod expander;
pub mod families;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod multigraph;
pub mod oracle;
pub mod pinv;
pub mod richardson;
pub mod solver;

pub use dsquare::{build_chain, dsquare, ChainConfig, ChainLabel, DegreePolicy, DerandChain, LevelExpander};
pub use error::{Error, Result};
pub use expander::{build_expander, ExpanderSpec};
pub use metrics::{Metrics, MetricsSnapshot};
pub use multigraph::{regularize, LabeledMultigraph, Multigraph, RegularizedGraph, TransitionMatrix};
pub use pinv::{constant_approx, Backend, PinvApproximation};
pub use richardson::BoostConfig;
pub use solver::{approx_pinv, solve, ChainPolicy, SolverConfig};
