//! Influence maximization under demographic parity.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`] holds the directed weighted graph, edge-list and community
//!   loaders, the Barabási–Albert generator and community schemes.
//! * [`diffusion`] samples live-edge graphs under the independent cascade and
//!   linear threshold models and turns them into reach-probability estimates.
//!   It also carries an exact enumeration oracle for tiny graphs.
//! * [`solutions`] defines the three solution kinds (seed sets, independent
//!   node probabilities, distributions over seed sets) and the parity metrics.
//! * [`lp`] is a small linear-program model backed by HiGHS.
//! * [`algorithms`] contains the greedy baselines, the multiplicative weights
//!   maximin routine and the three LP-based fair algorithms.
//! * [`fixtures`] builds the small theory instances with known answers.
//! * [`harness`] runs configured experiments and writes CSV reports.

pub mod algorithms;
pub mod diffusion;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod harness;
pub mod lp;
pub mod rng;
pub mod solutions;

pub use algorithms::{AlgorithmId, AlgorithmOutput, EtaPreset, GreedyTrace};
pub use diffusion::{CoverageVector, LiveEdgeGraph, LiveEdgeSample, Model};
pub use error::{Error, Result};
pub use graph::{CommunityScheme, CommunityStructure, Graph, NodeId};
pub use solutions::{IndependentSolution, SeedSet, SetDistribution, Solution};
