use std::sync::OnceLock;

use rayon::prelude::*;

use super::live_edge::{sample_unchecked, LiveEdgeGraph, Model, ReverseAdjacency, Triggering};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

/// Default limit on the number of uncertain edges for exact enumeration.
pub const ENUMERATION_CAP: usize = 20;

/// Where a sample's live-edge graphs came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOrigin {
    Sampled(Model),
    Custom,
    /// Every outcome of the independent cascade process, weighted by its
    /// probability.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
enum Weights {
    Uniform,
    Explicit(Vec<f64>),
}

/// An ordered collection of live-edge graphs over one source graph.
///
/// Estimates are averages over the members. Sampled collections weight every
/// member by `1/|M|`; exact collections weight each outcome by its
/// probability. Internally every accumulation adds [`unit`](Self::unit) per
/// member and multiplies by [`scale`](Self::scale) once at the end, which
/// keeps uniform estimates exact integer ratios.
#[derive(Debug, Clone)]
pub struct LiveEdgeSample {
    node_count: usize,
    origin: SampleOrigin,
    seed: Option<u64>,
    graphs: Vec<LiveEdgeGraph>,
    weights: Weights,
    reversed: OnceLock<Vec<ReverseAdjacency>>,
}

impl PartialEq for LiveEdgeSample {
    fn eq(&self, other: &Self) -> bool {
        self.node_count == other.node_count
            && self.origin == other.origin
            && self.seed == other.seed
            && self.graphs == other.graphs
            && self.weights == other.weights
    }
}

/// Members per parallel work unit. Fixed so that reductions do not depend on
/// the number of worker threads.
pub(crate) const CHUNK: usize = 32;

impl LiveEdgeSample {
    /// Draws `count` independent live-edge graphs. Member `i` uses its own
    /// RNG stream derived from `seed`, so the result is identical for any
    /// thread count.
    pub fn build(graph: &Graph, model: Model, count: usize, seed: u64) -> Result<Self> {
        let mut s = Self::build_with(graph, &model, count, seed)?;
        s.origin = SampleOrigin::Sampled(model);
        Ok(s)
    }

    /// Like [`build`](Self::build) with a caller-supplied triggering model.
    pub fn build_with<T: Triggering + ?Sized>(
        graph: &Graph,
        model: &T,
        count: usize,
        seed: u64,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::Argument("sample size must be at least 1".into()));
        }
        model.validate(graph)?;
        let graphs = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::indexed(seed, i as u64);
                sample_unchecked(graph, model, &mut r)
            })
            .collect();
        Ok(LiveEdgeSample {
            node_count: graph.node_count(),
            origin: SampleOrigin::Custom,
            seed: Some(seed),
            graphs,
            weights: Weights::Uniform,
            reversed: OnceLock::new(),
        })
    }

    /// All outcomes of the independent cascade process on `graph`.
    pub fn exact(graph: &Graph) -> Result<Self> {
        Self::exact_with_cap(graph, ENUMERATION_CAP)
    }

    /// Enumerates outcomes over the edges with weight strictly between 0 and
    /// 1; weight-1 edges are always live and weight-0 edges never are.
    pub fn exact_with_cap(graph: &Graph, cap: usize) -> Result<Self> {
        graph.check_weighted()?;
        let mut certain = Vec::new();
        let mut uncertain = Vec::new();
        for (id, e) in graph.edges().iter().enumerate() {
            let w = e.weight.unwrap_or(0.0);
            if w >= 1.0 {
                certain.push(id as u32);
            } else if w > 0.0 {
                uncertain.push((id as u32, w));
            }
        }
        if uncertain.len() > cap {
            return Err(Error::EnumerationCap { edges: uncertain.len(), cap });
        }
        let outcomes = 1usize << uncertain.len();
        let mut graphs = Vec::with_capacity(outcomes);
        let mut weights = Vec::with_capacity(outcomes);
        for mask in 0..outcomes {
            let mut ids = certain.clone();
            let mut p = 1.0;
            for (bit, &(id, w)) in uncertain.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    ids.push(id);
                    p *= w;
                } else {
                    p *= 1.0 - w;
                }
            }
            graphs.push(LiveEdgeGraph::from_edge_ids(graph, ids));
            weights.push(p);
        }
        Ok(LiveEdgeSample {
            node_count: graph.node_count(),
            origin: SampleOrigin::Exact,
            seed: None,
            graphs,
            weights: Weights::Explicit(weights),
            reversed: OnceLock::new(),
        })
    }

    /// A sample from explicit members and probabilities summing to one.
    pub fn weighted(node_count: usize, graphs: Vec<LiveEdgeGraph>, weights: Vec<f64>) -> Result<Self> {
        if graphs.is_empty() || graphs.len() != weights.len() {
            return Err(Error::Argument("need one weight per live-edge graph".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!("member weights must be non-negative and sum to 1, got {total}")));
        }
        if graphs.iter().any(|g| g.node_count() != node_count) {
            return Err(Error::Argument("live-edge graph node count mismatch".into()));
        }
        Ok(LiveEdgeSample {
            node_count,
            origin: SampleOrigin::Custom,
            seed: None,
            graphs,
            weights: Weights::Explicit(weights),
            reversed: OnceLock::new(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn origin(&self) -> SampleOrigin {
        self.origin
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn graphs(&self) -> &[LiveEdgeGraph] {
        &self.graphs
    }

    pub fn graph(&self, i: usize) -> &LiveEdgeGraph {
        &self.graphs[i]
    }

    /// In-adjacency of member `i`, built for all members on first use.
    pub fn reversed(&self, i: usize) -> &ReverseAdjacency {
        &self.reversed.get_or_init(|| self.graphs.par_iter().map(LiveEdgeGraph::reversed).collect())[i]
    }

    /// Accumulation weight of member `i` (1 for uniform samples).
    #[inline]
    pub fn unit(&self, i: usize) -> f64 {
        match &self.weights {
            Weights::Uniform => 1.0,
            Weights::Explicit(w) => w[i],
        }
    }

    /// Factor converting summed units into probabilities.
    #[inline]
    pub fn scale(&self) -> f64 {
        match &self.weights {
            Weights::Uniform => 1.0 / self.graphs.len() as f64,
            Weights::Explicit(_) => 1.0,
        }
    }

    /// Probability mass of member `i`.
    pub fn probability(&self, i: usize) -> f64 {
        self.unit(i) * self.scale()
    }

    pub(crate) fn chunks(&self) -> impl IndexedParallelIterator<Item = std::ops::Range<usize>> + '_ {
        let len = self.graphs.len();
        (0..len.div_ceil(CHUNK))
            .into_par_iter()
            .map(move |c| c * CHUNK..((c + 1) * CHUNK).min(len))
    }

    pub(crate) fn check_nodes(&self, nodes: &[usize]) -> Result<()> {
        match nodes.iter().find(|&&v| v >= self.node_count) {
            Some(&node) => Err(Error::NodeOutOfRange { node, n: self.node_count }),
            None => Ok(()),
        }
    }
}

/// Draws `count` live-edge graphs from `graph` under `model`.
pub fn build_sample(graph: &Graph, model: Model, count: usize, seed: u64) -> Result<LiveEdgeSample> {
    LiveEdgeSample::build(graph, model, count, seed)
}
