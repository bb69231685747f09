use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Reusable visit marks; clearing is O(1) by bumping an epoch.
#[derive(Debug, Clone)]
pub(crate) struct Marks {
    stamp: Vec<u32>,
    epoch: u32,
}

impl Marks {
    pub(crate) fn new(n: usize) -> Self {
        Marks { stamp: vec![0; n], epoch: 1 }
    }

    pub(crate) fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// Marks `v`, returning whether it was unmarked before.
    #[inline]
    pub(crate) fn mark(&mut self, v: usize) -> bool {
        if self.stamp[v] == self.epoch {
            false
        } else {
            self.stamp[v] = self.epoch;
            true
        }
    }
}

/// The subgraph of live edges for one outcome of the triggering process,
/// stored as a compact out-adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveEdgeGraph {
    edge_ids: Vec<u32>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl LiveEdgeGraph {
    /// Builds from live edge ids of `graph`, in any order.
    pub fn from_edge_ids(graph: &Graph, mut edge_ids: Vec<u32>) -> Self {
        edge_ids.sort_unstable();
        edge_ids.dedup();
        let n = graph.node_count();
        let mut offsets = vec![0u32; n + 1];
        for &id in &edge_ids {
            offsets[graph.edge(id as usize).source + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        // ids are sorted by (source, target), so targets fall in CSR order
        let targets = edge_ids
            .iter()
            .map(|&id| graph.edge(id as usize).target as u32)
            .collect();
        LiveEdgeGraph { edge_ids, offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Ids (into the source graph) of the live edges, ascending.
    pub fn live_edge_ids(&self) -> &[u32] {
        &self.edge_ids
    }

    #[inline]
    pub fn out(&self, v: NodeId) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// The same graph with every edge reversed.
    pub fn reversed(&self) -> ReverseAdjacency {
        let n = self.node_count();
        let mut offsets = vec![0u32; n + 1];
        for &t in &self.targets {
            offsets[t as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut sources = vec![0u32; self.targets.len()];
        for u in 0..n {
            for &t in self.out(u) {
                sources[fill[t as usize] as usize] = u as u32;
                fill[t as usize] += 1;
            }
        }
        ReverseAdjacency { offsets, sources }
    }

    /// All nodes reachable from `seeds` (seeds included), ascending.
    pub fn reachable_set(&self, seeds: &[NodeId]) -> Result<Vec<NodeId>> {
        let n = self.node_count();
        if let Some(&bad) = seeds.iter().find(|&&s| s >= n) {
            return Err(Error::NodeOutOfRange { node: bad, n });
        }
        let mut marks = Marks::new(n);
        marks.reset();
        let mut out = Vec::new();
        self.visit_from(seeds, &mut marks, &mut Vec::new(), |v| out.push(v));
        out.sort_unstable();
        Ok(out)
    }

    /// Visits every node reachable from `seeds` that `marks` does not
    /// already hold. Callers reset `marks` when they want a fresh search.
    #[inline]
    pub(crate) fn visit_from<F: FnMut(NodeId)>(
        &self,
        seeds: &[NodeId],
        marks: &mut Marks,
        stack: &mut Vec<u32>,
        mut visit: F,
    ) {
        stack.clear();
        for &s in seeds {
            if marks.mark(s) {
                visit(s);
                stack.push(s as u32);
            }
        }
        while let Some(u) = stack.pop() {
            for &t in self.out(u as usize) {
                if marks.mark(t as usize) {
                    visit(t as usize);
                    stack.push(t);
                }
            }
        }
    }
}

/// In-adjacency of a live-edge graph.
#[derive(Debug, Clone)]
pub struct ReverseAdjacency {
    offsets: Vec<u32>,
    sources: Vec<u32>,
}

impl ReverseAdjacency {
    #[inline]
    pub fn into_node(&self, v: NodeId) -> &[u32] {
        &self.sources[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Nodes that reach `v` (including `v`), in visit order.
    pub(crate) fn reachers(&self, v: NodeId, marks: &mut Marks, stack: &mut Vec<u32>, out: &mut Vec<u32>) {
        marks.reset();
        out.clear();
        stack.clear();
        marks.mark(v);
        out.push(v as u32);
        stack.push(v as u32);
        while let Some(u) = stack.pop() {
            for &s in self.into_node(u as usize) {
                if marks.mark(s as usize) {
                    out.push(s);
                    stack.push(s);
                }
            }
        }
    }
}

/// A distribution over triggering sets, sampled node by node.
///
/// Implementations push the ids of the chosen in-edges of `v` into `out`.
pub trait Triggering: Sync {
    fn validate(&self, graph: &Graph) -> Result<()>;

    fn sample_triggering_set(&self, graph: &Graph, v: NodeId, rng: &mut dyn RngCore, out: &mut Vec<u32>);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Model {
    #[serde(rename = "ic")]
    IndependentCascade,
    #[serde(rename = "lt")]
    LinearThreshold,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ic" | "independent_cascade" => Ok(Model::IndependentCascade),
            "lt" | "linear_threshold" => Ok(Model::LinearThreshold),
            other => Err(Error::Argument(format!("unknown diffusion model `{other}`"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::IndependentCascade => "ic",
            Model::LinearThreshold => "lt",
        })
    }
}

const LT_SLACK: f64 = 1e-9;

impl Triggering for Model {
    fn validate(&self, graph: &Graph) -> Result<()> {
        graph.check_weighted()?;
        if *self == Model::LinearThreshold {
            for v in 0..graph.node_count() {
                let sum: f64 = graph
                    .in_edge_ids(v)
                    .iter()
                    .map(|&id| graph.edge(id).weight.unwrap_or(0.0))
                    .sum();
                if sum > 1.0 + LT_SLACK {
                    return Err(Error::ThresholdWeights { node: v, sum });
                }
            }
        }
        Ok(())
    }

    fn sample_triggering_set(&self, graph: &Graph, v: NodeId, rng: &mut dyn RngCore, out: &mut Vec<u32>) {
        match self {
            Model::IndependentCascade => {
                for &id in graph.in_edge_ids(v) {
                    let w = graph.edge(id).weight.unwrap_or(0.0);
                    if rng.gen::<f64>() < w {
                        out.push(id as u32);
                    }
                }
            }
            Model::LinearThreshold => {
                let r: f64 = rng.gen();
                let mut acc = 0.0;
                for &id in graph.in_edge_ids(v) {
                    acc += graph.edge(id).weight.unwrap_or(0.0);
                    if r < acc {
                        out.push(id as u32);
                        break;
                    }
                }
            }
        }
    }
}

/// Samples one live-edge graph: every node independently draws its
/// triggering set.
pub fn sample_live_edge_graph<T: Triggering + ?Sized, R: RngCore>(
    graph: &Graph,
    model: &T,
    rng: &mut R,
) -> Result<LiveEdgeGraph> {
    model.validate(graph)?;
    Ok(sample_unchecked(graph, model, rng))
}

pub(crate) fn sample_unchecked<T: Triggering + ?Sized, R: RngCore>(
    graph: &Graph,
    model: &T,
    rng: &mut R,
) -> LiveEdgeGraph {
    let mut ids = Vec::new();
    for v in 0..graph.node_count() {
        model.sample_triggering_set(graph, v, rng, &mut ids);
    }
    LiveEdgeGraph::from_edge_ids(graph, ids)
}
