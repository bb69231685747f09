//! Exact reach probabilities under the independent cascade model by
//! enumerating every live-edge outcome. Used as a test oracle, so it shares
//! no reachability code with the sampled estimators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSpread {
    pub per_node: Vec<f64>,
}

impl ExactSpread {
    pub fn total(&self) -> f64 {
        self.per_node.iter().sum()
    }
}

/// `σ_v(seeds)` for every node, by enumerating the `2^u` outcomes of the
/// `u` edges whose weight lies strictly inside `(0, 1)`.
pub fn exact_spread(graph: &Graph, seeds: &[NodeId]) -> Result<ExactSpread> {
    exact_spread_with_cap(graph, seeds, super::ENUMERATION_CAP)
}

pub fn exact_spread_with_cap(graph: &Graph, seeds: &[NodeId], cap: usize) -> Result<ExactSpread> {
    graph.check_weighted()?;
    let n = graph.node_count();
    if let Some(&bad) = seeds.iter().find(|&&s| s >= n) {
        return Err(Error::NodeOutOfRange { node: bad, n });
    }
    // per edge: Some(bit) if uncertain, None if certain; dead edges dropped
    let mut adjacency: Vec<Vec<(NodeId, Option<usize>)>> = vec![Vec::new(); n];
    let mut probs = Vec::new();
    for e in graph.edges() {
        let w = e.weight.unwrap_or(0.0);
        if w >= 1.0 {
            adjacency[e.source].push((e.target, None));
        } else if w > 0.0 {
            adjacency[e.source].push((e.target, Some(probs.len())));
            probs.push(w);
        }
    }
    if probs.len() > cap {
        return Err(Error::EnumerationCap { edges: probs.len(), cap });
    }
    let mut per_node = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    for mask in 0u64..(1u64 << probs.len()) {
        let p: f64 = probs
            .iter()
            .enumerate()
            .map(|(b, &w)| if mask >> b & 1 == 1 { w } else { 1.0 - w })
            .product();
        seen.iter_mut().for_each(|s| *s = false);
        stack.clear();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for &(t, bit) in &adjacency[u] {
                let live = bit.is_none_or(|b| mask >> b & 1 == 1);
                if live && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        for (acc, &s) in per_node.iter_mut().zip(&seen) {
            if s {
                *acc += p;
            }
        }
    }
    Ok(ExactSpread { per_node })
}
