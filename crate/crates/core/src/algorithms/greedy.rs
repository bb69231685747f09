use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{initial_gains, CoverageState, LiveEdgeSample, Marks};
use crate::error::{Error, Result};
use crate::graph::{CommunityStructure, Graph, NodeId};
use crate::solutions::SeedSet;

/// Seeds in selection order with the marginal gain of each step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    seeds: Vec<NodeId>,
    gains: Vec<f64>,
}

impl GreedyTrace {
    pub fn seeds(&self) -> &[NodeId] {
        &self.seeds
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    /// `T_i`: the first `i` seeds (all of them when `i` exceeds the length).
    pub fn prefix(&self, i: usize) -> &[NodeId] {
        &self.seeds[..i.min(self.seeds.len())]
    }

    /// `T_0, T_1, …, T_len`.
    pub fn prefixes(&self) -> impl Iterator<Item = &[NodeId]> + '_ {
        (0..=self.seeds.len()).map(move |i| &self.seeds[..i])
    }

    /// Objective value of the full trace.
    pub fn value(&self) -> f64 {
        self.gains.iter().sum()
    }

    pub fn to_seed_set(&self, budget: usize) -> Result<SeedSet> {
        SeedSet::new(self.seeds.clone(), budget)
    }

    fn push(&mut self, v: NodeId, gain: f64) {
        self.seeds.push(v);
        self.gains.push(gain);
    }
}

/// Heap entry ordered by gain, then by lower node id.
struct Candidate {
    gain: f64,
    node: NodeId,
    /// Seed count at which `gain` was computed; `None` for a plain upper bound.
    fresh_at: Option<usize>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then_with(|| other.node.cmp(&self.node))
    }
}

fn check_weights(sample: &LiveEdgeSample, weights: Option<&[f64]>) -> Result<()> {
    if let Some(w) = weights {
        if w.len() != sample.node_count() {
            return Err(Error::Argument(format!(
                "{} node weights for {} nodes",
                w.len(),
                sample.node_count()
            )));
        }
        if let Some(bad) = w.iter().find(|x| x.is_nan() || **x < 0.0) {
            return Err(Error::Argument(format!("node weight {bad} is negative")));
        }
    }
    Ok(())
}

/// Lazy greedy on top of an existing state: adds up to `budget` seeds
/// maximizing `Σ_v weight_v σ̃_v`, stopping once no candidate has positive
/// gain. Ties go to the lowest node id.
pub fn extend_greedy(
    state: &mut CoverageState<'_>,
    budget: usize,
    weights: Option<&[f64]>,
    trace: &mut GreedyTrace,
) -> Result<()> {
    let sample = state.sample();
    check_weights(sample, weights)?;
    if budget == 0 {
        return Ok(());
    }
    let n = sample.node_count();
    let mut is_seed = vec![false; n];
    for &s in state.seeds() {
        is_seed[s] = true;
    }
    // With few weighted nodes, recomputing every gain by reverse search is
    // cheaper than lazy forward evaluation.
    if let Some(w) = weights {
        let support: Vec<NodeId> = (0..n).filter(|&v| w[v] > 0.0).collect();
        if support.len() * 4 <= n {
            for _ in 0..budget {
                let gains = state.gains_by_reverse(w, &support);
                let best = (0..n)
                    .filter(|&v| !is_seed[v])
                    .max_by(|&a, &b| gains[a].total_cmp(&gains[b]).then(b.cmp(&a)));
                match best {
                    Some(v) if gains[v] > 0.0 => {
                        state.add(v);
                        is_seed[v] = true;
                        trace.push(v, gains[v]);
                    }
                    _ => break,
                }
            }
            return Ok(());
        }
    }
    let bounds = initial_gains(sample, weights);
    let mut heap: BinaryHeap<Candidate> = bounds
        .into_iter()
        .enumerate()
        .filter(|&(v, _)| !is_seed[v])
        .map(|(node, gain)| Candidate { gain, node, fresh_at: None })
        .collect();
    let mut added = 0;
    while added < budget {
        let Some(top) = heap.pop() else { break };
        if top.gain <= 0.0 {
            break;
        }
        let round = state.seeds().len();
        if top.fresh_at == Some(round) {
            state.add(top.node);
            trace.push(top.node, top.gain);
            added += 1;
        } else {
            let gain = state.gain(top.node, weights);
            heap.push(Candidate { gain, node: top.node, fresh_at: Some(round) });
        }
    }
    Ok(())
}

/// Greedy maximization of `Σ_v weight_v σ̃_v(S)` with `|S| ≤ k`; unit weights
/// when `node_weights` is `None`.
pub fn greedy_weighted_coverage(
    sample: &LiveEdgeSample,
    k: usize,
    node_weights: Option<&[f64]>,
) -> Result<GreedyTrace> {
    let mut state = CoverageState::new(sample);
    let mut trace = GreedyTrace::default();
    extend_greedy(&mut state, k, node_weights, &mut trace)?;
    Ok(trace)
}

/// Plain influence-maximization greedy.
pub fn grdy_im(sample: &LiveEdgeSample, k: usize) -> Result<GreedyTrace> {
    greedy_weighted_coverage(sample, k, None)
}

fn check_communities(sample: &LiveEdgeSample, communities: &CommunityStructure) -> Result<()> {
    if communities.node_count() != sample.node_count() {
        return Err(Error::Argument(format!(
            "communities are over {} nodes, sample over {}",
            communities.node_count(),
            sample.node_count()
        )));
    }
    Ok(())
}

/// Indicator weights of one community.
pub(crate) fn community_weights(n: usize, members: &[NodeId]) -> Vec<f64> {
    let mut w = vec![0.0; n];
    for &v in members {
        w[v] = 1.0;
    }
    w
}

/// Greedily adds the node maximizing the minimum group coverage, breaking
/// ties by larger total coverage and then lower id. Stops early when no
/// candidate covers anything new.
pub fn grdy_maxmin(sample: &LiveEdgeSample, communities: &CommunityStructure, k: usize) -> Result<SeedSet> {
    check_communities(sample, communities)?;
    let n = sample.node_count();
    let memberships = communities.memberships();
    let sizes: Vec<f64> = communities.iter().map(|c| c.len() as f64).collect();
    let mut state = CoverageState::new(sample);
    let mut is_seed = vec![false; n];
    for _ in 0..k.min(n) {
        let units = state.units();
        let base: Vec<f64> = communities
            .iter()
            .map(|c| c.members().iter().map(|&v| units[v]).sum())
            .collect();
        let candidates: Vec<NodeId> = (0..n).filter(|&v| !is_seed[v]).collect();
        let scored: Vec<(NodeId, f64, f64)> = candidates
            .par_iter()
            .map_init(
                || (Marks::new(n), Vec::new(), vec![0.0; n], Vec::new()),
                |(marks, stack, delta, touched), &v| {
                    state.for_each_new(v, 0..sample.len(), marks, stack, |l, u| {
                        if delta[u] == 0.0 {
                            touched.push(u);
                        }
                        delta[u] += sample.unit(l);
                    });
                    let mut groups = base.clone();
                    let mut total = 0.0;
                    for &u in touched.iter() {
                        total += delta[u];
                        for &c in &memberships[u] {
                            groups[c] += delta[u];
                        }
                        delta[u] = 0.0;
                    }
                    touched.clear();
                    let min = groups
                        .iter()
                        .zip(&sizes)
                        .map(|(g, s)| g / s)
                        .fold(f64::INFINITY, f64::min);
                    (v, min, total)
                },
            )
            .collect();
        let best = scored.into_iter().reduce(|a, b| {
            match b.1.total_cmp(&a.1).then(b.2.total_cmp(&a.2)) {
                Ordering::Greater => b,
                _ => a,
            }
        });
        match best {
            Some((v, _, total)) if total > 0.0 => {
                state.add(v);
                is_seed[v] = true;
            }
            _ => break,
        }
    }
    SeedSet::new(state.seeds().to_vec(), k)
}

/// Each community `C_i`, in input order, receives `⌊k|C_i|/n⌋` seeds chosen
/// greedily for its own coverage; the union is capped at `k` and any
/// shortfall is filled by greedy on total coverage.
pub fn grdy_prop(sample: &LiveEdgeSample, communities: &CommunityStructure, k: usize) -> Result<SeedSet> {
    check_communities(sample, communities)?;
    let n = sample.node_count();
    let mut state = CoverageState::new(sample);
    let mut trace = GreedyTrace::default();
    for c in communities {
        let remaining = k - trace.len();
        let budget = (k * c.len() / n).min(remaining);
        if budget > 0 {
            let w = community_weights(n, c.members());
            extend_greedy(&mut state, budget, Some(&w), &mut trace)?;
        }
    }
    let remaining = k - trace.len();
    extend_greedy(&mut state, remaining, None, &mut trace)?;
    SeedSet::new(trace.seeds, k)
}

/// Starts from the node of maximum out-degree, then repeatedly adds the
/// non-seed with the smallest reach probability. Ties go to the lowest id.
pub fn myopic(graph: &Graph, sample: &LiveEdgeSample, k: usize) -> Result<SeedSet> {
    let n = graph.node_count();
    if n != sample.node_count() {
        return Err(Error::Argument("graph and sample node counts differ".into()));
    }
    let mut state = CoverageState::new(sample);
    let mut is_seed = vec![false; n];
    for step in 0..k.min(n) {
        let pick = if step == 0 {
            (0..n).max_by(|&a, &b| graph.out_degree(a).cmp(&graph.out_degree(b)).then(b.cmp(&a)))
        } else {
            let units = state.units();
            (0..n)
                .filter(|&v| !is_seed[v])
                .min_by(|&a, &b| units[a].total_cmp(&units[b]).then(a.cmp(&b)))
        };
        let Some(v) = pick else { break };
        state.add(v);
        is_seed[v] = true;
    }
    SeedSet::new(state.seeds().to_vec(), k)
}
