use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::live_edge::Marks;
use super::sample::LiveEdgeSample;
use crate::error::{Error, Result};
use crate::graph::{CommunityStructure, NodeId};
use crate::rng;
use crate::solutions::Solution;

/// Per-node reach probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageVector(Vec<f64>);

impl CoverageVector {
    pub fn new(values: Vec<f64>) -> Self {
        CoverageVector(values)
    }

    pub fn zeros(n: usize) -> Self {
        CoverageVector(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, v: NodeId) -> f64 {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Expected number of reached nodes.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Mean reach probability within each community.
    pub fn group_coverage(&self, communities: &CommunityStructure) -> Vec<f64> {
        group_coverage(self, communities)
    }

    fn add_scaled(&mut self, other: &CoverageVector, factor: f64) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += factor * b;
        }
    }
}

pub fn group_coverage(coverage: &CoverageVector, communities: &CommunityStructure) -> Vec<f64> {
    communities
        .iter()
        .map(|c| c.members().iter().map(|&v| coverage.0[v]).sum::<f64>() / c.len() as f64)
        .collect()
}

/// Adds `unit(l)` to `acc[v]` for every `v` reached from `seeds` in member `l`.
fn accumulate_reach(
    sample: &LiveEdgeSample,
    range: std::ops::Range<usize>,
    seeds: &[NodeId],
    marks: &mut Marks,
    stack: &mut Vec<u32>,
    acc: &mut [f64],
) {
    for l in range {
        let unit = sample.unit(l);
        marks.reset();
        sample.graph(l).visit_from(seeds, marks, stack, |v| acc[v] += unit);
    }
}

fn sum_in_order(parts: Vec<Vec<f64>>, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for p in parts {
        for (a, b) in out.iter_mut().zip(p) {
            *a += b;
        }
    }
    out
}

/// Fraction of live-edge graphs in which each node is reached from `seeds`.
pub fn coverage_vector(sample: &LiveEdgeSample, seeds: &[NodeId]) -> Result<CoverageVector> {
    sample.check_nodes(seeds)?;
    let n = sample.node_count();
    let parts: Vec<Vec<f64>> = sample
        .chunks()
        .map_init(
            || (Marks::new(n), Vec::new()),
            |(marks, stack), range| {
                let mut acc = vec![0.0; n];
                accumulate_reach(sample, range, seeds, marks, stack, &mut acc);
                acc
            },
        )
        .collect();
    let scale = sample.scale();
    Ok(CoverageVector(sum_in_order(parts, n).into_iter().map(|u| u * scale).collect()))
}

/// `⌈ln(2/δ) / (2ε²)⌉`: draws needed for an additive ε estimate with
/// confidence 1 − δ.
pub fn hoeffding_draws(delta: f64, eps: f64) -> usize {
    ((2.0 / delta).ln() / (2.0 * eps * eps)).ceil() as usize
}

/// Default number of seed-set draws for evaluating independent solutions.
pub fn default_draws() -> usize {
    hoeffding_draws(0.1, 0.1)
}

fn check_probabilities(sample: &LiveEdgeSample, x: &[f64]) -> Result<()> {
    if x.len() != sample.node_count() {
        return Err(Error::Solution(format!(
            "probability vector has length {}, graph has {} nodes",
            x.len(),
            sample.node_count()
        )));
    }
    if let Some(bad) = x.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Solution(format!("selection probability {bad} outside [0, 1]")));
    }
    Ok(())
}

/// Estimates coverage of the independent solution `x` by drawing
/// `draws` seed sets (each node kept independently with probability `x_v`)
/// and averaging their coverage on `sample`.
pub fn evaluate_independent(
    sample: &LiveEdgeSample,
    x: &[f64],
    draws: usize,
    seed: u64,
) -> Result<CoverageVector> {
    check_probabilities(sample, x)?;
    if draws == 0 {
        return Err(Error::Argument("need at least one draw".into()));
    }
    let n = sample.node_count();
    let parts: Vec<Vec<f64>> = (0..draws)
        .into_par_iter()
        .map_init(
            || (Marks::new(n), Vec::new(), Vec::new()),
            |(marks, stack, set), d| {
                let mut r = rng::indexed(seed, d as u64);
                set.clear();
                for (v, &p) in x.iter().enumerate() {
                    if r.gen::<f64>() < p {
                        set.push(v);
                    }
                }
                let mut acc = vec![0.0; n];
                accumulate_reach(sample, 0..sample.len(), set, marks, stack, &mut acc);
                acc
            },
        )
        .collect();
    let scale = sample.scale() / draws as f64;
    Ok(CoverageVector(sum_in_order(parts, n).into_iter().map(|u| u * scale).collect()))
}

/// Coverage of the independent solution `x` averaged over `sample` without
/// drawing seed sets: in each member, `v` is reached with probability
/// `1 − ∏(1 − x_i)` over the nodes `i` that reach it.
pub fn expected_independent_coverage(sample: &LiveEdgeSample, x: &[f64]) -> Result<CoverageVector> {
    check_probabilities(sample, x)?;
    let n = sample.node_count();
    let parts: Vec<Vec<f64>> = sample
        .chunks()
        .map_init(
            || (Marks::new(n), Vec::new(), Vec::new()),
            |(marks, stack, reachers), range| {
                let mut acc = vec![0.0; n];
                for l in range {
                    let unit = sample.unit(l);
                    let rev = sample.reversed(l);
                    for (v, a) in acc.iter_mut().enumerate() {
                        rev.reachers(v, marks, stack, reachers);
                        let miss: f64 = reachers.iter().map(|&i| 1.0 - x[i as usize]).product();
                        *a += unit * (1.0 - miss);
                    }
                }
                acc
            },
        )
        .collect();
    let scale = sample.scale();
    Ok(CoverageVector(sum_in_order(parts, n).into_iter().map(|u| u * scale).collect()))
}

/// Exact mixture of coverage vectors over a finite-support distribution.
pub fn evaluate_distribution(sample: &LiveEdgeSample, support: &[(Vec<NodeId>, f64)]) -> Result<CoverageVector> {
    let total: f64 = support.iter().map(|(_, p)| p).sum();
    if support.iter().any(|(_, p)| p.is_nan() || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Solution(format!(
            "distribution weights must be non-negative and sum to 1, got {total}"
        )));
    }
    let mut out = CoverageVector::zeros(sample.node_count());
    for (set, p) in support {
        if *p == 0.0 {
            continue;
        }
        out.add_scaled(&coverage_vector(sample, set)?, *p);
    }
    Ok(out)
}

/// Coverage of any solution kind. Independent solutions are evaluated by
/// drawing `draws` seed sets from `seed`.
pub fn evaluate_solution(
    sample: &LiveEdgeSample,
    solution: &Solution,
    draws: usize,
    seed: u64,
) -> Result<CoverageVector> {
    match solution {
        Solution::Seeds(s) => coverage_vector(sample, s.nodes()),
        Solution::Independent(x) => evaluate_independent(sample, x.probabilities(), draws, seed),
        Solution::Distribution(p) => evaluate_distribution(sample, p.support()),
    }
}

/// Incremental coverage of a growing seed set on a fixed sample.
///
/// Reached sets are closed under reachability, so the marginal gain of a
/// candidate is found by a search that stops at already covered nodes.
#[derive(Debug, Clone)]
pub struct CoverageState<'a> {
    sample: &'a LiveEdgeSample,
    words: usize,
    covered: Vec<u64>,
    node_units: Vec<f64>,
    seeds: Vec<NodeId>,
}

impl<'a> CoverageState<'a> {
    pub fn new(sample: &'a LiveEdgeSample) -> Self {
        let words = sample.node_count().div_ceil(64);
        CoverageState {
            sample,
            words,
            covered: vec![0; words * sample.len()],
            node_units: vec![0.0; sample.node_count()],
            seeds: Vec::new(),
        }
    }

    pub fn sample(&self) -> &'a LiveEdgeSample {
        self.sample
    }

    pub fn seeds(&self) -> &[NodeId] {
        &self.seeds
    }

    #[inline]
    fn is_covered(&self, l: usize, v: usize) -> bool {
        self.covered[l * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Adds `v` to the seed set.
    pub fn add(&mut self, v: NodeId) {
        let n = self.sample.node_count();
        assert!(v < n, "node {v} out of range");
        self.seeds.push(v);
        let mut stack: Vec<u32> = Vec::new();
        for l in 0..self.sample.len() {
            let base = l * self.words;
            if self.covered[base + v / 64] >> (v % 64) & 1 == 1 {
                continue;
            }
            let unit = self.sample.unit(l);
            let g = self.sample.graph(l);
            self.covered[base + v / 64] |= 1 << (v % 64);
            self.node_units[v] += unit;
            stack.clear();
            stack.push(v as u32);
            while let Some(u) = stack.pop() {
                for &t in g.out(u as usize) {
                    let t = t as usize;
                    let word = &mut self.covered[base + t / 64];
                    if *word >> (t % 64) & 1 == 0 {
                        *word |= 1 << (t % 64);
                        self.node_units[t] += unit;
                        stack.push(t as u32);
                    }
                }
            }
        }
    }

    /// Current per-node reach probabilities.
    pub fn coverage(&self) -> CoverageVector {
        let scale = self.sample.scale();
        CoverageVector(self.node_units.iter().map(|u| u * scale).collect())
    }

    /// Unscaled per-node accumulators; multiply by the sample scale to get
    /// probabilities.
    pub(crate) fn units(&self) -> &[f64] {
        &self.node_units
    }

    pub fn is_seed(&self, v: NodeId) -> bool {
        self.seeds.contains(&v)
    }

    /// Reach probability of `v` under the current seeds.
    pub fn node_coverage(&self, v: NodeId) -> f64 {
        self.node_units[v] * self.sample.scale()
    }

    /// Calls `f(l, u)` for every node `u` that adding `v` would newly cover
    /// in member `l`.
    pub(crate) fn for_each_new<F: FnMut(usize, usize)>(
        &self,
        v: NodeId,
        range: std::ops::Range<usize>,
        marks: &mut Marks,
        stack: &mut Vec<u32>,
        mut f: F,
    ) {
        for l in range {
            if self.is_covered(l, v) {
                continue;
            }
            let g = self.sample.graph(l);
            marks.reset();
            marks.mark(v);
            f(l, v);
            stack.clear();
            stack.push(v as u32);
            while let Some(u) = stack.pop() {
                for &t in g.out(u as usize) {
                    let t = t as usize;
                    if !self.is_covered(l, t) && marks.mark(t) {
                        f(l, t);
                        stack.push(t as u32);
                    }
                }
            }
        }
    }

    /// Increase of `Σ_u weight_u · σ̃_u` from adding `v`; unit weights when
    /// `weights` is `None`.
    pub fn gain(&self, v: NodeId, weights: Option<&[f64]>) -> f64 {
        let n = self.sample.node_count();
        let parts: Vec<f64> = self
            .sample
            .chunks()
            .map_init(
                || (Marks::new(n), Vec::new()),
                |(marks, stack), range| {
                    let mut acc = 0.0;
                    match weights {
                        None => self.for_each_new(v, range, marks, stack, |l, _| acc += self.sample.unit(l)),
                        Some(w) => self.for_each_new(v, range, marks, stack, |l, u| acc += self.sample.unit(l) * w[u]),
                    }
                    acc
                },
            )
            .collect();
        parts.into_iter().sum::<f64>() * self.sample.scale()
    }
}

impl CoverageState<'_> {
    /// Exact gains of every node for the current seeds. Uncovered nodes are
    /// reached only from uncovered nodes, so a reverse search from each
    /// uncovered node of `support` finds every candidate it would credit.
    pub fn gains_by_reverse(&self, weights: &[f64], support: &[NodeId]) -> Vec<f64> {
        let sample = self.sample;
        let n = sample.node_count();
        let parts: Vec<Vec<f64>> = sample
            .chunks()
            .map_init(
                || (Marks::new(n), Vec::new(), Vec::new()),
                |(marks, stack, reachers), range| {
                    let mut acc = vec![0.0; n];
                    for l in range {
                        let unit = sample.unit(l);
                        let rev = sample.reversed(l);
                        for &u in support {
                            if self.is_covered(l, u) {
                                continue;
                            }
                            rev.reachers(u, marks, stack, reachers);
                            for &i in reachers.iter() {
                                acc[i as usize] += unit * weights[u];
                            }
                        }
                    }
                    acc
                },
            )
            .collect();
        let scale = sample.scale();
        sum_in_order(parts, n).into_iter().map(|u| u * scale).collect()
    }
}

/// Gains of every node against the empty seed set, computed by reverse
/// search from the positively weighted nodes of each live-edge graph.
pub fn initial_gains(sample: &LiveEdgeSample, weights: Option<&[f64]>) -> Vec<f64> {
    let n = sample.node_count();
    let parts: Vec<Vec<f64>> = sample
        .chunks()
        .map_init(
            || (Marks::new(n), Vec::new(), Vec::new()),
            |(marks, stack, reachers), range| {
                let mut acc = vec![0.0; n];
                for l in range {
                    let unit = sample.unit(l);
                    let rev = sample.reversed(l);
                    for v in 0..n {
                        let w = weights.map_or(1.0, |w| w[v]);
                        if w <= 0.0 {
                            continue;
                        }
                        rev.reachers(v, marks, stack, reachers);
                        for &i in reachers.iter() {
                            acc[i as usize] += unit * w;
                        }
                    }
                }
                acc
            },
        )
        .collect();
    let scale = sample.scale();
    sum_in_order(parts, n).into_iter().map(|u| u * scale).collect()
}
