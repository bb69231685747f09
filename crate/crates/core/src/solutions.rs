//! Seeding strategies and demographic-parity metrics.
//!
//! Three kinds of solutions exist: a deterministic [`SeedSet`], an
//! [`IndependentSolution`] selecting each node independently, and a
//! [`SetDistribution`] over finitely many seed sets. All of them carry the
//! budget `k` they were built for and reject expected sizes above it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Slack allowed on budget constraints.
pub const SIZE_SLACK: f64 = 1e-6;
/// Slack allowed on the total mass of a distribution.
pub const MASS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeedSetRepr")]
pub struct SeedSet {
    nodes: Vec<NodeId>,
    budget: usize,
}

#[derive(Deserialize)]
struct SeedSetRepr {
    nodes: Vec<NodeId>,
    budget: usize,
}

impl TryFrom<SeedSetRepr> for SeedSet {
    type Error = Error;

    fn try_from(r: SeedSetRepr) -> Result<Self> {
        SeedSet::new(r.nodes, r.budget)
    }
}

impl SeedSet {
    pub fn new(mut nodes: Vec<NodeId>, budget: usize) -> Result<Self> {
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.len() > budget {
            return Err(Error::Solution(format!("{} seeds exceed budget {budget}", nodes.len())));
        }
        Ok(SeedSet { nodes, budget })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IndependentRepr")]
pub struct IndependentSolution {
    x: Vec<f64>,
    budget: usize,
}

#[derive(Deserialize)]
struct IndependentRepr {
    x: Vec<f64>,
    budget: usize,
}

impl TryFrom<IndependentRepr> for IndependentSolution {
    type Error = Error;

    fn try_from(r: IndependentRepr) -> Result<Self> {
        IndependentSolution::new(r.x, r.budget)
    }
}

impl IndependentSolution {
    pub fn new(x: Vec<f64>, budget: usize) -> Result<Self> {
        if let Some(bad) = x.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Solution(format!("selection probability {bad} outside [0, 1]")));
        }
        let size: f64 = x.iter().sum();
        if size > budget as f64 + SIZE_SLACK {
            return Err(Error::Solution(format!("expected size {size} exceeds budget {budget}")));
        }
        Ok(IndependentSolution { x, budget })
    }

    /// Clamps solver noise into `[0, 1]` before validating.
    pub fn from_solver(x: Vec<f64>, budget: usize) -> Result<Self> {
        Self::new(x.into_iter().map(|p| p.clamp(0.0, 1.0)).collect(), budget)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.x
    }

    pub fn budget(&self) -> usize {
        self.budget
    }
}

/// A finite-support distribution over seed sets. The support is canonical:
/// every set sorted, equal sets merged, zero weights dropped and entries in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct SetDistribution {
    support: Vec<(Vec<NodeId>, f64)>,
    budget: usize,
}

#[derive(Serialize, Deserialize)]
struct SupportEntry {
    set: Vec<NodeId>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    budget: usize,
    support: Vec<SupportEntry>,
}

impl TryFrom<DistributionRepr> for SetDistribution {
    type Error = Error;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        SetDistribution::new(r.support.into_iter().map(|e| (e.set, e.weight)).collect(), r.budget)
    }
}

impl From<SetDistribution> for DistributionRepr {
    fn from(d: SetDistribution) -> Self {
        DistributionRepr {
            budget: d.budget,
            support: d
                .support
                .into_iter()
                .map(|(set, weight)| SupportEntry { set, weight })
                .collect(),
        }
    }
}

impl SetDistribution {
    pub fn new(entries: Vec<(Vec<NodeId>, f64)>, budget: usize) -> Result<Self> {
        let mut merged: BTreeMap<Vec<NodeId>, f64> = BTreeMap::new();
        for (mut set, w) in entries {
            if w.is_nan() || w < 0.0 {
                return Err(Error::Solution(format!("negative or invalid weight {w}")));
            }
            set.sort_unstable();
            set.dedup();
            *merged.entry(set).or_insert(0.0) += w;
        }
        let support: Vec<(Vec<NodeId>, f64)> = merged.into_iter().filter(|(_, w)| *w > 0.0).collect();
        let mass: f64 = support.iter().map(|(_, w)| w).sum();
        if (mass - 1.0).abs() > MASS_SLACK {
            return Err(Error::Solution(format!("weights sum to {mass}, not 1")));
        }
        let size: f64 = support.iter().map(|(s, w)| w * s.len() as f64).sum();
        if size > budget as f64 + SIZE_SLACK {
            return Err(Error::Solution(format!("expected size {size} exceeds budget {budget}")));
        }
        Ok(SetDistribution { support, budget })
    }

    /// Point mass on one set.
    pub fn point(set: Vec<NodeId>, budget: usize) -> Result<Self> {
        Self::new(vec![(set, 1.0)], budget)
    }

    /// Builds from LP weights: drops entries below `1e-12`, clamps the rest
    /// and rescales to unit mass.
    pub fn from_solver(entries: Vec<(Vec<NodeId>, f64)>, budget: usize) -> Result<Self> {
        let kept: Vec<(Vec<NodeId>, f64)> = entries.into_iter().filter(|(_, w)| *w > 1e-12).collect();
        let mass: f64 = kept.iter().map(|(_, w)| w).sum();
        if kept.is_empty() || (mass - 1.0).abs() > 1e-6 {
            return Err(Error::Solution(format!("solver weights sum to {mass}")));
        }
        Self::new(kept.into_iter().map(|(s, w)| (s, w / mass)).collect(), budget)
    }

    pub fn support(&self) -> &[(Vec<NodeId>, f64)] {
        &self.support
    }

    pub fn budget(&self) -> usize {
        self.budget
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Solution {
    #[serde(rename = "seed_set")]
    Seeds(SeedSet),
    Independent(IndependentSolution),
    Distribution(SetDistribution),
}

impl Solution {
    pub fn budget(&self) -> usize {
        match self {
            Solution::Seeds(s) => s.budget(),
            Solution::Independent(x) => x.budget(),
            Solution::Distribution(p) => p.budget(),
        }
    }

    /// `|S|`, `Σ x_v` or `Σ p_S |S|`.
    pub fn expected_size(&self) -> f64 {
        match self {
            Solution::Seeds(s) => s.len() as f64,
            Solution::Independent(x) => x.probabilities().iter().sum(),
            Solution::Distribution(p) => p.support().iter().map(|(s, w)| w * s.len() as f64).sum(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Solution::Seeds(_) => "seed_set",
            Solution::Independent(_) => "independent",
            Solution::Distribution(_) => "distribution",
        }
    }

    /// Largest node id referenced, if any.
    pub fn max_node(&self) -> Option<NodeId> {
        match self {
            Solution::Seeds(s) => s.nodes().last().copied(),
            Solution::Independent(x) => x.probabilities().len().checked_sub(1),
            Solution::Distribution(p) => p.support().iter().filter_map(|(s, _)| s.last().copied()).max(),
        }
    }
}

impl From<SeedSet> for Solution {
    fn from(s: SeedSet) -> Self {
        Solution::Seeds(s)
    }
}

impl From<IndependentSolution> for Solution {
    fn from(x: IndependentSolution) -> Self {
        Solution::Independent(x)
    }
}

impl From<SetDistribution> for Solution {
    fn from(p: SetDistribution) -> Self {
        Solution::Distribution(p)
    }
}

pub fn expected_size(solution: &Solution) -> f64 {
    solution.expected_size()
}

/// `max_C σ_C − min_C σ_C`.
pub fn dp_violation_additive(group_coverages: &[f64]) -> f64 {
    let (lo, hi) = min_max(group_coverages);
    (hi - lo).max(0.0)
}

/// Largest `β` with `σ_Ci ≥ β σ_Cj` for all pairs, i.e. `min / max`.
/// All-zero coverage counts as perfectly fair.
pub fn dp_violation_multiplicative(group_coverages: &[f64]) -> f64 {
    let (lo, hi) = min_max(group_coverages);
    if hi <= 0.0 {
        1.0
    } else {
        (lo / hi).clamp(0.0, 1.0)
    }
}

pub fn eps_plus_feasible(group_coverages: &[f64], eps: f64) -> bool {
    dp_violation_additive(group_coverages) <= eps
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
