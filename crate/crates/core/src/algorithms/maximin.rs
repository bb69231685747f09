use serde::{Deserialize, Serialize};

use super::greedy::greedy_weighted_coverage;
use crate::diffusion::{coverage_vector, LiveEdgeSample};
use crate::error::{Error, Result};
use crate::graph::{CommunityStructure, NodeId};
use crate::solutions::SetDistribution;

/// Parameters of the multiplicative weights routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultWeightParams {
    pub iterations: usize,
    pub step: f64,
}

impl MultWeightParams {
    /// `T = ⌈8 ln(max(m, 2)) / 0.25⌉` rounds with step 0.1.
    pub fn for_communities(m: usize) -> Self {
        let iterations = (8.0 * (m.max(2) as f64).ln() / 0.25).ceil() as usize;
        MultWeightParams { iterations, step: 0.1 }
    }
}

/// Output of [`mult_weight_maximin`] with the per-round sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximinRun {
    pub distribution: SetDistribution,
    pub rounds: Vec<Vec<NodeId>>,
}

/// Multiplicative weights over communities. Each round runs greedy with node
/// weights `Σ_{C∋v} w_C/|C|`, then shrinks `w_C` by `(1 − step)^{σ̃_C(S_t)}`.
/// Returns the uniform distribution over the round sets.
pub fn mult_weight_maximin(
    sample: &LiveEdgeSample,
    communities: &CommunityStructure,
    k: usize,
    params: MultWeightParams,
) -> Result<MaximinRun> {
    if params.iterations == 0 {
        return Err(Error::Argument("need at least one iteration".into()));
    }
    if !(params.step > 0.0 && params.step < 1.0) {
        return Err(Error::Argument(format!("step {} outside (0, 1)", params.step)));
    }
    let n = sample.node_count();
    let m = communities.len();
    let mut w = vec![1.0 / m as f64; m];
    let mut rounds = Vec::with_capacity(params.iterations);
    for _ in 0..params.iterations {
        let mut node_weights = vec![0.0; n];
        for (c, wc) in communities.iter().zip(&w) {
            let share = wc / c.len() as f64;
            for &v in c.members() {
                node_weights[v] += share;
            }
        }
        let trace = greedy_weighted_coverage(sample, k, Some(&node_weights))?;
        let set = trace.seeds().to_vec();
        let groups = coverage_vector(sample, &set)?.group_coverage(communities);
        for (wc, g) in w.iter_mut().zip(groups) {
            *wc *= (1.0 - params.step).powf(g);
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        rounds.push(set);
    }
    let share = 1.0 / rounds.len() as f64;
    let distribution = SetDistribution::new(rounds.iter().map(|s| (s.clone(), share)).collect(), k)?;
    Ok(MaximinRun { distribution, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::evaluate_distribution;
    use crate::graph::Graph;

    fn min_group(sample: &LiveEdgeSample, c: &CommunityStructure, support: &[(Vec<NodeId>, f64)]) -> f64 {
        evaluate_distribution(sample, support)
            .unwrap()
            .group_coverage(c)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn default_parameters() {
        let p = MultWeightParams::for_communities(1);
        assert_eq!(p.iterations, (32.0 * 2f64.ln()).ceil() as usize);
        assert_eq!(MultWeightParams::for_communities(200).iterations, 170);
        assert_eq!(p.step, 0.1);
    }

    #[test]
    fn single_community_is_point_mass() {
        let g = Graph::from_weighted(4, &[(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5)]).unwrap();
        let s = LiveEdgeSample::exact(&g).unwrap();
        let run = mult_weight_maximin(&s, &CommunityStructure::whole(4), 1, MultWeightParams { iterations: 5, step: 0.1 }).unwrap();
        assert_eq!(run.distribution.support(), &[(vec![0], 1.0)]);
    }

    #[test]
    fn star_concentrates_on_hub() {
        let edges: Vec<_> = (1..=10).map(|i| (0, i, 0.11)).collect();
        let s = LiveEdgeSample::exact(&Graph::from_weighted(11, &edges).unwrap()).unwrap();
        let run = mult_weight_maximin(&s, &CommunityStructure::singletons(11), 1, MultWeightParams::for_communities(11)).unwrap();
        let (set, p) = &run.distribution.support()[0];
        assert_eq!(set, &vec![0]);
        assert!(*p > 0.5);
    }

    #[test]
    fn symmetric_stars_alternate() {
        // two 4-node stars with hubs 0 and 4
        let mut edges = Vec::new();
        for hub in [0usize, 4] {
            for leaf in 1..4 {
                edges.push((hub, hub + leaf, 0.5));
            }
        }
        let s = LiveEdgeSample::exact(&Graph::from_weighted(8, &edges).unwrap()).unwrap();
        let comms = CommunityStructure::new(8, vec![("a".into(), (0..4).collect()), ("b".into(), (4..8).collect())]).unwrap();
        let params = MultWeightParams { iterations: 40, step: 0.1 };
        let run = mult_weight_maximin(&s, &comms, 1, params).unwrap();
        let support = run.distribution.support();
        assert_eq!(support.len(), 2);
        for (_, p) in support {
            assert!((p - 0.5).abs() <= 0.1, "{support:?}");
        }
        let out = min_group(&s, &comms, support);
        // every deterministic single seed leaves one star uncovered
        let best_det = (0..8).map(|v| min_group(&s, &comms, &[(vec![v], 1.0)])).fold(0.0, f64::max);
        assert_eq!(best_det, 0.0);
        assert!(out > best_det);
        let bound = (1.0 - (-1.0f64).exp()) * (1.0 - params.step) * best_det - 2.0 * params.step;
        assert!(out >= bound);
    }
}
