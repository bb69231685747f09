use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::greedy::{community_weights, grdy_im, greedy_weighted_coverage};
use super::maximin::{mult_weight_maximin, MultWeightParams};
use crate::diffusion::{coverage_vector, evaluate_distribution, LiveEdgeSample, Marks};
use crate::error::{Error, Result};
use crate::graph::{CommunityStructure, NodeId};
use crate::lp::{LinearProgram, Relation, VarId};
use crate::solutions::{IndependentSolution, SetDistribution};

/// Solver-side facts about an LP-based output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpDiagnostics {
    pub objective: f64,
    pub gamma: f64,
    pub eta: f64,
    pub variables: usize,
    pub constraints: usize,
    /// Largest violation of any row or bound, recomputed from the primal.
    pub max_residual: f64,
    /// Per-community values of the LP surrogate at the returned primal.
    pub group_values: Vec<f64>,
    /// `max_C (|value_C − γ| − η)⁺` over the surrogate values above.
    pub band_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndLpOutput {
    pub solution: IndependentSolution,
    pub diagnostics: LpDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionOutput {
    pub solution: SetDistribution,
    pub diagnostics: LpDiagnostics,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Argument(format!("eta {eta} outside [0, 1]")));
    }
    Ok(())
}

fn band_residual(values: &[f64], gamma: f64, eta: f64) -> f64 {
    values.iter().map(|v| ((v - gamma).abs() - eta).max(0.0)).fold(0.0, f64::max)
}

/// A node together with one set of nodes reaching it, weighted by the
/// probability of the live-edge graphs where exactly that set reaches it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReacherRow {
    pub node: NodeId,
    pub reachers: Vec<u32>,
    pub weight: f64,
}

/// Groups the pairs `(v, ρ_L⁻¹(v))` over all members `L`, summing weights of
/// identical pairs. Rows come out sorted by node, then reacher set.
pub fn reacher_rows(sample: &LiveEdgeSample) -> Vec<ReacherRow> {
    let n = sample.node_count();
    let parts: Vec<BTreeMap<(u32, Vec<u32>), f64>> = sample
        .chunks()
        .map_init(
            || (Marks::new(n), Vec::new(), Vec::new()),
            |(marks, stack, reachers), range| {
                let mut acc: BTreeMap<(u32, Vec<u32>), f64> = BTreeMap::new();
                for l in range {
                    let unit = sample.unit(l);
                    let rev = sample.reversed(l);
                    for v in 0..n {
                        rev.reachers(v, marks, stack, reachers);
                        let mut key = reachers.clone();
                        key.sort_unstable();
                        *acc.entry((v as u32, key)).or_insert(0.0) += unit;
                    }
                }
                acc
            },
        )
        .collect();
    let mut merged: BTreeMap<(u32, Vec<u32>), f64> = BTreeMap::new();
    for part in parts {
        for (key, u) in part {
            *merged.entry(key).or_insert(0.0) += u;
        }
    }
    let scale = sample.scale();
    merged
        .into_iter()
        .map(|((node, reachers), u)| ReacherRow { node: node as usize, reachers, weight: u * scale })
        .collect()
}

/// Fair independent solution through the LP surrogate
/// `p_v(L, x) = min{1, Σ_{i ∈ ρ_L⁻¹(v)} x_i}`.
///
/// Variables are `x ∈ [0,1]^n`, `γ ∈ [0,1]` and `y ∈ [0,1]` per reacher row;
/// the objective is `Σ ω y`, every community has `(1/|C|) Σ_{v∈C} ω y = γ`,
/// and `y` sits in `[Σ x − η, Σ x]`. For `η = 0` the `y` variables equal
/// `Σ x` and are substituted out, leaving `Σ_{i∈R} x_i ≤ 1` per distinct
/// reacher set.
pub fn ind_lp(
    sample: &LiveEdgeSample,
    communities: &CommunityStructure,
    k: usize,
    eta: f64,
) -> Result<IndLpOutput> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Argument(format!("eta {eta} outside [0, 1)")));
    }
    let n = sample.node_count();
    let rows = reacher_rows(sample);
    let memberships = communities.memberships();
    let sizes: Vec<f64> = communities.iter().map(|c| c.len() as f64).collect();
    let m = communities.len();

    let mut lp = LinearProgram::new();
    let mut objective = vec![0.0; n];
    if eta == 0.0 {
        for r in &rows {
            for &i in &r.reachers {
                objective[i as usize] += r.weight;
            }
        }
    }
    let x: Vec<VarId> = objective.iter().map(|&c| lp.add_variable(0.0, 1.0, c)).collect();
    let gamma = lp.add_variable(0.0, 1.0, 0.0);
    lp.add_constraint(x.iter().map(|&v| (v, 1.0)).collect(), Relation::Le, k as f64);

    let mut fairness: Vec<BTreeMap<VarId, f64>> = vec![BTreeMap::new(); m];
    let mut y = Vec::new();
    if eta == 0.0 {
        for r in &rows {
            for &c in &memberships[r.node] {
                for &i in &r.reachers {
                    *fairness[c].entry(x[i as usize]).or_insert(0.0) += r.weight / sizes[c];
                }
            }
        }
        let mut distinct: Vec<&Vec<u32>> = rows.iter().map(|r| &r.reachers).filter(|s| s.len() > 1).collect();
        distinct.sort_unstable();
        distinct.dedup();
        for set in distinct {
            lp.add_constraint(set.iter().map(|&i| (x[i as usize], 1.0)).collect(), Relation::Le, 1.0);
        }
    } else {
        for r in &rows {
            let yv = lp.add_variable(0.0, 1.0, r.weight);
            y.push(yv);
            for &c in &memberships[r.node] {
                *fairness[c].entry(yv).or_insert(0.0) += r.weight / sizes[c];
            }
            let mut coupling = vec![(yv, 1.0)];
            coupling.extend(r.reachers.iter().map(|&i| (x[i as usize], -1.0)));
            lp.add_constraint(coupling.clone(), Relation::Le, 0.0);
            lp.add_constraint(coupling, Relation::Ge, -eta);
        }
    }
    for row in fairness {
        let mut terms: Vec<(VarId, f64)> = row.into_iter().collect();
        terms.push((gamma, -1.0));
        lp.add_constraint(terms, Relation::Eq, 0.0);
    }

    let sol = lp.solve()?.optimal()?;
    let xs: Vec<f64> = x.iter().map(|&v| sol.value(v)).collect();
    let g = sol.value(gamma);

    // Community values recomputed from the rows, independent of the
    // coefficient aggregation above.
    let mut values = vec![0.0; m];
    for (idx, r) in rows.iter().enumerate() {
        let yv = if eta == 0.0 {
            r.reachers.iter().map(|&i| xs[i as usize]).sum::<f64>()
        } else {
            sol.value(y[idx])
        };
        for &c in &memberships[r.node] {
            values[c] += r.weight * yv;
        }
    }
    values.iter_mut().zip(&sizes).for_each(|(v, s)| *v /= s);

    let diagnostics = LpDiagnostics {
        objective: sol.objective,
        gamma: g,
        eta,
        variables: lp.variables().len(),
        constraints: lp.constraints().len(),
        max_residual: lp.max_violation(&sol.values),
        band_residual: band_residual(&values, g, 0.0),
        group_values: values,
    };
    Ok(IndLpOutput { solution: IndependentSolution::from_solver(xs, k)?, diagnostics })
}

/// One mixture component: a seed set or a fixed distribution.
struct Component {
    groups: Vec<f64>,
    total: f64,
    size: f64,
}

impl Component {
    fn of_set(sample: &LiveEdgeSample, communities: &CommunityStructure, set: &[NodeId]) -> Result<Self> {
        let cov = coverage_vector(sample, set)?;
        Ok(Component { groups: cov.group_coverage(communities), total: cov.total(), size: set.len() as f64 })
    }
}

struct MixtureSolution {
    weights: Vec<f64>,
    diagnostics: LpDiagnostics,
}

/// `max Σ λ_j σ̃(j)` over `λ ≥ 0` with `Σ λ = 1`, `Σ λ_j |j| ≤ k` and every
/// group coverage within `γ ± η`.
fn solve_mixture(components: &[Component], m: usize, k: usize, eta: f64) -> Result<MixtureSolution> {
    let mut lp = LinearProgram::new();
    let lambda: Vec<VarId> = components.iter().map(|c| lp.add_variable(0.0, 1.0, c.total)).collect();
    let gamma = lp.add_variable(0.0, 1.0, 0.0);
    lp.add_constraint(lambda.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
    lp.add_constraint(
        lambda.iter().zip(components).map(|(&v, c)| (v, c.size)).collect(),
        Relation::Le,
        k as f64,
    );
    for g in 0..m {
        let mut row: Vec<(VarId, f64)> = lambda
            .iter()
            .zip(components)
            .filter(|(_, c)| c.groups[g] != 0.0)
            .map(|(&v, c)| (v, c.groups[g]))
            .collect();
        row.push((gamma, -1.0));
        if eta == 0.0 {
            lp.add_constraint(row, Relation::Eq, 0.0);
        } else {
            lp.add_constraint(row.clone(), Relation::Le, eta);
            lp.add_constraint(row, Relation::Ge, -eta);
        }
    }
    let sol = lp.solve()?.optimal()?;
    let weights: Vec<f64> = lambda.iter().map(|&v| sol.value(v)).collect();
    let g = sol.value(gamma);
    let values: Vec<f64> = (0..m)
        .map(|i| weights.iter().zip(components).map(|(w, c)| w * c.groups[i]).sum())
        .collect();
    Ok(MixtureSolution {
        diagnostics: LpDiagnostics {
            objective: sol.objective,
            gamma: g,
            eta,
            variables: lp.variables().len(),
            constraints: lp.constraints().len(),
            max_residual: lp.max_violation(&sol.values),
            band_residual: band_residual(&values, g, eta),
            group_values: values,
        },
        weights,
    })
}

/// Per-community greedy sets with budget `k` each.
pub fn community_sets(sample: &LiveEdgeSample, communities: &CommunityStructure, k: usize) -> Result<Vec<Vec<NodeId>>> {
    let n = sample.node_count();
    communities
        .iter()
        .map(|c| {
            let w = community_weights(n, c.members());
            Ok(greedy_weighted_coverage(sample, k, Some(&w))?.seeds().to_vec())
        })
        .collect()
}

fn canonical(mut set: Vec<NodeId>) -> Vec<NodeId> {
    set.sort_unstable();
    set
}

/// LP over distributions supported on `∅`, the per-community greedy sets and
/// the greedy prefixes `T_0 … T_2k`.
pub fn grdy_grp_lp(
    sample: &LiveEdgeSample,
    communities: &CommunityStructure,
    k: usize,
    eta: f64,
) -> Result<DistributionOutput> {
    check_eta(eta)?;
    let mut sets: Vec<Vec<NodeId>> = vec![Vec::new()];
    sets.extend(community_sets(sample, communities, k)?.into_iter().map(canonical));
    let trace = grdy_im(sample, 2 * k)?;
    sets.extend(trace.prefixes().map(|p| canonical(p.to_vec())));
    sets.sort();
    sets.dedup();
    let components = sets
        .iter()
        .map(|s| Component::of_set(sample, communities, s))
        .collect::<Result<Vec<_>>>()?;
    let mix = solve_mixture(&components, communities.len(), k, eta)?;
    let solution = SetDistribution::from_solver(sets.into_iter().zip(mix.weights).collect(), k)?;
    Ok(DistributionOutput { solution, diagnostics: mix.diagnostics })
}

/// LP over mixtures of `∅`, the per-community greedy sets and the
/// multiplicative-weights maximin distribution `q`, flattened into one
/// distribution.
pub fn maxmin_lp(
    sample: &LiveEdgeSample,
    communities: &CommunityStructure,
    k: usize,
    eta: f64,
    params: MultWeightParams,
) -> Result<DistributionOutput> {
    check_eta(eta)?;
    let q = mult_weight_maximin(sample, communities, k, params)?.distribution;
    let mut sets: Vec<Vec<NodeId>> = vec![Vec::new()];
    sets.extend(community_sets(sample, communities, k)?.into_iter().map(canonical));
    sets.sort();
    sets.dedup();
    let mut components = sets
        .iter()
        .map(|s| Component::of_set(sample, communities, s))
        .collect::<Result<Vec<_>>>()?;
    let q_cov = evaluate_distribution(sample, q.support())?;
    components.push(Component {
        groups: q_cov.group_coverage(communities),
        total: q_cov.total(),
        size: q.support().iter().map(|(s, w)| w * s.len() as f64).sum(),
    });
    let mix = solve_mixture(&components, communities.len(), k, eta)?;
    let lambda_q = mix.weights[sets.len()];
    let mut entries: Vec<(Vec<NodeId>, f64)> = sets.into_iter().zip(mix.weights.iter().copied()).collect();
    entries.extend(q.support().iter().map(|(s, w)| (s.clone(), w * lambda_q)));
    let solution = SetDistribution::from_solver(entries, k)?;
    Ok(DistributionOutput { solution, diagnostics: mix.diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{expected_independent_coverage, Model};
    use crate::graph::{generate_barabasi_albert, Graph};
    use crate::solutions::dp_violation_additive;

    const FACTOR: f64 = 0.632_120_558_828_557_7;

    fn two_node() -> LiveEdgeSample {
        LiveEdgeSample::exact(&Graph::from_weighted(2, &[(0, 1, 0.75)]).unwrap()).unwrap()
    }

    fn star(n: usize, eps: f64) -> (LiveEdgeSample, CommunityStructure) {
        let w = (1.0 + eps) / n as f64;
        let edges: Vec<_> = (1..=n).map(|i| (0, i, w)).collect();
        let s = LiveEdgeSample::exact(&Graph::from_weighted(n + 1, &edges).unwrap()).unwrap();
        (s, CommunityStructure::singletons(n + 1))
    }

    #[test]
    fn reacher_rows_on_two_nodes() {
        let rows = reacher_rows(&two_node());
        let flat: Vec<_> = rows.iter().map(|r| (r.node, r.reachers.clone(), r.weight)).collect();
        assert_eq!(flat, vec![(0, vec![0], 1.0), (1, vec![0, 1], 0.75), (1, vec![1], 0.25)]);
    }

    #[test]
    fn ind_lp_two_node() {
        let s = two_node();
        let out = ind_lp(&s, &CommunityStructure::singletons(2), 1, 0.0).unwrap();
        let x = out.solution.probabilities();
        assert!((x[0] - 0.8).abs() < 1e-6 && (x[1] - 0.2).abs() < 1e-6, "{x:?}");
        assert!(out.diagnostics.band_residual < 1e-6);
        assert!((out.diagnostics.gamma - 0.8).abs() < 1e-6);
        let cov = expected_independent_coverage(&s, x).unwrap();
        assert!((cov.get(0) - 0.8).abs() < 1e-6);
        assert!((cov.get(1) - 0.68).abs() < 1e-6);
        assert!(cov.get(1) >= FACTOR * cov.get(0));
    }

    #[test]
    fn ind_lp_without_edges_is_uniform() {
        let s = LiveEdgeSample::exact(&Graph::from_weighted(5, &[]).unwrap()).unwrap();
        let out = ind_lp(&s, &CommunityStructure::singletons(5), 2, 0.0).unwrap();
        for &p in out.solution.probabilities() {
            assert!((p - 0.4).abs() < 1e-6);
        }
        assert!((out.diagnostics.objective - 2.0).abs() < 1e-6);
    }

    #[test]
    fn ind_lp_relaxed_band_matches_substitution_at_small_eta() {
        let g = generate_barabasi_albert(25, 2, 3).unwrap().assign_uniform_weights(0.4, 4).unwrap();
        let s = LiveEdgeSample::build(&g, Model::IndependentCascade, 100, 5).unwrap();
        let comms = CommunityStructure::new(25, vec![("a".into(), (0..12).collect()), ("b".into(), (12..25).collect())]).unwrap();
        let strict = ind_lp(&s, &comms, 3, 0.0).unwrap();
        let loose = ind_lp(&s, &comms, 3, 0.25).unwrap();
        assert!(loose.diagnostics.objective >= strict.diagnostics.objective - 1e-6);
        for out in [&strict, &loose] {
            assert!(out.diagnostics.max_residual <= 1e-6);
            assert!(out.diagnostics.band_residual <= 1e-6);
            assert!(out.solution.probabilities().iter().sum::<f64>() <= 3.0 + 1e-6);
        }
        // sandwich: true coverage of each community is within the factor of γ
        let cov = expected_independent_coverage(&s, strict.solution.probabilities()).unwrap();
        let groups = cov.group_coverage(&comms);
        let (lo, hi) = (groups[0].min(groups[1]), groups[0].max(groups[1]));
        assert!(lo >= FACTOR * hi - 1e-9, "{groups:?}");
    }

    #[test]
    fn grdy_grp_lp_on_star_is_fair() {
        let (s, c) = star(10, 0.1);
        let out = grdy_grp_lp(&s, &c, 1, 0.0).unwrap();
        let cov = evaluate_distribution(&s, out.solution.support()).unwrap();
        assert!(dp_violation_additive(&cov.group_coverage(&c)) <= 1e-6);
        assert!(cov.total() >= 11.0 / 9.9 - 1e-6, "{}", cov.total());
    }

    #[test]
    fn single_community_takes_best_prefix() {
        let g = generate_barabasi_albert(30, 2, 8).unwrap().assign_uniform_weights(0.4, 9).unwrap();
        let s = LiveEdgeSample::build(&g, Model::IndependentCascade, 200, 10).unwrap();
        let whole = CommunityStructure::whole(30);
        let out = grdy_grp_lp(&s, &whole, 3, 0.0).unwrap();
        let t = grdy_im(&s, 3).unwrap();
        let sigma = evaluate_distribution(&s, out.solution.support()).unwrap().total();
        assert!((sigma - t.value()).abs() < 1e-6);
    }

    #[test]
    fn maxmin_lp_matches_grdy_grp_lp_on_star() {
        let (s, c) = star(10, 0.1);
        let a = grdy_grp_lp(&s, &c, 1, 0.0).unwrap();
        let b = maxmin_lp(&s, &c, 1, 0.0, MultWeightParams::for_communities(11)).unwrap();
        assert!((a.diagnostics.objective - b.diagnostics.objective).abs() < 1e-6);
        assert!(b.diagnostics.band_residual < 1e-6);
    }

    #[test]
    fn relaxing_eta_never_hurts() {
        let g = generate_barabasi_albert(30, 2, 11).unwrap().assign_uniform_weights(0.4, 12).unwrap();
        let s = LiveEdgeSample::build(&g, Model::IndependentCascade, 200, 13).unwrap();
        let c = CommunityStructure::new(30, vec![("a".into(), (0..10).collect()), ("b".into(), (10..30).collect())]).unwrap();
        let mut last = f64::NEG_INFINITY;
        for eta in [0.0, 0.02, 0.05, 0.1, 0.5] {
            let out = grdy_grp_lp(&s, &c, 3, eta).unwrap();
            assert!(out.diagnostics.objective >= last - 1e-6);
            last = out.diagnostics.objective;
            let groups = evaluate_distribution(&s, out.solution.support()).unwrap().group_coverage(&c);
            let gamma = out.diagnostics.gamma;
            assert!(groups.iter().all(|g| (g - gamma).abs() <= eta + 1e-6));
        }
    }

    #[test]
    fn large_eta_keeps_maximin_distribution() {
        let g = generate_barabasi_albert(20, 2, 14).unwrap().assign_uniform_weights(0.4, 15).unwrap();
        let s = LiveEdgeSample::build(&g, Model::IndependentCascade, 100, 16).unwrap();
        let c = CommunityStructure::new(20, vec![("a".into(), (0..8).collect()), ("b".into(), (8..20).collect())]).unwrap();
        let params = MultWeightParams::for_communities(2);
        let q = mult_weight_maximin(&s, &c, 2, params).unwrap().distribution;
        let q_sigma = evaluate_distribution(&s, q.support()).unwrap().total();
        let out = maxmin_lp(&s, &c, 2, 1.0, params).unwrap();
        assert!(out.diagnostics.objective >= q_sigma - 1e-6);
    }
}
