//! Seeding algorithms and a string-addressable dispatcher.

mod greedy;
mod lp_based;
mod maximin;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use greedy::{extend_greedy, grdy_im, grdy_maxmin, grdy_prop, greedy_weighted_coverage, myopic, GreedyTrace};
pub use lp_based::{
    community_sets, grdy_grp_lp, ind_lp, maxmin_lp, reacher_rows, DistributionOutput, IndLpOutput, LpDiagnostics,
    ReacherRow,
};
pub use maximin::{mult_weight_maximin, MaximinRun, MultWeightParams};

use crate::diffusion::{evaluate_distribution, LiveEdgeSample};
use crate::error::{Error, Result};
use crate::graph::{CommunityStructure, Graph};
use crate::solutions::{IndependentSolution, Solution};

/// `x_v = k/n` for every node.
pub fn uniform_solution(n: usize, k: usize) -> Result<IndependentSolution> {
    if k > n || n == 0 {
        return Err(Error::Argument(format!("uniform solution needs 0 ≤ k ≤ n, got k={k}, n={n}")));
    }
    IndependentSolution::new(vec![k as f64 / n as f64; n], k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmKind {
    #[serde(rename = "grdy_im")]
    GrdyIm,
    #[serde(rename = "grdy_maxmin")]
    GrdyMaxmin,
    #[serde(rename = "grdy_prop")]
    GrdyProp,
    #[serde(rename = "myopic")]
    Myopic,
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "mult_weight")]
    MultWeight,
    #[serde(rename = "ind_lp")]
    IndLp,
    #[serde(rename = "grdy_grp+lp")]
    GrdyGrpLp,
    #[serde(rename = "maxmin+lp")]
    MaxminLp,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 9] = [
        AlgorithmKind::GrdyIm,
        AlgorithmKind::GrdyMaxmin,
        AlgorithmKind::GrdyProp,
        AlgorithmKind::Myopic,
        AlgorithmKind::Uniform,
        AlgorithmKind::MultWeight,
        AlgorithmKind::IndLp,
        AlgorithmKind::GrdyGrpLp,
        AlgorithmKind::MaxminLp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::GrdyIm => "grdy_im",
            AlgorithmKind::GrdyMaxmin => "grdy_maxmin",
            AlgorithmKind::GrdyProp => "grdy_prop",
            AlgorithmKind::Myopic => "myopic",
            AlgorithmKind::Uniform => "uniform",
            AlgorithmKind::MultWeight => "mult_weight",
            AlgorithmKind::IndLp => "ind_lp",
            AlgorithmKind::GrdyGrpLp => "grdy_grp+lp",
            AlgorithmKind::MaxminLp => "maxmin+lp",
        }
    }

    /// Whether the algorithm takes a parity slack.
    pub fn uses_eta(self) -> bool {
        matches!(self, AlgorithmKind::IndLp | AlgorithmKind::GrdyGrpLp | AlgorithmKind::MaxminLp)
    }
}

/// Parity slack, either absolute or a fraction of the additive violation `x`
/// of `grdy_im` in the same repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaPreset {
    Absolute(f64),
    OfGreedyViolation { num: u32, den: u32 },
}

impl EtaPreset {
    pub fn resolve(self, greedy_violation: Option<f64>) -> Result<f64> {
        match self {
            EtaPreset::Absolute(v) => Ok(v),
            EtaPreset::OfGreedyViolation { num, den } => greedy_violation
                .map(|x| x * num as f64 / den as f64)
                .ok_or_else(|| Error::Config(format!("eta {self} needs the grdy_im violation"))),
        }
    }

    pub fn is_relative(self) -> bool {
        matches!(self, EtaPreset::OfGreedyViolation { .. })
    }
}

impl fmt::Display for EtaPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EtaPreset::Absolute(v) => {
                for den in [2u32, 3, 4, 8, 16] {
                    for num in 1..den {
                        if (v - num as f64 / den as f64).abs() < 1e-12 && gcd(num, den) == 1 {
                            return write!(f, "{num}/{den}");
                        }
                    }
                }
                write!(f, "{v}")
            }
            EtaPreset::OfGreedyViolation { num: 1, den } => write!(f, "x/{den}"),
            EtaPreset::OfGreedyViolation { num, den } => write!(f, "{num}x/{den}"),
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl FromStr for EtaPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid eta '{s}'"));
        let parse_u32 = |t: &str| t.parse::<u32>().map_err(|_| bad());
        if let Some((lhs, den)) = s.split_once('/') {
            let den = parse_u32(den)?;
            if den == 0 {
                return Err(bad());
            }
            if let Some(num) = lhs.strip_suffix('x') {
                let num = if num.is_empty() { 1 } else { parse_u32(num)? };
                return Ok(EtaPreset::OfGreedyViolation { num, den });
            }
            return Ok(EtaPreset::Absolute(parse_u32(lhs)? as f64 / den as f64));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&v) {
            return Err(bad());
        }
        Ok(EtaPreset::Absolute(v))
    }
}

/// An algorithm name with an optional slack, written `name` or `name_eta`,
/// e.g. `grdy_im`, `ind_lp_1/4`, `grdy_grp+lp_x/16`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmId {
    pub kind: AlgorithmKind,
    pub eta: Option<EtaPreset>,
}

impl AlgorithmId {
    pub fn new(kind: AlgorithmKind) -> Self {
        AlgorithmId { kind, eta: None }
    }

    pub fn with_eta(kind: AlgorithmKind, eta: EtaPreset) -> Self {
        AlgorithmId { kind, eta: Some(eta) }
    }

    /// The slack actually applied: an η-taking algorithm written without a
    /// suffix runs at η = 0.
    pub fn effective_eta(&self) -> Option<EtaPreset> {
        match self.eta {
            None if self.kind.uses_eta() => Some(EtaPreset::Absolute(0.0)),
            eta => eta,
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.eta {
            Some(eta) => write!(f, "{}_{}", self.kind.name(), eta),
            None => f.write_str(self.kind.name()),
        }
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let kind = AlgorithmKind::ALL
            .iter()
            .filter(|k| s.starts_with(k.name()))
            .max_by_key(|k| k.name().len())
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))?;
        let rest = &s[kind.name().len()..];
        if rest.is_empty() {
            return Ok(AlgorithmId::new(kind));
        }
        let eta = rest
            .strip_prefix('_')
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))?;
        if !kind.uses_eta() {
            return Err(Error::Config(format!("{} takes no eta", kind.name())));
        }
        Ok(AlgorithmId::with_eta(kind, eta.parse()?))
    }
}

impl Serialize for AlgorithmId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AlgorithmId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything an algorithm may read.
#[derive(Debug, Clone, Copy)]
pub struct AlgorithmInput<'a> {
    pub graph: &'a Graph,
    pub sample: &'a LiveEdgeSample,
    pub communities: &'a CommunityStructure,
    pub k: usize,
    pub mult_weight: MultWeightParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmOutput {
    pub solution: Solution,
    /// Present for LP-based algorithms.
    pub lp: Option<LpDiagnostics>,
    /// Greedy order, for `grdy_im`.
    pub trace: Option<GreedyTrace>,
}

impl AlgorithmOutput {
    fn plain(solution: Solution) -> Self {
        AlgorithmOutput { solution, lp: None, trace: None }
    }
}

/// Runs `kind` with the already resolved slack `eta` (ignored by algorithms
/// without one).
pub fn run_algorithm(kind: AlgorithmKind, eta: f64, input: &AlgorithmInput<'_>) -> Result<AlgorithmOutput> {
    let AlgorithmInput { graph, sample, communities, k, mult_weight } = *input;
    Ok(match kind {
        AlgorithmKind::GrdyIm => {
            let trace = grdy_im(sample, k)?;
            AlgorithmOutput { solution: trace.to_seed_set(k)?.into(), lp: None, trace: Some(trace) }
        }
        AlgorithmKind::GrdyMaxmin => AlgorithmOutput::plain(grdy_maxmin(sample, communities, k)?.into()),
        AlgorithmKind::GrdyProp => AlgorithmOutput::plain(grdy_prop(sample, communities, k)?.into()),
        AlgorithmKind::Myopic => AlgorithmOutput::plain(myopic(graph, sample, k)?.into()),
        AlgorithmKind::Uniform => AlgorithmOutput::plain(uniform_solution(graph.node_count(), k)?.into()),
        AlgorithmKind::MultWeight => {
            AlgorithmOutput::plain(mult_weight_maximin(sample, communities, k, mult_weight)?.distribution.into())
        }
        AlgorithmKind::IndLp => {
            let out = ind_lp(sample, communities, k, eta)?;
            AlgorithmOutput { solution: out.solution.into(), lp: Some(out.diagnostics), trace: None }
        }
        AlgorithmKind::GrdyGrpLp => {
            let out = grdy_grp_lp(sample, communities, k, eta)?;
            AlgorithmOutput { solution: out.solution.into(), lp: Some(out.diagnostics), trace: None }
        }
        AlgorithmKind::MaxminLp => {
            let out = maxmin_lp(sample, communities, k, eta, mult_weight)?;
            AlgorithmOutput { solution: out.solution.into(), lp: Some(out.diagnostics), trace: None }
        }
    })
}

/// Largest amount by which a distribution output leaves its band
/// `γ ± η`, measured by re-evaluating it on `sample`. Independent solutions
/// are measured in the LP surrogate reported by the solver.
pub fn band_violation(
    sample: &LiveEdgeSample,
    communities: &CommunityStructure,
    output: &AlgorithmOutput,
) -> Result<Option<f64>> {
    let Some(lp) = &output.lp else { return Ok(None) };
    match &output.solution {
        Solution::Distribution(p) => {
            let groups = evaluate_distribution(sample, p.support())?.group_coverage(communities);
            let worst = groups
                .iter()
                .map(|g| ((g - lp.gamma).abs() - lp.eta).max(0.0))
                .fold(0.0, f64::max);
            Ok(Some(worst))
        }
        _ => Ok(Some(lp.band_residual.max(lp.max_residual))),
    }
}
