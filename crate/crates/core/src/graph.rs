//! Directed weighted graphs and community structures.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    /// `None` until weights are assigned.
    pub weight: Option<f64>,
}

/// A directed graph with per-edge activation weights.
///
/// Edges are kept sorted by `(source, target)` with no duplicates, so edge
/// ids double as positions in the out-adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    out_offsets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_edges: Vec<usize>,
    labels: Vec<String>,
}

impl Graph {
    /// Builds a graph from raw edges. Parallel edges are merged, keeping the
    /// first occurrence's weight.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let labels = (0..n).map(|v| v.to_string()).collect();
        Self::with_labels(labels, edges)
    }

    pub fn with_labels<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let n = labels.len();
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        for e in &edges {
            for node in [e.source, e.target] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if let Some(w) = e.weight {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::Argument(format!(
                        "edge {}->{} weight {w} outside [0, 1]",
                        e.source, e.target
                    )));
                }
            }
        }
        // stable sort keeps the first occurrence of a duplicate in front
        edges.sort_by_key(|e| (e.source, e.target));
        edges.dedup_by_key(|e| (e.source, e.target));

        let mut out_offsets = vec![0; n + 1];
        let mut in_offsets = vec![0; n + 1];
        for e in &edges {
            out_offsets[e.source + 1] += 1;
            in_offsets[e.target + 1] += 1;
        }
        for v in 0..n {
            out_offsets[v + 1] += out_offsets[v];
            in_offsets[v + 1] += in_offsets[v];
        }
        let mut fill = in_offsets.clone();
        let mut in_edges = vec![0; edges.len()];
        for (id, e) in edges.iter().enumerate() {
            in_edges[fill[e.target]] = id;
            fill[e.target] += 1;
        }
        Ok(Graph {
            n,
            edges,
            out_offsets,
            in_offsets,
            in_edges,
            labels,
        })
    }

    /// Convenience constructor for weighted directed edges.
    pub fn from_weighted(n: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        Self::new(
            n,
            edges.iter().map(|&(source, target, w)| Edge {
                source,
                target,
                weight: Some(w),
            }),
        )
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Ids of the edges leaving `v`, ordered by target.
    pub fn out_edge_ids(&self, v: NodeId) -> std::ops::Range<usize> {
        self.out_offsets[v]..self.out_offsets[v + 1]
    }

    /// Ids of the edges entering `v`, ordered by source.
    pub fn in_edge_ids(&self, v: NodeId) -> &[usize] {
        &self.in_edges[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn out_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.edges[self.out_edge_ids(v)].iter().map(|e| e.target)
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_weighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight.is_some())
    }

    /// Weight of edge `id`, failing if it was never assigned.
    pub fn weight(&self, id: usize) -> Result<f64> {
        let e = &self.edges[id];
        e.weight.ok_or(Error::UnweightedEdge {
            source_node: e.source,
            target_node: e.target,
        })
    }

    pub fn check_weighted(&self) -> Result<()> {
        match self.edges.iter().find(|e| e.weight.is_none()) {
            Some(e) => Err(Error::UnweightedEdge {
                source_node: e.source,
                target_node: e.target,
            }),
            None => Ok(()),
        }
    }

    /// Returns a copy with every edge weight drawn i.i.d. from `[0, w_max]`.
    pub fn assign_uniform_weights(&self, w_max: f64, seed: u64) -> Result<Graph> {
        if !(w_max > 0.0 && w_max <= 1.0) {
            return Err(Error::Argument(format!("w_max must lie in (0, 1], got {w_max}")));
        }
        let mut rng = rng::seeded(seed);
        let mut g = self.clone();
        for e in &mut g.edges {
            e.weight = Some(rng.gen_range(0.0..=w_max));
        }
        Ok(g)
    }

    /// Serializes as a directed edge list using the original labels.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let _ = match e.weight {
                Some(w) => writeln!(out, "{} {} {}", self.labels[e.source], self.labels[e.target], w),
                None => writeln!(out, "{} {}", self.labels[e.source], self.labels[e.target]),
            };
        }
        out
    }
}

/// Parses a whitespace separated edge list (`u v [w]` per line, `#` comments).
///
/// Node tokens are mapped to dense ids in order of first appearance. With
/// `directed == false` every line contributes both directions.
pub fn load_edge_list(text: &str, directed: bool) -> Result<Graph> {
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |tok: &str| -> NodeId {
        *ids.entry(tok.to_string()).or_insert_with(|| {
            labels.push(tok.to_string());
            labels.len() - 1
        })
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `u v [w]`, got {} fields", tokens.len()),
            });
        }
        let weight = match tokens.get(2) {
            Some(tok) => {
                let w = f64::from_str(tok).map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid weight `{tok}`"),
                })?;
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::WeightRange { line: line_no, weight: w });
                }
                Some(w)
            }
            None => None,
        };
        let u = intern(tokens[0]);
        let v = intern(tokens[1]);
        edges.push(Edge { source: u, target: v, weight });
        if !directed {
            edges.push(Edge { source: v, target: u, weight });
        }
    }
    Graph::with_labels(labels, edges)
}

/// Undirected Barabási–Albert graph stored with both edge directions.
///
/// Starts from a clique on `m_attach + 1` nodes; each later node attaches to
/// `m_attach` distinct existing nodes drawn proportionally to degree
/// (repeated draws, discarding repeats).
pub fn generate_barabasi_albert(n: usize, m_attach: usize, seed: u64) -> Result<Graph> {
    if m_attach == 0 || n <= m_attach {
        return Err(Error::Argument(format!(
            "Barabási–Albert needs n > m_attach >= 1, got n={n}, m_attach={m_attach}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    // every edge endpoint appears once, so a uniform pick is degree-proportional
    let mut endpoints: Vec<NodeId> = Vec::new();
    for u in 0..=m_attach {
        for v in (u + 1)..=m_attach {
            pairs.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut chosen: Vec<NodeId> = Vec::with_capacity(m_attach);
    for new in (m_attach + 1)..n {
        chosen.clear();
        while chosen.len() < m_attach {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            pairs.push((t, new));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    let edges = pairs.into_iter().flat_map(|(u, v)| {
        [
            Edge { source: u, target: v, weight: None },
            Edge { source: v, target: u, weight: None },
        ]
    });
    Graph::new(n, edges)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Community {
    pub name: String,
    members: Vec<NodeId>,
}

impl Community {
    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// A non-empty list of non-empty, possibly overlapping node groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityStructure {
    node_count: usize,
    communities: Vec<Community>,
}

impl CommunityStructure {
    pub fn new(node_count: usize, groups: Vec<(String, Vec<NodeId>)>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Argument("a community structure needs at least one community".into()));
        }
        let mut communities = Vec::with_capacity(groups.len());
        for (name, mut members) in groups {
            members.sort_unstable();
            members.dedup();
            if members.is_empty() {
                return Err(Error::Argument(format!("community `{name}` is empty")));
            }
            if let Some(&v) = members.last() {
                if v >= node_count {
                    return Err(Error::NodeOutOfRange { node: v, n: node_count });
                }
            }
            communities.push(Community { name, members });
        }
        Ok(CommunityStructure { node_count, communities })
    }

    /// Builds from anonymous groups, dropping empty ones.
    fn from_groups(node_count: usize, groups: Vec<Vec<NodeId>>) -> Result<Self> {
        let groups = groups
            .into_iter()
            .enumerate()
            .filter(|(_, g)| !g.is_empty())
            .map(|(i, g)| (i.to_string(), g))
            .collect();
        Self::new(node_count, groups)
    }

    pub fn singletons(node_count: usize) -> Self {
        let groups = (0..node_count).map(|v| vec![v]).collect();
        Self::from_groups(node_count, groups).expect("singletons of a non-empty graph")
    }

    pub fn whole(node_count: usize) -> Self {
        Self::from_groups(node_count, vec![(0..node_count).collect()]).expect("non-empty graph")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Community> {
        self.communities.iter()
    }

    pub fn get(&self, i: usize) -> &Community {
        &self.communities[i]
    }

    /// For every node, the indices of the communities containing it.
    pub fn memberships(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count];
        for (i, c) in self.communities.iter().enumerate() {
            for &v in &c.members {
                out[v].push(i);
            }
        }
        out
    }
}

impl<'a> IntoIterator for &'a CommunityStructure {
    type Item = &'a Community;
    type IntoIter = std::slice::Iter<'a, Community>;

    fn into_iter(self) -> Self::IntoIter {
        self.communities.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommunityScheme {
    Singleton,
    Random,
    Bfs,
    RandomOverlap,
}

impl FromStr for CommunityScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singleton" | "singletons" => Ok(CommunityScheme::Singleton),
            "random" => Ok(CommunityScheme::Random),
            "bfs" => Ok(CommunityScheme::Bfs),
            "random_overlap" => Ok(CommunityScheme::RandomOverlap),
            other => Err(Error::Argument(format!("unknown community scheme `{other}`"))),
        }
    }
}

/// Generates a community structure. `m` is ignored for singletons.
pub fn build_communities(
    graph: &Graph,
    scheme: CommunityScheme,
    m: usize,
    seed: u64,
) -> Result<CommunityStructure> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Argument("graph has no nodes".into()));
    }
    if scheme != CommunityScheme::Singleton && m == 0 {
        return Err(Error::Argument("number of communities must be at least 1".into()));
    }
    let mut rng = rng::seeded(seed);
    match scheme {
        CommunityScheme::Singleton => Ok(CommunityStructure::singletons(n)),
        CommunityScheme::Random => {
            if m > n {
                return Err(Error::Argument(format!("m={m} exceeds n={n}")));
            }
            let mut groups = vec![Vec::new(); m];
            for v in 0..n {
                groups[rng.gen_range(0..m)].push(v);
            }
            CommunityStructure::from_groups(n, groups)
        }
        CommunityScheme::Bfs => {
            if m > n {
                return Err(Error::Argument(format!("m={m} exceeds n={n}")));
            }
            bfs_communities(graph, m, &mut rng)
        }
        CommunityScheme::RandomOverlap => {
            let mut groups = vec![Vec::new(); m];
            for v in 0..n {
                let pick = rng.gen_range(0..m + 2);
                if pick < m {
                    groups[pick].push(v);
                } else if pick == m + 1 {
                    for g in &mut groups {
                        g.push(v);
                    }
                }
            }
            CommunityStructure::from_groups(n, groups)
        }
    }
}

fn bfs_communities<R: Rng>(graph: &Graph, m: usize, rng: &mut R) -> Result<CommunityStructure> {
    let n = graph.node_count();
    let base = n / m;
    let extra = n % m;
    let mut assigned = vec![false; n];
    let mut unassigned: Vec<NodeId> = (0..n).collect();
    let mut groups = Vec::with_capacity(m);
    let mut queue = std::collections::VecDeque::new();
    let mut frontier: Vec<NodeId> = Vec::new();
    for c in 0..m {
        let target = base + usize::from(c < extra);
        let mut group = Vec::with_capacity(target);
        queue.clear();
        while group.len() < target {
            let v = match queue.pop_front() {
                Some(v) => v,
                None => {
                    // restart from a fresh random source
                    unassigned.retain(|&u| !assigned[u]);
                    let s = *unassigned.choose(rng).expect("unassigned nodes remain");
                    assigned[s] = true;
                    group.push(s);
                    s
                }
            };
            frontier.clear();
            frontier.extend(graph.out_neighbors(v).filter(|&u| !assigned[u]));
            frontier.sort_unstable();
            frontier.dedup();
            for &u in &frontier {
                if group.len() == target {
                    break;
                }
                assigned[u] = true;
                group.push(u);
                queue.push_back(u);
            }
        }
        groups.push(group);
    }
    CommunityStructure::from_groups(n, groups)
}

/// Parses `node_id community_id` lines against the labels of `graph`.
pub fn load_communities(text: &str, graph: &Graph) -> Result<CommunityStructure> {
    let label_ids: HashMap<&str, NodeId> = graph
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<NodeId>> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected `node community`, got {} fields", tokens.len()),
            });
        }
        let node = *label_ids
            .get(tokens[0])
            .ok_or_else(|| Error::UnknownNode(tokens[0].to_string()))?;
        let name = tokens[1];
        if !groups.contains_key(name) {
            order.push(name.to_string());
        }
        groups.entry(name.to_string()).or_default().push(node);
    }
    let groups = order
        .into_iter()
        .map(|name| {
            let members = groups.remove(&name).unwrap_or_default();
            (name, members)
        })
        .collect();
    CommunityStructure::new(graph.node_count(), groups)
}
