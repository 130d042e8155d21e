//! Problem graphs, bounded-degree random instances, and the exact MIS
//! oracle that every embedding is checked against.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::mis;

/// Default vertex-count limit for [`exact_mis`].
pub const DEFAULT_MIS_LIMIT: usize = 40;

/// Undirected simple graph on vertices `0..n`.
///
/// Edges are stored normalized (`u < v`) and sorted lexicographically; the
/// position of an edge in [`Graph::edges`] is its edge id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::VertexOutOfRange { u: a, v: b, n });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        Ok(Self { n, edges, adjacency })
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, []).expect("edgeless graph is valid")
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("complete graph is valid")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v - 1, v))).expect("path graph is valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("cycle graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Index of edge `{u, v}` in the canonical edge list.
    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        Self::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v]))).expect("relabeling keeps a simple graph")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile::from(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        Self::new(file.n, file.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

/// On-disk graph format: `{"n": 3, "edges": [[0,1],[1,2]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphFile {
    fn from(g: &Graph) -> Self {
        Self {
            n: g.n,
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

/// A set of vertex indices, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexSet(pub BTreeSet<usize>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

pub fn max_degree(g: &Graph) -> usize {
    (0..g.n).map(|v| g.degree(v)).max().unwrap_or(0)
}

/// Erdős–Rényi sample with a hard degree cap.
///
/// Pairs `(u, v)` with `u < v` are visited lexicographically; each draws one
/// uniform number (whether or not it can be used, so the random stream does
/// not depend on the cap) and is kept if the draw is below `p` and neither
/// endpoint already has `delta_max` neighbors.
pub fn generate_er_bounded(n: usize, p: f64, delta_max: usize, seed: u64) -> Graph {
    assert!(n >= 1, "n must be at least 1");
    assert!((0.0..=1.0).contains(&p), "edge probability must lie in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let draw: f64 = rng.gen();
            if draw < p && degree[u] < delta_max && degree[v] < delta_max {
                degree[u] += 1;
                degree[v] += 1;
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).expect("generated edges are simple")
}

pub fn is_independent_set(g: &Graph, s: &VertexSet) -> bool {
    g.edges.iter().all(|&(u, v)| !(s.contains(u) && s.contains(v)))
}

/// Cardinality of a maximum independent set, without the size limit.
pub fn mis_size(g: &Graph) -> usize {
    mis::mis_size(&g.adjacency, &vec![true; g.n])
}

/// One maximum independent set and its size.
///
/// Among all optimal sets the one whose sorted member list is
/// lexicographically smallest is returned.
pub fn exact_mis(g: &Graph) -> Result<(VertexSet, usize), GraphError> {
    exact_mis_with_limit(g, DEFAULT_MIS_LIMIT)
}

pub fn exact_mis_with_limit(g: &Graph, limit: usize) -> Result<(VertexSet, usize), GraphError> {
    if g.n > limit {
        return Err(GraphError::MisLimit { n: g.n, limit });
    }
    let target = mis_size(g);
    let mut blocked = vec![false; g.n];
    let mut chosen = VertexSet::new();
    for v in 0..g.n {
        if blocked[v] || chosen.len() == target {
            continue;
        }
        // Can `v` be added and the target still be reached using only
        // higher-indexed vertices?
        let mut alive = vec![false; g.n];
        for w in v + 1..g.n {
            alive[w] = !blocked[w];
        }
        for &w in g.neighbors(v) {
            alive[w] = false;
        }
        if chosen.len() + 1 + mis::mis_size(&g.adjacency, &alive) == target {
            chosen.0.insert(v);
            for &w in g.neighbors(v) {
                blocked[w] = true;
            }
        }
        blocked[v] = true;
    }
    debug_assert_eq!(chosen.len(), target);
    Ok((chosen, target))
}

/// `C(z) = -Σ z_i + U Σ_{(i,j) ∈ E} z_i z_j`.
pub fn cost_function(g: &Graph, z: &[bool], u: f64) -> Result<f64, GraphError> {
    if z.len() != g.n {
        return Err(GraphError::LengthMismatch { expected: g.n, got: z.len() });
    }
    let delta = max_degree(g);
    if !(u > delta as f64) {
        return Err(GraphError::PenaltyTooSmall { u, max_degree: delta });
    }
    let occupied = z.iter().filter(|&&b| b).count() as f64;
    let violated = g.edges.iter().filter(|&&(a, b)| z[a] && z[b]).count() as f64;
    Ok(-occupied + u * violated)
}

/// Recommended penalty `2Δ + 1`.
pub fn default_penalty(g: &Graph) -> f64 {
    (2 * max_degree(g) + 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn rejects_malformed_edges() {
        assert_eq!(Graph::new(3, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(Graph::new(3, [(0, 1), (1, 0)]), Err(GraphError::DuplicateEdge(0, 1)));
        assert!(matches!(Graph::new(2, [(0, 2)]), Err(GraphError::VertexOutOfRange { .. })));
    }

    #[test]
    fn adjacency_matches_edges() {
        let g = Graph::new(4, [(2, 0), (1, 3), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3)]);
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.neighbors(3), &[1]);
        assert_eq!(g.edge_id(3, 1), Some(2));
    }

    #[test]
    fn max_degree_examples() {
        assert_eq!(max_degree(&Graph::empty(5)), 0);
        assert_eq!(max_degree(&Graph::path(3)), 2);
        assert_eq!(max_degree(&Graph::complete(7)), 6);
    }

    #[test]
    fn er_degenerate_probabilities() {
        assert_eq!(generate_er_bounded(4, 0.0, 6, 7).edge_count(), 0);
        assert_eq!(generate_er_bounded(4, 1.0, 6, 7), Graph::complete(4));
    }

    #[test]
    fn er_respects_cap_and_is_reproducible() {
        for seed in 0..5 {
            let g = generate_er_bounded(50, 1.0, 6, seed);
            assert!(max_degree(&g) <= 6);
            let h = generate_er_bounded(50, 0.2, 6, seed);
            assert!(max_degree(&h) <= 6);
            assert_eq!(h, generate_er_bounded(50, 0.2, 6, seed));
        }
    }

    #[test]
    fn exact_mis_examples() {
        assert_eq!(exact_mis(&Graph::path(3)).unwrap(), (set(&[0, 2]), 2));
        assert_eq!(exact_mis(&Graph::complete(4)).unwrap(), (set(&[0]), 1));
        assert_eq!(exact_mis(&Graph::cycle(5)).unwrap().1, 2);
        assert_eq!(exact_mis(&Graph::cycle(5)).unwrap().0, set(&[0, 2]));
        assert_eq!(exact_mis(&Graph::empty(3)).unwrap(), (set(&[0, 1, 2]), 3));
    }

    #[test]
    fn exact_mis_enforces_limit() {
        let g = Graph::empty(41);
        assert_eq!(exact_mis(&g), Err(GraphError::MisLimit { n: 41, limit: 40 }));
        assert_eq!(exact_mis_with_limit(&g, 41).unwrap().1, 41);
    }

    #[test]
    fn independence_examples() {
        let p = Graph::path(3);
        assert!(is_independent_set(&p, &set(&[0, 2])));
        assert!(!is_independent_set(&p, &set(&[0, 1])));
        assert!(is_independent_set(&p, &VertexSet::new()));
    }

    #[test]
    fn cost_examples() {
        let g = Graph::complete(3);
        assert_eq!(cost_function(&g, &[false; 3], 3.0).unwrap(), 0.0);
        assert_eq!(cost_function(&Graph::empty(1), &[true], 1.0).unwrap(), -1.0);
        assert_eq!(cost_function(&Graph::path(2), &[true, true], 10.0).unwrap(), 8.0);
        assert!(matches!(cost_function(&g, &[false; 3], 2.0), Err(GraphError::PenaltyTooSmall { .. })));
        assert!(matches!(cost_function(&g, &[false; 2], 5.0), Err(GraphError::LengthMismatch { .. })));
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let g = Graph::from_json(r#"{"n": 3, "edges": [[2,1],[0,1]]}"#).unwrap();
        assert_eq!(g.to_json(), r#"{"n":3,"edges":[[0,1],[1,2]]}"#);
        assert!(Graph::from_json(r#"{"n": 2, "edges": [[0,0]]}"#).is_err());
    }
}
