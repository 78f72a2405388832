//! Brute-force ground truth for every task.
//!
//! These oracles are the label source for dataset generation and the
//! reference every model is scored against, so they are written as direct
//! exhaustive checks over node tuples. Independent re-implementations
//! (union-find, boolean matrix powers, relational joins) live in the test
//! suite and cross-validate them.

mod chains;
mod kinship;
mod wl;

pub use chains::{chain_counterexample, hexagon, two_triangles, CounterexamplePair};
pub use kinship::{kinship_oracle, KinshipRelation};
pub use wl::{wl_distinguish, wl_refine, wl_refine_joint, WlCertificate, WlColoring};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{GraphError, Hypergraph};
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("graph is missing required color channel {name:?}")]
    MissingColor { name: String },
    #[error("graph has no unary color channels")]
    NoColors,
    #[error("tuple dimension {k} unsupported (must be 1, 2, or 3)")]
    UnsupportedTupleDim { k: usize },
    #[error("node count mismatch: {left} vs {right}")]
    NodeCountMismatch { left: usize, right: usize },
    #[error("family record inconsistent: person {child} has two {relation}s")]
    DuplicateParent { child: usize, relation: &'static str },
    #[error("family record refers to person {index} out of range (n = {n})")]
    PersonOutOfRange { index: usize, n: usize },
    #[error("chain construction needs length >= 2, got {len}")]
    ChainTooShort { len: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Adjacency as bitsets; supports graphs up to 128 nodes.
pub(crate) struct AdjBits {
    pub n: usize,
    rows: Vec<u128>,
}

impl AdjBits {
    pub fn from_graph(g: &Hypergraph) -> Self {
        let n = g.n();
        debug_assert!(n <= 128, "bitset adjacency supports n <= 128");
        let mut rows = vec![0u128; n];
        for (u, v) in g.edges() {
            rows[u] |= 1 << v;
            rows[v] |= 1 << u;
        }
        AdjBits { n, rows }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut rows = vec![0u128; n];
        for &(u, v) in edges {
            rows[u] |= 1 << v;
            rows[v] |= 1 << u;
        }
        AdjBits { n, rows }
    }

    #[inline]
    pub fn has(&self, u: usize, v: usize) -> bool {
        self.rows[u] >> v & 1 == 1
    }

    #[inline]
    pub fn row(&self, u: usize) -> u128 {
        self.rows[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.rows[u].count_ones() as usize
    }

    pub fn add(&mut self, u: usize, v: usize) {
        self.rows[u] |= 1 << v;
        self.rows[v] |= 1 << u;
    }

    pub fn remove(&mut self, u: usize, v: usize) {
        self.rows[u] &= !(1 << v);
        self.rows[v] &= !(1 << u);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstructureKind {
    /// A path on three nodes: `(a,b,c)` with `a != c` and edges `(a,b), (b,c)`.
    Link3,
    /// A walk `(a,b,c,d)` with `a != c`, `b != d` and edges
    /// `(a,b), (b,c), (c,d)`; a triangle counts (take `d = a`).
    Link4,
    Triangle,
    Clique4,
}

impl SubstructureKind {
    pub fn label(&self) -> &'static str {
        match self {
            SubstructureKind::Link3 => "link3",
            SubstructureKind::Link4 => "link4",
            SubstructureKind::Triangle => "triangle",
            SubstructureKind::Clique4 => "clique4",
        }
    }

    /// Smallest graph that can host the substructure.
    pub fn min_nodes(&self) -> usize {
        match self {
            SubstructureKind::Link3 | SubstructureKind::Link4 | SubstructureKind::Triangle => 3,
            SubstructureKind::Clique4 => 4,
        }
    }
}

/// Exhaustive substructure detection on an undirected simple graph.
pub fn substructure_oracle(kind: SubstructureKind, g: &Hypergraph) -> bool {
    substructure_present(kind, &AdjBits::from_graph(g))
}

/// Bits strictly above position `k` (shift-safe at the u128 boundary).
#[inline]
fn above(bits: u128, k: usize) -> u128 {
    if k + 1 >= 128 {
        0
    } else {
        bits >> (k + 1) << (k + 1)
    }
}

pub(crate) fn substructure_present(kind: SubstructureKind, adj: &AdjBits) -> bool {
    let n = adj.n;
    match kind {
        SubstructureKind::Link3 => {
            // Equivalent to max degree >= 2; checked as the tuple scan.
            for b in 0..n {
                if adj.degree(b) >= 2 {
                    return true;
                }
            }
            false
        }
        SubstructureKind::Link4 => {
            // An edge (b,c) whose ends both have another incident edge:
            // deg(b) >= 2 and deg(c) >= 2 admits (a,b,c,d) with a != c,
            // b != d (a triangle arises when d = a).
            for b in 0..n {
                if adj.degree(b) < 2 {
                    continue;
                }
                let mut row = adj.row(b);
                while row != 0 {
                    let c = row.trailing_zeros() as usize;
                    row &= row - 1;
                    if adj.degree(c) >= 2 {
                        return true;
                    }
                }
            }
            false
        }
        SubstructureKind::Triangle => {
            for a in 0..n {
                for b in (a + 1)..n {
                    if adj.has(a, b) && above(adj.row(a) & adj.row(b), b) != 0 {
                        return true;
                    }
                }
            }
            false
        }
        SubstructureKind::Clique4 => {
            for a in 0..n {
                for b in (a + 1)..n {
                    if !adj.has(a, b) {
                        continue;
                    }
                    let common_ab = adj.row(a) & adj.row(b);
                    let mut cs = above(common_ab, b);
                    while cs != 0 {
                        let c = cs.trailing_zeros() as usize;
                        cs &= cs - 1;
                        if above(common_ab & adj.row(c), c) != 0 {
                            return true;
                        }
                    }
                }
            }
            false
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    MaxDegree,
    ColorMajority,
    CountRed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatValue {
    Count(usize),
    Color(String),
}

/// Direct-count statistics.
pub fn simple_stats_oracle(kind: StatKind, g: &Hypergraph) -> Result<StatValue, OracleError> {
    match kind {
        StatKind::MaxDegree => Ok(StatValue::Count(max_degree(g))),
        StatKind::ColorMajority => color_majority(g).map(StatValue::Color),
        StatKind::CountRed => count_color(g, "red").map(StatValue::Count),
    }
}

pub fn max_degree(g: &Hypergraph) -> usize {
    let adj = AdjBits::from_graph(g);
    (0..g.n()).map(|v| adj.degree(v)).max().unwrap_or(0)
}

/// The color held by the most nodes; ties break to the lexicographically
/// smallest name.
pub fn color_majority(g: &Hypergraph) -> Result<String, OracleError> {
    let names = g.channel_names(1);
    if names.is_empty() {
        return Err(OracleError::NoColors);
    }
    let mut best: Option<(usize, &str)> = None;
    for name in names {
        let count = g.colored_nodes(name)?.len();
        best = match best {
            Some((c, b)) if c > count || (c == count && b < name.as_str()) => Some((c, b)),
            _ => Some((count, name)),
        };
    }
    Ok(best.unwrap().1.to_string())
}

pub fn count_color(g: &Hypergraph, color: &str) -> Result<usize, OracleError> {
    g.colored_nodes(color)
        .map(|nodes| nodes.len())
        .map_err(|_| OracleError::MissingColor {
            name: color.to_string(),
        })
}

/// All-pairs reachability within `k` hops (any finite distance when `k` is
/// `None`), as an `[n, n]` 0/1 tensor with a true diagonal. Breadth-first
/// search from every node.
pub fn connectivity_oracle(g: &Hypergraph, k: Option<usize>) -> Tensor {
    let n = g.n();
    let adj = AdjBits::from_graph(g);
    let mut out = vec![0.0; n * n];
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let mut row = adj.row(u);
            while row != 0 {
                let v = row.trailing_zeros() as usize;
                row &= row - 1;
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for v in 0..n {
            let reachable = match k {
                Some(bound) => dist[v] <= bound,
                None => dist[v] != usize::MAX,
            };
            if reachable {
                out[s * n + v] = 1.0;
            }
        }
    }
    Tensor::new(vec![n, n], out).expect("connectivity tensor volume")
}

/// True iff any edge exists (the simplest enumerable task).
pub fn edge_existence_oracle(g: &Hypergraph) -> bool {
    !g.edges().is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::enumerate_labeled_graphs;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Hypergraph {
        Hypergraph::from_edge_list(n, edges, &[], false).unwrap()
    }

    #[test]
    fn triangle_detection_on_k3_and_c6() {
        let k3 = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(substructure_oracle(SubstructureKind::Triangle, &k3));
        let c6 = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        assert!(!substructure_oracle(SubstructureKind::Triangle, &c6));
    }

    #[test]
    fn link3_equals_max_degree_at_least_two_on_all_n4_graphs() {
        for g in enumerate_labeled_graphs(4).unwrap() {
            let link3 = substructure_oracle(SubstructureKind::Link3, &g);
            assert_eq!(link3, max_degree(&g) >= 2);
        }
    }

    #[test]
    fn clique4_on_k4_and_k4_minus_an_edge() {
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(substructure_oracle(SubstructureKind::Clique4, &k4));
        let k4_minus = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
        assert!(!substructure_oracle(SubstructureKind::Clique4, &k4_minus));
    }

    #[test]
    fn a_triangle_is_a_four_link() {
        let k3 = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(substructure_oracle(SubstructureKind::Link4, &k3));
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        assert!(!substructure_oracle(SubstructureKind::Link4, &p3));
        let p4 = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        assert!(substructure_oracle(SubstructureKind::Link4, &p4));
    }

    #[test]
    fn link4_matches_naive_quadruple_loop_on_all_n4_graphs() {
        for g in enumerate_labeled_graphs(4).unwrap() {
            let fast = substructure_oracle(SubstructureKind::Link4, &g);
            let mut naive = false;
            'outer: for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            if a != c
                                && b != d
                                && g.has_edge(a, b)
                                && g.has_edge(b, c)
                                && g.has_edge(c, d)
                            {
                                naive = true;
                                break 'outer;
                            }
                        }
                    }
                }
            }
            assert_eq!(fast, naive);
        }
    }

    #[test]
    fn stats_on_small_graphs() {
        let star = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(max_degree(&star), 4);
        assert_eq!(max_degree(&graph(3, &[])), 0);
        let colored = Hypergraph::from_edge_list(
            3,
            &[],
            &[
                ("red".to_string(), vec![0, 1]),
                ("blue".to_string(), vec![2]),
            ],
            false,
        )
        .unwrap();
        assert_eq!(color_majority(&colored).unwrap(), "red");
        assert_eq!(count_color(&colored, "red").unwrap(), 2);
        assert!(matches!(
            count_color(&colored, "green"),
            Err(OracleError::MissingColor { .. })
        ));
    }

    #[test]
    fn connectivity_respects_hop_bounds() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        let within2 = connectivity_oracle(&path, Some(2));
        assert_eq!(within2.data()[0 * 3 + 2], 1.0);
        let within1 = connectivity_oracle(&path, Some(1));
        assert_eq!(within1.data()[0 * 3 + 2], 0.0);
        assert_eq!(within1.data()[0 * 3 + 0], 1.0, "diagonal is true");
    }

    #[test]
    fn two_triangles_have_no_cross_component_connectivity() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        let conn = connectivity_oracle(&g, None);
        for u in 0..3 {
            for v in 3..6 {
                assert_eq!(conn.data()[u * 6 + v], 0.0);
                assert_eq!(conn.data()[v * 6 + u], 0.0);
            }
        }
        assert_eq!(conn.data()[0 * 6 + 2], 1.0);
    }
}
