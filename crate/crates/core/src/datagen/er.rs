//! Erdős–Rényi graphs with tiered edge budgets and component duplication.
//!
//! The edge count is drawn "around" a tier target — `n`, `2n`, `n ln n`, or
//! `n²/2` — as a Poisson draw clamped to the feasible range. With the
//! duplication option on, half of the graphs are first split into 2–5
//! near-equal parts, the first part's edge pattern is copied into the
//! others, and a few extra edges (possibly crossing parts) are sprinkled on
//! top; this plants isomorphic subgraphs, which the tasks find hard.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::hypergraph::{GraphError, Hypergraph};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTier {
    N,
    TwoN,
    NLogN,
    HalfN2,
}

impl EdgeTier {
    pub const ALL: [EdgeTier; 4] = [
        EdgeTier::N,
        EdgeTier::TwoN,
        EdgeTier::NLogN,
        EdgeTier::HalfN2,
    ];

    /// Tier target edge count. `n log n` uses the natural log, rounded.
    pub fn target(&self, n: usize) -> usize {
        match self {
            EdgeTier::N => n,
            EdgeTier::TwoN => 2 * n,
            EdgeTier::NLogN => (n as f64 * (n as f64).ln()).round() as usize,
            EdgeTier::HalfN2 => n * n / 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EdgeTier::N => "n",
            EdgeTier::TwoN => "2n",
            EdgeTier::NLogN => "nlogn",
            EdgeTier::HalfN2 => "half_n2",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|t| t.label() == text)
    }
}

/// Generator trace for one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErProvenance {
    pub tier: String,
    pub target: usize,
    pub drawn: usize,
    pub clamped: bool,
    /// Number of equal parts when duplication fired.
    pub parts: Option<usize>,
    /// Extra edges added after duplication (may cross parts).
    pub extra_edges: Vec<(usize, usize)>,
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect()
}

fn poisson_draw(rng: &mut impl Rng, lambda: usize) -> usize {
    if lambda == 0 {
        return 0;
    }
    let dist = Poisson::new(lambda as f64).expect("positive lambda");
    dist.sample(rng) as usize
}

/// Seeded entry point.
pub fn gen_er_graph(
    n: usize,
    tier: EdgeTier,
    duplicate: bool,
    seed_value: u64,
) -> Result<(Hypergraph, ErProvenance), GraphError> {
    let mut rng = seed::rng(seed_value, "er", 0);
    gen_er_graph_rng(n, tier, duplicate, &mut rng)
}

pub fn gen_er_graph_rng(
    n: usize,
    tier: EdgeTier,
    duplicate: bool,
    rng: &mut impl Rng,
) -> Result<(Hypergraph, ErProvenance), GraphError> {
    debug_assert!(n >= 2);
    let max_edges = n * (n - 1) / 2;
    let target = tier.target(n);
    let raw = poisson_draw(rng, target.min(max_edges).max(1));
    let drawn = raw.min(max_edges);
    let clamped = target > max_edges || raw > max_edges;

    let mut provenance = ErProvenance {
        tier: tier.label().to_string(),
        target,
        drawn,
        clamped,
        parts: None,
        extra_edges: vec![],
    };

    let mut edges: Vec<(usize, usize)>;
    if duplicate && n >= 4 && rng.gen_bool(0.5) {
        let parts = rng.gen_range(2..=5usize.min(n / 2));
        provenance.parts = Some(parts);
        // Near-equal part sizes; the first `rem` parts get one extra node.
        let base = n / parts;
        let rem = n % parts;
        let sizes: Vec<usize> = (0..parts)
            .map(|i| base + usize::from(i < rem))
            .collect();
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let s0 = sizes[0];
        let per_part = (drawn as f64 / parts as f64).round() as usize;
        let mut first_pairs = all_pairs(s0);
        first_pairs.shuffle(rng);
        let first: Vec<(usize, usize)> =
            first_pairs.into_iter().take(per_part.min(s0 * (s0 - 1) / 2)).collect();
        edges = Vec::new();
        for (part, (&offset, &size)) in offsets.iter().zip(&sizes).enumerate() {
            let _ = part;
            for &(a, b) in &first {
                if a < size && b < size {
                    edges.push((offset + a, offset + b));
                }
            }
        }
        // A few extra edges, allowed to cross parts.
        let extra_count = (0..n).filter(|_| rng.gen_bool(1.0 / n as f64)).count();
        let mut present: std::collections::BTreeSet<(usize, usize)> =
            edges.iter().copied().collect();
        let mut attempts = 0;
        while provenance.extra_edges.len() < extra_count && attempts < 20 * extra_count.max(1) {
            attempts += 1;
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if present.insert(key) {
                provenance.extra_edges.push(key);
                edges.push(key);
            }
        }
    } else {
        let mut pairs = all_pairs(n);
        pairs.shuffle(rng);
        edges = pairs.into_iter().take(drawn).collect();
    }

    let graph = Hypergraph::from_edge_list(n, &edges, &[], false)?;
    Ok((graph, provenance))
}
