//! k-tuple Weisfeiler-Leman refinement.
//!
//! Tuples are recolored by their current color plus the multiset, over all
//! nodes `u`, of the k-vector of colors of the tuples obtained by
//! substituting `u` at each position — the same neighborhood the tuple
//! message-passing models use. `k = 1` runs standard color refinement over
//! graph adjacency. Refinement over two graphs shares one color space so
//! stable color multisets are directly comparable.
//!
//! Color ids are assigned by sorting the (old color, neighbor multiset)
//! signatures, so colorings are deterministic across runs.

use std::collections::BTreeMap;

use crate::hypergraph::{Hypergraph, EDGE_CHANNEL};

use super::OracleError;

/// A stable (or round-capped) coloring of the k-tuples of one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlColoring {
    pub k: usize,
    pub n: usize,
    /// Color per tuple, indexed by the flat row-major tuple index.
    pub colors: Vec<usize>,
    /// Refinement rounds performed before stopping.
    pub rounds: usize,
    /// Whether the partition reached a fixed point within the round budget.
    pub stable: bool,
}

impl WlColoring {
    pub fn color_of(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.k);
        let mut flat = 0;
        for &v in tuple {
            flat = flat * self.n + v;
        }
        self.colors[flat]
    }

    pub fn color_multiset(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for &c in &self.colors {
            *out.entry(c).or_insert(0) += 1;
        }
        out
    }

    pub fn color_count(&self) -> usize {
        self.color_multiset().len()
    }
}

fn check_k(k: usize) -> Result<(), OracleError> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(OracleError::UnsupportedTupleDim { k })
    }
}

/// Atomic type of each tuple: unary channel values at every position plus
/// binary channel values (equality included) at every ordered position pair.
fn atomic_signatures(g: &Hypergraph, k: usize) -> Vec<Vec<usize>> {
    let n = g.n();
    let c1 = g.channels(1);
    let c2 = g.channels(2);
    let count = n.pow(k as u32);
    let mut sigs = Vec::with_capacity(count);
    let mut digits = vec![0usize; k];
    for t in 0..count {
        let mut rest = t;
        for d in digits.iter_mut().rev() {
            *d = rest % n;
            rest /= n;
        }
        let mut sig = Vec::with_capacity(k * c1 + k * k * c2);
        for &v in &digits {
            for ch in 0..c1 {
                sig.push(g.value(1, ch, &[v]) as usize);
            }
        }
        for &u in &digits {
            for &v in &digits {
                for ch in 0..c2 {
                    sig.push(g.value(2, ch, &[u, v]) as usize);
                }
            }
        }
        sigs.push(sig);
    }
    sigs
}

/// Assigns consecutive ids to signatures in sorted signature order.
fn canonical_ids(signatures: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let mut order: BTreeMap<&[usize], usize> = BTreeMap::new();
    for sig in signatures {
        order.entry(sig.as_slice()).or_insert(0);
    }
    for (next, (_, id)) in order.iter_mut().enumerate() {
        *id = next;
    }
    let ids = signatures.iter().map(|s| order[s.as_slice()]).collect();
    (ids, order.len())
}

struct GraphTuples {
    n: usize,
    offset: usize,
    count: usize,
    /// Adjacency rows for k = 1 refinement.
    neighbors: Vec<Vec<usize>>,
}

/// Joint refinement over several graphs sharing one color space.
pub fn wl_refine_joint(
    graphs: &[&Hypergraph],
    k: usize,
    max_rounds: usize,
) -> Result<Vec<WlColoring>, OracleError> {
    check_k(k)?;
    let mut layout = Vec::with_capacity(graphs.len());
    let mut signatures: Vec<Vec<usize>> = Vec::new();
    for g in graphs {
        let n = g.n();
        let count = n.pow(k as u32);
        let neighbors = if k == 1 {
            let edge = g.channel_index(2, EDGE_CHANNEL);
            (0..n)
                .map(|v| {
                    (0..n)
                        .filter(|&u| {
                            u != v
                                && edge.map_or(false, |c| g.value(2, c, &[v, u]) != 0.0)
                        })
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
        layout.push(GraphTuples {
            n,
            offset: signatures.len(),
            count,
            neighbors,
        });
        signatures.extend(atomic_signatures(g, k));
    }
    let (mut colors, mut palette) = canonical_ids(&signatures);

    let mut rounds = 0;
    let mut stable = false;
    while rounds < max_rounds {
        let mut next_sigs: Vec<Vec<usize>> = Vec::with_capacity(colors.len());
        for gt in &layout {
            let n = gt.n;
            if k == 1 {
                for v in 0..n {
                    let mut neigh: Vec<usize> = gt.neighbors[v]
                        .iter()
                        .map(|&u| colors[gt.offset + u])
                        .collect();
                    neigh.sort_unstable();
                    let mut sig = Vec::with_capacity(neigh.len() + 1);
                    sig.push(colors[gt.offset + v]);
                    sig.extend(neigh);
                    next_sigs.push(sig);
                }
            } else {
                let mut digits = vec![0usize; k];
                let mut strides = vec![0usize; k];
                for (p, s) in strides.iter_mut().enumerate() {
                    *s = n.pow((k - 1 - p) as u32);
                }
                for t in 0..gt.count {
                    let mut rest = t;
                    for d in digits.iter_mut().rev() {
                        *d = rest % n;
                        rest /= n;
                    }
                    // Multiset over u of the k-vector of substituted colors.
                    let mut chunks: Vec<Vec<usize>> = Vec::with_capacity(n);
                    for u in 0..n {
                        let mut chunk = Vec::with_capacity(k);
                        for p in 0..k {
                            let sub = (t as isize
                                + (u as isize - digits[p] as isize) * strides[p] as isize)
                                as usize;
                            chunk.push(colors[gt.offset + sub]);
                        }
                        chunks.push(chunk);
                    }
                    chunks.sort_unstable();
                    let mut sig = Vec::with_capacity(1 + n * k);
                    sig.push(colors[gt.offset + t]);
                    for chunk in chunks {
                        sig.extend(chunk);
                    }
                    next_sigs.push(sig);
                }
            }
        }
        let (next_colors, next_palette) = canonical_ids(&next_sigs);
        if next_palette == palette {
            // The partition stopped refining; keep the previous ids.
            stable = true;
            break;
        }
        colors = next_colors;
        palette = next_palette;
        rounds += 1;
    }

    Ok(layout
        .iter()
        .map(|gt| WlColoring {
            k,
            n: gt.n,
            colors: colors[gt.offset..gt.offset + gt.count].to_vec(),
            rounds,
            stable,
        })
        .collect())
}

/// Refinement of a single graph; colors are canonical for the graph alone.
pub fn wl_refine(g: &Hypergraph, k: usize, max_rounds: usize) -> Result<WlColoring, OracleError> {
    Ok(wl_refine_joint(&[g], k, max_rounds)?.pop().unwrap())
}

/// True iff the stable (or round-capped) color multisets differ.
pub fn wl_distinguish(
    g1: &Hypergraph,
    g2: &Hypergraph,
    k: usize,
    max_rounds: usize,
) -> Result<bool, OracleError> {
    Ok(wl_certificate(g1, g2, k, max_rounds)?.distinguished)
}

/// Distinguishability report: the first round whose color multisets differ
/// (0 = atomic types) and the multiset difference at that round.
#[derive(Debug, Clone)]
pub struct WlCertificate {
    pub k: usize,
    pub distinguished: bool,
    pub first_differing_round: Option<usize>,
    pub rounds_run: usize,
    /// `(color id, count in g1 - count in g2)` for colors with unequal
    /// counts at the first differing round.
    pub multiset_diff: Vec<(usize, i64)>,
}

pub fn wl_certificate(
    g1: &Hypergraph,
    g2: &Hypergraph,
    k: usize,
    max_rounds: usize,
) -> Result<WlCertificate, OracleError> {
    if g1.n() != g2.n() {
        return Err(OracleError::NodeCountMismatch {
            left: g1.n(),
            right: g2.n(),
        });
    }
    check_k(k)?;
    // Round-by-round comparison: refinement only ever splits classes, so
    // the first differing round determines distinguishability.
    for round in 0..=max_rounds {
        let colorings = wl_refine_joint(&[g1, g2], k, round)?;
        let (m1, m2) = (colorings[0].color_multiset(), colorings[1].color_multiset());
        if m1 != m2 {
            let mut diff = Vec::new();
            let all_colors: std::collections::BTreeSet<usize> =
                m1.keys().chain(m2.keys()).copied().collect();
            for c in all_colors {
                let d = *m1.get(&c).unwrap_or(&0) as i64 - *m2.get(&c).unwrap_or(&0) as i64;
                if d != 0 {
                    diff.push((c, d));
                }
            }
            return Ok(WlCertificate {
                k,
                distinguished: true,
                first_differing_round: Some(round),
                rounds_run: round,
                multiset_diff: diff,
            });
        }
        if colorings[0].stable && colorings[1].stable && round > 0 {
            return Ok(WlCertificate {
                k,
                distinguished: false,
                first_differing_round: None,
                rounds_run: colorings[0].rounds,
                multiset_diff: vec![],
            });
        }
    }
    Ok(WlCertificate {
        k,
        distinguished: false,
        first_differing_round: None,
        rounds_run: max_rounds,
        multiset_diff: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{hexagon, two_triangles};

    #[test]
    fn one_wl_on_a_vertex_transitive_graph_stays_monochrome() {
        let c6 = hexagon();
        let coloring = wl_refine(&c6, 1, 10).unwrap();
        assert_eq!(coloring.color_count(), 1);
        assert!(coloring.stable);
    }

    #[test]
    fn two_triangles_vs_hexagon_at_k1_and_k3() {
        let a = two_triangles();
        let b = hexagon();
        assert!(!wl_distinguish(&a, &b, 1, 20).unwrap());
        let cert = wl_certificate(&a, &b, 3, 5).unwrap();
        assert!(cert.distinguished);
        assert_eq!(cert.first_differing_round, Some(0), "atomic 3-tuple types differ");
    }

    #[test]
    fn a_graph_never_distinguishes_itself() {
        let g = two_triangles();
        assert!(!wl_distinguish(&g, &g, 1, 10).unwrap());
        assert!(!wl_distinguish(&g, &g, 2, 10).unwrap());
        assert!(!wl_distinguish(&g, &g, 3, 4).unwrap());
    }

    #[test]
    fn refinement_is_monotone() {
        let g = Hypergraph::from_edge_list(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], &[], false)
            .unwrap();
        let mut last = 0;
        for rounds in 0..5 {
            let c = wl_refine(&g, 1, rounds).unwrap();
            assert!(c.color_count() >= last);
            last = c.color_count();
        }
    }

    #[test]
    fn node_count_mismatch_is_an_error() {
        let g1 = Hypergraph::from_edge_list(3, &[], &[], false).unwrap();
        let g2 = Hypergraph::from_edge_list(4, &[], &[], false).unwrap();
        assert!(matches!(
            wl_distinguish(&g1, &g2, 1, 5),
            Err(OracleError::NodeCountMismatch { .. })
        ));
    }
}
