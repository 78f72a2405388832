//! Counterexample graph constructions for expressiveness probes.

use crate::hypergraph::{GraphError, Hypergraph};

use super::OracleError;

/// Two hypergraphs that some model class provably cannot tell apart, plus a
/// human-readable provenance tag.
#[derive(Debug, Clone)]
pub struct CounterexamplePair {
    /// S and T on the same chain (connected).
    pub same_chain: Hypergraph,
    /// S and T on different chains (disconnected).
    pub cross_chain: Hypergraph,
    pub provenance: String,
}

impl CounterexamplePair {
    pub fn n(&self) -> usize {
        self.same_chain.n()
    }
}

/// Two disjoint paths of `len` nodes each. Nodes `0..len` form the first
/// chain, `len..2len` the second. Graph one marks `S` at the head and `T`
/// at the tail of the first chain; graph two moves `T` to the tail of the
/// second chain. `S`/`T` are delivered as unary color channels, so shallow
/// models see two bitwise-indistinguishable inputs.
pub fn chain_counterexample(len: usize) -> Result<CounterexamplePair, GraphError> {
    debug_assert!(len >= 2, "chains need at least two nodes");
    let n = 2 * len;
    let mut edges = Vec::with_capacity(2 * (len - 1));
    for i in 0..len - 1 {
        edges.push((i, i + 1));
        edges.push((len + i, len + i + 1));
    }
    let s = 0;
    let t_same = len - 1;
    let t_cross = 2 * len - 1;
    let same_chain = Hypergraph::from_edge_list(
        n,
        &edges,
        &[
            ("S".to_string(), vec![s]),
            ("T".to_string(), vec![t_same]),
        ],
        false,
    )?;
    let cross_chain = Hypergraph::from_edge_list(
        n,
        &edges,
        &[
            ("S".to_string(), vec![s]),
            ("T".to_string(), vec![t_cross]),
        ],
        false,
    )?;
    Ok(CounterexamplePair {
        same_chain,
        cross_chain,
        provenance: format!("two chains of length {len}; S fixed, T same vs cross"),
    })
}

/// Two disjoint triangles on six nodes: 2-regular, same size as [`hexagon`],
/// indistinguishable by node refinement but not by 3-tuple types.
pub fn two_triangles() -> Hypergraph {
    Hypergraph::from_edge_list(
        6,
        &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)],
        &[],
        false,
    )
    .expect("static construction")
}

/// The 6-cycle.
pub fn hexagon() -> Hypergraph {
    Hypergraph::from_edge_list(
        6,
        &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)],
        &[],
        false,
    )
    .expect("static construction")
}

/// The regular pair `(two_triangles, hexagon)` as a counterexample.
pub fn regular_pair() -> CounterexamplePair {
    CounterexamplePair {
        same_chain: two_triangles(),
        cross_chain: hexagon(),
        provenance: "two 2-regular graphs on 6 nodes: 2xC3 vs C6".to_string(),
    }
}

/// Guard used by probe entry points.
pub fn check_chain_len(len: usize) -> Result<(), OracleError> {
    if len < 2 {
        Err(OracleError::ChainTooShort { len })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{connectivity_oracle, wl_distinguish};

    #[test]
    fn chain_pair_shape() {
        let pair = chain_counterexample(3).unwrap();
        assert_eq!(pair.n(), 6);
        assert_eq!(pair.same_chain.edges().len(), 4);
        assert_eq!(pair.same_chain.colored_nodes("S").unwrap(), vec![0]);
        assert_eq!(pair.same_chain.colored_nodes("T").unwrap(), vec![2]);
        assert_eq!(pair.cross_chain.colored_nodes("T").unwrap(), vec![5]);
    }

    #[test]
    fn chain_pair_has_identical_structure_without_marks() {
        let pair = chain_counterexample(4).unwrap();
        let mut deg1: Vec<usize> = (0..pair.n()).map(|v| pair.same_chain.degree(v)).collect();
        let mut deg2: Vec<usize> = (0..pair.n()).map(|v| pair.cross_chain.degree(v)).collect();
        deg1.sort_unstable();
        deg2.sort_unstable();
        assert_eq!(deg1, deg2);
        // Underlying graphs (stripped of colors) are equal, hence
        // 1-WL-indistinguishable.
        let bare1 =
            Hypergraph::from_edge_list(pair.n(), &pair.same_chain.edges(), &[], false).unwrap();
        let bare2 =
            Hypergraph::from_edge_list(pair.n(), &pair.cross_chain.edges(), &[], false).unwrap();
        assert!(!wl_distinguish(&bare1, &bare2, 1, 20).unwrap());
    }

    #[test]
    fn same_chain_connects_s_and_t_cross_chain_does_not() {
        let pair = chain_counterexample(5).unwrap();
        let conn1 = connectivity_oracle(&pair.same_chain, None);
        let conn2 = connectivity_oracle(&pair.cross_chain, None);
        let s = 0;
        let t1 = pair.same_chain.colored_nodes("T").unwrap()[0];
        let t2 = pair.cross_chain.colored_nodes("T").unwrap()[0];
        assert_eq!(conn1.data()[s * pair.n() + t1], 1.0);
        assert_eq!(conn2.data()[s * pair.n() + t2], 0.0);
    }
}
