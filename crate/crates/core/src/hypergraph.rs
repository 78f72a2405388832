//! Hypergraph representations: a node count plus arity-indexed relation
//! tensors over a finite value domain.
//!
//! Relations are stored as indicator channels: arity `j` holds a tensor of
//! shape `[n; j] ++ [c_j]` whose entries lie in `{0, 1}`. Every graph carries
//! a constant arity-0 channel (`"const"`, always 1) so graph-level readouts
//! have a seed representation, and every arity-2 block ends with an equality
//! channel (`"eq"`, 1 iff the two indices coincide) so models and refinement
//! tests can see tuple equality patterns. Builders append both automatically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{Tensor, TensorError};

pub const CONST_CHANNEL: &str = "const";
pub const EDGE_CHANNEL: &str = "edge";
pub const EQ_CHANNEL: &str = "eq";

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node index {index} out of range (n = {n}) at edge position {position}")]
    NodeOutOfRange {
        index: usize,
        n: usize,
        position: usize,
    },
    #[error("self-loop ({node}, {node}) rejected at edge position {position}")]
    SelfLoop { node: usize, position: usize },
    #[error("duplicate edge ({u}, {v}) at edge position {position}")]
    DuplicateEdge {
        u: usize,
        v: usize,
        position: usize,
    },
    #[error("color {name:?} refers to node {index} out of range (n = {n})")]
    ColorOutOfRange {
        name: String,
        index: usize,
        n: usize,
    },
    #[error("permutation has length {actual}, graph has {expected} nodes")]
    PermutationLength { expected: usize, actual: usize },
    #[error("sequence {seq:?} is not a bijection on 0..{n}")]
    NotABijection { seq: Vec<usize>, n: usize },
    #[error("refusing to enumerate labeled graphs on {n} nodes: would produce {count} graphs (limit n <= {limit})")]
    EnumerationTooLarge { n: usize, count: u128, limit: usize },
    #[error("graph has no arity-{arity} channel named {name:?}")]
    ChannelMissing { arity: usize, name: String },
    #[error("relation entry {value} outside [0, 1] in arity-{arity} channel {name:?}")]
    ValueOutOfDomain {
        arity: usize,
        name: String,
        value: f64,
    },
    #[error("target values must be 0/1, found {value}")]
    TargetNotBinary { value: f64 },
    #[error("target arity {arity} unsupported (must be 0, 1, or 2)")]
    TargetArity { arity: usize },
    #[error("target tensor shape {shape:?} does not match arity {arity} over {n} nodes")]
    TargetShape {
        shape: Vec<usize>,
        arity: usize,
        n: usize,
    },
    #[error("query mask has no scored positions")]
    EmptyMask,
    #[error("query mask entries must be 0/1, found {value}")]
    MaskNotBinary { value: f64 },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, PartialEq)]
struct ArityBlock {
    names: Vec<String>,
    tensor: Tensor,
}

/// In-memory hypergraph: `n` nodes plus arity-indexed indicator tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    n: usize,
    directed: bool,
    blocks: BTreeMap<usize, ArityBlock>,
}

fn tuple_shape(n: usize, arity: usize, channels: usize) -> Vec<usize> {
    let mut shape = vec![n; arity];
    shape.push(channels);
    shape
}

impl Hypergraph {
    /// Builds a graph from an edge list with optional unary color channels.
    ///
    /// Undirected graphs are stored symmetrically (both orientations set).
    /// Self-loops and duplicate edges are rejected with their position in
    /// the input list.
    pub fn from_edge_list(
        n: usize,
        edges: &[(usize, usize)],
        unary_colors: &[(String, Vec<usize>)],
        directed: bool,
    ) -> Result<Self, GraphError> {
        let mut builder = HypergraphBuilder::new(n, directed);
        for (name, nodes) in unary_colors {
            builder = builder.unary(name, nodes.clone());
        }
        builder = builder.binary(EDGE_CHANNEL, edges.to_vec());
        builder.build()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn channels(&self, arity: usize) -> usize {
        self.blocks.get(&arity).map_or(0, |b| b.names.len())
    }

    pub fn channel_names(&self, arity: usize) -> &[String] {
        self.blocks.get(&arity).map_or(&[], |b| &b.names)
    }

    pub fn tensor(&self, arity: usize) -> Option<&Tensor> {
        self.blocks.get(&arity).map(|b| &b.tensor)
    }

    pub fn channel_index(&self, arity: usize, name: &str) -> Option<usize> {
        self.blocks
            .get(&arity)?
            .names
            .iter()
            .position(|c| c == name)
    }

    /// Value of one channel at a tuple of node indices.
    pub fn value(&self, arity: usize, channel: usize, tuple: &[usize]) -> f64 {
        debug_assert_eq!(tuple.len(), arity);
        let block = &self.blocks[&arity];
        let c = block.names.len();
        let mut flat = 0;
        for &v in tuple {
            flat = flat * self.n + v;
        }
        block.tensor.data()[flat * c + channel]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        match self.channel_index(2, EDGE_CHANNEL) {
            Some(c) => self.value(2, c, &[u, v]) != 0.0,
            None => false,
        }
    }

    /// Edge list recovered from the `edge` channel. Undirected graphs
    /// report each edge once with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let Some(c) = self.channel_index(2, EDGE_CHANNEL) else {
            return out;
        };
        for u in 0..self.n {
            for v in 0..self.n {
                if (!self.directed && v <= u) || u == v {
                    continue;
                }
                if self.value(2, c, &[u, v]) != 0.0 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Directed pairs of an arbitrary named arity-2 channel.
    pub fn relation_pairs(&self, name: &str) -> Result<Vec<(usize, usize)>, GraphError> {
        let c = self
            .channel_index(2, name)
            .ok_or_else(|| GraphError::ChannelMissing {
                arity: 2,
                name: name.to_string(),
            })?;
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in 0..self.n {
                if self.value(2, c, &[u, v]) != 0.0 {
                    out.push((u, v));
                }
            }
        }
        Ok(out)
    }

    /// Nodes carrying a given unary color.
    pub fn colored_nodes(&self, name: &str) -> Result<Vec<usize>, GraphError> {
        let c = self
            .channel_index(1, name)
            .ok_or_else(|| GraphError::ChannelMissing {
                arity: 1,
                name: name.to_string(),
            })?;
        Ok((0..self.n)
            .filter(|&v| self.value(1, c, &[v]) != 0.0)
            .collect())
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.n)
            .filter(|&u| u != v && self.has_edge(v, u))
            .count()
    }

    /// Input tensors for a model of maximum arity `max_arity`: one tensor
    /// per arity `0..=max_arity`, zero-channel where the graph has no
    /// relations of that arity.
    pub fn layer_inputs(&self, max_arity: usize) -> Vec<Tensor> {
        (0..=max_arity)
            .map(|j| match self.blocks.get(&j) {
                Some(block) => block.tensor.clone(),
                None => Tensor::zeros(tuple_shape(self.n, j, 0)),
            })
            .collect()
    }

    /// Relabels nodes: every arity-j entry at `(v_1..v_j)` moves to
    /// `(p(v_1)..p(v_j))`. The result is isomorphic to the input.
    pub fn apply_node_permutation(&self, p: &NodePermutation) -> Result<Self, GraphError> {
        if p.len() != self.n {
            return Err(GraphError::PermutationLength {
                expected: self.n,
                actual: p.len(),
            });
        }
        let mut blocks = BTreeMap::new();
        for (&arity, block) in &self.blocks {
            blocks.insert(
                arity,
                ArityBlock {
                    names: block.names.clone(),
                    tensor: p.apply_to_tensor(&block.tensor, arity),
                },
            );
        }
        Ok(Hypergraph {
            n: self.n,
            directed: self.directed,
            blocks,
        })
    }

    pub fn to_json(&self) -> GraphJson {
        let mut colors = BTreeMap::new();
        for name in self.channel_names(1) {
            colors.insert(name.clone(), self.colored_nodes(name).unwrap());
        }
        let mut relations = BTreeMap::new();
        for name in self.channel_names(2) {
            if name == EDGE_CHANNEL || name == EQ_CHANNEL {
                continue;
            }
            relations.insert(name.clone(), self.relation_pairs(name).unwrap());
        }
        GraphJson {
            n: self.n,
            directed: self.directed,
            edges: self.edges(),
            colors,
            relations,
            queries: None,
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self, GraphError> {
        let mut builder = HypergraphBuilder::new(json.n, json.directed);
        for (name, nodes) in &json.colors {
            builder = builder.unary(name, nodes.clone());
        }
        builder = builder.binary(EDGE_CHANNEL, json.edges.clone());
        for (name, pairs) in &json.relations {
            builder = builder.binary(name, pairs.clone());
        }
        builder.build()
    }
}

/// Incremental construction of hypergraphs with named relations. Channel
/// order follows insertion order; `const` and `eq` channels are appended
/// automatically by [`HypergraphBuilder::build`].
#[derive(Debug, Clone)]
pub struct HypergraphBuilder {
    n: usize,
    directed: bool,
    unary: Vec<(String, Vec<usize>)>,
    binary: Vec<(String, Vec<(usize, usize)>)>,
}

impl HypergraphBuilder {
    pub fn new(n: usize, directed: bool) -> Self {
        HypergraphBuilder {
            n,
            directed,
            unary: Vec::new(),
            binary: Vec::new(),
        }
    }

    pub fn unary(mut self, name: &str, nodes: Vec<usize>) -> Self {
        self.unary.push((name.to_string(), nodes));
        self
    }

    pub fn binary(mut self, name: &str, pairs: Vec<(usize, usize)>) -> Self {
        self.binary.push((name.to_string(), pairs));
        self
    }

    pub fn build(self) -> Result<Hypergraph, GraphError> {
        let n = self.n;
        let mut blocks = BTreeMap::new();
        blocks.insert(
            0,
            ArityBlock {
                names: vec![CONST_CHANNEL.to_string()],
                tensor: Tensor::filled(vec![1], 1.0),
            },
        );

        if !self.unary.is_empty() {
            let c = self.unary.len();
            let mut data = vec![0.0; n * c];
            for (ci, (name, nodes)) in self.unary.iter().enumerate() {
                for &v in nodes {
                    if v >= n {
                        return Err(GraphError::ColorOutOfRange {
                            name: name.clone(),
                            index: v,
                            n,
                        });
                    }
                    data[v * c + ci] = 1.0;
                }
            }
            blocks.insert(
                1,
                ArityBlock {
                    names: self.unary.iter().map(|(name, _)| name.clone()).collect(),
                    tensor: Tensor::new(tuple_shape(n, 1, c), data)?,
                },
            );
        }

        let c = self.binary.len() + 1; // + equality channel
        let mut names: Vec<String> = self.binary.iter().map(|(name, _)| name.clone()).collect();
        names.push(EQ_CHANNEL.to_string());
        let mut data = vec![0.0; n * n * c];
        for (ci, (_, pairs)) in self.binary.iter().enumerate() {
            let mut seen = std::collections::BTreeSet::new();
            for (position, &(u, v)) in pairs.iter().enumerate() {
                for &idx in &[u, v] {
                    if idx >= n {
                        return Err(GraphError::NodeOutOfRange {
                            index: idx,
                            n,
                            position,
                        });
                    }
                }
                if u == v {
                    return Err(GraphError::SelfLoop { node: u, position });
                }
                let key = if self.directed {
                    (u, v)
                } else {
                    (u.min(v), u.max(v))
                };
                if !seen.insert(key) {
                    return Err(GraphError::DuplicateEdge { u, v, position });
                }
                data[(u * n + v) * c + ci] = 1.0;
                if !self.directed {
                    data[(v * n + u) * c + ci] = 1.0;
                }
            }
        }
        for v in 0..n {
            data[(v * n + v) * c + (c - 1)] = 1.0;
        }
        blocks.insert(
            2,
            ArityBlock {
                names,
                tensor: Tensor::new(tuple_shape(n, 2, c), data)?,
            },
        );

        Ok(Hypergraph {
            n,
            directed: self.directed,
            blocks,
        })
    }
}

/// Bijection on `0..n`, the unit of equivariance testing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePermutation(Vec<usize>);

impl NodePermutation {
    pub fn new(seq: Vec<usize>) -> Result<Self, GraphError> {
        let n = seq.len();
        let mut seen = vec![false; n];
        for &v in &seq {
            if v >= n || seen[v] {
                return Err(GraphError::NotABijection { seq, n });
            }
            seen[v] = true;
        }
        Ok(NodePermutation(seq))
    }

    pub fn identity(n: usize) -> Self {
        NodePermutation((0..n).collect())
    }

    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Self {
        use rand::seq::SliceRandom;
        let mut seq: Vec<usize> = (0..n).collect();
        seq.shuffle(rng);
        NodePermutation(seq)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        NodePermutation(inv)
    }

    /// `(self ∘ other)(v) = self(other(v))`.
    pub fn compose(&self, other: &Self) -> Self {
        NodePermutation(other.0.iter().map(|&v| self.0[v]).collect())
    }

    /// Permutes the first `node_axes` axes of a tensor whose leading axes
    /// all have extent `n`: entry at `(v_1..v_k, ..)` moves to
    /// `(p(v_1)..p(v_k), ..)`.
    pub fn apply_to_tensor(&self, t: &Tensor, node_axes: usize) -> Tensor {
        let n = self.0.len();
        debug_assert!(t.shape()[..node_axes].iter().all(|&e| e == n));
        if node_axes == 0 {
            return t.clone();
        }
        let trailing: usize = t.shape()[node_axes..].iter().product();
        let mut out = vec![0.0; t.len()];
        let data = t.data();
        let mut tuple = vec![0usize; node_axes];
        let count: usize = n.pow(node_axes as u32);
        for flat in 0..count {
            // Decompose flat index, map through p, recompose.
            let mut rest = flat;
            for i in (0..node_axes).rev() {
                tuple[i] = rest % n;
                rest /= n;
            }
            let mut mapped = 0;
            for &v in tuple.iter() {
                mapped = mapped * n + self.0[v];
            }
            out[mapped * trailing..(mapped + 1) * trailing]
                .copy_from_slice(&data[flat * trailing..(flat + 1) * trailing]);
        }
        Tensor::new(t.shape().to_vec(), out).expect("permutation preserves shape")
    }
}

/// Ground-truth labels for one task instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTarget {
    arity: usize,
    values: Tensor,
    mask: Option<Tensor>,
}

impl TaskTarget {
    pub fn new(
        n: usize,
        arity: usize,
        values: Tensor,
        mask: Option<Tensor>,
    ) -> Result<Self, GraphError> {
        if arity > 2 {
            return Err(GraphError::TargetArity { arity });
        }
        let expected = vec![n; arity];
        if values.shape() != expected.as_slice() {
            return Err(GraphError::TargetShape {
                shape: values.shape().to_vec(),
                arity,
                n,
            });
        }
        for &v in values.data() {
            if v != 0.0 && v != 1.0 {
                return Err(GraphError::TargetNotBinary { value: v });
            }
        }
        if let Some(m) = &mask {
            if m.shape() != values.shape() {
                return Err(GraphError::TargetShape {
                    shape: m.shape().to_vec(),
                    arity,
                    n,
                });
            }
            for &v in m.data() {
                if v != 0.0 && v != 1.0 {
                    return Err(GraphError::MaskNotBinary { value: v });
                }
            }
            if m.data().iter().all(|&v| v == 0.0) {
                return Err(GraphError::EmptyMask);
            }
        }
        Ok(TaskTarget {
            arity,
            values,
            mask,
        })
    }

    pub fn scalar(label: bool) -> Self {
        TaskTarget {
            arity: 0,
            values: Tensor::scalar(if label { 1.0 } else { 0.0 }),
            mask: None,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &Tensor {
        &self.values
    }

    pub fn mask(&self) -> Option<&Tensor> {
        self.mask.as_ref()
    }

    /// Flat indices that are scored (all positions when no mask).
    pub fn scored_positions(&self) -> Vec<usize> {
        match &self.mask {
            Some(m) => m
                .data()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, _)| i)
                .collect(),
            None => (0..self.values.len()).collect(),
        }
    }

    pub fn permuted(&self, p: &NodePermutation) -> Self {
        TaskTarget {
            arity: self.arity,
            values: p.apply_to_tensor(&self.values, self.arity),
            mask: self
                .mask
                .as_ref()
                .map(|m| p.apply_to_tensor(m, self.arity)),
        }
    }
}

/// Maximum node count for exhaustive enumeration.
pub const ENUMERATION_LIMIT: usize = 6;

/// All `2^(n(n-1)/2)` simple undirected labeled graphs on `n` nodes, in
/// increasing edge-bitmask order: bit `i` of the mask selects the `i`-th
/// pair in lexicographic order `(0,1), (0,2), .., (n-2,n-1)`.
pub fn enumerate_labeled_graphs(
    n: usize,
) -> Result<impl Iterator<Item = Hypergraph>, GraphError> {
    let pair_count = n * (n - 1) / 2;
    if n > ENUMERATION_LIMIT {
        return Err(GraphError::EnumerationTooLarge {
            n,
            count: 1u128 << pair_count.min(127),
            limit: ENUMERATION_LIMIT,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    Ok((0u64..(1u64 << pair_count)).map(move |mask| {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        Hypergraph::from_edge_list(n, &edges, &[], false).expect("enumerated edges are valid")
    }))
}

/// JSON interchange form. Integer-only, so round trips are bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub directed: bool,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub colors: BTreeMap<String, Vec<usize>>,
    /// Named directed binary relations beyond the plain edge set
    /// (e.g. `mother`/`father` in kinship inputs).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relations: BTreeMap<String, Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queries: Option<Vec<(usize, usize)>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_has_six_ones_in_edge_channel() {
        let g = Hypergraph::from_edge_list(3, &[(0, 1), (1, 2), (2, 0)], &[], false).unwrap();
        let c = g.channel_index(2, EDGE_CHANNEL).unwrap();
        let mut ones = 0;
        for u in 0..3 {
            for v in 0..3 {
                let val = g.value(2, c, &[u, v]);
                assert_eq!(g.value(2, c, &[v, u]), val, "symmetric storage");
                if val == 1.0 {
                    ones += 1;
                }
            }
        }
        assert_eq!(ones, 6);
    }

    #[test]
    fn empty_graph_has_all_zero_edge_channel() {
        let g = Hypergraph::from_edge_list(2, &[], &[], false).unwrap();
        let c = g.channel_index(2, EDGE_CHANNEL).unwrap();
        for u in 0..2 {
            for v in 0..2 {
                assert_eq!(g.value(2, c, &[u, v]), 0.0);
            }
        }
        assert_eq!(g.edges(), vec![]);
    }

    #[test]
    fn two_disjoint_triangles_are_two_regular() {
        let edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)];
        let g = Hypergraph::from_edge_list(6, &edges, &[], false).unwrap();
        for v in 0..6 {
            assert_eq!(g.degree(v), 2);
        }
    }

    #[test]
    fn rejects_out_of_range_and_self_loop_and_duplicate() {
        assert!(matches!(
            Hypergraph::from_edge_list(3, &[(0, 5)], &[], false),
            Err(GraphError::NodeOutOfRange {
                index: 5,
                position: 0,
                ..
            })
        ));
        assert!(matches!(
            Hypergraph::from_edge_list(3, &[(1, 1)], &[], false),
            Err(GraphError::SelfLoop {
                node: 1,
                position: 0
            })
        ));
        assert!(matches!(
            Hypergraph::from_edge_list(3, &[(0, 1), (1, 0)], &[], false),
            Err(GraphError::DuplicateEdge { position: 1, .. })
        ));
    }

    #[test]
    fn identity_permutation_is_a_no_op() {
        let g = Hypergraph::from_edge_list(4, &[(0, 2), (1, 3)], &[], false).unwrap();
        let p = NodePermutation::identity(4);
        assert_eq!(g.apply_node_permutation(&p).unwrap(), g);
    }

    #[test]
    fn swapping_nodes_moves_edges() {
        let g = Hypergraph::from_edge_list(3, &[(0, 2)], &[], false).unwrap();
        let p = NodePermutation::new(vec![1, 0, 2]).unwrap();
        let h = g.apply_node_permutation(&p).unwrap();
        assert_eq!(h.edges(), vec![(1, 2)]);
    }

    #[test]
    fn permutation_then_inverse_restores_entrywise() {
        let g = Hypergraph::from_edge_list(
            5,
            &[(0, 1), (1, 2), (3, 4)],
            &[("red".to_string(), vec![0, 3])],
            false,
        )
        .unwrap();
        let p = NodePermutation::new(vec![2, 0, 4, 1, 3]).unwrap();
        let roundtrip = g
            .apply_node_permutation(&p)
            .unwrap()
            .apply_node_permutation(&p.inverse())
            .unwrap();
        assert_eq!(roundtrip, g);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_labeled_graphs(3).unwrap().count(), 8);
        assert_eq!(enumerate_labeled_graphs(4).unwrap().count(), 64);
        assert!(matches!(
            enumerate_labeled_graphs(7),
            Err(GraphError::EnumerationTooLarge { n: 7, .. })
        ));
    }

    #[test]
    fn eq_channel_marks_exactly_the_diagonal() {
        let g = Hypergraph::from_edge_list(3, &[(0, 1)], &[], false).unwrap();
        let c = g.channel_index(2, EQ_CHANNEL).unwrap();
        for u in 0..3 {
            for v in 0..3 {
                let expected = if u == v { 1.0 } else { 0.0 };
                assert_eq!(g.value(2, c, &[u, v]), expected);
            }
        }
    }

    #[test]
    fn json_round_trip_is_byte_exact() {
        let g = Hypergraph::from_edge_list(
            4,
            &[(0, 1), (2, 3)],
            &[("red".to_string(), vec![1]), ("blue".to_string(), vec![0, 2])],
            false,
        )
        .unwrap();
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let parsed: GraphJson = serde_json::from_str(&text).unwrap();
        let reloaded = Hypergraph::from_json(&parsed).unwrap();
        let text2 = serde_json::to_string(&reloaded.to_json()).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn from_edge_list_round_trips_edge_set() {
        let edges = vec![(0, 3), (1, 2), (2, 4)];
        let g = Hypergraph::from_edge_list(5, &edges, &[], false).unwrap();
        let mut extracted = g.edges();
        extracted.sort_unstable();
        let mut expected = edges;
        expected.sort_unstable();
        assert_eq!(extracted, expected);
    }
}
