//! Relational neural networks over hypergraphs, from the tensors up.
//!
//! The crate is organized in layers:
//!
//! - [`tensor`]: a minimal dense f64 tensor, multilayer perceptrons with
//!   hand-derived gradients, and an Adam optimizer with an epoch-indexed
//!   learning-rate schedule.
//! - [`hypergraph`]: the canonical in-memory hypergraph representation
//!   (arity-indexed relation tensors over a finite value domain), node
//!   permutations, exhaustive enumeration of small labeled graphs, and a
//!   bit-exact JSON interchange format.
//! - [`models`]: the two architectures — NLM-style expand/reduce/permute
//!   blocks with per-arity MLPs, and tuple message passing (higher-order
//!   GNN) — plus sum/max/fixed-precision-mean aggregators, activation
//!   quantization, and sigmoid readout heads.
//! - [`oracles`]: brute-force ground truth for every task (substructure
//!   detection, degree statistics, connectivity, kinship), k-tuple
//!   Weisfeiler-Leman refinement, and counterexample graph constructions.
//! - [`datagen`]: seeded generators for Erdős–Rényi graphs with tiered edge
//!   budgets, substructure-labeled pairs, family trees, and balanced
//!   connectivity query sets, all with JSONL serialization.
//! - [`harness`]: training loops, evaluation, size-generalization sweeps,
//!   enumerative training on exhaustively enumerated graphs, and
//!   expressiveness probes on counterexample pairs.
//!
//! All numeric state is `f64` and every forward computation is deterministic
//! and permutation-equivariant, bit for bit: aggregations over node axes are
//! computed in a canonical (sorted) order so that relabeling the nodes of a
//! graph commutes exactly with running a model.

pub mod datagen;
pub mod harness;
pub mod hypergraph;
pub mod models;
pub mod oracles;
pub mod seed;
pub mod tensor;

pub use hypergraph::{Hypergraph, NodePermutation, TaskTarget};
pub use models::{Aggregator, DepthPolicy, ModelConfig, ModelFamily, ModelParams};

pub use tensor::{AdamState, Activation, MlpParams, Tensor};
