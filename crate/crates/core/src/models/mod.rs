//! The two relational architectures and their shared machinery.
//!
//! An NLM-style model keeps one feature tensor per arity `0..=B` and updates
//! each arity from its neighbors with expand / reduce / permute / per-arity
//! MLP blocks ([`nlm`]). A higher-order GNN keeps one feature tensor over
//! all B-tuples and passes messages between tuples differing at one position
//! ([`hognn`]). Both share the aggregators, quantization, readout heads, and
//! parameter containers defined here.

mod api;
mod hognn;
mod nlm;
mod ops;
mod params;
mod readout;
mod serialize;

pub use api::{backward_pass, forward_pass, model_forward, model_logits, model_probabilities, ForwardPass, ModelTrace};
pub use hognn::{hognn_backward, hognn_forward, hognn_forward_traced, hognn_forward_with_rounds, HognnTrace};
pub use nlm::{nlm_backward, nlm_forward, nlm_forward_traced, nlm_forward_with_rounds, NlmTrace};
pub use ops::{expand, expand_backward, permute_backward, permute_fuse, reduce, reduce_backward, reduce_with_trace, ReduceTrace, MAX_PERMUTE_ARITY};
pub use params::{BlockGrads, LayerBlock, ModelGrads, ModelParams};
pub use readout::{readout, readout_logits, ReadoutHead};
pub use serialize::{model_from_json, model_to_json};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::GraphError;
use crate::tensor::{Activation, Tensor, TensorError};

/// Hard cap on intermediate arity; permute fans out by `arity!`.
pub const MAX_ARITY: usize = 4;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("arity {arity} exceeds the supported maximum {max}")]
    ArityTooLarge { arity: usize, max: usize },
    #[error("max aggregation over an empty node axis is undefined")]
    EmptyMax,
    #[error("activation {value} outside [0, 1]; quantization requires sigmoid-bounded activations")]
    QuantizeOutOfRange { value: f64 },
    #[error("quantized models require sigmoid activations, config uses {0:?}")]
    QuantizeNeedsSigmoid(Activation),
    #[error("config invalid: {0}")]
    BadConfig(String),
    #[error("parameters were built for config {expected}, called with {actual}")]
    ConfigMismatch { expected: String, actual: String },
    #[error("readout arity {arity} absent from a state of max arity {max}")]
    ReadoutArity { arity: usize, max: usize },
    #[error("model file invalid: {0}")]
    BadModelFile(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    /// Per-arity tensors with expand/reduce/permute blocks.
    Nlm,
    /// Tuple message passing over B-tuples.
    Hognn,
}

/// Aggregation collapsing a node axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Aggregator {
    Sum,
    Max,
    /// Mean rounded to `decimals` decimal places; output values lie on the
    /// grid `{k · 10^-decimals}`, so the range is finite and size-independent.
    FpMean { decimals: u8 },
}

impl Aggregator {
    pub fn fp_mean_default() -> Self {
        Aggregator::FpMean { decimals: 2 }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Aggregator::Sum => "sum",
            Aggregator::Max => "max",
            Aggregator::FpMean { .. } => "fpmean",
        }
    }
}

/// How many times layers are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum DepthPolicy {
    /// A fixed number of layer applications.
    Fixed(usize),
    /// Four blocks with the second applied a number of times that grows
    /// with the graph: training rounds are drawn uniformly from the integer
    /// interval `[2 log2 n, 3 log2 n]`, evaluation uses `ceil(2.5 log2 n)`.
    RecurrentLog2,
}

impl DepthPolicy {
    pub fn eval_rounds(&self, n: usize) -> usize {
        match self {
            DepthPolicy::Fixed(_) => 0,
            DepthPolicy::RecurrentLog2 => {
                let log = (n.max(2) as f64).log2();
                (2.5 * log).ceil() as usize
            }
        }
    }

    pub fn train_rounds(&self, n: usize, rng: &mut impl rand::Rng) -> usize {
        match self {
            DepthPolicy::Fixed(_) => 0,
            DepthPolicy::RecurrentLog2 => {
                let log = (n.max(2) as f64).log2();
                let lo = (2.0 * log).ceil() as usize;
                let hi = ((3.0 * log).floor() as usize).max(lo);
                rng.gen_range(lo..=hi)
            }
        }
    }
}

/// Architecture family, arity, depth policy, width, aggregator, optional
/// activation quantization, and the weight-sharing flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub family: ModelFamily,
    /// NLM: maximum feature arity B. HO-GNN: tuple dimension B (equivalent
    /// in expressiveness to an NLM of max arity B+1).
    pub max_arity: usize,
    pub depth: DepthPolicy,
    pub width: usize,
    pub aggregator: Aggregator,
    /// Bits per activation entry; set for fixed-precision models.
    pub quant_bits: Option<u8>,
    /// Share one block's weights across all non-adapter layers.
    pub weight_sharing: bool,
    pub activation: Activation,
}

impl ModelConfig {
    pub fn new(family: ModelFamily, max_arity: usize, depth: usize, width: usize) -> Self {
        ModelConfig {
            family,
            max_arity,
            depth: DepthPolicy::Fixed(depth),
            width,
            aggregator: Aggregator::Max,
            quant_bits: None,
            weight_sharing: false,
            activation: Activation::Relu,
        }
    }

    pub fn with_aggregator(mut self, aggregator: Aggregator) -> Self {
        self.aggregator = aggregator;
        self
    }

    pub fn recurrent(mut self) -> Self {
        self.depth = DepthPolicy::RecurrentLog2;
        self
    }

    pub fn shared(mut self) -> Self {
        self.weight_sharing = true;
        self
    }

    /// Enables `bits`-bit activation quantization (forces sigmoid layers).
    pub fn quantized(mut self, bits: u8) -> Self {
        self.quant_bits = Some(bits);
        self.activation = Activation::Sigmoid;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.max_arity == 0 || self.max_arity > MAX_ARITY {
            return Err(ModelError::BadConfig(format!(
                "max_arity {} outside 1..={MAX_ARITY}",
                self.max_arity
            )));
        }
        if self.width == 0 {
            return Err(ModelError::BadConfig("width must be >= 1".into()));
        }
        if let DepthPolicy::Fixed(d) = self.depth {
            if d == 0 {
                return Err(ModelError::BadConfig("fixed depth must be >= 1".into()));
            }
        }
        if self.quant_bits.is_some() && self.activation != Activation::Sigmoid {
            return Err(ModelError::QuantizeNeedsSigmoid(self.activation));
        }
        if let Some(bits) = self.quant_bits {
            if bits == 0 || bits > 16 {
                return Err(ModelError::BadConfig(format!(
                    "quant_bits {bits} outside 1..=16"
                )));
            }
        }
        Ok(())
    }

    /// Sequence of block indices applied in order, for a given number of
    /// recurrent rounds. Fixed-depth unshared models use one block per
    /// layer; shared models apply block 0 once (the adapter, whose input
    /// widths differ from later layers) and block 1 thereafter; recurrent
    /// unshared models apply their second block `rounds` times.
    pub fn layer_plan(&self, rounds: usize) -> Vec<usize> {
        match (self.depth, self.weight_sharing) {
            (DepthPolicy::Fixed(d), false) => (0..d).collect(),
            (DepthPolicy::Fixed(d), true) => {
                let mut plan = vec![0];
                plan.extend(std::iter::repeat(1).take(d - 1));
                plan
            }
            (DepthPolicy::RecurrentLog2, false) => {
                let mut plan = vec![0];
                plan.extend(std::iter::repeat(1).take(rounds));
                plan.extend([2, 3]);
                plan
            }
            (DepthPolicy::RecurrentLog2, true) => {
                let mut plan = vec![0];
                plan.extend(std::iter::repeat(1).take(rounds + 2));
                plan
            }
        }
    }

    /// Number of distinct parameter blocks the plan refers to.
    pub fn block_count(&self) -> usize {
        match (self.depth, self.weight_sharing) {
            (DepthPolicy::Fixed(1), true) => 1,
            (DepthPolicy::Fixed(_), true) => 2,
            (DepthPolicy::Fixed(d), false) => d,
            (DepthPolicy::RecurrentLog2, false) => 4,
            (DepthPolicy::RecurrentLog2, true) => 2,
        }
    }

    pub fn summary(&self) -> String {
        let family = match self.family {
            ModelFamily::Nlm => "nlm",
            ModelFamily::Hognn => "gnn",
        };
        let depth = match self.depth {
            DepthPolicy::Fixed(d) => format!("d{d}"),
            DepthPolicy::RecurrentLog2 => "rec".to_string(),
        };
        format!(
            "{family}{}-{depth}-w{}-{}{}",
            self.max_arity,
            self.width,
            self.aggregator.label(),
            self.quant_bits
                .map(|b| format!("-q{b}"))
                .unwrap_or_default()
        )
    }
}

/// Feature state flowing through a model.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerState {
    /// One tensor per arity `0..=B`, shape `[n; j] ++ [channels]`.
    Nlm(Vec<Tensor>),
    /// One tensor over B-tuples, shape `[n; B] ++ [channels]`.
    Hognn(Tensor),
}

impl LayerState {
    /// The tensor holding features of the requested arity, if the state
    /// carries one.
    pub fn arity_tensor(&self, arity: usize) -> Option<&Tensor> {
        match self {
            LayerState::Nlm(tensors) => tensors.get(arity),
            LayerState::Hognn(t) => {
                if t.rank() >= 1 && t.rank() - 1 == arity {
                    Some(t)
                } else {
                    None
                }
            }
        }
    }

    pub fn max_arity(&self) -> usize {
        match self {
            LayerState::Nlm(tensors) => tensors.len().saturating_sub(1),
            LayerState::Hognn(t) => t.rank().saturating_sub(1),
        }
    }
}

/// Rounds each entry to the nearest point of the uniform grid
/// `{k / (2^bits - 1)}` on `[0, 1]`. Entries outside `[0, 1]` are an error:
/// quantization is applied to sigmoid-bounded activations only. Training
/// treats this as identity in the backward pass (straight-through).
pub fn quantize_activations(t: &Tensor, bits: u8) -> Result<Tensor, ModelError> {
    let levels = ((1u32 << bits) - 1) as f64;
    let mut out = t.clone();
    for v in out.data_mut() {
        if !(0.0..=1.0).contains(v) {
            return Err(ModelError::QuantizeOutOfRange { value: *v });
        }
        *v = (*v * levels).round() / levels;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_one_bit_snaps_to_zero_or_one() {
        let t = Tensor::vector(vec![0.0, 0.49, 0.5, 0.51, 1.0]);
        let q = quantize_activations(&t, 1).unwrap();
        assert_eq!(q.data(), &[0.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn quantize_three_bits_hits_sevenths() {
        let q = quantize_activations(&Tensor::vector(vec![0.37]), 3).unwrap();
        assert!((q.data()[0] - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn quantize_is_idempotent() {
        let t = Tensor::vector(vec![0.1, 0.33, 0.62, 0.98]);
        let q1 = quantize_activations(&t, 4).unwrap();
        let q2 = quantize_activations(&q1, 4).unwrap();
        assert_eq!(q1, q2);
    }

    #[test]
    fn quantize_rejects_out_of_range() {
        let err = quantize_activations(&Tensor::vector(vec![1.5]), 2).unwrap_err();
        assert!(matches!(err, ModelError::QuantizeOutOfRange { .. }));
    }

    #[test]
    fn recurrent_rounds_follow_log2_bounds() {
        let policy = DepthPolicy::RecurrentLog2;
        assert_eq!(policy.eval_rounds(10), 9); // ceil(2.5 * log2(10)) = ceil(8.30)
        assert_eq!(policy.eval_rounds(80), 16); // ceil(2.5 * log2(80)) = ceil(15.80)
        let mut rng = crate::seed::rng_from(0);
        for _ in 0..50 {
            let r = policy.train_rounds(10, &mut rng);
            assert!((7..=9).contains(&r), "rounds {r} outside [7, 9]");
        }
    }

    #[test]
    fn layer_plans() {
        let mut cfg = ModelConfig::new(ModelFamily::Nlm, 2, 3, 4);
        assert_eq!(cfg.layer_plan(0), vec![0, 1, 2]);
        cfg.weight_sharing = true;
        assert_eq!(cfg.layer_plan(0), vec![0, 1, 1]);
        cfg.depth = DepthPolicy::RecurrentLog2;
        cfg.weight_sharing = false;
        assert_eq!(cfg.layer_plan(3), vec![0, 1, 1, 1, 2, 3]);
    }

    #[test]
    fn config_validation() {
        let cfg = ModelConfig::new(ModelFamily::Nlm, 5, 2, 4);
        assert!(cfg.validate().is_err());
        let mut cfg = ModelConfig::new(ModelFamily::Nlm, 2, 2, 4);
        cfg.quant_bits = Some(2);
        assert!(matches!(
            cfg.validate(),
            Err(ModelError::QuantizeNeedsSigmoid(_))
        ));
        let cfg = ModelConfig::new(ModelFamily::Nlm, 2, 2, 4).quantized(2);
        assert!(cfg.validate().is_ok());
    }
}
