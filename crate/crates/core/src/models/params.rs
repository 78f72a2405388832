//! Trainable parameter containers for both model families.
//!
//! Parameters are laid out as a sequence of layer blocks plus one readout
//! head. A flat, deterministically ordered view of every tensor is exposed
//! for the optimizer and for serialization.

use rand::Rng;

use crate::hypergraph::Hypergraph;
use crate::seed;
use crate::tensor::{MlpGrads, MlpParams, Tensor};

use super::ops::factorial;
use super::readout::ReadoutHead;
use super::{ModelConfig, ModelError, ModelFamily};

/// One layer's worth of MLPs.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerBlock {
    /// Per-arity MLPs; `None` where the arity receives no input yet.
    Nlm { mlps: Vec<Option<MlpParams>> },
    /// Message MLP (applied per one-position substitution) and update MLP.
    Hognn { message: MlpParams, update: MlpParams },
}

/// Everything trainable: layer blocks plus the readout head, along with the
/// config and the per-arity input channel counts the blocks were sized for.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    /// Input channels per arity `0..=min(B, 2)` at build time.
    pub input_channels: Vec<usize>,
    pub blocks: Vec<LayerBlock>,
    pub head: ReadoutHead,
}

/// Raw per-arity input widths feeding the first NLM layer: channels of the
/// expanded lower arity, the same arity, and the reduced higher arity.
fn nlm_adapter_in(input_channels: &[usize], j: usize, max_arity: usize) -> usize {
    let c = |a: usize| input_channels.get(a).copied().unwrap_or(0);
    let mut total = c(j);
    if j > 0 {
        total += c(j - 1);
    }
    if j < max_arity {
        total += c(j + 1);
    }
    total
}

/// Width of a tuple's atomic-type feature vector: global channels, unary
/// channels at each position, and binary channels at each ordered pair of
/// distinct positions (the equality channel rides along in the binary
/// block, covering the tuple's equality pattern).
pub(crate) fn atomic_width(input_channels: &[usize], b: usize) -> usize {
    let c = |a: usize| input_channels.get(a).copied().unwrap_or(0);
    c(0) + b * c(1) + b * (b - 1) * c(2)
}

impl ModelParams {
    /// Random initialization for graphs exposing `input_channels[j]`
    /// channels at arity `j` (indices `0..=2`; higher arities read as 0).
    pub fn init(
        config: &ModelConfig,
        input_channels: &[usize],
        init_seed: u64,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = seed::rng(init_seed, "model-init", 0);
        let b = config.max_arity;
        let w = config.width;
        let act = config.activation;
        let mut blocks = Vec::new();
        for block_index in 0..config.block_count() {
            let block = match config.family {
                ModelFamily::Nlm => {
                    let mut mlps = Vec::with_capacity(b + 1);
                    for j in 0..=b {
                        let in_channels = if block_index == 0 {
                            nlm_adapter_in(input_channels, j, b)
                        } else {
                            let neighbors = 1 + usize::from(j > 0) + usize::from(j < b);
                            neighbors * w
                        };
                        if in_channels == 0 {
                            mlps.push(None);
                        } else {
                            let sizes = [in_channels * factorial(j), w];
                            mlps.push(Some(MlpParams::init(&sizes, act, &mut rng)?));
                        }
                    }
                    LayerBlock::Nlm { mlps }
                }
                ModelFamily::Hognn => {
                    let in_width = if block_index == 0 {
                        atomic_width(input_channels, b)
                    } else {
                        w
                    };
                    let message = MlpParams::init(&[(b + 1) * in_width, w], act, &mut rng)?;
                    let update = MlpParams::init(&[in_width + w, w], act, &mut rng)?;
                    LayerBlock::Hognn { message, update }
                }
            };
            blocks.push(block);
        }
        let head = ReadoutHead::init(w, &mut rng)?;
        Ok(ModelParams {
            config: config.clone(),
            input_channels: input_channels.to_vec(),
            blocks,
            head,
        })
    }

    /// [`ModelParams::init`] sized for a specific graph's channel layout.
    pub fn init_for_graph(
        config: &ModelConfig,
        graph: &Hypergraph,
        init_seed: u64,
    ) -> Result<Self, ModelError> {
        let channels: Vec<usize> = (0..=2).map(|j| graph.channels(j)).collect();
        Self::init(config, &channels, init_seed)
    }

    /// Checks that a graph exposes the channel layout the parameters were
    /// built for.
    pub fn check_graph(&self, graph: &Hypergraph) -> Result<(), ModelError> {
        let actual: Vec<usize> = (0..=2).map(|j| graph.channels(j)).collect();
        if actual != self.input_channels {
            return Err(ModelError::ConfigMismatch {
                expected: format!("input channels {:?}", self.input_channels),
                actual: format!("graph channels {:?}", actual),
            });
        }
        Ok(())
    }

    /// Flat deterministic order: blocks in order, within an NLM block the
    /// arities in order, within an MLP weights then biases per layer; the
    /// readout head comes last.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for block in &self.blocks {
            match block {
                LayerBlock::Nlm { mlps } => {
                    for mlp in mlps.iter().flatten() {
                        out.extend(mlp.param_tensors());
                    }
                }
                LayerBlock::Hognn { message, update } => {
                    out.extend(message.param_tensors());
                    out.extend(update.param_tensors());
                }
            }
        }
        out.extend(self.head.param_tensors());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for block in &mut self.blocks {
            match block {
                LayerBlock::Nlm { mlps } => {
                    for mlp in mlps.iter_mut().flatten() {
                        out.extend(mlp.param_tensors_mut());
                    }
                }
                LayerBlock::Hognn { message, update } => {
                    out.extend(message.param_tensors_mut());
                    out.extend(update.param_tensors_mut());
                }
            }
        }
        out.extend(self.head.param_tensors_mut());
        out
    }

    /// Stable names aligned with [`ModelParams::tensors`].
    pub fn tensor_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (b, block) in self.blocks.iter().enumerate() {
            match block {
                LayerBlock::Nlm { mlps } => {
                    for (j, mlp) in mlps.iter().enumerate() {
                        if let Some(mlp) = mlp {
                            for l in 0..mlp.layer_count() {
                                out.push(format!("block{b}.arity{j}.w{l}"));
                                out.push(format!("block{b}.arity{j}.b{l}"));
                            }
                        }
                    }
                }
                LayerBlock::Hognn { message, update } => {
                    for l in 0..message.layer_count() {
                        out.push(format!("block{b}.message.w{l}"));
                        out.push(format!("block{b}.message.b{l}"));
                    }
                    for l in 0..update.layer_count() {
                        out.push(format!("block{b}.update.w{l}"));
                        out.push(format!("block{b}.update.b{l}"));
                    }
                }
            }
        }
        out.push("head.w".to_string());
        out.push("head.b".to_string());
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Adds elementwise noise to every parameter (probe utility).
    pub fn jitter(&mut self, scale: f64, rng: &mut impl Rng) {
        for t in self.tensors_mut() {
            for v in t.data_mut() {
                *v += rng.gen_range(-scale..=scale);
            }
        }
    }
}

/// Per-block gradient accumulators mirroring [`LayerBlock`]. NLM slots stay
/// `None` until an application contributes a gradient.
#[derive(Debug, Clone)]
pub enum BlockGrads {
    Nlm(Vec<Option<MlpGrads>>),
    Hognn {
        message: MlpGrads,
        update: MlpGrads,
    },
}

impl BlockGrads {
    pub fn zeros(block: &LayerBlock) -> Self {
        match block {
            LayerBlock::Nlm { mlps } => BlockGrads::Nlm(vec![None; mlps.len()]),
            LayerBlock::Hognn { message, update } => BlockGrads::Hognn {
                message: MlpGrads::zeros_like(message),
                update: MlpGrads::zeros_like(update),
            },
        }
    }
}

impl ModelParams {
    /// Flattens per-block gradient accumulators (plus optional head
    /// gradients) into the [`ModelParams::tensors`] order, zero-filling
    /// slots that received no gradient.
    pub(crate) fn assemble_grads(
        &self,
        block_grads: Vec<BlockGrads>,
        head: Option<(Tensor, Tensor)>,
    ) -> ModelGrads {
        let mut out = Vec::new();
        for (block, grads) in self.blocks.iter().zip(block_grads) {
            match (block, grads) {
                (LayerBlock::Nlm { mlps }, BlockGrads::Nlm(acc)) => {
                    for (mlp, slot) in mlps.iter().zip(acc) {
                        let Some(mlp) = mlp else { continue };
                        let g = slot.unwrap_or_else(|| MlpGrads::zeros_like(mlp));
                        for (w, b) in g.weights.into_iter().zip(g.biases) {
                            out.push(w);
                            out.push(b);
                        }
                    }
                }
                (LayerBlock::Hognn { .. }, BlockGrads::Hognn { message, update }) => {
                    for g in [message, update] {
                        for (w, b) in g.weights.into_iter().zip(g.biases) {
                            out.push(w);
                            out.push(b);
                        }
                    }
                }
                _ => unreachable!("block and grad kinds align"),
            }
        }
        match head {
            Some((dw, db)) => {
                out.push(dw);
                out.push(db);
            }
            None => {
                out.push(Tensor::zeros(self.head.weight.shape().to_vec()));
                out.push(Tensor::zeros(vec![]));
            }
        }
        ModelGrads(out)
    }
}

/// Gradients in the same flat order as [`ModelParams::tensors`].
#[derive(Debug, Clone)]
pub struct ModelGrads(pub Vec<Tensor>);

impl ModelGrads {
    pub fn zeros_like(params: &ModelParams) -> Self {
        ModelGrads(
            params
                .tensors()
                .iter()
                .map(|t| Tensor::zeros(t.shape().to_vec()))
                .collect(),
        )
    }

    pub fn accumulate(&mut self, other: &ModelGrads) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.add_scaled(b, 1.0).expect("grad layouts agree");
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.0 {
            t.scale(factor);
        }
    }
}
