//! NLM-style forward and backward passes.
//!
//! Layer `i`, arity `j` computes
//! `NN_j(permute_fuse(concat(expand(T[i-1][j-1]), T[i-1][j], reduce(T[i-1][j+1]))))`,
//! with the lower block omitted at `j = 0` and the upper block at `j = B`,
//! and channels missing at arity boundaries omitted from the concat. When
//! quantization is configured every layer output is snapped to the
//! fixed-precision grid (straight-through in the backward pass).
//!
//! The expand / concat / permute steps are fused into one gather that fills
//! a chunked matrix for the per-arity MLP, so no `j!`-times-wider tensor is
//! ever materialized whole. The fused kernel is exactly equivalent to
//! composing the public ops (a test asserts bitwise agreement).

use crate::hypergraph::Hypergraph;
use crate::tensor::{MlpGrads, Tensor};

use super::ops::{permutations, reduce_backward, reduce_with_trace};
use super::params::{BlockGrads, LayerBlock, ModelGrads, ModelParams};
use super::{quantize_activations, LayerState, ModelError};

/// Rows per fused gather/GEMM chunk; bounds transient memory.
const CHUNK_ROWS: usize = 8192;

/// Full forward/backward bookkeeping: the state entering every layer
/// application plus the final state.
pub struct NlmTrace {
    pub rounds: usize,
    /// `states[l]` is the per-arity state before layer `l`;
    /// `states[plan.len()]` is the final state.
    pub states: Vec<Vec<Tensor>>,
}

impl NlmTrace {
    pub fn final_state(&self) -> &[Tensor] {
        self.states.last().expect("trace holds at least the input")
    }
}

#[inline]
fn decompose(mut flat: usize, n: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = flat % n;
        flat /= n;
    }
}

struct ArityParts<'a> {
    lower: Option<&'a Tensor>,
    same: Option<&'a Tensor>,
    upper: Option<&'a Tensor>,
}

impl ArityParts<'_> {
    fn channels(&self) -> usize {
        self.lower.map_or(0, Tensor::trailing)
            + self.same.map_or(0, Tensor::trailing)
            + self.upper.map_or(0, Tensor::trailing)
    }
}

/// Fills `out` (rows × perms·channels) with the permute-fused concat of the
/// parts for tuple indices `row_start .. row_start + rows`.
fn gather_chunk(
    n: usize,
    arity: usize,
    perms: &[Vec<usize>],
    parts: &ArityParts,
    row_start: usize,
    rows: usize,
    out: &mut [f64],
) {
    let cl = parts.lower.map_or(0, Tensor::trailing);
    let cs = parts.same.map_or(0, Tensor::trailing);
    let cu = parts.upper.map_or(0, Tensor::trailing);
    let per_block = cl + cs + cu;
    let mut digits = vec![0usize; arity];
    let mut permuted = vec![0usize; arity];
    for r in 0..rows {
        decompose(row_start + r, n, &mut digits);
        let mut cursor = r * per_block * perms.len();
        for perm in perms {
            for (slot, &axis) in permuted.iter_mut().zip(perm) {
                *slot = digits[axis];
            }
            let mut flat = 0;
            for &d in &permuted {
                flat = flat * n + d;
            }
            if let Some(t) = parts.lower {
                let base = (flat / n.max(1)) * cl;
                out[cursor..cursor + cl].copy_from_slice(&t.data()[base..base + cl]);
                cursor += cl;
            }
            if let Some(t) = parts.same {
                let base = flat * cs;
                out[cursor..cursor + cs].copy_from_slice(&t.data()[base..base + cs]);
                cursor += cs;
            }
            if let Some(t) = parts.upper {
                let base = flat * cu;
                out[cursor..cursor + cu].copy_from_slice(&t.data()[base..base + cu]);
                cursor += cu;
            }
        }
    }
}

/// Adjoint of [`gather_chunk`]: scatter-adds the chunk gradient back into
/// per-part gradient accumulators.
#[allow(clippy::too_many_arguments)]
fn scatter_chunk(
    n: usize,
    arity: usize,
    perms: &[Vec<usize>],
    channels: (usize, usize, usize),
    row_start: usize,
    rows: usize,
    grad: &[f64],
    dlower: &mut [f64],
    dsame: &mut [f64],
    dupper: &mut [f64],
) {
    let (cl, cs, cu) = channels;
    let per_block = cl + cs + cu;
    let mut digits = vec![0usize; arity];
    let mut permuted = vec![0usize; arity];
    for r in 0..rows {
        decompose(row_start + r, n, &mut digits);
        let mut cursor = r * per_block * perms.len();
        for perm in perms {
            for (slot, &axis) in permuted.iter_mut().zip(perm) {
                *slot = digits[axis];
            }
            let mut flat = 0;
            for &d in &permuted {
                flat = flat * n + d;
            }
            let base = (flat / n.max(1)) * cl;
            for k in 0..cl {
                dlower[base + k] += grad[cursor + k];
            }
            cursor += cl;
            let base = flat * cs;
            for k in 0..cs {
                dsame[base + k] += grad[cursor + k];
            }
            cursor += cs;
            let base = flat * cu;
            for k in 0..cu {
                dupper[base + k] += grad[cursor + k];
            }
            cursor += cu;
        }
    }
}

fn tuple_shape(n: usize, arity: usize, channels: usize) -> Vec<usize> {
    let mut shape = vec![n; arity];
    shape.push(channels);
    shape
}

fn parts_for<'a>(
    state: &'a [Tensor],
    reduced: &'a [Option<Tensor>],
    j: usize,
    max_arity: usize,
) -> ArityParts<'a> {
    let lower = (j > 0 && state[j - 1].trailing() > 0).then(|| &state[j - 1]);
    let same = (state[j].trailing() > 0).then(|| &state[j]);
    let upper = if j < max_arity {
        reduced[j].as_ref()
    } else {
        None
    };
    ArityParts { lower, same, upper }
}

/// Applies one layer block to a per-arity state.
fn layer_forward(
    params: &ModelParams,
    block: &LayerBlock,
    state: &[Tensor],
    n: usize,
) -> Result<Vec<Tensor>, ModelError> {
    let b = params.config.max_arity;
    let w = params.config.width;
    let LayerBlock::Nlm { mlps } = block else {
        return Err(ModelError::ConfigMismatch {
            expected: "nlm block".into(),
            actual: "hognn block".into(),
        });
    };
    // Reduce the higher arity once per target arity.
    let mut reduced: Vec<Option<Tensor>> = Vec::with_capacity(b);
    for j in 0..b {
        if state[j + 1].trailing() > 0 {
            reduced.push(Some(
                reduce_with_trace(&state[j + 1], params.config.aggregator)?.0,
            ));
        } else {
            reduced.push(None);
        }
    }

    let mut next = Vec::with_capacity(b + 1);
    for j in 0..=b {
        let Some(mlp) = &mlps[j] else {
            next.push(Tensor::zeros(tuple_shape(n, j, w)));
            continue;
        };
        let parts = parts_for(state, &reduced, j, b);
        let perms = permutations(j.max(1))
            .into_iter()
            .take(if j == 0 { 1 } else { usize::MAX })
            .collect::<Vec<_>>();
        let per_block = parts.channels();
        let row_width = per_block * perms.len();
        debug_assert_eq!(row_width, mlp.input_width());
        let count = n.pow(j as u32);
        let mut out = vec![0.0; count * w];
        let mut start = 0;
        while start < count {
            let rows = CHUNK_ROWS.min(count - start);
            let mut buf = vec![0.0; rows * row_width];
            gather_chunk(n, j, &perms, &parts, start, rows, &mut buf);
            let chunk = Tensor::new(vec![rows, row_width], buf)?;
            let result = mlp.forward(&chunk)?;
            out[start * w..(start + rows) * w].copy_from_slice(result.data());
            start += rows;
        }
        let mut t = Tensor::new(tuple_shape(n, j, w), out)?;
        if let Some(bits) = params.config.quant_bits {
            t = quantize_activations(&t, bits)?;
        }
        next.push(t);
    }
    Ok(next)
}

/// Forward pass with the depth policy's evaluation rounds.
pub fn nlm_forward(params: &ModelParams, graph: &Hypergraph) -> Result<LayerState, ModelError> {
    let rounds = params.config.depth.eval_rounds(graph.n());
    nlm_forward_with_rounds(params, graph, rounds)
}

/// Forward pass with explicit recurrent rounds (ignored by fixed-depth
/// configs).
pub fn nlm_forward_with_rounds(
    params: &ModelParams,
    graph: &Hypergraph,
    rounds: usize,
) -> Result<LayerState, ModelError> {
    let trace = nlm_forward_traced(params, graph, rounds, false)?;
    Ok(LayerState::Nlm(trace.states.into_iter().last().unwrap()))
}

/// Forward pass keeping per-layer states when `keep_trace` is set (training);
/// otherwise only the final state is retained.
pub fn nlm_forward_traced(
    params: &ModelParams,
    graph: &Hypergraph,
    rounds: usize,
    keep_trace: bool,
) -> Result<NlmTrace, ModelError> {
    params.check_graph(graph)?;
    let n = graph.n();
    let plan = params.config.layer_plan(rounds);
    let mut states = Vec::with_capacity(if keep_trace { plan.len() + 1 } else { 2 });
    states.push(graph.layer_inputs(params.config.max_arity));
    for &bidx in &plan {
        let next = layer_forward(params, &params.blocks[bidx], states.last().unwrap(), n)?;
        if keep_trace {
            states.push(next);
        } else {
            *states.last_mut().unwrap() = next;
        }
    }
    Ok(NlmTrace { rounds, states })
}

/// Backward pass from gradients on the final per-arity state. Returns
/// gradients for every parameter tensor (head slots zeroed; the readout
/// backward is composed by the caller).
pub fn nlm_backward(
    params: &ModelParams,
    trace: &NlmTrace,
    final_grads: Vec<Tensor>,
) -> Result<ModelGrads, ModelError> {
    let b = params.config.max_arity;
    let plan = params.config.layer_plan(trace.rounds);
    debug_assert_eq!(trace.states.len(), plan.len() + 1);
    let n = trace.states[0][1].shape()[0];
    let mut block_grads: Vec<BlockGrads> = params.blocks.iter().map(BlockGrads::zeros).collect();
    let mut dstate = final_grads;

    for (l, &bidx) in plan.iter().enumerate().rev() {
        let input_state = &trace.states[l];
        let LayerBlock::Nlm { mlps } = &params.blocks[bidx] else {
            unreachable!("nlm params hold nlm blocks");
        };
        let BlockGrads::Nlm(acc) = &mut block_grads[bidx] else {
            unreachable!()
        };
        // Recompute the reduced parts this layer saw.
        let mut reduced: Vec<Option<Tensor>> = Vec::with_capacity(b);
        for j in 0..b {
            if input_state[j + 1].trailing() > 0 {
                reduced.push(Some(
                    reduce_with_trace(&input_state[j + 1], params.config.aggregator)?.0,
                ));
            } else {
                reduced.push(None);
            }
        }
        let mut dprev: Vec<Tensor> = input_state
            .iter()
            .map(|t| Tensor::zeros(t.shape().to_vec()))
            .collect();
        for j in 0..=b {
            let dout = &dstate[j];
            let Some(mlp) = &mlps[j] else {
                continue; // output was constant zeros
            };
            if dout.data().iter().all(|&v| v == 0.0) {
                continue;
            }
            let parts = parts_for(input_state, &reduced, j, b);
            let cl = parts.lower.map_or(0, Tensor::trailing);
            let cs = parts.same.map_or(0, Tensor::trailing);
            let cu = parts.upper.map_or(0, Tensor::trailing);
            let perms = permutations(j.max(1))
                .into_iter()
                .take(if j == 0 { 1 } else { usize::MAX })
                .collect::<Vec<_>>();
            let row_width = (cl + cs + cu) * perms.len();
            let count = n.pow(j as u32);
            let w = params.config.width;

            let mut dlower = vec![0.0; if j > 0 { input_state[j - 1].len() } else { 0 }];
            let mut dsame = vec![0.0; input_state[j].len()];
            let mut dupper = vec![0.0; reduced.get(j).and_then(|r| r.as_ref()).map_or(0, Tensor::len)];

            let mut start = 0;
            while start < count {
                let rows = CHUNK_ROWS.min(count - start);
                let mut buf = vec![0.0; rows * row_width];
                gather_chunk(n, j, &perms, &parts, start, rows, &mut buf);
                let chunk = Tensor::new(vec![rows, row_width], buf)?;
                let upstream =
                    Tensor::new(vec![rows, w], dout.data()[start * w..(start + rows) * w].to_vec())?;
                let (mlp_grads, dchunk) = mlp.backward(&chunk, &upstream)?;
                match &mut acc[j] {
                    Some(g) => add_mlp_grads(g, &mlp_grads),
                    slot @ None => *slot = Some(mlp_grads),
                }
                scatter_chunk(
                    n,
                    j,
                    &perms,
                    (cl, cs, cu),
                    start,
                    rows,
                    dchunk.data(),
                    &mut dlower,
                    &mut dsame,
                    &mut dupper,
                );
                start += rows;
            }
            if cl > 0 {
                let t = Tensor::new(input_state[j - 1].shape().to_vec(), dlower)?;
                dprev[j - 1].add_scaled(&t, 1.0)?;
            }
            if cs > 0 {
                let t = Tensor::new(input_state[j].shape().to_vec(), dsame)?;
                dprev[j].add_scaled(&t, 1.0)?;
            }
            if cu > 0 {
                let r = reduced[j].as_ref().unwrap();
                let grad_r = Tensor::new(r.shape().to_vec(), dupper)?;
                let (_, rtrace) =
                    reduce_with_trace(&input_state[j + 1], params.config.aggregator)?;
                let back = reduce_backward(&grad_r, n, params.config.aggregator, &rtrace);
                dprev[j + 1].add_scaled(&back, 1.0)?;
            }
        }
        dstate = dprev;
    }
    Ok(params.assemble_grads(block_grads, None))
}

pub(crate) fn add_mlp_grads(acc: &mut MlpGrads, other: &MlpGrads) {
    for (a, b) in acc.weights.iter_mut().zip(&other.weights) {
        a.add_scaled(b, 1.0).expect("aligned grads");
    }
    for (a, b) in acc.biases.iter_mut().zip(&other.biases) {
        a.add_scaled(b, 1.0).expect("aligned grads");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ops::{expand, permute_fuse, reduce};
    use crate::models::{ModelConfig, ModelFamily};

    fn triangle() -> Hypergraph {
        Hypergraph::from_edge_list(3, &[(0, 1), (1, 2), (2, 0)], &[], false).unwrap()
    }

    #[test]
    fn output_shapes_follow_the_contract() {
        let g = Hypergraph::from_edge_list(5, &[(0, 1), (2, 3)], &[], false).unwrap();
        let cfg = ModelConfig::new(ModelFamily::Nlm, 2, 4, 8);
        let params = ModelParams::init_for_graph(&cfg, &g, 7).unwrap();
        let state = nlm_forward(&params, &g).unwrap();
        assert_eq!(state.arity_tensor(2).unwrap().shape(), &[5, 5, 8]);
        assert_eq!(state.arity_tensor(0).unwrap().shape(), &[8]);
        assert_eq!(state.arity_tensor(1).unwrap().shape(), &[5, 8]);
    }

    #[test]
    fn fused_layer_matches_composed_ops_bitwise() {
        let g = triangle();
        let cfg = ModelConfig::new(ModelFamily::Nlm, 2, 1, 4)
            .with_aggregator(crate::models::Aggregator::Sum);
        let params = ModelParams::init_for_graph(&cfg, &g, 3).unwrap();
        let fused = nlm_forward(&params, &g).unwrap();

        // Compose the public ops by hand for each arity.
        let inputs = g.layer_inputs(2);
        let LayerBlock::Nlm { mlps } = &params.blocks[0] else {
            panic!()
        };
        let agg = params.config.aggregator;
        // arity 0: concat(own const, reduce(arity 1)) -> but arity-1 inputs
        // are empty here, so input is just the const channel.
        let manual0 = mlps[0].as_ref().unwrap().forward(&inputs[0]).unwrap();
        assert_eq!(fused.arity_tensor(0).unwrap(), &manual0);
        // arity 1: concat(expand(const), reduce(edge+eq)).
        let e = expand(&inputs[0], 3);
        let r = reduce(&inputs[2], agg).unwrap();
        let mut joined = Vec::new();
        for v in 0..3 {
            joined.extend_from_slice(&e.data()[v..=v]);
            joined.extend_from_slice(&r.data()[v * 2..(v + 1) * 2]);
        }
        let manual1 = mlps[1]
            .as_ref()
            .unwrap()
            .forward(&Tensor::new(vec![3, 3], joined).unwrap())
            .unwrap();
        assert_eq!(fused.arity_tensor(1).unwrap().data(), manual1.data());
        // arity 2: permute_fuse(concat(expand(arity1=none), own)).
        let fused2 = permute_fuse(&inputs[2], 2).unwrap();
        let manual2 = mlps[2].as_ref().unwrap().forward(&fused2).unwrap();
        assert_eq!(fused.arity_tensor(2).unwrap().data(), manual2.data());
    }

    #[test]
    fn forward_is_deterministic() {
        let g = triangle();
        let cfg = ModelConfig::new(ModelFamily::Nlm, 3, 3, 8);
        let params = ModelParams::init_for_graph(&cfg, &g, 11).unwrap();
        let a = nlm_forward(&params, &g).unwrap();
        let b = nlm_forward(&params, &g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn graph_channel_mismatch_is_rejected() {
        let g = triangle();
        let colored = Hypergraph::from_edge_list(
            3,
            &[(0, 1)],
            &[("red".to_string(), vec![0])],
            false,
        )
        .unwrap();
        let cfg = ModelConfig::new(ModelFamily::Nlm, 2, 2, 4);
        let params = ModelParams::init_for_graph(&cfg, &g, 0).unwrap();
        assert!(matches!(
            nlm_forward(&params, &colored),
            Err(ModelError::ConfigMismatch { .. })
        ));
    }

    #[test]
    fn quantized_forward_lands_on_the_grid() {
        let g = triangle();
        let cfg = ModelConfig::new(ModelFamily::Nlm, 2, 3, 6).quantized(2);
        let params = ModelParams::init_for_graph(&cfg, &g, 5).unwrap();
        let state = nlm_forward(&params, &g).unwrap();
        for j in 0..=2 {
            for &v in state.arity_tensor(j).unwrap().data() {
                let scaled = v * 3.0;
                assert!(
                    (scaled - scaled.round()).abs() < 1e-12,
                    "value {v} off the 2-bit grid"
                );
            }
        }
    }
}
