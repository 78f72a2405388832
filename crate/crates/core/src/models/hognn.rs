//! Higher-order GNN: message passing over B-tuples of nodes.
//!
//! Tuple features start from each tuple's atomic type (all input relation
//! values over its ordered sub-tuples; the equality channel covers the
//! tuple's equality pattern). Each round sends, for every node `u`, one
//! message per tuple computed from the tuple's feature and the features of
//! the B tuples obtained by substituting `u` at each position; messages are
//! aggregated over `u` with the configured aggregator and folded into the
//! tuple state by an update MLP.
//!
//! At B = 1 the substitution neighborhood alone carries no edge structure,
//! so messages are gated (multiplied) by the edge indicator of `(v, u)`,
//! which recovers a vanilla message-passing GNN.

use crate::hypergraph::{Hypergraph, EQ_CHANNEL};
use crate::tensor::{canonical_sum, Tensor};

use super::nlm::add_mlp_grads;
use super::params::{BlockGrads, LayerBlock, ModelGrads, ModelParams};
use super::{quantize_activations, Aggregator, LayerState, ModelError};

/// Tuples per message chunk; each chunk holds `chunk · n` message rows.
const CHUNK_TUPLES: usize = 2048;

pub struct HognnTrace {
    pub rounds: usize,
    /// `states[l]` is the tuple-feature tensor before round `l`.
    pub states: Vec<Tensor>,
}

impl HognnTrace {
    pub fn final_state(&self) -> &Tensor {
        self.states.last().expect("trace holds at least the input")
    }
}

fn tuple_shape(n: usize, arity: usize, channels: usize) -> Vec<usize> {
    let mut shape = vec![n; arity];
    shape.push(channels);
    shape
}

/// Initial tuple features: global channels, unary channels per position,
/// binary channels per ordered pair of distinct positions.
pub(crate) fn atomic_features(graph: &Hypergraph, b: usize) -> Tensor {
    let n = graph.n();
    let c0 = graph.channels(0);
    let c1 = graph.channels(1);
    let c2 = graph.channels(2);
    let width = c0 + b * c1 + b * (b - 1) * c2;
    let count = n.pow(b as u32);
    let mut out = vec![0.0; count * width];
    let x0 = graph.tensor(0).map(Tensor::data).unwrap_or(&[]);
    let x1 = graph.tensor(1).map(Tensor::data).unwrap_or(&[]);
    let x2 = graph.tensor(2).map(Tensor::data).unwrap_or(&[]);
    let mut digits = vec![0usize; b];
    for t in 0..count {
        let mut rest = t;
        for d in digits.iter_mut().rev() {
            *d = rest % n;
            rest /= n;
        }
        let mut cursor = t * width;
        out[cursor..cursor + c0].copy_from_slice(x0);
        cursor += c0;
        for &v in &digits {
            out[cursor..cursor + c1].copy_from_slice(&x1[v * c1..(v + 1) * c1]);
            cursor += c1;
        }
        for p in 0..b {
            for q in 0..b {
                if p == q {
                    continue;
                }
                let base = (digits[p] * n + digits[q]) * c2;
                out[cursor..cursor + c2].copy_from_slice(&x2[base..base + c2]);
                cursor += c2;
            }
        }
    }
    Tensor::new(tuple_shape(n, b, width), out).expect("atomic feature volume")
}

/// Edge gate for B = 1: 1 iff any non-equality binary channel links `v`
/// and `u` in either orientation.
fn gate_table(graph: &Hypergraph) -> Vec<f64> {
    let n = graph.n();
    let c2 = graph.channels(2);
    let eq = graph.channel_index(2, EQ_CHANNEL);
    let x2 = graph.tensor(2).map(Tensor::data).unwrap_or(&[]);
    let mut gate = vec![0.0; n * n];
    for v in 0..n {
        for u in 0..n {
            let mut g: f64 = 0.0;
            for ch in 0..c2 {
                if Some(ch) == eq {
                    continue;
                }
                g = g.max(x2[(v * n + u) * c2 + ch]).max(x2[(u * n + v) * c2 + ch]);
            }
            gate[v * n + u] = g;
        }
    }
    gate
}

/// Builds the message-input rows for tuples `start..start+rows`: for each
/// tuple `t` and node `u`, the concatenation of `H[t]` and the B
/// one-position substitutions of `u` into `t`.
fn gather_messages(
    h: &Tensor,
    n: usize,
    b: usize,
    start: usize,
    rows: usize,
    out: &mut [f64],
) {
    let c = h.trailing();
    let data = h.data();
    let width = (b + 1) * c;
    let mut digits = vec![0usize; b];
    let mut strides = vec![0usize; b];
    for (p, s) in strides.iter_mut().enumerate() {
        *s = n.pow((b - 1 - p) as u32);
    }
    for r in 0..rows {
        let t = start + r;
        let mut rest = t;
        for d in digits.iter_mut().rev() {
            *d = rest % n;
            rest /= n;
        }
        for u in 0..n {
            let mut cursor = (r * n + u) * width;
            out[cursor..cursor + c].copy_from_slice(&data[t * c..(t + 1) * c]);
            cursor += c;
            for p in 0..b {
                let sub_index =
                    (t as isize + (u as isize - digits[p] as isize) * strides[p] as isize) as usize;
                out[cursor..cursor + c]
                    .copy_from_slice(&data[sub_index * c..(sub_index + 1) * c]);
                cursor += c;
            }
        }
    }
}

/// Scatter-adds message-input gradients back onto the tuple state.
fn scatter_messages(
    dh: &mut [f64],
    c: usize,
    n: usize,
    b: usize,
    start: usize,
    rows: usize,
    grad: &[f64],
) {
    let width = (b + 1) * c;
    let mut digits = vec![0usize; b];
    let mut strides = vec![0usize; b];
    for (p, s) in strides.iter_mut().enumerate() {
        *s = n.pow((b - 1 - p) as u32);
    }
    for r in 0..rows {
        let t = start + r;
        let mut rest = t;
        for d in digits.iter_mut().rev() {
            *d = rest % n;
            rest /= n;
        }
        for u in 0..n {
            let mut cursor = (r * n + u) * width;
            for k in 0..c {
                dh[t * c + k] += grad[cursor + k];
            }
            cursor += c;
            for p in 0..b {
                let sub_index =
                    (t as isize + (u as isize - digits[p] as isize) * strides[p] as isize) as usize;
                for k in 0..c {
                    dh[sub_index * c + k] += grad[cursor + k];
                }
                cursor += c;
            }
        }
    }
}

/// Aggregates message rows (n per tuple) into one received vector per tuple.
/// Returns winner indices for max aggregation.
fn aggregate_messages(
    msgs: &[f64],
    tuples: usize,
    n: usize,
    w: usize,
    agg: Aggregator,
    received: &mut [f64],
) -> Option<Vec<u32>> {
    match agg {
        Aggregator::Sum | Aggregator::FpMean { .. } => {
            let mut scratch = vec![0.0; n];
            let grid = match agg {
                Aggregator::FpMean { decimals } => Some(10f64.powi(decimals as i32)),
                _ => None,
            };
            for t in 0..tuples {
                for ch in 0..w {
                    for u in 0..n {
                        scratch[u] = msgs[((t * n) + u) * w + ch];
                    }
                    let mut value = canonical_sum(&mut scratch);
                    if let Some(g) = grid {
                        value = (value / n as f64 * g).round() / g;
                    }
                    received[t * w + ch] = value;
                }
            }
            None
        }
        Aggregator::Max => {
            let mut winners = vec![0u32; tuples * w];
            for t in 0..tuples {
                for ch in 0..w {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_u = 0u32;
                    for u in 0..n {
                        let v = msgs[((t * n) + u) * w + ch];
                        if v > best {
                            best = v;
                            best_u = u as u32;
                        }
                    }
                    received[t * w + ch] = best;
                    winners[t * w + ch] = best_u;
                }
            }
            Some(winners)
        }
    }
}

struct RoundOutput {
    next: Tensor,
}

fn round_forward(
    params: &ModelParams,
    block: &LayerBlock,
    h: &Tensor,
    n: usize,
    gate: Option<&[f64]>,
) -> Result<RoundOutput, ModelError> {
    let b = params.config.max_arity;
    let w = params.config.width;
    let LayerBlock::Hognn { message, update } = block else {
        return Err(ModelError::ConfigMismatch {
            expected: "hognn block".into(),
            actual: "nlm block".into(),
        });
    };
    let c = h.trailing();
    let count = n.pow(b as u32);
    let mut received = vec![0.0; count * w];
    let chunk_tuples = CHUNK_TUPLES.max(1);
    let mut start = 0;
    while start < count {
        let rows = chunk_tuples.min(count - start);
        let mut buf = vec![0.0; rows * n * (b + 1) * c];
        gather_messages(h, n, b, start, rows, &mut buf);
        let input = Tensor::new(vec![rows * n, (b + 1) * c], buf)?;
        let mut msgs = message.forward(&input)?;
        if let Some(gate) = gate {
            // B = 1: tuple index is the node itself.
            let m = msgs.data_mut();
            for r in 0..rows {
                let v = start + r;
                for u in 0..n {
                    let g = gate[v * n + u];
                    for k in 0..w {
                        m[(r * n + u) * w + k] *= g;
                    }
                }
            }
        }
        aggregate_messages(
            msgs.data(),
            rows,
            n,
            w,
            params.config.aggregator,
            &mut received[start * w..(start + rows) * w],
        );
        start += rows;
    }
    // H' = update(concat(H, Received)).
    let mut joined = vec![0.0; count * (c + w)];
    for t in 0..count {
        joined[t * (c + w)..t * (c + w) + c].copy_from_slice(&h.data()[t * c..(t + 1) * c]);
        joined[t * (c + w) + c..(t + 1) * (c + w)]
            .copy_from_slice(&received[t * w..(t + 1) * w]);
    }
    let input = Tensor::new(vec![count, c + w], joined)?;
    let out = update.forward(&input)?;
    let mut next = out.reshaped(tuple_shape(n, b, w))?;
    if let Some(bits) = params.config.quant_bits {
        next = quantize_activations(&next, bits)?;
    }
    Ok(RoundOutput { next })
}

/// Forward pass with the depth policy's evaluation rounds.
pub fn hognn_forward(params: &ModelParams, graph: &Hypergraph) -> Result<LayerState, ModelError> {
    let rounds = params.config.depth.eval_rounds(graph.n());
    hognn_forward_with_rounds(params, graph, rounds)
}

pub fn hognn_forward_with_rounds(
    params: &ModelParams,
    graph: &Hypergraph,
    rounds: usize,
) -> Result<LayerState, ModelError> {
    let trace = hognn_forward_traced(params, graph, rounds, false)?;
    Ok(LayerState::Hognn(trace.states.into_iter().last().unwrap()))
}

pub fn hognn_forward_traced(
    params: &ModelParams,
    graph: &Hypergraph,
    rounds: usize,
    keep_trace: bool,
) -> Result<HognnTrace, ModelError> {
    params.check_graph(graph)?;
    let n = graph.n();
    let b = params.config.max_arity;
    let plan = params.config.layer_plan(rounds);
    let gate = (b == 1).then(|| gate_table(graph));
    let mut states = Vec::with_capacity(if keep_trace { plan.len() + 1 } else { 2 });
    states.push(atomic_features(graph, b));
    for &bidx in &plan {
        let out = round_forward(
            params,
            &params.blocks[bidx],
            states.last().unwrap(),
            n,
            gate.as_deref(),
        )?;
        if keep_trace {
            states.push(out.next);
        } else {
            *states.last_mut().unwrap() = out.next;
        }
    }
    Ok(HognnTrace { rounds, states })
}

/// Backward pass from a gradient on the final tuple-feature tensor. Message
/// internals are recomputed per round rather than stored. Head slots in the
/// returned gradients are zeroed.
pub fn hognn_backward(
    params: &ModelParams,
    graph: &Hypergraph,
    trace: &HognnTrace,
    final_grad: Tensor,
) -> Result<ModelGrads, ModelError> {
    let n = graph.n();
    let b = params.config.max_arity;
    let w = params.config.width;
    let plan = params.config.layer_plan(trace.rounds);
    debug_assert_eq!(trace.states.len(), plan.len() + 1);
    let gate = (b == 1).then(|| gate_table(graph));
    let mut block_grads: Vec<BlockGrads> = params.blocks.iter().map(BlockGrads::zeros).collect();
    let count = n.pow(b as u32);
    let mut dnext = final_grad;

    for (l, &bidx) in plan.iter().enumerate().rev() {
        let h = &trace.states[l];
        let c = h.trailing();
        let LayerBlock::Hognn { message, update } = &params.blocks[bidx] else {
            unreachable!()
        };
        // Recompute received (with aggregation traces) for this round.
        let mut received = vec![0.0; count * w];
        let mut winners: Vec<Option<Vec<u32>>> = Vec::new();
        let chunk_tuples = CHUNK_TUPLES.max(1);
        let mut start = 0;
        while start < count {
            let rows = chunk_tuples.min(count - start);
            let mut buf = vec![0.0; rows * n * (b + 1) * c];
            gather_messages(h, n, b, start, rows, &mut buf);
            let input = Tensor::new(vec![rows * n, (b + 1) * c], buf)?;
            let mut msgs = message.forward(&input)?;
            if let Some(gate) = gate.as_deref() {
                let m = msgs.data_mut();
                for r in 0..rows {
                    let v = start + r;
                    for u in 0..n {
                        let g = gate[v * n + u];
                        for k in 0..w {
                            m[(r * n + u) * w + k] *= g;
                        }
                    }
                }
            }
            winners.push(aggregate_messages(
                msgs.data(),
                rows,
                n,
                w,
                params.config.aggregator,
                &mut received[start * w..(start + rows) * w],
            ));
            start += rows;
        }
        // Update MLP backward.
        let mut joined = vec![0.0; count * (c + w)];
        for t in 0..count {
            joined[t * (c + w)..t * (c + w) + c].copy_from_slice(&h.data()[t * c..(t + 1) * c]);
            joined[t * (c + w) + c..(t + 1) * (c + w)]
                .copy_from_slice(&received[t * w..(t + 1) * w]);
        }
        let update_in = Tensor::new(vec![count, c + w], joined)?;
        let upstream = Tensor::new(vec![count, w], dnext.data().to_vec())?;
        let (update_grads, djoined) = update.backward(&update_in, &upstream)?;
        let mut dh = vec![0.0; count * c];
        let mut dreceived = vec![0.0; count * w];
        for t in 0..count {
            for k in 0..c {
                dh[t * c + k] += djoined.data()[t * (c + w) + k];
            }
            for k in 0..w {
                dreceived[t * w + k] = djoined.data()[t * (c + w) + c + k];
            }
        }
        // Push dreceived back through aggregation and the message MLP.
        let mut message_grads_acc: Option<crate::tensor::MlpGrads> = None;
        let mut start = 0;
        let mut chunk_index = 0;
        while start < count {
            let rows = chunk_tuples.min(count - start);
            let mut buf = vec![0.0; rows * n * (b + 1) * c];
            gather_messages(h, n, b, start, rows, &mut buf);
            let input = Tensor::new(vec![rows * n, (b + 1) * c], buf)?;
            // dMessages from dReceived.
            let mut dmsgs = vec![0.0; rows * n * w];
            match (params.config.aggregator, &winners[chunk_index]) {
                (Aggregator::Sum, _) => {
                    for r in 0..rows {
                        let t = start + r;
                        for u in 0..n {
                            dmsgs[(r * n + u) * w..(r * n + u + 1) * w]
                                .copy_from_slice(&dreceived[t * w..(t + 1) * w]);
                        }
                    }
                }
                (Aggregator::FpMean { .. }, _) => {
                    let scale = 1.0 / n as f64;
                    for r in 0..rows {
                        let t = start + r;
                        for u in 0..n {
                            for k in 0..w {
                                dmsgs[(r * n + u) * w + k] = dreceived[t * w + k] * scale;
                            }
                        }
                    }
                }
                (Aggregator::Max, Some(win)) => {
                    for r in 0..rows {
                        let t = start + r;
                        for k in 0..w {
                            let u = win[r * w + k] as usize;
                            dmsgs[(r * n + u) * w + k] = dreceived[t * w + k];
                        }
                    }
                }
                (Aggregator::Max, None) => unreachable!(),
            }
            if let Some(gate) = gate.as_deref() {
                for r in 0..rows {
                    let v = start + r;
                    for u in 0..n {
                        let g = gate[v * n + u];
                        for k in 0..w {
                            dmsgs[(r * n + u) * w + k] *= g;
                        }
                    }
                }
            }
            let dmsgs = Tensor::new(vec![rows * n, w], dmsgs)?;
            let (message_grads, dinput) = message.backward(&input, &dmsgs)?;
            match &mut message_grads_acc {
                Some(acc) => add_mlp_grads(acc, &message_grads),
                slot @ None => *slot = Some(message_grads),
            }
            scatter_messages(&mut dh, c, n, b, start, rows, dinput.data());
            start += rows;
            chunk_index += 1;
        }
        let BlockGrads::Hognn {
            message: msg_acc,
            update: upd_acc,
        } = &mut block_grads[bidx]
        else {
            unreachable!()
        };
        if let Some(g) = message_grads_acc {
            add_mlp_grads(msg_acc, &g);
        }
        add_mlp_grads(upd_acc, &update_grads);
        dnext = Tensor::new(h.shape().to_vec(), dh)?;
    }
    Ok(params.assemble_grads(block_grads, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelConfig, ModelFamily};

    #[test]
    fn output_shape_contract() {
        let g = Hypergraph::from_edge_list(6, &[(0, 1), (2, 3), (4, 5)], &[], false).unwrap();
        let cfg = ModelConfig::new(ModelFamily::Hognn, 2, 4, 8);
        let params = ModelParams::init_for_graph(&cfg, &g, 1).unwrap();
        let state = hognn_forward(&params, &g).unwrap();
        assert_eq!(state.arity_tensor(2).unwrap().shape(), &[6, 6, 8]);
    }

    #[test]
    fn atomic_features_expose_ordered_pair_relations() {
        let g = Hypergraph::from_edge_list(3, &[(0, 1)], &[], false).unwrap();
        let atoms = atomic_features(&g, 2);
        // width = 1 (const) + 0 (no colors) + 2 * (edge + eq) = 5
        assert_eq!(atoms.shape(), &[3, 3, 5]);
        let row = |u: usize, v: usize| {
            let base = (u * 3 + v) * 5;
            atoms.data()[base..base + 5].to_vec()
        };
        // (0,1): const, edge(0,1)=1, eq(0,1)=0, edge(1,0)=1, eq(1,0)=0
        assert_eq!(row(0, 1), vec![1.0, 1.0, 0.0, 1.0, 0.0]);
        // (2,2): diagonal has eq = 1 both ways, no edge
        assert_eq!(row(2, 2), vec![1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn unary_gnn_messages_flow_only_along_edges() {
        // Path 0-1, isolated 2: node 2 must keep receiving nothing.
        let g = Hypergraph::from_edge_list(3, &[(0, 1)], &[], false).unwrap();
        let cfg = ModelConfig::new(ModelFamily::Hognn, 1, 2, 4);
        let params = ModelParams::init_for_graph(&cfg, &g, 9).unwrap();
        let state = hognn_forward(&params, &g).unwrap();
        let h = state.arity_tensor(1).unwrap();
        // Nodes 0 and 1 are exchangeable, node 2 is not.
        let row = |v: usize| &h.data()[v * 4..(v + 1) * 4];
        assert_eq!(row(0), row(1));
        assert_ne!(row(0), row(2));
    }

    #[test]
    fn forward_is_deterministic() {
        let g = Hypergraph::from_edge_list(4, &[(0, 1), (1, 2)], &[], false).unwrap();
        let cfg = ModelConfig::new(ModelFamily::Hognn, 2, 3, 6)
            .with_aggregator(Aggregator::Sum);
        let params = ModelParams::init_for_graph(&cfg, &g, 2).unwrap();
        assert_eq!(
            hognn_forward(&params, &g).unwrap(),
            hognn_forward(&params, &g).unwrap()
        );
    }
}
