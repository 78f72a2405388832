//! Family-dispatching entry points: one forward/backward surface for
//! training and evaluation regardless of architecture.

use crate::hypergraph::Hypergraph;
use crate::tensor::Tensor;

use super::hognn::{hognn_backward, hognn_forward_traced, HognnTrace};
use super::nlm::{nlm_backward, nlm_forward_traced, NlmTrace};
use super::ops::{reduce_backward, ReduceTrace};
use super::readout::features_at_arity;
use super::{LayerState, ModelError, ModelFamily, ModelGrads, ModelParams};

pub enum ModelTrace {
    Nlm(NlmTrace),
    Hognn(HognnTrace),
}

/// One traced forward pass up to the task logits; holds everything the
/// backward pass needs.
pub struct ForwardPass {
    pub logits: Tensor,
    pub target_arity: usize,
    trace: ModelTrace,
    features: Tensor,
    readout_reduces: Vec<ReduceTrace>,
}

/// Resolves the rounds to run: explicit (training draw) or the policy's
/// evaluation rule.
fn resolve_rounds(params: &ModelParams, graph: &Hypergraph, rounds: Option<usize>) -> usize {
    rounds.unwrap_or_else(|| params.config.depth.eval_rounds(graph.n()))
}

/// Final state of the configured architecture.
pub fn model_forward(
    params: &ModelParams,
    graph: &Hypergraph,
    rounds: Option<usize>,
) -> Result<LayerState, ModelError> {
    let r = resolve_rounds(params, graph, rounds);
    match params.config.family {
        ModelFamily::Nlm => super::nlm::nlm_forward_with_rounds(params, graph, r),
        ModelFamily::Hognn => super::hognn::hognn_forward_with_rounds(params, graph, r),
    }
}

/// Task logits at `target_arity` (no trace kept).
pub fn model_logits(
    params: &ModelParams,
    graph: &Hypergraph,
    rounds: Option<usize>,
    target_arity: usize,
) -> Result<Tensor, ModelError> {
    let state = model_forward(params, graph, rounds)?;
    super::readout::readout_logits(params, &state, target_arity)
}

/// Traced forward pass for training.
pub fn forward_pass(
    params: &ModelParams,
    graph: &Hypergraph,
    rounds: Option<usize>,
    target_arity: usize,
) -> Result<ForwardPass, ModelError> {
    let r = resolve_rounds(params, graph, rounds);
    let (trace, state) = match params.config.family {
        ModelFamily::Nlm => {
            let trace = nlm_forward_traced(params, graph, r, true)?;
            let state = LayerState::Nlm(trace.final_state().to_vec());
            (ModelTrace::Nlm(trace), state)
        }
        ModelFamily::Hognn => {
            let trace = hognn_forward_traced(params, graph, r, true)?;
            let state = LayerState::Hognn(trace.final_state().clone());
            (ModelTrace::Hognn(trace), state)
        }
    };
    let (features, readout_reduces) = features_at_arity(params, &state, target_arity)?;
    let logits = params.head.logits(&features)?;
    Ok(ForwardPass {
        logits,
        target_arity,
        trace,
        features,
        readout_reduces,
    })
}

/// Gradients of a scalar loss with respect to every parameter, given the
/// loss gradient on the logits of a traced pass.
pub fn backward_pass(
    params: &ModelParams,
    graph: &Hypergraph,
    pass: &ForwardPass,
    dlogits: &Tensor,
) -> Result<ModelGrads, ModelError> {
    let (dw, db, mut dfeatures) = params.head.backward(&pass.features, dlogits)?;
    let mut grads = match &pass.trace {
        ModelTrace::Nlm(trace) => {
            let final_state = trace.final_state();
            let mut final_grads: Vec<Tensor> = final_state
                .iter()
                .map(|t| Tensor::zeros(t.shape().to_vec()))
                .collect();
            final_grads[pass.target_arity] = dfeatures;
            nlm_backward(params, trace, final_grads)?
        }
        ModelTrace::Hognn(trace) => {
            // Re-expand the readout reductions in reverse.
            let n = graph.n();
            for rtrace in pass.readout_reduces.iter().rev() {
                dfeatures = reduce_backward(&dfeatures, n, params.config.aggregator, rtrace);
            }
            hognn_backward(params, graph, trace, dfeatures)?
        }
    };
    let slots = grads.0.len();
    grads.0[slots - 2] = dw;
    grads.0[slots - 1] = db;
    Ok(grads)
}

/// Readout probabilities for evaluation.
pub fn model_probabilities(
    params: &ModelParams,
    graph: &Hypergraph,
    rounds: Option<usize>,
    target_arity: usize,
) -> Result<Tensor, ModelError> {
    let logits = model_logits(params, graph, rounds, target_arity)?;
    Ok(logits.map(|z| 1.0 / (1.0 + (-z).exp())))
}
