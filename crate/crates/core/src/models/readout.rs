//! Task heads: a linear map to one logit plus a sigmoid, applied to the
//! feature tensor at the task's arity. Predictions are `probability >= 0.5`.

use rand::Rng;

use crate::tensor::{Tensor, TensorError};

use super::ops::{reduce_with_trace, ReduceTrace};
use super::{LayerState, ModelError, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutHead {
    /// Shape `[W]`.
    pub weight: Tensor,
    /// Shape `[]`.
    pub bias: Tensor,
}

impl ReadoutHead {
    pub fn init(width: usize, rng: &mut impl Rng) -> Result<Self, TensorError> {
        let a = (6.0 / (width + 1) as f64).sqrt();
        let data = (0..width).map(|_| rng.gen_range(-a..=a)).collect();
        Ok(ReadoutHead {
            weight: Tensor::new(vec![width], data)?,
            bias: Tensor::scalar(0.0),
        })
    }

    pub fn zeros(width: usize) -> Self {
        ReadoutHead {
            weight: Tensor::zeros(vec![width]),
            bias: Tensor::scalar(0.0),
        }
    }

    pub fn param_tensors(&self) -> Vec<&Tensor> {
        vec![&self.weight, &self.bias]
    }

    pub fn param_tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.weight, &mut self.bias]
    }

    /// `[.., W] -> [..]`: one logit per leading position.
    pub fn logits(&self, features: &Tensor) -> Result<Tensor, TensorError> {
        let w = self.weight.shape()[0];
        if features.trailing() != w {
            return Err(TensorError::TrailingExtent {
                op: "readout",
                expected: w,
                shape: features.shape().to_vec(),
            });
        }
        let rows = features.leading_rows();
        let bias = self.bias.data()[0];
        let mut out = Vec::with_capacity(rows);
        for row in features.data().chunks(w.max(1)) {
            let z: f64 = row.iter().zip(self.weight.data()).map(|(x, w)| x * w).sum();
            out.push(z + bias);
        }
        let shape = features.shape()[..features.rank() - 1].to_vec();
        Tensor::new(shape, out)
    }

    /// Gradients with respect to weight, bias, and features, given
    /// dLoss/dlogit.
    pub fn backward(
        &self,
        features: &Tensor,
        upstream: &Tensor,
    ) -> Result<(Tensor, Tensor, Tensor), TensorError> {
        let w = self.weight.shape()[0];
        let rows = features.leading_rows();
        let mut dw = vec![0.0; w];
        let mut db = 0.0;
        let mut dx = vec![0.0; features.len()];
        for (row, &g) in upstream.data().iter().enumerate().take(rows).map(|(i, g)| (i, g)) {
            let x = &features.data()[row * w..(row + 1) * w];
            for k in 0..w {
                dw[k] += g * x[k];
                dx[row * w + k] = g * self.weight.data()[k];
            }
            db += g;
        }
        Ok((
            Tensor::new(vec![w], dw)?,
            Tensor::scalar(db),
            Tensor::new(features.shape().to_vec(), dx)?,
        ))
    }
}

/// Pulls the target-arity feature tensor out of a final state. NLM states
/// carry every arity directly; tuple-feature states are reduced over their
/// trailing node axes with the model's aggregator until the requested arity
/// remains. Returns the features together with the reduce traces needed to
/// run the backward pass.
pub(crate) fn features_at_arity(
    params: &ModelParams,
    state: &LayerState,
    target_arity: usize,
) -> Result<(Tensor, Vec<ReduceTrace>), ModelError> {
    match state {
        LayerState::Nlm(tensors) => match tensors.get(target_arity) {
            Some(t) => Ok((t.clone(), vec![])),
            None => Err(ModelError::ReadoutArity {
                arity: target_arity,
                max: tensors.len().saturating_sub(1),
            }),
        },
        LayerState::Hognn(h) => {
            let max = h.rank().saturating_sub(1);
            if target_arity > max {
                return Err(ModelError::ReadoutArity {
                    arity: target_arity,
                    max,
                });
            }
            let mut current = h.clone();
            let mut traces = Vec::new();
            for _ in target_arity..max {
                let (next, trace) = reduce_with_trace(&current, params.config.aggregator)?;
                traces.push(trace);
                current = next;
            }
            Ok((current, traces))
        }
    }
}

/// Logits of the task head over the target-arity tensor.
pub fn readout_logits(
    params: &ModelParams,
    state: &LayerState,
    target_arity: usize,
) -> Result<Tensor, ModelError> {
    let (features, _) = features_at_arity(params, state, target_arity)?;
    Ok(params.head.logits(&features)?)
}

/// Probabilities (sigmoid of the logits) over the target-arity tensor.
pub fn readout(
    params: &ModelParams,
    state: &LayerState,
    target_arity: usize,
) -> Result<Tensor, ModelError> {
    let logits = readout_logits(params, state, target_arity)?;
    Ok(logits.map(|z| 1.0 / (1.0 + (-z).exp())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelConfig, ModelFamily};
    use crate::tensor::Tensor;

    fn dummy_params(width: usize) -> ModelParams {
        let cfg = ModelConfig::new(ModelFamily::Nlm, 2, 1, width);
        let mut params = ModelParams::init(&cfg, &[1, 0, 2], 0).unwrap();
        params.head = ReadoutHead::zeros(width);
        params
    }

    #[test]
    fn zero_head_weights_give_half_probability_everywhere() {
        let params = dummy_params(4);
        let state = LayerState::Nlm(vec![
            Tensor::zeros(vec![4]),
            Tensor::filled(vec![3, 4], 2.0),
            Tensor::zeros(vec![3, 3, 4]),
        ]);
        let probs = readout(&params, &state, 1).unwrap();
        assert_eq!(probs.data(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn increasing_a_positive_weight_feature_increases_probability() {
        let mut params = dummy_params(2);
        params.head.weight = Tensor::vector(vec![1.0, 0.0]);
        let low = LayerState::Nlm(vec![Tensor::vector(vec![0.1, 0.7])]);
        let high = LayerState::Nlm(vec![Tensor::vector(vec![0.9, 0.7])]);
        let p_low = readout(&params, &low, 0).unwrap().data()[0];
        let p_high = readout(&params, &high, 0).unwrap().data()[0];
        assert!(p_high > p_low);
    }

    #[test]
    fn graph_level_head_yields_a_single_scalar() {
        let params = dummy_params(4);
        let state = LayerState::Nlm(vec![Tensor::zeros(vec![4])]);
        let probs = readout(&params, &state, 0).unwrap();
        assert_eq!(probs.rank(), 0);
        assert_eq!(probs.len(), 1);
    }

    #[test]
    fn missing_arity_is_an_error() {
        let params = dummy_params(4);
        let state = LayerState::Nlm(vec![Tensor::zeros(vec![4])]);
        assert!(matches!(
            readout(&params, &state, 2),
            Err(ModelError::ReadoutArity { arity: 2, .. })
        ));
    }
}
