//! Multilayer perceptrons over the trailing feature axis of a tensor.
//!
//! Forward is affine-plus-activation per layer; backward returns exact
//! analytic gradients of that computation (derived by hand, not traced).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{dgemm_rowmajor, Tensor, TensorError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed in terms of the activation's own output. ReLU
    /// uses the convention `relu'(0) = 0`.
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

/// Weights, biases, and activation of a dense feed-forward network.
///
/// Layer `l` maps `sizes[l]` features to `sizes[l+1]` via a `[in, out]`
/// weight matrix; the same activation is applied after every layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    sizes: Vec<usize>,
    weights: Vec<Tensor>,
    biases: Vec<Tensor>,
    activation: Activation,
}

/// Gradients shaped like [`MlpParams`].
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub weights: Vec<Tensor>,
    pub biases: Vec<Tensor>,
}

impl MlpGrads {
    pub fn zeros_like(params: &MlpParams) -> Self {
        MlpGrads {
            weights: params
                .weights
                .iter()
                .map(|w| Tensor::zeros(w.shape().to_vec()))
                .collect(),
            biases: params
                .biases
                .iter()
                .map(|b| Tensor::zeros(b.shape().to_vec()))
                .collect(),
        }
    }
}

impl MlpParams {
    /// Random initialization: weights uniform in `±sqrt(6 / (fan_in + fan_out))`,
    /// biases zero.
    pub fn init(
        sizes: &[usize],
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Result<Self, TensorError> {
        Self::check_sizes(sizes)?;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-a..=a))
                .collect();
            weights.push(Tensor::new(vec![fan_in, fan_out], data)?);
            biases.push(Tensor::zeros(vec![fan_out]));
        }
        Ok(MlpParams {
            sizes: sizes.to_vec(),
            weights,
            biases,
            activation,
        })
    }

    /// Builds an MLP from explicit layer tensors.
    pub fn from_layers(
        weights: Vec<Tensor>,
        biases: Vec<Tensor>,
        activation: Activation,
    ) -> Result<Self, TensorError> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(TensorError::BadLayerSizes { sizes: vec![] });
        }
        let mut sizes = vec![weights[0].shape()[0]];
        for (w, b) in weights.iter().zip(&biases) {
            if w.rank() != 2 || b.rank() != 1 || w.shape()[1] != b.shape()[0] {
                return Err(TensorError::ShapeMismatch {
                    op: "from_layers",
                    left: w.shape().to_vec(),
                    right: b.shape().to_vec(),
                });
            }
            if w.shape()[0] != *sizes.last().unwrap() {
                return Err(TensorError::BadLayerSizes {
                    sizes: weights.iter().map(|w| w.shape()[0]).collect(),
                });
            }
            sizes.push(w.shape()[1]);
        }
        Ok(MlpParams {
            sizes,
            weights,
            biases,
            activation,
        })
    }

    fn check_sizes(sizes: &[usize]) -> Result<(), TensorError> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
            return Err(TensorError::BadLayerSizes {
                sizes: sizes.to_vec(),
            });
        }
        Ok(())
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_width(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Tensor] {
        &self.weights
    }

    pub fn biases(&self) -> &[Tensor] {
        &self.biases
    }

    /// Flat views for the optimizer: weights then biases, layer by layer.
    pub fn param_tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::with_capacity(self.weights.len() * 2);
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.push(w);
            out.push(b);
        }
        out
    }

    pub fn param_tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::with_capacity(self.weights.len() * 2);
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w);
            out.push(b);
        }
        out
    }

    /// Applies the network to the trailing axis of `input`; leading extents
    /// are preserved. The input is never mutated.
    pub fn forward(&self, input: &Tensor) -> Result<Tensor, TensorError> {
        if input.trailing() != self.sizes[0] {
            return Err(TensorError::TrailingExtent {
                op: "mlp_forward",
                expected: self.sizes[0],
                shape: input.shape().to_vec(),
            });
        }
        let mut current = input.clone();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            current = self.layer_forward(&current, w, b)?;
        }
        Ok(current)
    }

    fn layer_forward(&self, input: &Tensor, w: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
        let mut out = input.matmul_trailing(w)?;
        let width = out.trailing();
        let bias = b.data();
        for row in out.data_mut().chunks_mut(width) {
            for (x, &bv) in row.iter_mut().zip(bias) {
                *x = self.activation.apply(*x + bv);
            }
        }
        Ok(out)
    }

    /// Exact gradients of `forward` with respect to every parameter and to
    /// the input, given the gradient of some loss with respect to the
    /// output.
    pub fn backward(
        &self,
        input: &Tensor,
        upstream: &Tensor,
    ) -> Result<(MlpGrads, Tensor), TensorError> {
        if input.trailing() != self.sizes[0] {
            return Err(TensorError::TrailingExtent {
                op: "mlp_backward",
                expected: self.sizes[0],
                shape: input.shape().to_vec(),
            });
        }
        // Recompute the forward pass keeping each layer's output.
        let mut activations: Vec<Tensor> = Vec::with_capacity(self.weights.len());
        let mut current = input.clone();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            current = self.layer_forward(&current, w, b)?;
            activations.push(current.clone());
        }
        let output_shape: Vec<usize> = activations
            .last()
            .map(|t| t.shape().to_vec())
            .unwrap_or_default();
        if upstream.shape() != output_shape.as_slice() {
            return Err(TensorError::ShapeMismatch {
                op: "mlp_backward upstream",
                left: upstream.shape().to_vec(),
                right: output_shape,
            });
        }

        let rows = input.leading_rows();
        let mut w_grads = vec![Tensor::zeros(vec![0]); self.weights.len()];
        let mut b_grads = vec![Tensor::zeros(vec![0]); self.biases.len()];
        let mut delta = upstream.clone();
        for l in (0..self.weights.len()).rev() {
            // delta currently holds dL/d(output of layer l); fold in the
            // activation derivative to get dL/d(pre-activation).
            let out_w = self.sizes[l + 1];
            {
                let act = activations[l].data();
                let d = delta.data_mut();
                for i in 0..d.len() {
                    d[i] *= self.activation.grad_from_output(act[i]);
                }
            }
            // dW = a_{l-1}ᵀ · delta, db = column sums of delta.
            let below: &[f64] = if l == 0 {
                input.data()
            } else {
                activations[l - 1].data()
            };
            let in_w = self.sizes[l];
            let mut dw = vec![0.0; in_w * out_w];
            dgemm_rowmajor(in_w, rows, out_w, below, true, delta.data(), false, &mut dw);
            w_grads[l] = Tensor {
                shape: vec![in_w, out_w],
                data: dw,
            };
            let mut db = vec![0.0; out_w];
            for row in delta.data().chunks(out_w) {
                for (acc, &v) in db.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            b_grads[l] = Tensor {
                shape: vec![out_w],
                data: db,
            };
            // delta for the layer below: delta · Wᵀ.
            let mut next = vec![0.0; rows * in_w];
            dgemm_rowmajor(
                rows,
                out_w,
                in_w,
                delta.data(),
                false,
                self.weights[l].data(),
                true,
                &mut next,
            );
            let mut shape = if l == 0 {
                input.shape().to_vec()
            } else {
                activations[l - 1].shape().to_vec()
            };
            if shape.is_empty() {
                shape = vec![in_w];
            }
            delta = Tensor { shape, data: next };
        }
        Ok((
            MlpGrads {
                weights: w_grads,
                biases: b_grads,
            },
            delta,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_single_layer_passes_input_through() {
        let w = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = Tensor::zeros(vec![2]);
        let mlp = MlpParams::from_layers(vec![w], vec![b], Activation::Identity).unwrap();
        let out = mlp.forward(&Tensor::vector(vec![1.0, 2.0])).unwrap();
        assert_eq!(out.data(), &[1.0, 2.0]);
    }

    #[test]
    fn sigmoid_of_zero_weights_is_half_everywhere() {
        let mlp = MlpParams::from_layers(
            vec![Tensor::zeros(vec![3, 3])],
            vec![Tensor::zeros(vec![3])],
            Activation::Sigmoid,
        )
        .unwrap();
        let out = mlp
            .forward(&Tensor::vector(vec![0.3, -5.0, 11.0]))
            .unwrap();
        assert_eq!(out.data(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn forward_preserves_leading_extents() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mlp = MlpParams::init(&[4, 8, 2], Activation::Relu, &mut rng).unwrap();
        let input = Tensor::zeros(vec![3, 5, 4]);
        let out = mlp.forward(&input).unwrap();
        assert_eq!(out.shape(), &[3, 5, 2]);
    }

    #[test]
    fn forward_rejects_wrong_trailing_extent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mlp = MlpParams::init(&[4, 2], Activation::Relu, &mut rng).unwrap();
        let err = mlp.forward(&Tensor::zeros(vec![3])).unwrap_err();
        assert!(matches!(err, TensorError::TrailingExtent { expected: 4, .. }));
    }

    #[test]
    fn forward_does_not_mutate_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mlp = MlpParams::init(&[3, 3], Activation::Sigmoid, &mut rng).unwrap();
        let input = Tensor::vector(vec![0.25, -1.5, 2.0]);
        let snapshot = input.clone();
        let _ = mlp.forward(&input).unwrap();
        assert_eq!(input, snapshot);
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mlp = MlpParams::init(&[4, 8, 2], Activation::Relu, &mut rng).unwrap();
        let input = Tensor::vector(vec![0.1, 0.2, -0.3, 0.4]);
        let (grads, dx) = mlp.backward(&input, &Tensor::zeros(vec![2])).unwrap();
        assert!(dx.data().iter().all(|&v| v == 0.0));
        for g in grads.weights.iter().chain(&grads.biases) {
            assert!(g.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_linear_unit_gradients() {
        // y = w·x with w = 1.5, x = 3, upstream 1: dL/dw = 3, dL/dx = w.
        let w = Tensor::new(vec![1, 1], vec![1.5]).unwrap();
        let b = Tensor::zeros(vec![1]);
        let mlp = MlpParams::from_layers(vec![w], vec![b], Activation::Identity).unwrap();
        let (grads, dx) = mlp
            .backward(&Tensor::vector(vec![3.0]), &Tensor::vector(vec![1.0]))
            .unwrap();
        assert_eq!(grads.weights[0].data(), &[3.0]);
        assert_eq!(grads.biases[0].data(), &[1.0]);
        assert_eq!(dx.data(), &[1.5]);
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = MlpParams::init(&[5, 7, 3], Activation::Relu, &mut ChaCha8Rng::seed_from_u64(42))
            .unwrap();
        let b = MlpParams::init(&[5, 7, 3], Activation::Relu, &mut ChaCha8Rng::seed_from_u64(42))
            .unwrap();
        assert_eq!(a, b);
    }
}
