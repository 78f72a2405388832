//! Adam with bias correction and an epoch-indexed learning-rate schedule.

use serde::{Deserialize, Serialize};

use super::{Tensor, TensorError};

/// Optimizer state for a fixed list of parameter tensors.
///
/// The effective learning rate is the base rate times the product of every
/// schedule multiplier whose epoch has passed; [`AdamState::set_epoch`] must
/// be called as training advances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    step: u64,
    epoch: usize,
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    /// `(epoch, multiplier)` pairs; each multiplier applies from its epoch on.
    schedule: Vec<(usize, f64)>,
    first_moment: Vec<Tensor>,
    second_moment: Vec<Tensor>,
}

impl AdamState {
    pub const DEFAULT_BETA1: f64 = 0.9;
    pub const DEFAULT_BETA2: f64 = 0.999;
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    /// Zeroed moments shaped like `params`, conventional Adam constants.
    pub fn new(learning_rate: f64, schedule: Vec<(usize, f64)>, params: &[&Tensor]) -> Self {
        AdamState {
            step: 0,
            epoch: 0,
            learning_rate,
            beta1: Self::DEFAULT_BETA1,
            beta2: Self::DEFAULT_BETA2,
            epsilon: Self::DEFAULT_EPSILON,
            schedule,
            first_moment: params
                .iter()
                .map(|p| Tensor::zeros(p.shape().to_vec()))
                .collect(),
            second_moment: params
                .iter()
                .map(|p| Tensor::zeros(p.shape().to_vec()))
                .collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn set_epoch(&mut self, epoch: usize) {
        self.epoch = epoch;
    }

    /// Base rate times the product of multipliers whose epoch has passed.
    pub fn effective_learning_rate(&self) -> f64 {
        let mut rate = self.learning_rate;
        for &(epoch, multiplier) in &self.schedule {
            if self.epoch >= epoch {
                rate *= multiplier;
            }
        }
        rate
    }

    /// One Adam update over every `(param, grad)` pair. Gradients must be
    /// finite; the offending parameter is reported otherwise.
    pub fn step(
        &mut self,
        params: &mut [&mut Tensor],
        grads: &[Tensor],
        names: &dyn Fn(usize) -> String,
    ) -> Result<(), TensorError> {
        if params.len() != self.first_moment.len() || grads.len() != self.first_moment.len() {
            return Err(TensorError::ParamCountMismatch {
                state: self.first_moment.len(),
                given: params.len().max(grads.len()),
            });
        }
        for (index, grad) in grads.iter().enumerate() {
            if grad.data().iter().any(|v| !v.is_finite()) {
                return Err(TensorError::NonFiniteGrad {
                    index,
                    name: names(index),
                });
            }
            if grad.shape() != params[index].shape() {
                return Err(TensorError::ShapeMismatch {
                    op: "adam_step",
                    left: params[index].shape().to_vec(),
                    right: grad.shape().to_vec(),
                });
            }
        }
        self.step += 1;
        let rate = self.effective_learning_rate();
        let bias1 = 1.0 - self.beta1.powi(self.step as i32);
        let bias2 = 1.0 - self.beta2.powi(self.step as i32);
        for ((param, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first_moment.iter_mut().zip(&mut self.second_moment))
        {
            let p = param.data_mut();
            let g = grad.data();
            let m = m.data_mut();
            let v = v.data_mut();
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                p[i] -= rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anon(index: usize) -> String {
        format!("param{index}")
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut p = Tensor::vector(vec![1.0, -2.0, 3.0]);
        let mut state = AdamState::new(3e-4, vec![], &[&p]);
        let grads = vec![Tensor::zeros(vec![3])];
        state.step(&mut [&mut p], &grads, &anon).unwrap();
        assert_eq!(p.data(), &[1.0, -2.0, 3.0]);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn schedule_decays_at_passed_epochs() {
        let p = Tensor::scalar(0.0);
        let mut state = AdamState::new(3e-4, vec![(50, 0.1), (80, 0.1)], &[&p]);
        state.set_epoch(49);
        assert!((state.effective_learning_rate() - 3e-4).abs() < 1e-18);
        state.set_epoch(50);
        assert!((state.effective_learning_rate() - 3e-5).abs() < 1e-18);
        state.set_epoch(90);
        assert!((state.effective_learning_rate() - 3e-6).abs() < 1e-18);
    }

    #[test]
    fn first_step_update_magnitude_is_the_learning_rate() {
        // Constant gradient 1.0: bias-corrected moments are both exactly 1,
        // so the first update is lr / (1 + eps).
        let mut p = Tensor::scalar(0.5);
        let mut state = AdamState::new(3e-4, vec![], &[&p]);
        let grads = vec![Tensor::scalar(1.0)];
        state.step(&mut [&mut p], &grads, &anon).unwrap();
        let delta = 0.5 - p.data()[0];
        assert!((delta - 3e-4).abs() < 1e-10, "delta = {delta}");
    }

    #[test]
    fn non_finite_gradient_names_the_parameter() {
        let mut p = Tensor::scalar(0.5);
        let mut state = AdamState::new(3e-4, vec![], &[&p]);
        let grads = vec![Tensor {
            shape: vec![],
            data: vec![f64::INFINITY],
        }];
        let err = state.step(&mut [&mut p], &grads, &anon).unwrap_err();
        match err {
            TensorError::NonFiniteGrad { index, name } => {
                assert_eq!(index, 0);
                assert_eq!(name, "param0");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
