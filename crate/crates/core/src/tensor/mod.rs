//! Dense f64 tensors and the numeric substrate every model is built on.
//!
//! A [`Tensor`] is a shape plus a flat row-major `Vec<f64>`. There is no
//! broadcasting and no computation graph: the handful of operations the
//! models need (matrix multiply against a trailing feature axis, elementwise
//! maps, canonical-order reductions) are provided directly, and gradients
//! are derived by hand in [`MlpParams::backward`] and in the model layers.

mod adam;
mod mlp;

pub use adam::AdamState;
pub use mlp::{Activation, MlpGrads, MlpParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape {shape:?} implies {expected} elements, data has {actual}")]
    ShapeDataMismatch {
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error("shape mismatch in {op}: left {left:?}, right {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("{op}: expected trailing extent {expected}, input shape is {shape:?}")]
    TrailingExtent {
        op: &'static str,
        expected: usize,
        shape: Vec<usize>,
    },
    #[error("non-finite value {value} at flat index {index}")]
    NonFinite { value: f64, index: usize },
    #[error("non-finite gradient for parameter {index} ({name})")]
    NonFiniteGrad { index: usize, name: String },
    #[error("layer sizes {sizes:?} do not form a valid MLP")]
    BadLayerSizes { sizes: Vec<usize> },
    #[error("optimizer state tracks {state} parameters, got {given}")]
    ParamCountMismatch { state: usize, given: usize },
}

/// Row-major dense tensor of 64-bit floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor, checking that `shape` and `data` agree and that all
    /// entries are finite.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, TensorError> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TensorError::ShapeDataMismatch {
                shape,
                expected,
                actual: data.len(),
            });
        }
        let t = Tensor { shape, data };
        t.check_finite()?;
        Ok(t)
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; len],
        }
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape,
            data: vec![value; len],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            shape: vec![],
            data: vec![value],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Extent of the last axis, or 1 for rank-0 tensors.
    pub fn trailing(&self) -> usize {
        self.shape.last().copied().unwrap_or(1)
    }

    /// Number of rows when the tensor is viewed as `[rows, trailing]`.
    pub fn leading_rows(&self) -> usize {
        if self.shape.is_empty() {
            1
        } else {
            self.shape[..self.shape.len() - 1].iter().product()
        }
    }

    /// Reinterprets the tensor with a new shape of identical volume.
    pub fn reshaped(mut self, shape: Vec<usize>) -> Result<Self, TensorError> {
        let expected: usize = shape.iter().product();
        if expected != self.data.len() {
            return Err(TensorError::ShapeDataMismatch {
                shape,
                expected,
                actual: self.data.len(),
            });
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn check_finite(&self) -> Result<(), TensorError> {
        for (index, &value) in self.data.iter().enumerate() {
            if !value.is_finite() {
                return Err(TensorError::NonFinite { value, index });
            }
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for x in &mut self.data {
            *x *= factor;
        }
    }

    /// `self += factor * other`; shapes must agree.
    pub fn add_scaled(&mut self, other: &Tensor, factor: f64) -> Result<(), TensorError> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch {
                op: "add_scaled",
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Matrix product of `self` viewed as `[rows, trailing]` with `weight`
    /// `[trailing, out]`, yielding `[..leading, out]`.
    pub fn matmul_trailing(&self, weight: &Tensor) -> Result<Tensor, TensorError> {
        if weight.rank() != 2 || weight.shape[0] != self.trailing() {
            return Err(TensorError::ShapeMismatch {
                op: "matmul_trailing",
                left: self.shape.clone(),
                right: weight.shape.clone(),
            });
        }
        let m = self.leading_rows();
        let k = self.trailing();
        let n = weight.shape[1];
        let mut out = vec![0.0; m * n];
        dgemm_rowmajor(m, k, n, &self.data, false, &weight.data, false, &mut out);
        let mut shape: Vec<usize> = if self.shape.is_empty() {
            vec![]
        } else {
            self.shape[..self.shape.len() - 1].to_vec()
        };
        shape.push(n);
        Ok(Tensor { shape, data: out })
    }
}

/// Thin wrapper over a BLAS-grade dgemm kernel: `out += A (·Aᵀ) × B (·Bᵀ)`
/// with all matrices row-major and `out` assumed zeroed (or accumulating).
///
/// `m, k, n` are the logical dimensions of the product `[m,k] × [k,n]`.
/// When `ta`/`tb` is set the corresponding buffer holds the transpose
/// (`[k,m]` resp. `[n,k]`) and is consumed through swapped strides.
pub fn dgemm_rowmajor(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    ta: bool,
    b: &[f64],
    tb: bool,
    out: &mut [f64],
) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        return;
    }
    let (rsa, csa) = if ta { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if tb { (1, k as isize) } else { (n as isize, 1) };
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            1.0,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Sums a slice in a canonical order that does not depend on how its
/// elements were arranged: values are sorted by their total order before
/// accumulation. Two slices holding the same multiset of floats therefore
/// produce bitwise-identical sums.
pub fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_shape_data_mismatch() {
        let err = Tensor::new(vec![2, 2], vec![1.0; 3]).unwrap_err();
        assert!(matches!(err, TensorError::ShapeDataMismatch { .. }));
    }

    #[test]
    fn new_rejects_non_finite() {
        let err = Tensor::new(vec![2], vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, TensorError::NonFinite { index: 1, .. }));
    }

    #[test]
    fn matmul_trailing_matches_hand_product() {
        // [2,3] x [3,2]
        let a = Tensor::new(vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let w = Tensor::new(vec![3, 2], vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let out = a.matmul_trailing(&w).unwrap();
        assert_eq!(out.shape(), &[2, 2]);
        assert_eq!(out.data(), &[4.0, 5.0, 10.0, 11.0]);
    }

    #[test]
    fn matmul_trailing_rejects_bad_inner_dim() {
        let a = Tensor::zeros(vec![2, 3]);
        let w = Tensor::zeros(vec![4, 2]);
        assert!(matches!(
            a.matmul_trailing(&w),
            Err(TensorError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn canonical_sum_is_order_independent() {
        let base = [0.1, 0.7, 1e-12, -3.4, 2.2, 0.1];
        let mut a = base;
        let mut b = base;
        b.reverse();
        b.swap(1, 3);
        assert_eq!(
            canonical_sum(&mut a).to_bits(),
            canonical_sum(&mut b).to_bits()
        );
    }

    #[test]
    fn scalar_tensor_views() {
        let s = Tensor::scalar(3.5);
        assert_eq!(s.rank(), 0);
        assert_eq!(s.leading_rows(), 1);
        assert_eq!(s.trailing(), 1);
    }
}
