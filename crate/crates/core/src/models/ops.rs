//! Arity-changing tensor operations shared by both architectures.
//!
//! Tensors carry `j` leading node axes of extent `n` plus one trailing
//! channel axis. `expand` broadcasts along a fresh node axis, `reduce`
//! aggregates the last node axis away, and `permute_fuse` concatenates all
//! `j!` index reorderings along the channel axis so that hyperedges over the
//! same node set see each other's features.
//!
//! Sum and fixed-precision-mean reductions accumulate in a canonical sorted
//! order ([`canonical_sum`]), which makes every forward pass exactly
//! permutation-equivariant: relabeling nodes permutes the multiset of
//! summands but not the computed bits.

use itertools::Itertools;

use crate::tensor::{canonical_sum, Tensor};

use super::{Aggregator, ModelError};

/// Permute fans out channels by `arity!`; 4 caps the blowup at 24.
pub const MAX_PERMUTE_ARITY: usize = 4;

pub(crate) fn factorial(k: usize) -> usize {
    (1..=k).product::<usize>().max(1)
}

fn node_axes(t: &Tensor) -> usize {
    t.rank().saturating_sub(1)
}

/// `[n; j-1, C] -> [n; j, C]`: output at `(v_1..v_j)` copies the input at
/// `(v_1..v_{j-1})` for every `v_j`.
pub fn expand(t: &Tensor, n: usize) -> Tensor {
    let channels = t.trailing();
    let rows = t.leading_rows();
    let mut shape: Vec<usize> = t.shape()[..node_axes(t)].to_vec();
    shape.push(n);
    shape.push(channels);
    let mut out = vec![0.0; rows * n * channels];
    let data = t.data();
    for row in 0..rows {
        let src = &data[row * channels..(row + 1) * channels];
        for u in 0..n {
            let offset = (row * n + u) * channels;
            out[offset..offset + channels].copy_from_slice(src);
        }
    }
    Tensor::new(shape, out).expect("expand preserves volume")
}

/// Adjoint of [`expand`]: sums the gradient over the broadcast axis.
pub fn expand_backward(grad: &Tensor, n: usize) -> Tensor {
    let channels = grad.trailing();
    let rows = grad.leading_rows() / n.max(1);
    let mut shape: Vec<usize> = grad.shape()[..node_axes(grad) - 1].to_vec();
    shape.push(channels);
    let mut out = vec![0.0; rows * channels];
    let data = grad.data();
    for row in 0..rows {
        for u in 0..n {
            let offset = (row * n + u) * channels;
            for ch in 0..channels {
                out[row * channels + ch] += data[offset + ch];
            }
        }
    }
    Tensor::new(shape, out).expect("expand_backward preserves volume")
}

/// What `reduce` must remember to run its backward pass.
#[derive(Debug, Clone)]
pub enum ReduceTrace {
    Linear,
    /// Winning node index per `(slot, channel)`.
    Max(Vec<u32>),
}

/// `[n; j+1, C] -> [n; j, C]`: aggregates the last node axis. Sum adds (in
/// canonical order), max takes the entrywise maximum, fixed-precision mean
/// averages then rounds to the configured number of decimals.
pub fn reduce(t: &Tensor, agg: Aggregator) -> Result<Tensor, ModelError> {
    reduce_with_trace(t, agg).map(|(out, _)| out)
}

pub fn reduce_with_trace(
    t: &Tensor,
    agg: Aggregator,
) -> Result<(Tensor, ReduceTrace), ModelError> {
    let axes = node_axes(t);
    debug_assert!(axes >= 1, "reduce requires at least one node axis");
    let channels = t.trailing();
    let n = t.shape()[axes - 1];
    let outer = t.leading_rows() / n.max(1);
    if n == 0 && matches!(agg, Aggregator::Max) {
        return Err(ModelError::EmptyMax);
    }
    let mut shape: Vec<usize> = t.shape()[..axes - 1].to_vec();
    shape.push(channels);
    let mut out = vec![0.0; outer * channels];
    let data = t.data();
    let trace = match agg {
        Aggregator::Sum | Aggregator::FpMean { .. } => {
            let mut scratch = vec![0.0; n];
            let scale = match agg {
                Aggregator::FpMean { .. } if n > 0 => 1.0 / n as f64,
                _ => 1.0,
            };
            let grid = match agg {
                Aggregator::FpMean { decimals } => Some(10f64.powi(decimals as i32)),
                _ => None,
            };
            for slot in 0..outer {
                for ch in 0..channels {
                    for u in 0..n {
                        scratch[u] = data[(slot * n + u) * channels + ch];
                    }
                    let mut value = canonical_sum(&mut scratch) * scale;
                    if let Some(g) = grid {
                        value = (value * g).round() / g;
                    }
                    out[slot * channels + ch] = value;
                }
            }
            ReduceTrace::Linear
        }
        Aggregator::Max => {
            let mut winners = vec![0u32; outer * channels];
            for slot in 0..outer {
                for ch in 0..channels {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_u = 0u32;
                    for u in 0..n {
                        let v = data[(slot * n + u) * channels + ch];
                        if v > best {
                            best = v;
                            best_u = u as u32;
                        }
                    }
                    out[slot * channels + ch] = best;
                    winners[slot * channels + ch] = best_u;
                }
            }
            ReduceTrace::Max(winners)
        }
    };
    Ok((Tensor::new(shape, out)?, trace))
}

/// Adjoint of [`reduce`]: sum broadcasts, max routes to the stored winner,
/// fixed-precision mean broadcasts `1/n` (straight-through rounding).
pub fn reduce_backward(grad: &Tensor, n: usize, agg: Aggregator, trace: &ReduceTrace) -> Tensor {
    let channels = grad.trailing();
    let outer = grad.leading_rows();
    let mut shape: Vec<usize> = grad.shape()[..node_axes(grad)].to_vec();
    shape.push(n);
    shape.push(channels);
    let mut out = vec![0.0; outer * n * channels];
    let g = grad.data();
    match (agg, trace) {
        (Aggregator::Sum, _) => {
            for slot in 0..outer {
                for u in 0..n {
                    let offset = (slot * n + u) * channels;
                    out[offset..offset + channels]
                        .copy_from_slice(&g[slot * channels..(slot + 1) * channels]);
                }
            }
        }
        (Aggregator::FpMean { .. }, _) => {
            let scale = if n > 0 { 1.0 / n as f64 } else { 0.0 };
            for slot in 0..outer {
                for u in 0..n {
                    let offset = (slot * n + u) * channels;
                    for ch in 0..channels {
                        out[offset + ch] = g[slot * channels + ch] * scale;
                    }
                }
            }
        }
        (Aggregator::Max, ReduceTrace::Max(winners)) => {
            for slot in 0..outer {
                for ch in 0..channels {
                    let u = winners[slot * channels + ch] as usize;
                    out[(slot * n + u) * channels + ch] = g[slot * channels + ch];
                }
            }
        }
        (Aggregator::Max, ReduceTrace::Linear) => {
            unreachable!("max reduce produces a Max trace")
        }
    }
    Tensor::new(shape, out).expect("reduce_backward preserves volume")
}

/// Lexicographically ordered permutations of `0..arity`.
pub(crate) fn permutations(arity: usize) -> Vec<Vec<usize>> {
    (0..arity).permutations(arity).collect()
}

/// `[n; j, C] -> [n; j, j!·C]`: block `s` of the output holds the input
/// re-indexed by the `s`-th permutation (lexicographic order), fusing the
/// features of hyperedges over the same node set.
pub fn permute_fuse(t: &Tensor, arity: usize) -> Result<Tensor, ModelError> {
    if arity > MAX_PERMUTE_ARITY {
        return Err(ModelError::ArityTooLarge {
            arity,
            max: MAX_PERMUTE_ARITY,
        });
    }
    let channels = t.trailing();
    if arity <= 1 {
        return Ok(t.clone());
    }
    let n = t.shape()[0];
    let perms = permutations(arity);
    let blocks = perms.len();
    let rows = t.leading_rows();
    let mut shape: Vec<usize> = t.shape()[..arity].to_vec();
    shape.push(blocks * channels);
    let mut out = vec![0.0; rows * blocks * channels];
    let data = t.data();
    let mut digits = vec![0usize; arity];
    for row in 0..rows {
        // Decompose the tuple index once per row.
        let mut rest = row;
        for i in (0..arity).rev() {
            digits[i] = rest % n;
            rest /= n;
        }
        for (s, perm) in perms.iter().enumerate() {
            let mut src = 0;
            for &axis in perm {
                src = src * n + digits[axis];
            }
            let dst = row * blocks * channels + s * channels;
            out[dst..dst + channels].copy_from_slice(&data[src * channels..(src + 1) * channels]);
        }
    }
    Ok(Tensor::new(shape, out).expect("permute preserves volume"))
}

/// Adjoint of [`permute_fuse`]: scatter-adds each block's gradient back
/// through its permutation.
pub fn permute_backward(grad: &Tensor, arity: usize) -> Result<Tensor, ModelError> {
    if arity > MAX_PERMUTE_ARITY {
        return Err(ModelError::ArityTooLarge {
            arity,
            max: MAX_PERMUTE_ARITY,
        });
    }
    if arity <= 1 {
        return Ok(grad.clone());
    }
    let n = grad.shape()[0];
    let perms = permutations(arity);
    let blocks = perms.len();
    let channels = grad.trailing() / blocks;
    let rows = grad.leading_rows();
    let mut shape: Vec<usize> = grad.shape()[..arity].to_vec();
    shape.push(channels);
    let mut out = vec![0.0; rows * channels];
    let g = grad.data();
    let mut digits = vec![0usize; arity];
    for row in 0..rows {
        let mut rest = row;
        for i in (0..arity).rev() {
            digits[i] = rest % n;
            rest /= n;
        }
        for (s, perm) in perms.iter().enumerate() {
            let mut src = 0;
            for &axis in perm {
                src = src * n + digits[axis];
            }
            let from = row * blocks * channels + s * channels;
            for ch in 0..channels {
                out[src * channels + ch] += g[from + ch];
            }
        }
    }
    Ok(Tensor::new(shape, out).expect("permute_backward preserves volume"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_broadcasts_unary_to_binary() {
        // n=2, W=1: [3, 5] -> [[3,3],[5,5]]
        let t = Tensor::new(vec![2, 1], vec![3.0, 5.0]).unwrap();
        let e = expand(&t, 2);
        assert_eq!(e.shape(), &[2, 2, 1]);
        assert_eq!(e.data(), &[3.0, 3.0, 5.0, 5.0]);
    }

    #[test]
    fn expand_broadcasts_global_to_unary() {
        let t = Tensor::new(vec![1], vec![7.0]).unwrap();
        let e = expand(&t, 4);
        assert_eq!(e.shape(), &[4, 1]);
        assert_eq!(e.data(), &[7.0; 4]);
    }

    #[test]
    fn expand_then_max_reduce_is_identity() {
        let t = Tensor::new(vec![3, 2], vec![0.5, -1.0, 2.0, 0.0, 1.5, 3.0]).unwrap();
        let round_trip = reduce(&expand(&t, 3), Aggregator::Max).unwrap();
        assert_eq!(round_trip, t);
    }

    #[test]
    fn reduce_examples_from_a_two_by_two() {
        // [[1,4],[2,3]] with one channel.
        let t = Tensor::new(vec![2, 2, 1], vec![1.0, 4.0, 2.0, 3.0]).unwrap();
        let max = reduce(&t, Aggregator::Max).unwrap();
        assert_eq!(max.data(), &[4.0, 3.0]);
        let sum = reduce(&t, Aggregator::Sum).unwrap();
        assert_eq!(sum.data(), &[5.0, 5.0]);
    }

    #[test]
    fn fpmean_rounds_to_the_decimal_grid() {
        let t = Tensor::new(vec![2, 1], vec![0.24, 0.28]).unwrap();
        let out = reduce(&t, Aggregator::FpMean { decimals: 1 }).unwrap();
        assert_eq!(out.data(), &[0.3]);
    }

    #[test]
    fn max_reduce_of_empty_axis_is_an_error() {
        let t = Tensor::zeros(vec![0, 2]);
        assert!(matches!(
            reduce(&t, Aggregator::Max),
            Err(ModelError::EmptyMax)
        ));
        let sum = reduce(&t, Aggregator::Sum).unwrap();
        assert_eq!(sum.data(), &[0.0, 0.0]);
    }

    #[test]
    fn permute_fuse_is_identity_at_arity_one() {
        let t = Tensor::new(vec![3, 2], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(permute_fuse(&t, 1).unwrap(), t);
    }

    #[test]
    fn permute_fuse_pairs_both_orientations() {
        // n=2, W=1, X[0,1]=a, X[1,0]=b.
        let (a, b) = (2.0, 5.0);
        let t = Tensor::new(vec![2, 2, 1], vec![0.0, a, b, 0.0]).unwrap();
        let p = permute_fuse(&t, 2).unwrap();
        assert_eq!(p.shape(), &[2, 2, 2]);
        // Y[0,1] = (a, b), Y[1,0] = (b, a).
        assert_eq!(&p.data()[2..4], &[a, b]);
        assert_eq!(&p.data()[4..6], &[b, a]);
    }

    #[test]
    fn permute_fuse_of_symmetric_input_repeats_blocks() {
        let n = 3;
        let mut data = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                data[u * n + v] = (u + v) as f64; // symmetric
            }
        }
        let t = Tensor::new(vec![n, n, 1], data).unwrap();
        let p = permute_fuse(&t, 2).unwrap();
        for row in p.data().chunks(2) {
            assert_eq!(row[0], row[1]);
        }
    }

    #[test]
    fn permute_rejects_arity_beyond_cap() {
        let t = Tensor::zeros(vec![2, 2, 2, 2, 2, 1]);
        assert!(matches!(
            permute_fuse(&t, 5),
            Err(ModelError::ArityTooLarge { arity: 5, .. })
        ));
    }

    #[test]
    fn reduce_backward_routes_correctly() {
        let t = Tensor::new(vec![2, 2, 1], vec![1.0, 4.0, 2.0, 3.0]).unwrap();
        let (_, trace) = reduce_with_trace(&t, Aggregator::Max).unwrap();
        let grad = Tensor::new(vec![2, 1], vec![1.0, 1.0]).unwrap();
        let back = reduce_backward(&grad, 2, Aggregator::Max, &trace);
        // Winners were u=1 for slot 0 (value 4) and u=1 for slot 1 (value 3).
        assert_eq!(back.data(), &[0.0, 1.0, 0.0, 1.0]);

        let back = reduce_backward(&grad, 2, Aggregator::Sum, &ReduceTrace::Linear);
        assert_eq!(back.data(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn permute_backward_is_the_adjoint() {
        // <permute(x), g> == <x, permute_backward(g)> for random data.
        let mut rng = crate::seed::rng_from(9);
        use rand::Rng;
        let n = 3;
        let c = 2;
        let x = Tensor::new(
            vec![n, n, c],
            (0..n * n * c).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let px = permute_fuse(&x, 2).unwrap();
        let g = Tensor::new(
            vec![n, n, 2 * c],
            (0..n * n * 2 * c).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let lhs: f64 = px.data().iter().zip(g.data()).map(|(a, b)| a * b).sum();
        let back = permute_backward(&g, 2).unwrap();
        let rhs: f64 = x.data().iter().zip(back.data()).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
