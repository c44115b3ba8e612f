//! Deterministic reductions.
//!
//! Every reduction in the crate goes through these helpers so that results are
//! bit-identical regardless of how the per-element work was scheduled.

const LEAF: usize = 16;

/// Pairwise summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise summation of `values[i] * weights[i]`.
pub fn pairwise_dot(values: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    if values.len() <= LEAF {
        return values
            .iter()
            .zip(weights)
            .fold(0.0, |acc, (v, w)| acc + v * w);
    }
    let mid = values.len() / 2;
    pairwise_dot(&values[..mid], &weights[..mid]) + pairwise_dot(&values[mid..], &weights[mid..])
}

/// Pairwise element-wise sum of `count` equally sized vectors produced by `leaf`.
pub fn pairwise_vec_sum<F>(count: usize, len: usize, leaf: &F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64> + Sync,
{
    fn go<F: Fn(usize) -> Vec<f64> + Sync>(lo: usize, hi: usize, len: usize, leaf: &F) -> Vec<f64> {
        match hi - lo {
            0 => vec![0.0; len],
            1 => leaf(lo),
            n => {
                let mid = lo + n / 2;
                let (mut a, b) = rayon::join(|| go(lo, mid, len, leaf), || go(mid, hi, len, leaf));
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            }
        }
    }
    go(0, count, len, leaf)
}
