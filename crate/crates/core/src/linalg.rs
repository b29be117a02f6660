//! Dense vector helpers over `f64` slices.

/// Dot product with eight independent partial sums, so the loop is not bound
/// by the latency of a single accumulator.
#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let (xc, yc) = (x.chunks_exact(8), y.chunks_exact(8));
    let tail: f64 = xc.remainder().iter().zip(yc.remainder()).map(|(a, b)| a * b).sum();
    let mut acc = [0.0; 8];
    for (a, b) in xc.zip(yc) {
        for k in 0..8 {
            acc[k] += a[k] * b[k];
        }
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row-major `rows x cols` matrix times `x`, plus `bias`.
pub fn affine(matrix: &[f64], cols: usize, x: &[f64], bias: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(matrix.len(), bias.len() * cols);
    matrix.chunks_exact(cols).zip(bias).map(|(row, b)| dot(row, x) + b).collect()
}

/// Row-major `rows x cols` matrix times `x`.
pub fn matvec(matrix: &[f64], cols: usize, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), cols);
    matrix.chunks_exact(cols).map(|row| dot(row, x)).collect()
}

/// `matrix^T * y` for a row-major `rows x cols` matrix.
pub fn matvec_transposed(matrix: &[f64], cols: usize, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (row, &yr) in matrix.chunks_exact(cols).zip(y) {
        axpy(yr, row, &mut out);
    }
    out
}

/// `matrix += alpha * y x^T`
pub fn rank_one_update(matrix: &mut [f64], alpha: f64, y: &[f64], x: &[f64]) {
    let cols = x.len();
    for (row, &yr) in matrix.chunks_exact_mut(cols).zip(y) {
        axpy(alpha * yr, x, row);
    }
}

pub fn concat(u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(u.len() + v.len());
    x.extend_from_slice(u);
    x.extend_from_slice(v);
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_serial_sum() {
        for len in [0, 1, 7, 8, 9, 31, 200] {
            let x: Vec<f64> = (0..len).map(|i| (i as f64 * 0.3).sin()).collect();
            let y: Vec<f64> = (0..len).map(|i| (i as f64 * 0.7).cos()).collect();
            let serial: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert!((dot(&x, &y) - serial).abs() < 1e-12, "len {len}");
        }
    }

    #[test]
    fn affine_matches_hand_computation() {
        // [[1 2] [3 4]] * (5, 6) + (1, -1)
        let m = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(affine(&m, 2, &[5.0, 6.0], &[1.0, -1.0]), vec![18.0, 38.0]);
        assert_eq!(matvec_transposed(&m, 2, &[1.0, 1.0]), vec![4.0, 6.0]);
    }

    #[test]
    fn rank_one_update_is_outer_product() {
        let mut m = vec![0.0; 6];
        rank_one_update(&mut m, 2.0, &[1.0, 2.0], &[1.0, 0.0, -1.0]);
        assert_eq!(m, vec![2.0, 0.0, -2.0, 4.0, 0.0, -4.0]);
    }
}
