// Thin wrappers over nalgebra's SVD for the dense, small matrices used here.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

/// Full right-singular decomposition of a `rows x cols` row-major matrix.
///
/// Returns the `cols` singular values in descending order (padded with zeros
/// when `rows < cols`) and the matching right singular vectors, so that the
/// trailing vectors span the null space.
pub(crate) fn right_singular(rows: usize, cols: usize, data: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let padded = rows.max(cols);
    let mut m = DMatrix::<f64>::zeros(padded, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = data[r * cols + c];
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..cols).map(|c| v_t[(i, c)]).collect())
        .collect();
    (values, vectors)
}

/// Solves the square system `a x = b` unless the smallest singular value of
/// `a` is below `rel_tol` times the largest.
pub(crate) fn solve_well_conditioned(n: usize, a: &[f64], b: &[f64], rel_tol: f64) -> Option<Vec<f64>> {
    let m = DMatrix::from_row_slice(n, n, a);
    let svd = m.svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max.is_nan() || max <= 0.0 || min < rel_tol * max {
        return None;
    }
    let x = svd.solve(&DVector::from_column_slice(b), 0.0).ok()?;
    Some(x.iter().cloned().collect())
}

/// Least-squares solution of the `rows x cols` system `a x = b`, plus the
/// numerical rank of `a` at relative tolerance `rel_tol`.
pub(crate) fn least_squares(
    rows: usize,
    cols: usize,
    a: &[f64],
    b: &[f64],
    rel_tol: f64,
) -> (Vec<f64>, usize) {
    let m = DMatrix::from_row_slice(rows, cols, a);
    let svd = m.svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = rel_tol * max;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    match svd.solve(&DVector::from_column_slice(b), eps) {
        Ok(x) => (x.iter().cloned().collect(), rank),
        Err(_) => (vec![0.0; cols], rank),
    }
}
