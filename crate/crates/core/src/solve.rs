//! Cancellation-free elimination for the linear systems of a Patankar step.
//!
//! Every system assembled by the schemes has nonpositive off-diagonal
//! entries and known positive column sums. Rebuilding each pivot from the
//! column sums (the Grassmann–Taksar–Heyman trick) keeps every operation a
//! sum of same-signed terms, so the factors and the solution carry small
//! componentwise relative errors and `1^T x` tracks `1^T b` to a few ulps,
//! however stiff the step.

use nalgebra::{DMatrix, DVector};

/// Solves `M x = rhs` where `M` has off-diagonal entries `off[(i, j)] <= 0`
/// (its diagonal is ignored) and column sums `col_sums[j] > 0`.
///
/// Returns `None` if a pivot is not positive and finite.
pub fn solve_column_sum_system(
    off: &DMatrix<f64>,
    col_sums: &[f64],
    rhs: &DVector<f64>,
) -> Option<DVector<f64>> {
    let n = off.nrows();
    debug_assert!(off.ncols() == n && col_sums.len() == n && rhs.len() == n);
    debug_assert!((0..n).all(|j| (0..n).all(|i| i == j || off[(i, j)] <= 0.0)));

    let mut a = off.clone();
    let mut s = col_sums.to_vec();
    let mut b = rhs.clone();

    for k in 0..n {
        // pivot = column sum minus the (nonpositive) entries below it
        let below: f64 = (k + 1..n).map(|i| a[(i, k)]).sum();
        let pivot = s[k] - below;
        if !(pivot > 0.0) || !pivot.is_finite() {
            return None;
        }
        a[(k, k)] = pivot;
        for j in k + 1..n {
            // updated column sums of the trailing block
            s[j] -= a[(k, j)] * s[k] / pivot;
        }
        for i in k + 1..n {
            let l = a[(i, k)] / pivot;
            if l == 0.0 {
                continue;
            }
            for j in (k + 1..n).filter(|&j| j != i) {
                a[(i, j)] -= l * a[(k, j)];
            }
            b[i] -= l * b[k];
        }
    }

    let mut x = DVector::zeros(n);
    for k in (0..n).rev() {
        let upper: f64 = (k + 1..n).map(|j| a[(k, j)] * x[j]).sum();
        x[k] = (b[k] - upper) / a[(k, k)];
    }
    Some(x)
}
