//! Small dense matrix helpers on top of `nalgebra::DMatrix`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Operator 2-norm (largest singular value).
pub fn op_norm(a: &Matrix) -> f64 {
    match a.shape() {
        (1, 1) => a[(0, 0)].abs(),
        (2, 2) => {
            // σ_max = (|z₁| + |z₂|)/2 with z₁ = (p+s, r−q), z₂ = (p−s, q+r); no cancellation
            let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
            0.5 * ((p + s).hypot(r - q) + (p - s).hypot(q + r))
        }
        _ => a.clone().singular_values().max(),
    }
}

pub fn det(a: &Matrix) -> f64 {
    match a.shape() {
        (1, 1) => a[(0, 0)],
        (2, 2) => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        _ => a.clone().lu().determinant(),
    }
}

/// Matrix inverse: adjugate for 2×2, LU otherwise. Fails when |det| < 1e-9.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let d = det(a);
    if !d.is_finite() || d.abs() < 1e-9 {
        return Err(Error::Singular(d));
    }
    if a.shape() == (2, 2) {
        return Ok(Matrix::from_row_slice(
            2,
            2,
            &[a[(1, 1)] / d, -a[(0, 1)] / d, -a[(1, 0)] / d, a[(0, 0)] / d],
        ));
    }
    a.clone().lu().try_inverse().ok_or(Error::Singular(d))
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn all_finite(a: &Matrix) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Matrix exponential (nalgebra's Padé scaling and squaring) with input checks.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::InvalidParameter("expm needs a square matrix".into()));
    }
    if !all_finite(a) {
        return Err(Error::NonFinite("expm argument".into()));
    }
    let e = a.exp();
    if !all_finite(&e) {
        return Err(Error::NonFinite("expm result".into()));
    }
    Ok(e)
}

/// Modified Gram-Schmidt QR of a square matrix with positive diagonal.
/// Returns the orthonormal factor and the diagonal of the triangular one.
pub fn qr_positive(a: &Matrix) -> (Matrix, Vec<f64>) {
    let n = a.ncols();
    let mut q = a.clone();
    let mut diag = vec![0.0; n];
    for j in 0..n {
        for i in 0..j {
            let r = q.column(i).dot(&q.column(j));
            let qi = q.column(i).clone_owned();
            q.column_mut(j).axpy(-r, &qi, 1.0);
        }
        let norm = q.column(j).norm();
        diag[j] = norm;
        if norm > 0.0 {
            q.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    (q, diag)
}
