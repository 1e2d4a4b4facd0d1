//! Dense vector helpers on `&[S]` plus the one symmetric eigen-solve the
//! least-squares builder needs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::scalar::Scalar;

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm_sq<S: Scalar>(a: &[S]) -> S {
    dot(a, a)
}

#[inline]
pub fn norm<S: Scalar>(a: &[S]) -> S {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist_sq<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// `y += alpha * x`
#[inline]
pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scaled<S: Scalar>(alpha: S, a: &[S]) -> Vec<S> {
    a.iter().map(|&x| alpha * x).collect()
}

pub fn all_finite<S: Scalar>(a: &[S]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Eigen-decomposition of `(1/n) * AᵀA` for the row-major matrix `rows`.
///
/// Returned eigenvalues are ascending; columns of the second value are the
/// matching unit eigenvectors. Always computed in `f64`.
pub fn gram_eigen<S: Scalar>(rows: &[Vec<S>], d: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = rows.len();
    let a = DMatrix::<f64>::from_fn(n, d, |i, j| rows[i][j].as_f64());
    let gram = (a.transpose() * &a) / n as f64;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Minimum-norm solution of the normal equations `(1/n)AᵀA x = (1/n)Aᵀy`,
/// dropping eigenvalues at or below `cutoff`.
pub fn min_norm_normal_solve<S: Scalar>(
    rows: &[Vec<S>],
    targets: &[S],
    d: usize,
    values: &[f64],
    vectors: &DMatrix<f64>,
    cutoff: f64,
) -> Vec<S> {
    let n = rows.len() as f64;
    let mut rhs = DVector::<f64>::zeros(d);
    for (row, &y) in rows.iter().zip(targets) {
        for j in 0..d {
            rhs[j] += row[j].as_f64() * y.as_f64() / n;
        }
    }
    let mut x = DVector::<f64>::zeros(d);
    for (k, &lam) in values.iter().enumerate() {
        if lam > cutoff {
            let v = vectors.column(k);
            let coef = v.dot(&rhs) / lam;
            x += v * coef;
        }
    }
    x.iter().map(|&v| S::lit(v)).collect()
}

/// Solves a small dense symmetric system in `f64` by eigen pseudo-inverse.
pub(crate) fn pinv_solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let dim = m.nrows();
    if dim == 0 {
        return DVector::zeros(0);
    }
    let eig = SymmetricEigen::new(m.clone());
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let mut x = DVector::zeros(dim);
    for k in 0..dim {
        let lam = eig.eigenvalues[k];
        if lam.abs() > 1e-13 * top.max(f64::MIN_POSITIVE) {
            let v = eig.eigenvectors.column(k);
            x += v * (v.dot(rhs) / lam);
        }
    }
    x
}
