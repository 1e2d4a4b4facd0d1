//! Reference minimizer for `(1/n) Σ |⟨a_i,x⟩ − b_i| + (μ/2)‖x‖²`.
//!
//! Works on the dual box QP
//!   min_s ½ sᵀQs + cᵀs,  s ∈ [−1,1]ⁿ,  Q = AAᵀ/(n²μ), c = b/n
//! with primal recovery `x = −Aᵀs/(nμ)`. Small n is solved exactly by
//! enumerating active sets; larger n falls back to coordinate descent.
//! With μ = 0 a shrinking Tikhonov term is used; below some threshold the
//! regularized solution is exactly the minimum-norm minimizer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::pinv_solve;
use crate::scalar::Scalar;

const ENUMERATION_MAX_N: usize = 10;

pub(crate) fn minimize<S: Scalar>(rows: &[Vec<S>], targets: &[S], mu: f64) -> Result<Vec<f64>> {
    let n = rows.len();
    let d = rows[0].len();
    let a = DMatrix::<f64>::from_fn(n, d, |i, j| rows[i][j].as_f64());
    let b = DVector::<f64>::from_iterator(n, targets.iter().map(|v| v.as_f64()));
    if mu > 0.0 {
        return Ok(solve_regularized(&a, &b, mu)?.iter().copied().collect());
    }

    let mut prev: Option<DVector<f64>> = None;
    let mut reg = 1e-1;
    while reg >= 1e-13 {
        let x = solve_regularized(&a, &b, reg)?;
        if let Some(p) = &prev {
            if (&x - p).norm() <= 1e-12 * (1.0 + x.norm()) {
                return Ok(x.iter().copied().collect());
            }
        }
        prev = Some(x);
        reg *= 0.1;
    }
    let x = prev.expect("continuation ran at least once");
    Err(Error::NotConverged {
        iterations: 13,
        residual: x.norm(),
    })
}

fn solve_regularized(a: &DMatrix<f64>, b: &DVector<f64>, mu: f64) -> Result<DVector<f64>> {
    let n = a.nrows() as f64;
    let q = (a * a.transpose()) / (n * n * mu);
    let c = b / n;
    let s = if a.nrows() <= ENUMERATION_MAX_N {
        enumerate_box_qp(&q, &c)
    } else {
        coordinate_descent(&q, &c)?
    };
    Ok(-(a.transpose() * s) / (n * mu))
}

fn objective(q: &DMatrix<f64>, c: &DVector<f64>, s: &DVector<f64>) -> f64 {
    0.5 * s.dot(&(q * s)) + c.dot(s)
}

/// Exhaustive KKT enumeration: every coordinate is at −1, at +1 or free.
fn enumerate_box_qp(q: &DMatrix<f64>, c: &DVector<f64>) -> DVector<f64> {
    let n = c.len();
    let scale = 1.0 + q.amax() + c.amax();
    let tol = 1e-10 * scale;
    let mut best: Option<(f64, DVector<f64>)> = None;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut pattern = vec![0i8; n];
        let mut k = code;
        for p in pattern.iter_mut() {
            *p = (k % 3) as i8 - 1;
            k /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| pattern[i] == 0).collect();
        let mut s = DVector::<f64>::from_iterator(n, pattern.iter().map(|&p| p as f64));
        if !free.is_empty() {
            let m = DMatrix::from_fn(free.len(), free.len(), |r, cc| q[(free[r], free[cc])]);
            let rhs = DVector::from_iterator(
                free.len(),
                free.iter().map(|&i| -(c[i] + (0..n).filter(|j| pattern[*j] != 0).map(|j| q[(i, j)] * s[j]).sum::<f64>())),
            );
            let sol = pinv_solve(&m, &rhs);
            if (&m * &sol - &rhs).amax() > tol {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                s[i] = sol[r];
            }
            if free.iter().any(|&i| s[i].abs() > 1.0 + 1e-12) {
                continue;
            }
        }
        let g = q * &s + c;
        let kkt = (0..n).all(|i| match pattern[i] {
            -1 => g[i] >= -tol,
            1 => g[i] <= tol,
            _ => true,
        });
        if !kkt {
            continue;
        }
        let val = objective(q, c, &s);
        if best.as_ref().is_none_or(|(bv, _)| val < *bv) {
            best = Some((val, s));
        }
    }
    // A convex box QP always has a KKT point, so enumeration cannot miss.
    best.map(|(_, s)| s).unwrap_or_else(|| DVector::zeros(n))
}

fn coordinate_descent(q: &DMatrix<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
    let n = c.len();
    let mut s = DVector::<f64>::zeros(n);
    let mut g = c.clone();
    let mut change = f64::INFINITY;
    for _sweep in 0..1_000_000 {
        change = 0.0;
        for i in 0..n {
            if q[(i, i)] <= 0.0 {
                continue;
            }
            let target = (s[i] - g[i] / q[(i, i)]).clamp(-1.0, 1.0);
            let delta = target - s[i];
            if delta != 0.0 {
                s[i] = target;
                for j in 0..n {
                    g[j] += q[(j, i)] * delta;
                }
                change = change.max(delta.abs());
            }
        }
        if change <= 1e-15 {
            return Ok(s);
        }
    }
    Err(Error::NotConverged {
        iterations: 1_000_000,
        residual: change,
    })
}
