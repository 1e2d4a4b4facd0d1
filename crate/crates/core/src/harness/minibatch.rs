use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::FiniteSumProblem;
use crate::scalar::Scalar;

pub const MAX_SUBSETS: u128 = 1_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Exact mean and variance `E‖∇f_B(x) − E∇f_B(x)‖²` of the minibatch
/// gradient over all size-`b` subsets sampled without replacement.
pub fn enumerate_minibatch_oracle<S: Scalar>(problem: &FiniteSumProblem<S>, b: usize, x: &[S]) -> Result<(Vec<S>, S)> {
    let n = problem.n();
    if b == 0 || b > n {
        return Err(Error::OutOfRange {
            field: "b",
            value: b.to_string(),
            allowed: format!("1..={n}"),
        });
    }
    let count = binomial(n, b);
    if count > MAX_SUBSETS {
        return Err(Error::Combinatorial { count });
    }
    let d = problem.d();
    let mut grads = Vec::with_capacity(count as usize);
    let mut idx: Vec<usize> = (0..b).collect();
    loop {
        let mut g = vec![S::zero(); d];
        problem.batch_grad_into(&idx, x, &mut g);
        grads.push(g);
        // next combination in lexicographic order
        let Some(i) = (0..b).rev().find(|&i| idx[i] != i + n - b) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..b {
            idx[j] = idx[j - 1] + 1;
        }
    }
    let m = S::of(grads.len());
    let mut mean = vec![S::zero(); d];
    for g in &grads {
        linalg::axpy(S::one() / m, g, &mut mean);
    }
    let var = grads.iter().map(|g| linalg::dist_sq(g, &mean)).sum::<S>() / m;
    Ok((mean, var))
}
