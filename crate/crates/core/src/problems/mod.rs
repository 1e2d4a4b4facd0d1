//! Finite-sum test problems `f = (1/n) Σ f_i`, their minimizers and the
//! constants the convergence bounds consume.

mod abs_solver;
pub mod composite;
pub mod fixtures;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, dot};
use crate::scalar::Scalar;

pub use composite::{build_composite, composite_noise, CompositeProblem};
pub use fixtures::{fixture, Fixture, FIXTURE_NAMES};

/// Cutoff used to decide whether an eigenvalue of `(1/n)ΦᵀΦ` is zero.
pub const EIGEN_CUTOFF: f64 = 1e-10;

/// Absolute tolerance floor applied wherever ground truth came from an
/// iterative solver.
pub const SOLVER_FLOOR: f64 = 1e-6;

/// User-supplied per-term oracle for [`ProblemKind::Custom`].
pub trait TermOracle<S: Scalar>: Send + Sync {
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn value_i(&self, i: usize, x: &[S]) -> S;
    /// `out += scale * ∇f_i(x)`
    fn add_grad_i(&self, i: usize, x: &[S], scale: S, out: &mut [S]);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    LeastSquares,
    AbsLoss,
    ScalarPl,
    Custom,
}

#[derive(Clone)]
pub enum ProblemData<S: Scalar> {
    LeastSquares {
        features: Vec<Vec<S>>,
        targets: Vec<S>,
    },
    AbsLoss {
        rows: Vec<Vec<S>>,
        targets: Vec<S>,
        strong_mu: S,
    },
    ScalarPl,
    Custom(Arc<dyn TermOracle<S>>),
}

#[derive(Clone)]
pub struct FiniteSumProblem<S: Scalar> {
    n: usize,
    d: usize,
    data: ProblemData<S>,
}

impl<S: Scalar> fmt::Debug for FiniteSumProblem<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteSumProblem")
            .field("kind", &self.kind())
            .field("n", &self.n)
            .field("d", &self.d)
            .finish()
    }
}

impl<S: Scalar> FiniteSumProblem<S> {
    pub fn custom(oracle: Arc<dyn TermOracle<S>>) -> Result<Self> {
        let (n, d) = (oracle.n(), oracle.d());
        if n == 0 || d == 0 {
            return Err(invalid("custom oracle needs n >= 1 and d >= 1"));
        }
        Ok(Self {
            n,
            d,
            data: ProblemData::Custom(oracle),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &ProblemData<S> {
        &self.data
    }

    pub fn kind(&self) -> ProblemKind {
        match self.data {
            ProblemData::LeastSquares { .. } => ProblemKind::LeastSquares,
            ProblemData::AbsLoss { .. } => ProblemKind::AbsLoss,
            ProblemData::ScalarPl => ProblemKind::ScalarPl,
            ProblemData::Custom(_) => ProblemKind::Custom,
        }
    }

    /// Whether every `f_i` is differentiable (the abs loss is not).
    pub fn is_smooth(&self) -> bool {
        !matches!(self.data, ProblemData::AbsLoss { .. })
    }

    /// Whether the problem is known to be convex.
    pub fn is_convex(&self) -> bool {
        matches!(
            self.data,
            ProblemData::LeastSquares { .. } | ProblemData::AbsLoss { .. }
        )
    }

    pub fn value_i(&self, i: usize, x: &[S]) -> S {
        match &self.data {
            ProblemData::LeastSquares { features, targets } => {
                let r = dot(&features[i], x) - targets[i];
                S::lit(0.5) * r * r
            }
            ProblemData::AbsLoss {
                rows,
                targets,
                strong_mu,
            } => {
                let r = dot(&rows[i], x) - targets[i];
                r.abs() + S::lit(0.5) * *strong_mu * linalg::norm_sq(x)
            }
            ProblemData::ScalarPl => {
                let s = x[0].sin();
                x[0] * x[0] + S::lit(3.0) * s * s
            }
            ProblemData::Custom(o) => o.value_i(i, x),
        }
    }

    /// `out += scale * ∇f_i(x)`; for the abs loss this is the subgradient
    /// selection with `sign(0) = 0`.
    pub fn add_grad_i(&self, i: usize, x: &[S], scale: S, out: &mut [S]) {
        match &self.data {
            ProblemData::LeastSquares { features, targets } => {
                let r = dot(&features[i], x) - targets[i];
                linalg::axpy(scale * r, &features[i], out);
            }
            ProblemData::AbsLoss {
                rows,
                targets,
                strong_mu,
            } => {
                let r = dot(&rows[i], x) - targets[i];
                let s = if r > S::zero() {
                    S::one()
                } else if r < S::zero() {
                    -S::one()
                } else {
                    S::zero()
                };
                if s != S::zero() {
                    linalg::axpy(scale * s, &rows[i], out);
                }
                if *strong_mu != S::zero() {
                    linalg::axpy(scale * *strong_mu, x, out);
                }
            }
            ProblemData::ScalarPl => {
                let t = x[0];
                out[0] = out[0] + scale * (S::lit(2.0) * t + S::lit(3.0) * (S::lit(2.0) * t).sin());
            }
            ProblemData::Custom(o) => o.add_grad_i(i, x, scale, out),
        }
    }

    pub fn grad_i(&self, i: usize, x: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.d];
        self.add_grad_i(i, x, S::one(), &mut out);
        out
    }

    pub fn value(&self, x: &[S]) -> S {
        let total: S = (0..self.n).map(|i| self.value_i(i, x)).sum();
        total / S::of(self.n)
    }

    pub fn grad_into(&self, x: &[S], out: &mut [S]) {
        out.iter_mut().for_each(|v| *v = S::zero());
        let w = S::one() / S::of(self.n);
        for i in 0..self.n {
            self.add_grad_i(i, x, w, out);
        }
    }

    pub fn grad(&self, x: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.d];
        self.grad_into(x, &mut out);
        out
    }

    /// Gradient of the minibatch average `(1/|B|) Σ_{i∈B} ∇f_i(x)`.
    pub fn batch_grad_into(&self, batch: &[usize], x: &[S], out: &mut [S]) {
        out.iter_mut().for_each(|v| *v = S::zero());
        let w = S::one() / S::of(batch.len());
        for &i in batch {
            self.add_grad_i(i, x, w, out);
        }
    }

    /// `(1/n) Σ ‖∇f_i(x) − ∇f(x)‖²`
    pub fn gradient_variance(&self, x: &[S]) -> S {
        let mean = self.grad(x);
        let total: S = (0..self.n)
            .map(|i| linalg::dist_sq(&self.grad_i(i, x), &mean))
            .sum();
        total / S::of(self.n)
    }

    /// `(1/n) Σ ‖∇f_i(x)‖²`
    pub fn gradient_second_moment(&self, x: &[S]) -> S {
        let total: S = (0..self.n).map(|i| linalg::norm_sq(&self.grad_i(i, x))).sum();
        total / S::of(self.n)
    }

    /// Bregman divergence `D_f(y; x) = f(y) − f(x) − ⟨∇f(x), y − x⟩`.
    pub fn bregman(&self, y: &[S], x: &[S]) -> S {
        let g = self.grad(x);
        self.value(y) - self.value(x) - dot(&g, &linalg::sub(y, x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    ReferenceSolver,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth<S: Scalar> {
    pub x_star: Vec<S>,
    pub inf_f: S,
    pub inf_f_i: Vec<S>,
    pub provenance: Provenance,
}

impl<S: Scalar> GroundTruth<S> {
    /// Absolute slack owed to solver-derived ground truth.
    pub fn floor(&self) -> S {
        match self.provenance {
            Provenance::ClosedForm => S::zero(),
            Provenance::ReferenceSolver => S::lit(SOLVER_FLOOR),
        }
    }
}

/// Problem constants. Anything a builder cannot certify is left `None`
/// and consumers ask for it by name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants<S: Scalar> {
    pub n: usize,
    #[serde(rename = "L", default)]
    pub l: Option<S>,
    #[serde(rename = "L_i", default)]
    pub l_i: Option<Vec<S>>,
    #[serde(rename = "L_max", default)]
    pub l_max: Option<S>,
    #[serde(rename = "L_avg", default)]
    pub l_avg: Option<S>,
    #[serde(default)]
    pub mu: Option<S>,
    #[serde(default)]
    pub mu_pl: Option<S>,
    #[serde(default)]
    pub sigma_star_f: Option<S>,
    #[serde(default)]
    pub delta_star_f: Option<S>,
    #[serde(rename = "G", default)]
    pub g: Option<S>,
    #[serde(rename = "B", default)]
    pub b: Option<S>,
    #[serde(rename = "sigma_star_F", default)]
    pub sigma_star_cap_f: Option<S>,
}

fn need<S: Copy>(v: Option<S>, name: &'static str) -> Result<S> {
    v.ok_or(Error::MissingConstant(name))
}

impl<S: Scalar> ProblemConstants<S> {
    pub fn l(&self) -> Result<S> {
        need(self.l, "L")
    }
    pub fn l_max(&self) -> Result<S> {
        need(self.l_max, "L_max")
    }
    pub fn mu(&self) -> Result<S> {
        need(self.mu, "mu")
    }
    pub fn mu_pl(&self) -> Result<S> {
        need(self.mu_pl, "mu_pl")
    }
    pub fn sigma_star_f(&self) -> Result<S> {
        need(self.sigma_star_f, "sigma_star_f")
    }
    pub fn delta_star_f(&self) -> Result<S> {
        need(self.delta_star_f, "delta_star_f")
    }
    pub fn g(&self) -> Result<S> {
        need(self.g, "G")
    }
    pub fn b(&self) -> Result<S> {
        need(self.b, "B")
    }
    pub fn sigma_star_cap_f(&self) -> Result<S> {
        need(self.sigma_star_cap_f, "sigma_star_F")
    }
}

/// A built problem together with its ground truth and constants.
#[derive(Clone, Debug)]
pub struct Instance<S: Scalar> {
    pub problem: Arc<FiniteSumProblem<S>>,
    pub truth: GroundTruth<S>,
    pub constants: ProblemConstants<S>,
}

fn check_matrix<S: Scalar>(rows: &[Vec<S>], targets: &[S]) -> Result<(usize, usize)> {
    let n = rows.len();
    if n == 0 {
        return Err(invalid("n = 0: at least one row is required"));
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(invalid("d = 0: rows must be nonempty"));
    }
    if rows.iter().any(|r| r.len() != d) {
        return Err(invalid("rows have inconsistent lengths"));
    }
    if targets.len() != n {
        return Err(invalid(format!(
            "{} targets for {} rows",
            targets.len(),
            n
        )));
    }
    if !rows.iter().all(|r| linalg::all_finite(r)) || !linalg::all_finite(targets) {
        return Err(invalid("non-finite entry in problem data"));
    }
    Ok((n, d))
}

/// `f_i(x) = ½(⟨φ_i, x⟩ − y_i)²`, everything exact from one eigen-solve.
pub fn build_least_squares<S: Scalar>(features: Vec<Vec<S>>, targets: Vec<S>) -> Result<Instance<S>> {
    let (n, d) = check_matrix(&features, &targets)?;
    let (values, vectors) = linalg::gram_eigen(&features, d);
    let top = values[d - 1].max(0.0);
    let cutoff = EIGEN_CUTOFF * top;
    let positive: Vec<f64> = values.iter().copied().filter(|&v| v > cutoff).collect();
    let mu = if positive.len() == d { values[0] } else { 0.0 };
    let mu_pl = positive.first().copied().unwrap_or(0.0);

    let x_star = linalg::min_norm_normal_solve(&features, &targets, d, &values, &vectors, cutoff);
    let problem = FiniteSumProblem {
        n,
        d,
        data: ProblemData::LeastSquares {
            features: features.clone(),
            targets,
        },
    };
    let inf_f = problem.value(&x_star);
    let sigma = problem.gradient_variance(&x_star);

    let l_i: Vec<S> = features.iter().map(|r| linalg::norm_sq(r)).collect();
    let l_max = l_i.iter().copied().fold(S::zero(), S::max);
    let l_avg = l_i.iter().copied().sum::<S>() / S::of(n);

    Ok(Instance {
        problem: Arc::new(problem),
        truth: GroundTruth {
            x_star,
            inf_f,
            inf_f_i: vec![S::zero(); n],
            provenance: Provenance::ClosedForm,
        },
        constants: ProblemConstants {
            n,
            l: Some(S::lit(top)),
            l_i: Some(l_i),
            l_max: Some(l_max),
            l_avg: Some(l_avg),
            mu: Some(S::lit(mu)),
            mu_pl: Some(S::lit(mu_pl)),
            sigma_star_f: Some(sigma),
            delta_star_f: Some(inf_f),
            g: None,
            b: None,
            sigma_star_cap_f: None,
        },
    })
}

/// `f(t) = t² + 3 sin²(t)`: PŁ with modulus 1/40, 8-smooth, not convex.
pub fn build_scalar_pl<S: Scalar>() -> Instance<S> {
    let problem = FiniteSumProblem {
        n: 1,
        d: 1,
        data: ProblemData::ScalarPl,
    };
    let eight = S::lit(8.0);
    Instance {
        problem: Arc::new(problem),
        truth: GroundTruth {
            x_star: vec![S::zero()],
            inf_f: S::zero(),
            inf_f_i: vec![S::zero()],
            provenance: Provenance::ClosedForm,
        },
        constants: ProblemConstants {
            n: 1,
            l: Some(eight),
            l_i: Some(vec![eight]),
            l_max: Some(eight),
            l_avg: Some(eight),
            mu: Some(S::zero()),
            mu_pl: Some(S::lit(1.0 / 40.0)),
            sigma_star_f: Some(S::zero()),
            delta_star_f: Some(S::zero()),
            g: None,
            b: None,
            sigma_star_cap_f: None,
        },
    }
}

/// `f_i(x) = |⟨a_i, x⟩ − b_i| + (μ/2)‖x‖²` restricted to the ball of radius
/// `ball_b` for the subgradient bound.
pub fn build_abs_loss<S: Scalar>(
    rows: Vec<Vec<S>>,
    targets: Vec<S>,
    strong_mu: S,
    ball_b: S,
) -> Result<Instance<S>> {
    let (n, d) = check_matrix(&rows, &targets)?;
    if !(strong_mu >= S::zero()) || !strong_mu.is_finite() {
        return Err(Error::OutOfRange {
            field: "strong_mu",
            value: strong_mu.to_string(),
            allowed: ">= 0".into(),
        });
    }
    if !(ball_b > S::zero()) || !ball_b.is_finite() {
        return Err(Error::OutOfRange {
            field: "ball_B",
            value: ball_b.to_string(),
            allowed: "> 0".into(),
        });
    }
    let x64 = abs_solver::minimize(&rows, &targets, strong_mu.as_f64())?;
    let x_star: Vec<S> = x64.iter().map(|&v| S::lit(v)).collect();
    let norm = linalg::norm(&x_star);
    if norm > ball_b {
        return Err(Error::BallTooSmall {
            norm: norm.as_f64(),
            radius: ball_b.as_f64(),
        });
    }

    let inf_f_i: Vec<S> = rows
        .iter()
        .zip(&targets)
        .map(|(a, &b)| abs_term_infimum(a, b, strong_mu))
        .collect();
    let problem = FiniteSumProblem {
        n,
        d,
        data: ProblemData::AbsLoss {
            rows: rows.clone(),
            targets,
            strong_mu,
        },
    };
    let inf_f = problem.value(&x_star);
    let mean_inf_i = inf_f_i.iter().copied().sum::<S>() / S::of(n);
    let max_a = rows
        .iter()
        .map(|r| linalg::norm(r))
        .fold(S::zero(), S::max);

    Ok(Instance {
        problem: Arc::new(problem),
        truth: GroundTruth {
            x_star,
            inf_f,
            inf_f_i,
            provenance: Provenance::ReferenceSolver,
        },
        constants: ProblemConstants {
            n,
            mu: Some(strong_mu),
            delta_star_f: Some((inf_f - mean_inf_i).max(S::zero())),
            g: Some(max_a + strong_mu * ball_b),
            b: Some(ball_b),
            ..Default::default()
        },
    })
}

/// Closed-form `inf_x |⟨a,x⟩ − b| + (μ/2)‖x‖²`. The minimizer lies on the
/// line through `a`, which reduces this to a 1-d problem in `s = ⟨a,x⟩`.
fn abs_term_infimum<S: Scalar>(a: &[S], b: S, mu: S) -> S {
    let a2 = linalg::norm_sq(a);
    if mu == S::zero() {
        return if a2 > S::zero() { S::zero() } else { b.abs() };
    }
    if a2 == S::zero() {
        return b.abs();
    }
    if b.abs() <= a2 / mu {
        S::lit(0.5) * mu * b * b / a2
    } else {
        b.abs() - a2 / (S::lit(2.0) * mu)
    }
}

/// Builds an [`Instance`] around a custom oracle whose ground truth and
/// constants the caller certifies.
pub fn build_custom<S: Scalar>(
    oracle: Arc<dyn TermOracle<S>>,
    truth: GroundTruth<S>,
    constants: ProblemConstants<S>,
) -> Result<Instance<S>> {
    let problem = FiniteSumProblem::custom(oracle)?;
    if truth.x_star.len() != problem.d() || truth.inf_f_i.len() != problem.n() {
        return Err(invalid("ground truth does not match oracle dimensions"));
    }
    Ok(Instance {
        problem: Arc::new(problem),
        truth,
        constants,
    })
}

/// Smoothness and gradient noise seen by size-`b` minibatches sampled
/// without replacement.
pub fn minibatch_constants<S: Scalar>(constants: &ProblemConstants<S>, b: usize) -> Result<(S, S)> {
    let n = constants.n;
    if b == 0 || b > n {
        return Err(Error::OutOfRange {
            field: "b",
            value: b.to_string(),
            allowed: format!("1..={n}"),
        });
    }
    let l = constants.l()?;
    let l_max = constants.l_max()?;
    let sigma = constants.sigma_star_f()?;
    if n == 1 {
        return Ok((l, S::zero()));
    }
    let (nf, bf) = (S::of(n), S::of(b));
    let denom = bf * (nf - S::one());
    let l_b = nf * (bf - S::one()) / denom * l + (nf - bf) / denom * l_max;
    let sigma_b = (nf - bf) / denom * sigma;
    Ok((l_b, sigma_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ls_4x2() -> Instance<f64> {
        build_least_squares(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, -1.0]],
            vec![1.0, 1.0, 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn ls_4x2_frozen_values() {
        let inst = ls_4x2();
        let c = &inst.constants;
        assert_relative_eq!(inst.truth.x_star[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(inst.truth.x_star[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(inst.truth.inf_f, 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(c.sigma_star_f.unwrap(), 4.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(c.delta_star_f.unwrap(), 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(c.l.unwrap(), 0.75, epsilon = 1e-15);
        assert_relative_eq!(c.mu.unwrap(), 0.75, epsilon = 1e-15);
        assert_eq!(c.l_max, Some(2.0));
        assert_eq!(c.l_avg, Some(1.5));
    }

    #[test]
    fn identity_with_zero_targets_is_trivial() {
        let eye = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let inst = build_least_squares::<f64>(eye, vec![0.0; 3]).unwrap();
        assert!(inst.truth.x_star.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(inst.truth.inf_f, 0.0);
        assert_eq!(inst.constants.sigma_star_f, Some(0.0));
        assert_eq!(inst.constants.delta_star_f, Some(0.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(build_least_squares::<f64>(vec![], vec![]).is_err());
        assert!(build_least_squares(vec![vec![]], vec![1.0]).is_err());
        assert!(build_least_squares(vec![vec![f64::NAN]], vec![1.0]).is_err());
    }

    #[test]
    fn rank_deficient_uses_smallest_nonzero_eigenvalue() {
        let inst = build_least_squares(
            vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![1.0, 0.0],
        )
        .unwrap();
        let c = &inst.constants;
        assert_eq!(c.mu, Some(0.0));
        assert_relative_eq!(c.mu_pl.unwrap(), c.l.unwrap(), epsilon = 1e-14);
        // min-norm minimizer sits on the row space direction (1,1)
        assert_relative_eq!(inst.truth.x_star[0], inst.truth.x_star[1], epsilon = 1e-15);
    }

    #[test]
    fn scalar_pl_basics() {
        let inst = build_scalar_pl::<f64>();
        assert_eq!(inst.problem.value(&[0.0]), 0.0);
        assert_eq!(inst.problem.grad(&[0.0]), vec![0.0]);
        assert_eq!(inst.constants.l, Some(8.0));
    }

    #[test]
    fn abs_examples() {
        let one = build_abs_loss::<f64>(vec![vec![1.0]], vec![0.0], 0.0, 1.0).unwrap();
        assert!(one.truth.x_star[0].abs() < 1e-12);
        assert!(one.truth.inf_f.abs() < 1e-12);
        assert_eq!(one.constants.g, Some(1.0));

        let two = build_abs_loss::<f64>(vec![vec![1.0], vec![1.0]], vec![1.0, -1.0], 0.0, 2.0).unwrap();
        assert!(two.truth.x_star[0].abs() < 1e-12);
        assert_relative_eq!(two.truth.inf_f, 1.0, epsilon = 1e-12);

        let strong = build_abs_loss(vec![vec![1.0, 0.0]], vec![0.3], 0.5, 2.0).unwrap();
        assert_eq!(strong.constants.g, Some(2.0));
    }

    #[test]
    fn abs_ball_too_small() {
        let err = build_abs_loss(vec![vec![1.0]], vec![5.0], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::BallTooSmall { .. }));
    }

    #[test]
    fn abs_term_infimum_matches_scan() {
        let a = [1.0, 2.0];
        for &(b, mu) in &[(0.5, 1.0), (10.0, 1.0), (-10.0, 0.3), (0.0, 2.0)] {
            let closed = abs_term_infimum(&a, b, mu);
            // minimizer lies on the line s·a/|a|²
            let mut best = f64::INFINITY;
            for k in -200_000..=200_000 {
                let s = k as f64 * 1e-4;
                let x = [s * a[0] / 5.0, s * a[1] / 5.0];
                let v = (a[0] * x[0] + a[1] * x[1] - b).abs() + 0.5 * mu * (x[0] * x[0] + x[1] * x[1]);
                best = best.min(v);
            }
            assert!((closed - best).abs() < 1e-6, "b={b} mu={mu}: {closed} vs {best}");
        }
    }

    #[test]
    fn minibatch_endpoints_and_example() {
        let c = ProblemConstants {
            n: 6,
            l: Some(1.0),
            l_max: Some(4.0),
            sigma_star_f: Some(10.0),
            ..Default::default()
        };
        let (lb, sb) = minibatch_constants(&c, 2).unwrap();
        assert_relative_eq!(lb, 2.2, epsilon = 1e-15);
        assert_relative_eq!(sb, 4.0, epsilon = 1e-15);
        assert_eq!(minibatch_constants(&c, 1).unwrap(), (4.0, 10.0));
        assert_eq!(minibatch_constants(&c, 6).unwrap(), (1.0, 0.0));
        let err = minibatch_constants(&c, 7).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { field: "b", .. }));
        assert!(minibatch_constants(&c, 0).is_err());
    }
}
