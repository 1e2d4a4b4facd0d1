//! Convex regularizers with closed-form proximal maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer<S: Scalar> {
    Zero,
    L1 { lambda: S },
    BallIndicator {
        #[serde(rename = "B")]
        radius: S,
    },
}

impl<S: Scalar> Regularizer<S> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Regularizer::Zero => Ok(()),
            Regularizer::L1 { lambda } if lambda >= S::zero() && lambda.is_finite() => Ok(()),
            Regularizer::L1 { lambda } => Err(Error::OutOfRange {
                field: "lambda",
                value: lambda.to_string(),
                allowed: ">= 0".into(),
            }),
            Regularizer::BallIndicator { radius } if radius > S::zero() && radius.is_finite() => Ok(()),
            Regularizer::BallIndicator { radius } => Err(Error::OutOfRange {
                field: "B",
                value: radius.to_string(),
                allowed: "> 0".into(),
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Regularizer::Zero)
            || matches!(self, Regularizer::L1 { lambda } if *lambda == S::zero())
    }

    /// `g(x)`, with `+∞` outside the ball for the indicator.
    pub fn value(&self, x: &[S]) -> S {
        match *self {
            Regularizer::Zero => S::zero(),
            Regularizer::L1 { lambda } => lambda * x.iter().map(|v| v.abs()).sum::<S>(),
            Regularizer::BallIndicator { radius } => {
                if linalg::norm(x) <= radius {
                    S::zero()
                } else {
                    S::infinity()
                }
            }
        }
    }

    pub fn in_domain(&self, x: &[S]) -> bool {
        self.value(x).is_finite()
    }

    pub fn prox(&self, gamma: S, x: &[S]) -> Result<Vec<S>> {
        if !(gamma > S::zero()) {
            return Err(Error::OutOfRange {
                field: "gamma",
                value: gamma.to_string(),
                allowed: "> 0".into(),
            });
        }
        let mut out = x.to_vec();
        self.prox_in_place(gamma, &mut out);
        Ok(out)
    }

    /// Unchecked prox for the algorithm loops; `gamma > 0` is the caller's job.
    pub fn prox_in_place(&self, gamma: S, x: &mut [S]) {
        match *self {
            Regularizer::Zero => {}
            Regularizer::L1 { lambda } => {
                let thr = gamma * lambda;
                for v in x.iter_mut() {
                    *v = v.signum() * (v.abs() - thr).max(S::zero());
                    if *v == S::zero() {
                        *v = S::zero();
                    }
                }
            }
            Regularizer::BallIndicator { radius } => project_ball_in_place(radius, x),
        }
    }

    /// One element of `∂g(x)`; the zero element is chosen at kinks and on
    /// the ball boundary.
    pub fn subgradient(&self, x: &[S]) -> Result<Vec<S>> {
        match *self {
            Regularizer::Zero => Ok(vec![S::zero(); x.len()]),
            Regularizer::L1 { lambda } => Ok(x
                .iter()
                .map(|&v| if v == S::zero() { S::zero() } else { lambda * v.signum() })
                .collect()),
            Regularizer::BallIndicator { radius } => {
                let norm = linalg::norm(x);
                if norm > radius {
                    Err(Error::OutsideDomain {
                        norm: norm.as_f64(),
                        radius: radius.as_f64(),
                    })
                } else {
                    Ok(vec![S::zero(); x.len()])
                }
            }
        }
    }

    /// Checks `(x − p)/γ ∈ ∂g(p)` and reports the largest violation.
    pub fn prox_certificate(&self, gamma: S, x: &[S], p: &[S]) -> ProxCertificate<S> {
        let residual = match *self {
            Regularizer::Zero => linalg::norm(&linalg::sub(x, p)) / gamma,
            Regularizer::L1 { lambda } => x
                .iter()
                .zip(p)
                .map(|(&xj, &pj)| {
                    let v = (xj - pj) / gamma;
                    if pj == S::zero() {
                        (v.abs() - lambda).max(S::zero())
                    } else {
                        (v - lambda * pj.signum()).abs()
                    }
                })
                .fold(S::zero(), S::max),
            Regularizer::BallIndicator { radius } => ball_normal_residual(radius, x, p),
        };
        let tol = S::lit(1e-9) * (S::one() + linalg::norm(x));
        ProxCertificate {
            x: x.to_vec(),
            p: p.to_vec(),
            gamma,
            residual,
            verdict: residual <= tol,
        }
    }
}

/// Violation of `x − p ∈ N_ball(p)`: feasibility of `p`, and when `p ≠ x`,
/// `p` on the sphere with `x − p` a nonnegative multiple of `p`.
fn ball_normal_residual<S: Scalar>(radius: S, x: &[S], p: &[S]) -> S {
    let pn = linalg::norm(p);
    let mut res = (pn - radius).max(S::zero());
    let diff = linalg::sub(x, p);
    if linalg::norm(&diff) > S::zero() {
        res = res.max((pn - radius).abs());
        if pn == S::zero() {
            return res.max(linalg::norm(&diff));
        }
        let c = (dot(&diff, p) / (pn * pn)).max(S::zero());
        let along = linalg::scaled(c, p);
        res = res.max(linalg::norm(&linalg::sub(&diff, &along)));
        res = res.max((-dot(&diff, p) / pn).max(S::zero()));
    }
    res
}

pub fn project_ball<S: Scalar>(radius: S, x: &[S]) -> Vec<S> {
    let mut out = x.to_vec();
    project_ball_in_place(radius, &mut out);
    out
}

pub fn project_ball_in_place<S: Scalar>(radius: S, x: &mut [S]) {
    let norm = linalg::norm(x);
    if norm > radius {
        let s = radius / norm;
        x.iter_mut().for_each(|v| *v = *v * s);
        // rounding can leave the result an ulp or two outside
        let shrink = S::one() - S::epsilon();
        while linalg::norm(x) > radius {
            x.iter_mut().for_each(|v| *v = *v * shrink);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxCertificate<S: Scalar> {
    pub x: Vec<S>,
    pub p: Vec<S>,
    pub gamma: S,
    pub residual: S,
    pub verdict: bool,
}
