use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::nonsmooth::Regularizer;
use crate::problems::{FiniteSumProblem, Instance, Provenance};
use crate::scalar::Scalar;

const SOLVER_BUDGET: usize = 1_000_000;
const SOLVER_RESIDUAL: f64 = 1e-12;

/// `F = f + g` with its minimizer and composite gradient noise.
#[derive(Clone, Debug)]
pub struct CompositeProblem<S: Scalar> {
    pub smooth: Arc<FiniteSumProblem<S>>,
    pub reg: Regularizer<S>,
    pub x_star: Vec<S>,
    pub inf_cap_f: S,
    pub sigma_star_cap_f: S,
    pub provenance: Provenance,
    /// Fixed-point residual `‖x* − prox(x* − γ∇f(x*))‖` at `γ = 1/L`.
    pub residual: S,
    pub(crate) l: S,
}

impl<S: Scalar> CompositeProblem<S> {
    /// `F(x)`, returning `+∞` wherever `g` is infinite.
    pub fn value(&self, x: &[S]) -> S {
        let g = self.reg.value(x);
        if g.is_infinite() {
            return S::infinity();
        }
        self.smooth.value(x) + g
    }

    pub fn gap(&self, x: &[S]) -> S {
        self.value(x) - self.inf_cap_f
    }

    /// The smoothness constant used by the reference solver.
    pub fn l(&self) -> S {
        self.l
    }

    pub fn floor(&self) -> S {
        match self.provenance {
            Provenance::ClosedForm => S::zero(),
            Provenance::ReferenceSolver => S::lit(super::SOLVER_FLOOR),
        }
    }
}

/// Solves `min f + g` by proximal gradient with `γ = 1/L` until the
/// fixed-point residual drops to 1e-12.
pub fn build_composite<S: Scalar>(inst: &Instance<S>, reg: Regularizer<S>) -> Result<CompositeProblem<S>> {
    reg.validate()?;
    let smooth = inst.problem.clone();
    if !smooth.is_smooth() {
        return Err(invalid("composite problems need a differentiable smooth part"));
    }
    let l = inst.constants.l()?;
    if reg.is_zero() {
        return Ok(CompositeProblem {
            smooth: smooth.clone(),
            reg,
            x_star: inst.truth.x_star.clone(),
            inf_cap_f: inst.truth.inf_f,
            sigma_star_cap_f: smooth.gradient_variance(&inst.truth.x_star),
            provenance: inst.truth.provenance,
            residual: S::zero(),
            l,
        });
    }
    if !(l > S::zero()) {
        return Err(invalid("reference solver needs L > 0"));
    }
    let gamma = S::one() / l;
    let mut x = inst.truth.x_star.clone();
    reg.prox_in_place(gamma, &mut x);
    let mut grad = vec![S::zero(); x.len()];
    let mut next = x.clone();
    let mut residual = S::infinity();
    for _ in 0..SOLVER_BUDGET {
        smooth.grad_into(&x, &mut grad);
        next.copy_from_slice(&x);
        linalg::axpy(-gamma, &grad, &mut next);
        reg.prox_in_place(gamma, &mut next);
        residual = linalg::dist_sq(&next, &x).sqrt();
        std::mem::swap(&mut x, &mut next);
        if residual <= S::lit(SOLVER_RESIDUAL) {
            break;
        }
    }
    if !(residual <= S::lit(SOLVER_RESIDUAL)) {
        return Err(Error::NotConverged {
            iterations: SOLVER_BUDGET,
            residual: residual.as_f64(),
        });
    }
    let residual = fixed_point_residual(&smooth, &reg, gamma, &x);
    let inf_cap_f = smooth.value(&x) + reg.value(&x);
    Ok(CompositeProblem {
        smooth: smooth.clone(),
        reg,
        sigma_star_cap_f: smooth.gradient_variance(&x),
        x_star: x,
        inf_cap_f,
        provenance: Provenance::ReferenceSolver,
        residual,
        l,
    })
}

pub(crate) fn fixed_point_residual<S: Scalar>(
    f: &FiniteSumProblem<S>,
    reg: &Regularizer<S>,
    gamma: S,
    x: &[S],
) -> S {
    let mut y = x.to_vec();
    linalg::axpy(-gamma, &f.grad(x), &mut y);
    reg.prox_in_place(gamma, &mut y);
    linalg::dist_sq(&y, x).sqrt()
}

/// `σ*_F = (1/n) Σ ‖∇f_i(x*_F) − ∇f(x*_F)‖²`, refusing if the stored
/// minimizer is not a certified fixed point.
pub fn composite_noise<S: Scalar>(cp: &CompositeProblem<S>) -> Result<S> {
    let residual = fixed_point_residual(&cp.smooth, &cp.reg, S::one() / cp.l, &cp.x_star);
    if residual > S::lit(1e-8) {
        return Err(Error::NotConverged {
            iterations: 0,
            residual: residual.as_f64(),
        });
    }
    Ok(cp.smooth.gradient_variance(&cp.x_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::build_least_squares;

    fn ls_4x2() -> Instance<f64> {
        build_least_squares(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, -1.0]],
            vec![1.0, 1.0, 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn lasso_closed_form() {
        let cp = build_composite(&ls_4x2(), Regularizer::L1 { lambda: 0.1 }).unwrap();
        assert!((cp.x_star[0] - 0.2).abs() < 1e-12 && (cp.x_star[1] - 0.2).abs() < 1e-12);
        assert!((cp.inf_cap_f - 0.22).abs() < 1e-12);
        assert!((cp.sigma_star_cap_f - 0.38).abs() < 1e-12);
        assert!((composite_noise(&cp).unwrap() - 0.38).abs() < 1e-12);
    }

    #[test]
    fn zero_regularizer_reduces_to_plain_sum() {
        let inst = ls_4x2();
        let cp = build_composite(&inst, Regularizer::Zero).unwrap();
        assert_eq!(cp.sigma_star_cap_f, inst.constants.sigma_star_f.unwrap());
    }

    #[test]
    fn interpolating_ls_in_ball_has_no_noise() {
        let inst = build_least_squares(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![1.0f64, 2.0, 3.0],
        )
        .unwrap();
        let cp = build_composite(&inst, Regularizer::BallIndicator { radius: 5.0 }).unwrap();
        assert!(cp.sigma_star_cap_f.abs() < 1e-20);
    }

    #[test]
    fn unconverged_point_is_refused() {
        let mut cp = build_composite(&ls_4x2(), Regularizer::L1 { lambda: 0.1 }).unwrap();
        cp.x_star = vec![1.0, 1.0];
        assert!(matches!(composite_noise(&cp), Err(Error::NotConverged { .. })));
    }
}
