use serde::{Deserialize, Serialize};

use crate::algorithms::StepSchedule;
use crate::error::{Error, Result};
use crate::problems::minibatch_constants;
use crate::scalar::Scalar;
use crate::theory::{Setting, TheoryInputs};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityAnswer<S: Scalar> {
    pub setting: Setting,
    pub epsilon: S,
    /// Accuracy the bound curve must reach: `ε`, or `ε` times the initial
    /// quantity for relative settings.
    pub target: S,
    pub recommended_gamma: Option<S>,
    /// Schedule to run with; carries the horizon for horizon-tuned steps.
    pub schedule: Option<StepSchedule<S>>,
    pub t_min: usize,
    pub formula: String,
}

/// Ceiling that forgives rounding noise of a few ulps, so `10·ln(e)` gives 10.
fn ceil_count<S: Scalar>(x: S) -> usize {
    let x = x.as_f64();
    if !(x > 0.0) {
        return 0;
    }
    let c = (x * (1.0 - 1e-12)).ceil();
    if c >= usize::MAX as f64 {
        usize::MAX
    } else {
        c as usize
    }
}

/// Iterations after which `α_k ≤ ρ^k α₀` guarantees `α_k ≤ ε α₀`.
pub fn itercomplex<S: Scalar>(rho: S, epsilon: S) -> Result<usize> {
    if !(rho >= S::zero() && rho < S::one()) {
        return Err(Error::OutOfRange {
            field: "rho",
            value: rho.to_string(),
            allowed: "[0, 1)".into(),
        });
    }
    check_relative(epsilon)?;
    Ok(ceil_count((S::one() / epsilon).ln() / (S::one() - rho)))
}

/// Step and iteration count making `(1−γμ)^t α₀ + Aγ ≤ ε` with `γ ≤ 1/C`.
/// Returns `(γ, t)`.
pub fn linear_plus_const<S: Scalar>(mu: S, a: S, c: S, alpha0: S, epsilon: S) -> Result<(S, usize)> {
    check_epsilon(epsilon)?;
    if !(mu > S::zero()) {
        return Err(Error::OutOfRange {
            field: "mu",
            value: mu.to_string(),
            allowed: "> 0".into(),
        });
    }
    if !(c > S::zero()) || a < S::zero() {
        return Err(Error::OutOfRange {
            field: "C",
            value: c.to_string(),
            allowed: "> 0 with A >= 0".into(),
        });
    }
    let two = S::lit(2.0);
    let gamma = if a > S::zero() {
        (epsilon / (two * a)).min(S::one() / c)
    } else {
        S::one() / c
    };
    let rate = (two * a / (epsilon * mu)).max(c / mu);
    let t = ceil_count(rate * (two * alpha0 / epsilon).ln());
    Ok((gamma, t))
}

fn check_epsilon<S: Scalar>(epsilon: S) -> Result<()> {
    if epsilon > S::zero() && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field: "epsilon",
            value: epsilon.to_string(),
            allowed: "> 0".into(),
        })
    }
}

fn check_relative<S: Scalar>(epsilon: S) -> Result<()> {
    if epsilon > S::zero() && epsilon <= S::one() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field: "epsilon",
            value: epsilon.to_string(),
            allowed: "(0, 1]".into(),
        })
    }
}

/// Iteration complexity from the corollary attached to `setting`.
/// Relative settings (`gd_strongly_convex`, `gd_pl`, `pgd_strongly_convex`)
/// read `ε` as a fraction of the initial distance or gap.
pub fn complexity_iterations<S: Scalar>(
    setting: Setting,
    inputs: &TheoryInputs<S>,
    epsilon: S,
) -> Result<ComplexityAnswer<S>> {
    use Setting::*;
    let c = &inputs.constants;
    let init = &inputs.init;
    let one = S::one();
    let two = S::lit(2.0);
    let four = S::lit(4.0);
    let answer = |target: S, gamma: Option<S>, schedule: Option<StepSchedule<S>>, t_min: usize, formula: &str| {
        ComplexityAnswer {
            setting,
            epsilon,
            target,
            recommended_gamma: gamma,
            schedule,
            t_min,
            formula: formula.to_string(),
        }
    };
    let constant = |gamma: S| Some(StepSchedule::Constant { gamma });
    let via_lemma = |mu: S, a: S, cc: S, alpha0: S, formula: &str| -> Result<ComplexityAnswer<S>> {
        let (gamma, t) = linear_plus_const(mu, a, cc, alpha0, epsilon)?;
        Ok(answer(epsilon, Some(gamma), constant(gamma), t, formula))
    };

    if setting.is_relative() {
        check_relative(epsilon)?;
    } else {
        check_epsilon(epsilon)?;
    }

    match setting {
        GdConvex | PgdConvex => {
            let l = c.l()?;
            let gamma = one / l;
            let t = ceil_count(l * init.d_sq / (two * epsilon)).max(1);
            Ok(answer(epsilon, Some(gamma), constant(gamma), t, "L·D²/(2ε)"))
        }
        GdStronglyConvex | PgdStronglyConvex => {
            let (l, mu) = (c.l()?, c.mu()?);
            let t = itercomplex(one - mu / l, epsilon)?;
            Ok(answer(epsilon * init.d_sq, Some(one / l), constant(one / l), t, "(L/μ)·ln(1/ε)"))
        }
        GdPl => {
            let (l, mu) = (c.l()?, c.mu_pl()?);
            let t = itercomplex(one - mu / l, epsilon)?;
            Ok(answer(epsilon * init.f0_gap, Some(one / l), constant(one / l), t, "(L/μ)·ln(1/ε)"))
        }
        SgdConvexConst | MiniConvexConst => {
            let (l, sigma, formula) = if setting == SgdConvexConst {
                (c.l_max()?, c.sigma_star_f()?, "(2L_max·D² + σ*_f/L_max)²/ε²")
            } else {
                let b = inputs.batch_size.ok_or(Error::MissingConstant("b"))?;
                let (l_b, s_b) = minibatch_constants(c, b)?;
                (l_b, s_b, "(2L_b·D² + σ*_b/L_b)²/ε²")
            };
            let root = (two * l * init.d_sq + sigma / l) / epsilon;
            let t = ceil_count(root * root).max(4);
            let scale = one / (two * l);
            let schedule = StepSchedule::HorizonConstant { scale, horizon: t };
            Ok(answer(epsilon, Some(schedule.gamma(0)), Some(schedule), t, formula))
        }
        SgdStronglyConvex => via_lemma(
            c.mu()?,
            two * c.sigma_star_f()? / c.mu()?,
            two * c.l_max()?,
            init.d_sq,
            "max{4σ*_f/(εμ²), 2L_max/μ}·ln(2D²/ε)",
        ),
        MiniStronglyConvex => {
            let b = inputs.batch_size.ok_or(Error::MissingConstant("b"))?;
            let (l_b, s_b) = minibatch_constants(c, b)?;
            let mu = c.mu()?;
            via_lemma(mu, two * s_b / mu, two * l_b, init.d_sq, "max{4σ*_b/(εμ²), 2L_b/μ}·ln(2D²/ε)")
        }
        SgdPl => {
            let mu = c.mu_pl()?;
            let ll = c.l()? * c.l_max()?;
            via_lemma(
                mu,
                ll * c.delta_star_f()? / mu,
                ll / mu,
                init.f0_gap,
                "max{2L·L_max·Δ*_f/(εμ²), L·L_max/μ²}·ln(2f₀/ε)",
            )
        }
        MomentumConvex => {
            let l = c.l_max()?;
            let sigma = c.sigma_star_f()?;
            let root = (four * l * init.d_sq + sigma / (two * l)) / epsilon;
            let t = ceil_count(root * root).saturating_sub(1);
            let eta = one / (four * l * S::of(t + 1).sqrt());
            Ok(answer(
                epsilon,
                Some(eta),
                Some(StepSchedule::MomentumPair { eta }),
                t,
                "(4L_max·D² + σ*_f/(2L_max))²/ε² − 1",
            ))
        }
        SsdConvexGeneral => {
            let g = c.g()?;
            let d = init.d_sq.sqrt();
            if !(g > S::zero()) {
                return Err(Error::OutOfRange {
                    field: "G",
                    value: g.to_string(),
                    allowed: "> 0".into(),
                });
            }
            let (gamma, t) = if d > S::zero() {
                let t = ceil_count(init.d_sq * g * g / (epsilon * epsilon)).max(1);
                (d / (g * S::of(t).sqrt()), t)
            } else {
                (epsilon / (g * g), 1)
            };
            Ok(answer(epsilon, Some(gamma), constant(gamma), t, "D²G²/ε²"))
        }
        SsdStronglyConvex => {
            let mu = c.mu()?;
            let g = c.g()?;
            let b = c.b()?;
            via_lemma(mu, g * g / mu, mu, four * b * b, "max{2G²/(εμ²), 1}·ln(8B²/ε)")
        }
        SpgdConvexConst => {
            let l = c.l_max()?;
            let sigma = c.sigma_star_cap_f()?;
            let f0 = inputs.cap_f0_gap()?;
            if !(epsilon <= sigma / l) {
                return Err(Error::Hypothesis {
                    setting: setting.name().into(),
                    constraint: format!(
                        "epsilon ≤ sigma_star_F/L_max (epsilon = {epsilon}, sigma_star_F/L_max = {})",
                        sigma / l
                    ),
                });
            }
            let gamma = epsilon / (S::lit(8.0) * sigma);
            let c0 = S::lit(16.0) * (init.d_sq + f0 / (four * l));
            let t = ceil_count(c0 * sigma / (epsilon * epsilon)).max(1);
            Ok(answer(epsilon, Some(gamma), constant(gamma), t, "16(D² + F₀/(4L_max))·σ*_F/ε²"))
        }
        SpgdStronglyConvex => {
            let mu = c.mu()?;
            via_lemma(
                mu,
                two * c.sigma_star_cap_f()? / mu,
                two * c.l_max()?,
                init.d_sq,
                "max{4σ*_F/(εμ²), 2L_max/μ}·ln(2D²/ε)",
            )
        }
        _ => Err(Error::NoCorollary(setting.name().into())),
    }
}
