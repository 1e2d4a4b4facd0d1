//! Embedded catalogue of small problems with known answers.

use crate::error::{invalid, Result};
use crate::linalg;
use crate::nonsmooth::Regularizer;
use crate::problems::{
    build_abs_loss, build_composite, build_least_squares, build_scalar_pl, CompositeProblem, Instance,
};
use crate::scalar::Scalar;
use crate::algorithms::Algorithm;
use crate::theory::{Init, TheoryInputs};

pub const FIXTURE_NAMES: &[&str] = &[
    "ls_4x2",
    "ls_6x2",
    "ls_interp_3x2",
    "ls_rankdef_3x3",
    "scalar_pl",
    "abs_2x1",
    "abs_strong_3x2",
    "lasso_4x2",
    "lasso_6x2",
];

#[derive(Clone, Debug)]
pub struct Fixture<S: Scalar> {
    pub name: String,
    pub instance: Instance<S>,
    pub composite: Option<CompositeProblem<S>>,
    pub x0: Vec<S>,
}

impl<S: Scalar> Fixture<S> {
    pub fn new(name: &str, instance: Instance<S>, composite: Option<CompositeProblem<S>>, x0: Vec<S>) -> Result<Self> {
        if x0.len() != instance.problem.d() {
            return Err(invalid(format!(
                "x0 has length {} but the problem has d = {}",
                x0.len(),
                instance.problem.d()
            )));
        }
        let mut instance = instance;
        if let Some(cp) = &composite {
            instance.constants.sigma_star_cap_f = Some(cp.sigma_star_cap_f);
        }
        Ok(Self {
            name: name.to_string(),
            instance,
            composite,
            x0,
        })
    }

    /// Minimizer the distance metric refers to: `x*_F` for composite
    /// fixtures, `x*` otherwise.
    pub fn target(&self) -> &[S] {
        match &self.composite {
            Some(cp) => &cp.x_star,
            None => &self.instance.truth.x_star,
        }
    }

    /// Bound inputs for runs of `algorithm`: distances are measured to
    /// `x*_F` only for proximal methods. Without a regularizer the
    /// composite quantities fall back to the smooth ones (`g = 0`).
    pub fn inputs_for(&self, algorithm: Algorithm) -> TheoryInputs<S> {
        let mut constants = self.instance.constants.clone();
        let mut init = self.init();
        if self.composite.is_some() && !algorithm.is_prox() {
            init.d_sq = linalg::dist_sq(&self.x0, &self.instance.truth.x_star);
        }
        if self.composite.is_none() {
            constants.sigma_star_cap_f = constants.sigma_star_cap_f.or(constants.sigma_star_f);
            init.cap_f0_gap = Some(init.f0_gap);
        }
        TheoryInputs::new(constants, init)
    }

    pub fn init(&self) -> Init<S> {
        let p = &self.instance.problem;
        let f0 = p.value(&self.x0) - self.instance.truth.inf_f;
        Init {
            d_sq: linalg::dist_sq(&self.x0, self.target()),
            f0_gap: f0.max(S::zero()),
            cap_f0_gap: self.composite.as_ref().map(|cp| cp.gap(&self.x0).max(S::zero())),
        }
    }
}

fn rows<S: Scalar>(data: &[&[f64]]) -> Vec<Vec<S>> {
    data.iter().map(|r| r.iter().map(|&v| S::lit(v)).collect()).collect()
}

fn vector<S: Scalar>(data: &[f64]) -> Vec<S> {
    data.iter().map(|&v| S::lit(v)).collect()
}

const LS_4X2: &[&[f64]] = &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], &[1.0, -1.0]];
const LS_4X2_Y: &[f64] = &[1.0, 1.0, 0.0, 0.0];
const LS_6X2: &[&[f64]] = &[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], &[1.0, -1.0], &[2.0, 1.0], &[0.5, -1.0]];
const LS_6X2_Y: &[f64] = &[1.0, -1.0, 0.5, 2.0, 1.0, 0.0];

pub fn fixture<S: Scalar>(name: &str) -> Result<Fixture<S>> {
    match name {
        "ls_4x2" => Fixture::new(name, build_least_squares(rows(LS_4X2), vector(LS_4X2_Y))?, None, vector(&[3.0, -1.0])),
        "ls_6x2" => Fixture::new(name, build_least_squares(rows(LS_6X2), vector(LS_6X2_Y))?, None, vector(&[2.0, 2.0])),
        "ls_interp_3x2" => Fixture::new(
            name,
            build_least_squares(rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]), vector(&[1.0, 2.0, 3.0]))?,
            None,
            vector(&[0.0, 0.0]),
        ),
        "ls_rankdef_3x3" => Fixture::new(
            name,
            build_least_squares(
                rows(&[&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]),
                vector(&[1.0, 0.0, 1.0]),
            )?,
            None,
            vector(&[1.0, 0.0, 0.0]),
        ),
        "scalar_pl" => Fixture::new(name, build_scalar_pl(), None, vector(&[3.0])),
        "abs_2x1" => Fixture::new(
            name,
            build_abs_loss(rows(&[&[1.0], &[1.0]]), vector(&[1.0, -1.0]), S::zero(), S::lit(2.0))?,
            None,
            vector(&[2.0]),
        ),
        "abs_strong_3x2" => Fixture::new(
            name,
            build_abs_loss(
                rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]),
                vector(&[1.0, -1.0, 0.5]),
                S::lit(0.5),
                S::lit(2.0),
            )?,
            None,
            vector(&[1.0, -1.0]),
        ),
        "lasso_4x2" => {
            let inst = build_least_squares(rows(LS_4X2), vector(LS_4X2_Y))?;
            let cp = build_composite(&inst, Regularizer::L1 { lambda: S::lit(0.1) })?;
            Fixture::new(name, inst, Some(cp), vector(&[3.0, -1.0]))
        }
        "lasso_6x2" => {
            let inst = build_least_squares(rows(LS_6X2), vector(LS_6X2_Y))?;
            let cp = build_composite(&inst, Regularizer::L1 { lambda: S::lit(0.1) })?;
            Fixture::new(name, inst, Some(cp), vector(&[2.0, 2.0]))
        }
        other => Err(invalid(format!(
            "unknown fixture {other:?}; known: {}",
            FIXTURE_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_builds() {
        for name in FIXTURE_NAMES {
            let fx = fixture::<f64>(name).unwrap();
            assert_eq!(fx.x0.len(), fx.instance.problem.d(), "{name}");
        }
        assert!(fixture::<f64>("nope").is_err());
    }

    #[test]
    fn lasso_carries_composite_noise() {
        let fx = fixture::<f64>("lasso_4x2").unwrap();
        assert!((fx.instance.constants.sigma_star_cap_f.unwrap() - 0.38).abs() < 1e-12);
    }
}
