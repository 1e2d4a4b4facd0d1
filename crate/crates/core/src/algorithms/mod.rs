//! Iterative methods, step schedules and iterate averaging.

mod run;
pub mod schedule;
pub mod trace;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::nonsmooth::Regularizer;
use crate::problems::{FiniteSumProblem, Fixture};
use crate::scalar::Scalar;

pub use run::{
    run, run_gd, run_minibatch_sgd, run_momentum, run_observed, run_prox_gd, run_prox_sgd, run_sgd, run_sparse, run_subgradient,
    run_trials,
};
pub use schedule::StepSchedule;
pub use trace::{averaged_iterate, averaged_iterate_at, averaging_weights, RunningAverage, format_float, Trace, TraceRow, Weighting, CSV_HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gd,
    Sgd,
    MinibatchSgd,
    Momentum,
    Subgradient,
    ProjectedSubgradient,
    ProxGd,
    ProxSgd,
}

impl Algorithm {
    pub fn is_deterministic(self) -> bool {
        matches!(self, Algorithm::Gd | Algorithm::ProxGd)
    }

    pub fn is_prox(self) -> bool {
        matches!(self, Algorithm::ProxGd | Algorithm::ProxSgd)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gd => "gd",
            Algorithm::Sgd => "sgd",
            Algorithm::MinibatchSgd => "minibatch_sgd",
            Algorithm::Momentum => "momentum",
            Algorithm::Subgradient => "subgradient",
            Algorithm::ProjectedSubgradient => "projected_subgradient",
            Algorithm::ProxGd => "prox_gd",
            Algorithm::ProxSgd => "prox_sgd",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumForm {
    #[default]
    Buffer,
    HeavyBall,
    Ima,
}

/// Point and optimal value the trace gaps are measured against.
#[derive(Clone, Debug, PartialEq)]
pub struct Target<S: Scalar> {
    pub x_star: Vec<S>,
    pub inf: S,
}

#[derive(Clone, Debug)]
pub struct RunConfig<S: Scalar> {
    pub problem: Arc<FiniteSumProblem<S>>,
    pub algorithm: Algorithm,
    pub schedule: StepSchedule<S>,
    pub iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub trials: usize,
    pub ball: Option<S>,
    pub regularizer: Option<Regularizer<S>>,
    pub momentum_form: MomentumForm,
    pub x0: Vec<S>,
    pub target: Target<S>,
    pub keep_iterates: bool,
}

impl<S: Scalar> RunConfig<S> {
    pub fn new(
        problem: Arc<FiniteSumProblem<S>>,
        algorithm: Algorithm,
        schedule: StepSchedule<S>,
        iterations: usize,
        x0: Vec<S>,
        target: Target<S>,
    ) -> Self {
        Self {
            problem,
            algorithm,
            schedule,
            iterations,
            batch_size: 1,
            seed: 0,
            trials: 1,
            ball: None,
            regularizer: None,
            momentum_form: MomentumForm::Buffer,
            x0,
            target,
            keep_iterates: false,
        }
    }

    /// Config against a catalogue fixture: composite fixtures bring their
    /// regularizer and `(x*_F, inf F)`, abs-loss fixtures their ball.
    pub fn for_fixture(fx: &Fixture<S>, algorithm: Algorithm, schedule: StepSchedule<S>, iterations: usize) -> Self {
        let target = match (&fx.composite, algorithm.is_prox()) {
            (Some(cp), true) => Target {
                x_star: cp.x_star.clone(),
                inf: cp.inf_cap_f,
            },
            _ => Target {
                x_star: fx.instance.truth.x_star.clone(),
                inf: fx.instance.truth.inf_f,
            },
        };
        let mut cfg = Self::new(fx.instance.problem.clone(), algorithm, schedule, iterations, fx.x0.clone(), target);
        if algorithm.is_prox() {
            cfg.regularizer = Some(fx.composite.as_ref().map_or(Regularizer::Zero, |cp| cp.reg));
        }
        if algorithm == Algorithm::ProjectedSubgradient {
            cfg.ball = fx.instance.constants.b;
        }
        cfg
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_batch_size(mut self, b: usize) -> Self {
        self.batch_size = b;
        self
    }

    pub fn with_iterates(mut self) -> Self {
        self.keep_iterates = true;
        self
    }

    pub fn with_momentum_form(mut self, form: MomentumForm) -> Self {
        self.momentum_form = form;
        self
    }

    /// Objective the gaps refer to: `f`, or `f + g` for prox methods.
    pub fn objective(&self, x: &[S]) -> S {
        let f = self.problem.value(x);
        match (&self.regularizer, self.algorithm.is_prox()) {
            (Some(reg), true) => {
                let g = reg.value(x);
                if g.is_infinite() {
                    S::infinity()
                } else {
                    f + g
                }
            }
            _ => f,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.problem.n();
        let d = self.problem.d();
        if self.iterations == 0 {
            return Err(range("iterations", self.iterations, ">= 1"));
        }
        if self.trials == 0 {
            return Err(range("trials", self.trials, ">= 1"));
        }
        if self.x0.len() != d || !linalg::all_finite(&self.x0) {
            return Err(Error::InvalidInput(format!("x0 must be a finite vector of length {d}")));
        }
        if self.target.x_star.len() != d {
            return Err(Error::InvalidInput("target minimizer has the wrong length".into()));
        }
        self.schedule.validate()?;
        if self.algorithm == Algorithm::MinibatchSgd && (self.batch_size == 0 || self.batch_size > n) {
            return Err(Error::OutOfRange {
                field: "b",
                value: self.batch_size.to_string(),
                allowed: format!("1..={n}"),
            });
        }
        let smooth_needed = !matches!(
            self.algorithm,
            Algorithm::Subgradient | Algorithm::ProjectedSubgradient
        );
        if smooth_needed && !self.problem.is_smooth() {
            return Err(Error::InvalidInput(format!(
                "{} needs differentiable terms; use a subgradient method",
                self.algorithm.name()
            )));
        }
        match self.algorithm {
            Algorithm::Gd | Algorithm::ProxGd if !self.schedule.is_constant() => {
                return Err(Error::InvalidInput(format!(
                    "{} needs a constant schedule",
                    self.algorithm.name()
                )))
            }
            Algorithm::Momentum if self.schedule.beta(0).is_none() => {
                return Err(Error::InvalidInput(
                    "momentum needs a schedule carrying beta_t (momentum_pair or constant_momentum)".into(),
                ))
            }
            Algorithm::ProjectedSubgradient => {
                let b = self
                    .ball
                    .ok_or_else(|| Error::InvalidInput("projected subgradient needs the ball radius B".into()))?;
                if !(b > S::zero()) {
                    return Err(range("B", b, "> 0"));
                }
                if linalg::norm(&self.x0) > b {
                    return Err(Error::OutsideDomain {
                        norm: linalg::norm(&self.x0).as_f64(),
                        radius: b.as_f64(),
                    });
                }
            }
            Algorithm::ProxGd | Algorithm::ProxSgd => {
                let reg = self
                    .regularizer
                    .ok_or_else(|| Error::InvalidInput("prox methods need a regularizer".into()))?;
                reg.validate()?;
            }
            _ => {}
        }
        Ok(())
    }
}

fn range(field: &'static str, v: impl ToString, allowed: &str) -> Error {
    Error::OutOfRange {
        field,
        value: v.to_string(),
        allowed: allowed.into(),
    }
}
