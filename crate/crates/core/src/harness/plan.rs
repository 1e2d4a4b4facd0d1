use serde::{Deserialize, Serialize};

use crate::algorithms::{MomentumForm, RunConfig, StepSchedule, Weighting};
use crate::error::{invalid, Result};
use crate::harness::{default_checkpoints, estimate, verify_bound_with_floor, ExpectationEstimate, Metric, Policy, Verdict};
use crate::problems::Fixture;
use crate::scalar::Scalar;
use crate::theory::{bound_curve, complexity_iterations, BoundCurve, Setting, TheoryInputs};

/// One bound check on a fixture: which theorem, with what schedule, how
/// long and how many trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment<S: Scalar> {
    pub setting: Setting,
    pub schedule: StepSchedule<S>,
    pub iterations: usize,
    pub trials: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub checkpoints: Option<Vec<usize>>,
    pub momentum_form: MomentumForm,
}

impl<S: Scalar> Experiment<S> {
    pub fn new(setting: Setting, schedule: StepSchedule<S>, iterations: usize) -> Self {
        Self {
            setting,
            schedule,
            iterations,
            trials: 1,
            batch_size: 1,
            seed: 0,
            checkpoints: None,
            momentum_form: MomentumForm::Buffer,
        }
    }

    pub fn trials(mut self, m: usize) -> Self {
        self.trials = m;
        self
    }

    pub fn batch_size(mut self, b: usize) -> Self {
        self.batch_size = b;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn checkpoints(mut self, ts: &[usize]) -> Self {
        self.checkpoints = Some(ts.to_vec());
        self
    }
}

/// The quantity each theorem bounds: last-iterate gap or distance, or the
/// gap at the average the theorem prescribes.
pub fn metric_for<S: Scalar>(curve: &BoundCurve<S>) -> Metric<S> {
    use Setting::*;
    let ptk = Weighting::Ptk {
        l_ref: curve.l_ref.unwrap_or_else(S::zero),
    };
    match curve.setting {
        GdConvex | GdPl | SgdPl | MomentumConvex | PgdConvex => Metric::FGap,
        GdStronglyConvex | SgdStronglyConvex | MiniStronglyConvex | SsdStronglyConvex | PgdStronglyConvex
        | SpgdStronglyConvex => Metric::DistSq,
        SgdConvexGeneral | MiniConvexGeneral | SgdConvexInvsqrt => Metric::AvgFGap { weighting: ptk },
        SgdConvexConst | MiniConvexConst | PssdConvex => Metric::AvgFGap {
            weighting: Weighting::Uniform,
        },
        SsdConvexGeneral | SsdConvexInvsqrt => Metric::AvgFGap {
            weighting: Weighting::GammaWeighted,
        },
        SpgdConvexGeneral | SpgdConvexInvsqrt => Metric::AvgCapFGap {
            weighting: Weighting::GammaWeighted,
        },
        SpgdConvexConst => Metric::AvgCapFGap {
            weighting: Weighting::Uniform,
        },
    }
}

/// Everything a verification produced, for reporting.
#[derive(Clone, Debug)]
pub struct Outcome<S: Scalar> {
    pub inputs: TheoryInputs<S>,
    pub curve: BoundCurve<S>,
    pub estimate: ExpectationEstimate<S>,
    pub verdict: Verdict,
}

pub fn run_config_for<S: Scalar>(fx: &Fixture<S>, exp: &Experiment<S>) -> RunConfig<S> {
    RunConfig::for_fixture(fx, exp.setting.algorithm(), exp.schedule, exp.iterations)
        .with_trials(exp.trials)
        .with_batch_size(exp.batch_size)
        .with_seed(exp.seed)
        .with_momentum_form(exp.momentum_form)
}

/// Builds the bound, runs the trials and compares: deterministic methods
/// exactly, stochastic ones with the 3-SE allowance.
pub fn verify_setting<S: Scalar>(fx: &Fixture<S>, exp: &Experiment<S>) -> Result<Outcome<S>> {
    let algorithm = exp.setting.algorithm();
    let inputs = fx.inputs_for(algorithm).with_batch_size(exp.batch_size);
    let curve = bound_curve(exp.setting, &inputs, exp.schedule)?;
    let cfg = run_config_for(fx, exp);
    let checkpoints = exp
        .checkpoints
        .clone()
        .unwrap_or_else(|| default_checkpoints(exp.iterations, curve.validity.min_t));
    for &t in &checkpoints {
        curve.check(t)?;
    }
    let estimate = estimate(&cfg, metric_for(&curve), &checkpoints)?;
    let verdict = verify_bound_with_floor(&estimate, &curve, policy_for(exp.setting), floor_for(fx, exp.setting))?;
    Ok(Outcome {
        inputs,
        curve,
        estimate,
        verdict,
    })
}

fn policy_for(setting: Setting) -> Policy {
    if setting.is_deterministic() {
        Policy::Deterministic
    } else {
        Policy::ThreeSigma
    }
}

/// Accuracy of the reference optimum the gaps are measured against.
fn floor_for<S: Scalar>(fx: &Fixture<S>, setting: Setting) -> f64 {
    match (&fx.composite, setting.algorithm().is_prox()) {
        (Some(cp), true) => cp.floor(),
        _ => fx.instance.truth.floor(),
    }
    .as_f64()
}

/// A complexity corollary run for real: the algorithm at the recommended
/// step for `t_min` iterations, measured against the accuracy target.
#[derive(Clone, Debug, Serialize)]
pub struct PlugBack {
    pub setting: Setting,
    pub epsilon: f64,
    pub target: f64,
    pub gamma: Option<f64>,
    pub t_min: usize,
    pub policy: Policy,
    pub trials: usize,
    pub measured: f64,
    pub stderr: f64,
    pub slack: f64,
    pub pass: bool,
}

pub fn plug_back<S: Scalar>(
    fx: &Fixture<S>,
    setting: Setting,
    epsilon: S,
    trials: usize,
    batch_size: usize,
    seed: u64,
) -> Result<PlugBack> {
    let inputs = fx.inputs_for(setting.algorithm()).with_batch_size(batch_size);
    let answer = complexity_iterations(setting, &inputs, epsilon)?;
    let schedule = answer
        .schedule
        .or(answer.recommended_gamma.map(|gamma| StepSchedule::Constant { gamma }))
        .ok_or_else(|| invalid(format!("{setting} has no recommended step")))?;
    let curve = bound_curve(setting, &inputs, schedule)?;
    let exp = Experiment::new(setting, schedule, answer.t_min)
        .trials(trials)
        .batch_size(batch_size)
        .seed(seed);
    let est = estimate(&run_config_for(fx, &exp), metric_for(&curve), &[answer.t_min])?;
    let policy = policy_for(setting);
    let target = answer.target.as_f64();
    let (measured, stderr) = (est.mean[0].as_f64(), est.stderr[0].as_f64());
    let sigma = match policy {
        Policy::Deterministic => 0.0,
        Policy::ThreeSigma => 3.0 * stderr,
    };
    let slack = sigma + 1e-9 * (1.0 + target) + floor_for(fx, setting);
    Ok(PlugBack {
        setting,
        epsilon: epsilon.as_f64(),
        target,
        gamma: answer.recommended_gamma.map(|g| g.as_f64()),
        t_min: answer.t_min,
        policy,
        trials: est.trials,
        measured,
        stderr,
        slack,
        pass: measured <= target + slack,
    })
}
