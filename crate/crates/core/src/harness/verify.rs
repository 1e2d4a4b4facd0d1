use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::ExpectationEstimate;
use crate::scalar::Scalar;
use crate::theory::BoundCurve;

/// Recorded in every verdict: the trial count and the 3-SE allowance are
/// choices of this harness, not part of any theorem.
pub const POLICY_NOTE: &str = "expectations estimated from M independent seeded trials; three_sigma allows mean <= bound + 3*stderr + 1e-9*(1+bound)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Deterministic,
    ThreeSigma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub setting: String,
    pub policy: Policy,
    pub trials: usize,
    pub checkpoints: Vec<usize>,
    pub measured: Vec<f64>,
    pub stderr: Vec<f64>,
    pub bound: Vec<f64>,
    pub slack: Vec<f64>,
    /// Absolute allowance for reference-solver ground truth.
    pub floor: f64,
    pub pass: bool,
    /// `max_t (measured − slack) / bound`; at most 1 when the verdict passes.
    pub worst_ratio: f64,
    pub note: String,
}

pub fn verify_bound<S: Scalar>(est: &ExpectationEstimate<S>, curve: &BoundCurve<S>, policy: Policy) -> Result<Verdict> {
    verify_bound_with_floor(est, curve, policy, 0.0)
}

/// As [`verify_bound`] with an extra absolute allowance `floor`, used when
/// the minimizer comes from a reference solver rather than a closed form.
pub fn verify_bound_with_floor<S: Scalar>(
    est: &ExpectationEstimate<S>,
    curve: &BoundCurve<S>,
    policy: Policy,
    floor: f64,
) -> Result<Verdict> {
    for &t in &est.checkpoints {
        curve.check(t)?;
    }
    let mut v = Verdict {
        setting: curve.setting.name().to_string(),
        policy,
        trials: est.trials,
        checkpoints: est.checkpoints.clone(),
        measured: est.mean.iter().map(|m| m.as_f64()).collect(),
        stderr: est.stderr.iter().map(|s| s.as_f64()).collect(),
        bound: Vec::with_capacity(est.checkpoints.len()),
        slack: Vec::with_capacity(est.checkpoints.len()),
        floor,
        pass: true,
        worst_ratio: f64::NEG_INFINITY,
        note: POLICY_NOTE.to_string(),
    };
    for (j, &t) in est.checkpoints.iter().enumerate() {
        let bound = curve.eval(t)?.as_f64();
        let sigma = match policy {
            Policy::Deterministic => 0.0,
            Policy::ThreeSigma => 3.0 * v.stderr[j],
        };
        let slack = sigma + 1e-9 * (1.0 + bound.abs()) + floor;
        let excess = v.measured[j] - slack;
        let ratio = if bound > 0.0 {
            excess / bound
        } else if excess <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        v.pass &= v.measured[j] <= bound + slack;
        v.worst_ratio = v.worst_ratio.max(ratio);
        v.bound.push(bound);
        v.slack.push(slack);
    }
    Ok(v)
}
