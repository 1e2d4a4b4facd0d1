//! Monte-Carlo estimation of expected errors, bound verification, and the
//! inequality property suite.

mod energy;
mod estimate;
mod minibatch;
mod plan;
mod suite;
mod verify;

pub use energy::{lyapunov_check, EnergyKind, EnergyVerdict};
pub use estimate::{estimate, ExpectationEstimate, Metric};
pub use plan::{metric_for, plug_back, run_config_for, verify_setting, Experiment, Outcome, PlugBack};
pub use minibatch::{binomial, enumerate_minibatch_oracle, MAX_SUBSETS};
pub use suite::{property_suite, Check, CheckStatus, SuiteConfig, SuiteReport, EXPECTED_FAILURES};
pub use verify::{verify_bound, verify_bound_with_floor, Policy, Verdict, POLICY_NOTE};

/// Geometric checkpoints `⌊10^{k/2}⌋ = 1, 3, 10, 31, 100, …` up to `t_max`,
/// dropping those below `min_t`; `t_max` itself is always included.
pub fn default_checkpoints(t_max: usize, min_t: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 0.. {
        let t = 10f64.powf(k as f64 / 2.0).floor() as usize;
        if t >= t_max {
            break;
        }
        if t >= min_t.max(1) && out.last() != Some(&t) {
            out.push(t);
        }
    }
    if t_max >= min_t {
        out.push(t_max);
    }
    out
}
