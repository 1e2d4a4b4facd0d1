use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{run_sparse, RunConfig, RunningAverage, Weighting};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// What to measure along a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric<S: Scalar> {
    /// `f(x_t) − inf f` (for prox methods, `F(x_t) − inf F`)
    FGap,
    /// `‖x_t − x*‖²`
    DistSq,
    /// Gap at the averaged iterate `x̄^t` of `x_0 .. x_{t−1}`.
    AvgFGap { weighting: Weighting<S> },
    /// Composite gap at the averaged iterate; prox methods only.
    #[serde(rename = "avg_F_gap")]
    AvgCapFGap { weighting: Weighting<S> },
}

impl<S: Scalar> Metric<S> {
    fn weighting(&self) -> Option<Weighting<S>> {
        match *self {
            Metric::AvgFGap { weighting } | Metric::AvgCapFGap { weighting } => Some(weighting),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationEstimate<S: Scalar> {
    pub checkpoints: Vec<usize>,
    pub mean: Vec<S>,
    /// Sample standard deviation over `√M`.
    pub stderr: Vec<S>,
    pub trials: usize,
}

/// Runs the trials of `cfg` and averages `metric` at each checkpoint.
/// Deterministic methods are run once and report zero standard error.
pub fn estimate<S: Scalar>(cfg: &RunConfig<S>, metric: Metric<S>, checkpoints: &[usize]) -> Result<ExpectationEstimate<S>> {
    cfg.validate()?;
    if checkpoints.is_empty() {
        return Err(Error::InvalidInput("no checkpoints".into()));
    }
    if let Some(&t) = checkpoints.iter().find(|&&t| t > cfg.iterations) {
        return Err(Error::OutOfRange {
            field: "checkpoints",
            value: t.to_string(),
            allowed: format!("<= {}", cfg.iterations),
        });
    }
    let weighting = metric.weighting();
    if weighting.is_some() && checkpoints.contains(&0) {
        return Err(Error::OutOfRange {
            field: "checkpoints",
            value: "0".into(),
            allowed: ">= 1 for averaged metrics".into(),
        });
    }
    if matches!(metric, Metric::AvgCapFGap { .. }) && !cfg.algorithm.is_prox() {
        return Err(Error::InvalidInput("avg_F_gap needs a composite (prox) run".into()));
    }
    let trials = if cfg.algorithm.is_deterministic() {
        1
    } else if cfg.trials < 2 {
        return Err(Error::OutOfRange {
            field: "trials",
            value: cfg.trials.to_string(),
            allowed: ">= 2 for stochastic methods".into(),
        });
    } else {
        cfg.trials
    };

    let mut rows_at = checkpoints.to_vec();
    rows_at.sort_unstable();
    rows_at.dedup();

    let one_trial = |k: usize| -> Result<Vec<S>> {
        let mut values = vec![S::zero(); checkpoints.len()];
        let mut avg = weighting.map(|w| RunningAverage::new(w, cfg.x0.len()));
        let mut failure = None;
        let trace = run_sparse(cfg, k, &rows_at, |t, x| {
            let Some(avg) = avg.as_mut() else { return };
            if failure.is_some() {
                return;
            }
            // checkpoints see x_0 .. x_{t-1}
            for (slot, &c) in checkpoints.iter().enumerate() {
                if c == t {
                    match avg.current() {
                        Ok(xbar) => values[slot] = cfg.objective(&xbar) - cfg.target.inf,
                        Err(e) => failure = Some(e),
                    }
                }
            }
            if t < cfg.iterations {
                if let Err(e) = avg.push(cfg.schedule.gamma(t), x) {
                    failure = Some(e);
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        if weighting.is_none() {
            for (slot, &c) in checkpoints.iter().enumerate() {
                let row = &trace.rows[rows_at.binary_search(&c).expect("recorded")];
                values[slot] = match metric {
                    Metric::DistSq => row.dist_sq,
                    _ => row.f_gap,
                };
            }
        }
        Ok(values)
    };

    let results: Vec<Result<Vec<S>>> = (0..trials).into_par_iter().map(one_trial).collect();
    let diverged: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| matches!(r, Err(Error::Diverged { .. })))
        .map(|(k, _)| k)
        .collect();
    if !diverged.is_empty() {
        return Err(Error::TrialsDiverged(diverged));
    }
    let samples: Vec<Vec<S>> = results.into_iter().collect::<Result<_>>()?;

    let m = S::of(trials);
    let mut mean = Vec::with_capacity(checkpoints.len());
    let mut stderr = Vec::with_capacity(checkpoints.len());
    for j in 0..checkpoints.len() {
        let mu = samples.iter().map(|s| s[j]).sum::<S>() / m;
        let se = if trials > 1 {
            let ss: S = samples.iter().map(|s| (s[j] - mu) * (s[j] - mu)).sum();
            (ss / (m - S::one()) / m).sqrt()
        } else {
            S::zero()
        };
        mean.push(mu);
        stderr.push(se);
    }
    Ok(ExpectationEstimate {
        checkpoints: checkpoints.to_vec(),
        mean,
        stderr,
        trials,
    })
}
