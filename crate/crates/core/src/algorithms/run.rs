use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algorithms::{Algorithm, MomentumForm, RunConfig, Trace, TraceRow};
use crate::error::{Error, Result};
use crate::linalg;
use crate::nonsmooth::{project_ball_in_place, Regularizer};
use crate::scalar::Scalar;

/// Records rows and watches for divergence.
struct Recorder<'a, S: Scalar> {
    cfg: &'a RunConfig<S>,
    rows: Vec<TraceRow<S>>,
    iterates: Option<Vec<Vec<S>>>,
    limit: S,
    /// Record only these `t` (sorted) and test the objective sparsely.
    only: Option<&'a [usize]>,
}

/// With sparse recording the objective-based guard runs this often;
/// non-finite iterates are still caught every step.
const GUARD_EVERY: usize = 64;

impl<'a, S: Scalar> Recorder<'a, S> {
    fn new(cfg: &'a RunConfig<S>, only: Option<&'a [usize]>) -> Self {
        let gap0 = cfg.objective(&cfg.x0) - cfg.target.inf;
        let floor = S::lit(1e-12) * (S::one() + cfg.target.inf.abs());
        let cap = only.map_or(cfg.iterations + 1, <[usize]>::len);
        Self {
            cfg,
            rows: Vec::with_capacity(cap),
            iterates: cfg.keep_iterates.then(|| Vec::with_capacity(cfg.iterations + 1)),
            limit: S::lit(1e12) * gap0.max(floor),
            only,
        }
    }

    fn record(&mut self, t: usize, x: &[S]) -> Result<()> {
        let keep = match self.only {
            None => true,
            Some(ts) => ts.binary_search(&t).is_ok(),
        };
        if !keep && !t.is_multiple_of(GUARD_EVERY) {
            if !linalg::all_finite(x) {
                return Err(Error::Diverged { t });
            }
        } else {
            let f_gap = self.cfg.objective(x) - self.cfg.target.inf;
            if !linalg::all_finite(x) || !f_gap.is_finite() || f_gap > self.limit {
                return Err(Error::Diverged { t });
            }
            if keep {
                self.rows.push(TraceRow {
                    t,
                    gamma: self.cfg.schedule.gamma(t),
                    f_gap,
                    dist_sq: linalg::dist_sq(x, &self.cfg.target.x_star),
                });
            }
        }
        if let Some(h) = &mut self.iterates {
            h.push(x.to_vec());
        }
        Ok(())
    }

    fn finish(self, trial: usize) -> Trace<S> {
        Trace {
            algorithm: self.cfg.algorithm,
            trial,
            seed: trial_seed(self.cfg.seed, trial),
            rows: self.rows,
            iterates: self.iterates,
        }
    }
}

pub(crate) fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

/// Uniform size-`b` subset by partial Fisher-Yates over a fresh identity
/// buffer. With `b = 1` this consumes the stream exactly like SGD.
fn sample_batch(rng: &mut ChaCha8Rng, buf: &mut [usize], b: usize) {
    let n = buf.len();
    for (i, v) in buf.iter_mut().enumerate() {
        *v = i;
    }
    for j in 0..b {
        let k = rng.gen_range(j..n);
        buf.swap(j, k);
    }
}

/// Runs one trial of `cfg.algorithm`. Trial `k` uses seed `cfg.seed + k`.
pub fn run<S: Scalar>(cfg: &RunConfig<S>, trial: usize) -> Result<Trace<S>> {
    run_observed(cfg, trial, |_, _| {})
}

/// Like [`run`], but hands every recorded iterate `(t, x_t)` to `observe`,
/// so callers can keep running statistics without storing the history.
pub fn run_observed<S: Scalar, F: FnMut(usize, &[S])>(cfg: &RunConfig<S>, trial: usize, observe: F) -> Result<Trace<S>> {
    drive(cfg, trial, None, observe)
}

/// Same iterates as [`run_observed`], but the trace holds rows only for the
/// sorted times in `rows_at`. Long runs measured at a few checkpoints skip
/// the per-step objective evaluation.
pub fn run_sparse<S: Scalar, F: FnMut(usize, &[S])>(
    cfg: &RunConfig<S>,
    trial: usize,
    rows_at: &[usize],
    observe: F,
) -> Result<Trace<S>> {
    if !rows_at.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("rows_at must be strictly increasing".into()));
    }
    drive(cfg, trial, Some(rows_at), observe)
}

fn drive<S: Scalar, F: FnMut(usize, &[S])>(
    cfg: &RunConfig<S>,
    trial: usize,
    only: Option<&[usize]>,
    mut observe: F,
) -> Result<Trace<S>> {
    cfg.validate()?;
    let p = &*cfg.problem;
    let n = p.n();
    let d = p.d();
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
    let mut rec = Recorder::new(cfg, only);
    let mut x = cfg.x0.clone();
    let mut g = vec![S::zero(); d];
    rec.record(0, &x)?;
    observe(0, &x);

    let reg = cfg.regularizer.unwrap_or(Regularizer::Zero);
    let mut batch = vec![0usize; n];
    // momentum state
    let mut m = vec![S::zero(); d];
    let mut x_prev = x.clone();
    let mut z = x.clone();

    for t in 0..cfg.iterations {
        let gamma = cfg.schedule.gamma(t);
        match cfg.algorithm {
            Algorithm::Gd => {
                p.grad_into(&x, &mut g);
                linalg::axpy(-gamma, &g, &mut x);
            }
            Algorithm::Sgd => {
                let i = rng.gen_range(0..n);
                g.iter_mut().for_each(|v| *v = S::zero());
                p.add_grad_i(i, &x, S::one(), &mut g);
                linalg::axpy(-gamma, &g, &mut x);
            }
            Algorithm::MinibatchSgd => {
                sample_batch(&mut rng, &mut batch, cfg.batch_size);
                p.batch_grad_into(&batch[..cfg.batch_size], &x, &mut g);
                linalg::axpy(-gamma, &g, &mut x);
            }
            Algorithm::Momentum => {
                let i = rng.gen_range(0..n);
                g.iter_mut().for_each(|v| *v = S::zero());
                p.add_grad_i(i, &x, S::one(), &mut g);
                let beta = cfg.schedule.beta(t).expect("validated");
                match cfg.momentum_form {
                    MomentumForm::Buffer => {
                        for (mj, &gj) in m.iter_mut().zip(&g) {
                            *mj = beta * *mj + gj;
                        }
                        linalg::axpy(-gamma, &m, &mut x);
                    }
                    MomentumForm::HeavyBall => {
                        let beta_hat = if t == 0 {
                            S::zero()
                        } else {
                            gamma * beta / cfg.schedule.gamma(t - 1)
                        };
                        for j in 0..d {
                            let next = x[j] - gamma * g[j] + beta_hat * (x[j] - x_prev[j]);
                            x_prev[j] = x[j];
                            x[j] = next;
                        }
                    }
                    MomentumForm::Ima => {
                        let lam = cfg.schedule.lambda(t + 1).expect("validated");
                        let eta = (S::one() + lam) * gamma;
                        linalg::axpy(-eta, &g, &mut z);
                        for j in 0..d {
                            x[j] = (lam * x[j] + z[j]) / (S::one() + lam);
                        }
                    }
                }
            }
            Algorithm::Subgradient | Algorithm::ProjectedSubgradient => {
                let i = rng.gen_range(0..n);
                g.iter_mut().for_each(|v| *v = S::zero());
                p.add_grad_i(i, &x, S::one(), &mut g);
                linalg::axpy(-gamma, &g, &mut x);
                if let (Algorithm::ProjectedSubgradient, Some(b)) = (cfg.algorithm, cfg.ball) {
                    project_ball_in_place(b, &mut x);
                }
            }
            Algorithm::ProxGd => {
                p.grad_into(&x, &mut g);
                linalg::axpy(-gamma, &g, &mut x);
                reg.prox_in_place(gamma, &mut x);
            }
            Algorithm::ProxSgd => {
                let i = rng.gen_range(0..n);
                g.iter_mut().for_each(|v| *v = S::zero());
                p.add_grad_i(i, &x, S::one(), &mut g);
                linalg::axpy(-gamma, &g, &mut x);
                reg.prox_in_place(gamma, &mut x);
            }
        }
        rec.record(t + 1, &x)?;
        observe(t + 1, &x);
    }
    Ok(rec.finish(trial))
}

fn run_as<S: Scalar>(cfg: &RunConfig<S>, algorithm: Algorithm) -> Result<Trace<S>> {
    if cfg.algorithm == algorithm {
        return run(cfg, 0);
    }
    let mut c = cfg.clone();
    c.algorithm = algorithm;
    run(&c, 0)
}

pub fn run_gd<S: Scalar>(cfg: &RunConfig<S>) -> Result<Trace<S>> {
    run_as(cfg, Algorithm::Gd)
}

pub fn run_sgd<S: Scalar>(cfg: &RunConfig<S>) -> Result<Trace<S>> {
    run_as(cfg, Algorithm::Sgd)
}

pub fn run_minibatch_sgd<S: Scalar>(cfg: &RunConfig<S>) -> Result<Trace<S>> {
    run_as(cfg, Algorithm::MinibatchSgd)
}

pub fn run_momentum<S: Scalar>(cfg: &RunConfig<S>, form: MomentumForm) -> Result<Trace<S>> {
    let mut c = cfg.clone();
    c.momentum_form = form;
    run_as(&c, Algorithm::Momentum)
}

pub fn run_subgradient<S: Scalar>(cfg: &RunConfig<S>, projected: bool) -> Result<Trace<S>> {
    run_as(
        cfg,
        if projected {
            Algorithm::ProjectedSubgradient
        } else {
            Algorithm::Subgradient
        },
    )
}

pub fn run_prox_gd<S: Scalar>(cfg: &RunConfig<S>) -> Result<Trace<S>> {
    run_as(cfg, Algorithm::ProxGd)
}

pub fn run_prox_sgd<S: Scalar>(cfg: &RunConfig<S>) -> Result<Trace<S>> {
    run_as(cfg, Algorithm::ProxSgd)
}

/// All `cfg.trials` trials, in parallel, returned in trial order.
pub fn run_trials<S: Scalar>(cfg: &RunConfig<S>) -> Result<Vec<Trace<S>>> {
    cfg.validate()?;
    let results: Vec<Result<Trace<S>>> = (0..cfg.trials).into_par_iter().map(|k| run(cfg, k)).collect();
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| matches!(r, Err(Error::Diverged { .. })))
        .map(|(k, _)| k)
        .collect();
    if !failed.is_empty() {
        return Err(Error::TrialsDiverged(failed));
    }
    results.into_iter().collect()
}
