use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, dot};
use crate::nonsmooth::Regularizer;
use crate::problems::{Fixture, FiniteSumProblem};
use crate::scalar::Scalar;

/// Checks that must fail on a fixture, as `(fixture, check)`.
pub const EXPECTED_FAILURES: &[(&str, &str)] = &[("scalar_pl", "convexity")];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Points (or pairs) per inequality.
    pub samples: usize,
    /// Candidates per point for the prox argmin check.
    pub prox_candidates: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            prox_candidates: 1_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "expected-fail")]
    ExpectedFail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Largest `(lhs − rhs − floor) / scale` over the samples.
    pub max_violation: f64,
    pub tolerance: f64,
    /// Absolute allowance for reference-solver minimizers.
    pub floor: f64,
    pub samples: usize,
    pub status: CheckStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub fixture: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    /// True when nothing failed outside the expected-fail registry.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const FN_TOL: f64 = 1e-9;

struct Builder<'a> {
    fixture: &'a str,
    checks: Vec<Check>,
}

impl Builder<'_> {
    /// `samples` yields `(lhs − rhs, scale)`; the inequality is `lhs ≤ rhs`.
    fn add(&mut self, name: &str, tolerance: f64, floor: f64, samples: impl Iterator<Item = (f64, f64)>) {
        let mut worst = f64::NEG_INFINITY;
        let mut count = 0;
        for (excess, scale) in samples {
            let v = (excess - floor) / scale;
            // NaN counts as a violation
            worst = if v.is_nan() { f64::INFINITY } else { worst.max(v) };
            count += 1;
        }
        let failed = worst > tolerance;
        let expected = EXPECTED_FAILURES.contains(&(self.fixture, name));
        let status = match (failed, expected) {
            (false, false) => CheckStatus::Pass,
            (true, true) => CheckStatus::ExpectedFail,
            _ => CheckStatus::Fail,
        };
        self.checks.push(Check {
            name: name.to_string(),
            max_violation: worst,
            tolerance,
            floor,
            samples: count,
            status,
        });
    }
}

fn sample_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    let u: Vec<f64> = if d <= 8 {
        loop {
            let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if u.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                break u;
            }
        }
    } else {
        let s = 1.0 / (d as f64).sqrt();
        (0..d).map(|_| rng.gen_range(-s..s)).collect()
    };
    center.iter().zip(u).map(|(c, v)| c + radius * v).collect()
}

fn lift<S: Scalar>(v: &[f64]) -> Vec<S> {
    v.iter().map(|&x| S::lit(x)).collect()
}

/// Evaluates every function-class, noise and regularizer inequality that
/// applies to the fixture on random points around its minimizer.
pub fn property_suite<S: Scalar>(fx: &Fixture<S>, cfg: &SuiteConfig) -> SuiteReport {
    let p: &FiniteSumProblem<S> = &fx.instance.problem;
    let c = &fx.instance.constants;
    let truth = &fx.instance.truth;
    let n = p.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let center: Vec<f64> = truth.x_star.iter().map(|v| v.as_f64()).collect();
    let radius = 10.0 * (1.0 + linalg::norm(&center));
    let xs: Vec<Vec<S>> = (0..cfg.samples).map(|_| lift(&sample_ball(&mut rng, &center, radius))).collect();
    let ys: Vec<Vec<S>> = (0..cfg.samples).map(|_| lift(&sample_ball(&mut rng, &center, radius))).collect();
    let pairs = || xs.iter().zip(&ys);

    let f = |x: &[S]| p.value(x).as_f64();
    let g = |x: &[S]| p.grad(x);
    let inf = truth.inf_f.as_f64();
    let floor = truth.floor().as_f64();
    let fscale = |x: &[S], y: &[S]| 1.0 + f(x).abs() + f(y).abs();
    let f64s = |v: S| v.as_f64();
    let smooth = p.is_smooth();
    let convex = p.is_convex();
    let pos = |v: Option<S>| v.map(f64s).filter(|&v| v > 0.0);

    let mut b = Builder {
        fixture: &fx.name,
        checks: Vec::new(),
    };

    b.add(
        "unbiasedness",
        1e-12,
        0.0,
        xs.iter().map(|x| {
            let mut avg = vec![S::zero(); p.d()];
            for i in 0..n {
                linalg::axpy(S::one() / S::of(n), &p.grad_i(i, x), &mut avg);
            }
            let gx = g(x);
            (linalg::dist_sq(&avg, &gx).sqrt().as_f64(), 1.0 + linalg::norm(&gx).as_f64())
        }),
    );

    b.add(
        "convexity",
        FN_TOL,
        0.0,
        pairs().map(|(x, y)| {
            let rhs = f(y) + f64s(dot(&g(y), &linalg::sub(x, y)));
            (rhs - f(x), fscale(x, y))
        }),
    );

    if let (Some(l), true) = (pos(c.l), smooth) {
        b.add(
            "smoothness_upper_bound",
            FN_TOL,
            0.0,
            pairs().map(|(x, y)| {
                let rhs = f(x) + f64s(dot(&g(x), &linalg::sub(y, x))) + 0.5 * l * f64s(linalg::dist_sq(y, x));
                (f(y) - rhs, fscale(x, y))
            }),
        );
        b.add(
            "descent_step",
            FN_TOL,
            0.0,
            xs.iter().flat_map(|x| {
                let gx = g(x);
                let gn = f64s(linalg::norm_sq(&gx));
                [0.5 / l, 1.0 / l].map(|lam| {
                    let mut next = x.clone();
                    linalg::axpy(S::lit(-lam), &gx, &mut next);
                    (f(&next) - f(x) + lam * (1.0 - lam * l / 2.0) * gn, fscale(x, &next))
                })
            }),
        );
        b.add(
            "inverse_pl",
            FN_TOL,
            floor,
            xs.iter().map(|x| (f64s(linalg::norm_sq(&g(x))) / (2.0 * l) - (f(x) - inf), fscale(x, x))),
        );
        if convex {
            b.add(
                "cocoercivity",
                FN_TOL,
                0.0,
                pairs().map(|(x, y)| {
                    let dg = linalg::sub(&g(y), &g(x));
                    let lhs = f64s(linalg::norm_sq(&dg)) / l;
                    (lhs - f64s(dot(&dg, &linalg::sub(y, x))), fscale(x, y) + lhs.abs())
                }),
            );
        }
    }

    if let (Some(l_max), true) = (pos(c.l_max), smooth) {
        let term_spread = |x: &[S], y: &[S]| {
            (0..n)
                .map(|i| f64s(linalg::dist_sq(&p.grad_i(i, y), &p.grad_i(i, x))))
                .sum::<f64>()
                / n as f64
        };
        if convex {
            b.add(
                "expected_smoothness",
                FN_TOL,
                0.0,
                pairs().map(|(x, y)| {
                    let lhs = term_spread(x, y) / (2.0 * l_max);
                    (lhs - f64s(p.bregman(y, x)), fscale(x, y) + lhs)
                }),
            );
            if let Some(sigma) = c.sigma_star_f.map(f64s) {
                b.add(
                    "variance_transfer_gradient_noise",
                    FN_TOL,
                    floor,
                    xs.iter().map(|x| {
                        let m2 = f64s(p.gradient_second_moment(x));
                        (m2 - 4.0 * l_max * (f(x) - inf) - 2.0 * sigma, fscale(x, x) + m2)
                    }),
                );
            }
            b.add(
                "bregman_variance_transfer",
                FN_TOL,
                0.0,
                pairs().map(|(x, y)| {
                    let vx = f64s(p.gradient_variance(x));
                    let rhs = 4.0 * l_max * f64s(p.bregman(x, y)) + 2.0 * f64s(p.gradient_variance(y));
                    (vx - rhs, fscale(x, y) + vx)
                }),
            );
        }
        if let Some(delta) = c.delta_star_f.map(f64s) {
            b.add(
                "variance_transfer_function_noise",
                FN_TOL,
                2.0 * l_max * floor,
                xs.iter().map(|x| {
                    let m2 = f64s(p.gradient_second_moment(x));
                    (m2 - 2.0 * l_max * (f(x) - inf) - 2.0 * l_max * delta, fscale(x, x) + m2)
                }),
            );
        }
    }

    if let Some(mu) = pos(c.mu) {
        b.add(
            "strong_convexity",
            FN_TOL,
            0.0,
            pairs().map(|(x, y)| {
                let rhs = f(x) + f64s(dot(&g(x), &linalg::sub(y, x))) + 0.5 * mu * f64s(linalg::dist_sq(y, x));
                (rhs - f(y), fscale(x, y))
            }),
        );
        let h = |x: &[S]| f(x) - 0.5 * mu * f64s(linalg::norm_sq(x));
        b.add(
            "convex_plus_norm",
            FN_TOL,
            0.0,
            pairs().map(|(x, y)| {
                let mid: Vec<S> = x.iter().zip(y).map(|(&a, &b)| S::lit(0.5) * (a + b)).collect();
                (h(&mid) - 0.5 * (h(x) + h(y)), fscale(x, y) + f64s(linalg::norm_sq(&mid)) * mu)
            }),
        );
        if smooth {
            b.add(
                "strong_convexity_implies_pl",
                FN_TOL,
                floor,
                xs.iter().map(|x| (f(x) - inf - f64s(linalg::norm_sq(&g(x))) / (2.0 * mu), fscale(x, x))),
            );
        }
    }

    if let (Some(mu_pl), true) = (pos(c.mu_pl), smooth) {
        b.add(
            "pl_inequality",
            FN_TOL,
            floor,
            xs.iter().map(|x| (f(x) - inf - f64s(linalg::norm_sq(&g(x))) / (2.0 * mu_pl), fscale(x, x))),
        );
    }

    if let (Some(gl), Some(ball)) = (c.g.map(f64s), c.b.map(f64s)) {
        let origin = vec![0.0; p.d()];
        let inside: Vec<Vec<S>> = (0..cfg.samples).map(|_| lift(&sample_ball(&mut rng, &origin, ball))).collect();
        b.add(
            "bounded_subgradients",
            FN_TOL,
            0.0,
            inside.iter().map(|x| {
                let worst = (0..n).map(|i| f64s(linalg::norm(&p.grad_i(i, x)))).fold(0.0, f64::max);
                (worst - gl, 1.0 + gl)
            }),
        );
    }

    if let Some(cp) = &fx.composite {
        let cfloor = cp.floor().as_f64();
        let inf_cap = cp.inf_cap_f.as_f64();
        let in_dom: Vec<&Vec<S>> = xs.iter().filter(|x| cp.reg.in_domain(x)).collect();
        b.add(
            "bregman_composite",
            FN_TOL,
            cfloor,
            in_dom.iter().map(|x| {
                let dist = f64s(p.bregman(x, &cp.x_star));
                let gap = cp.value(x).as_f64() - inf_cap;
                ((-dist).max(dist - gap), 1.0 + cp.value(x).as_f64().abs() + f(&cp.x_star).abs())
            }),
        );
        regularizer_checks(&mut b, &cp.reg, &xs, &ys, cfg, &mut rng);
    }

    SuiteReport {
        suite: "property_suite".into(),
        fixture: fx.name.clone(),
        checks: b.checks,
    }
}

fn regularizer_checks<S: Scalar>(
    b: &mut Builder<'_>,
    reg: &Regularizer<S>,
    xs: &[Vec<S>],
    ys: &[Vec<S>],
    cfg: &SuiteConfig,
    rng: &mut ChaCha8Rng,
) {
    let f64s = |v: S| v.as_f64();
    let gammas: Vec<S> = xs.iter().map(|_| S::lit(10f64.powf(rng.gen_range(-2.0..1.0)))).collect();
    let prox = |gamma: S, x: &[S]| reg.prox(gamma, x).expect("positive step");
    let triples = || xs.iter().zip(ys).zip(&gammas);

    b.add(
        "prox_nonexpansive",
        1e-12,
        0.0,
        triples().map(|((x, y), &gm)| {
            let d = f64s(linalg::dist_sq(&prox(gm, x), &prox(gm, y)).sqrt());
            (d - f64s(linalg::dist_sq(x, y).sqrt()), 1.0)
        }),
    );
    b.add(
        "prox_firm_nonexpansive",
        1e-12,
        0.0,
        triples().map(|((x, y), &gm)| {
            let dp = linalg::sub(&prox(gm, x), &prox(gm, y));
            let lhs = f64s(linalg::norm_sq(&dp));
            (lhs - f64s(dot(&linalg::sub(x, y), &dp)), 1.0 + f64s(linalg::dist_sq(x, y)))
        }),
    );
    b.add(
        "subgradient_inequality",
        FN_TOL,
        0.0,
        xs.iter()
            .zip(ys)
            .filter(|(x, y)| reg.in_domain(x) && reg.in_domain(y))
            .map(|(x, y)| {
                let s = reg.subgradient(x).expect("in domain");
                let rhs = f64s(reg.value(x)) + f64s(dot(&s, &linalg::sub(y, x)));
                (rhs - f64s(reg.value(y)), 1.0 + f64s(reg.value(x)).abs() + f64s(reg.value(y)).abs())
            }),
    );

    // a few centres, many candidates each
    let centres = (cfg.samples / cfg.prox_candidates.max(1)).max(1).min(xs.len());
    let mut rows = Vec::with_capacity(centres * cfg.prox_candidates);
    for (x, &gm) in xs.iter().zip(&gammas).take(centres) {
        let px = prox(gm, x);
        let obj = |u: &[S]| f64s(reg.value(u)) + 0.5 / f64s(gm) * f64s(linalg::dist_sq(u, x));
        let best = obj(&px);
        let c: Vec<f64> = px.iter().map(|v| v.as_f64()).collect();
        let r = 1.0 + linalg::norm(&c);
        for _ in 0..cfg.prox_candidates {
            let u = lift::<S>(&sample_ball(rng, &c, r));
            rows.push((best - obj(&u), 1.0 + best.abs()));
        }
    }
    b.add("prox_optimality", FN_TOL, 0.0, rows.into_iter());
}
