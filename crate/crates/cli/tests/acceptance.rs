//! Acceptance criteria 1-16. Each criterion runs in isolation, is timed
//! against its budget and reports one PASS/FAIL line; the test fails if
//! any criterion does.

use std::error::Error;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use descentlab::algorithms::{run, run_trials, Algorithm, MomentumForm, RunConfig, StepSchedule};
use descentlab::harness::{
    enumerate_minibatch_oracle, lyapunov_check, plug_back, property_suite, verify_setting, CheckStatus, EnergyKind,
    Experiment, SuiteConfig, Verdict, EXPECTED_FAILURES,
};
use descentlab::problems::{build_least_squares, fixture, minibatch_constants, Fixture, FIXTURE_NAMES};
use descentlab::theory::Setting;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, Box<dyn Error>>;

fn fx(name: &str) -> Fixture<f64> {
    fixture(name).unwrap()
}

fn constant(gamma: f64) -> StepSchedule<f64> {
    StepSchedule::Constant { gamma }
}

fn fail<T>(msg: String) -> Result<T, Box<dyn Error>> {
    Err(msg.into())
}

/// Runs a bound check and turns a failed verdict into an error.
fn verified(name: &str, exp: Experiment<f64>) -> Result<Verdict, Box<dyn Error>> {
    let out = verify_setting(&fx(name), &exp)?;
    let v = out.verdict;
    if !v.pass {
        return fail(format!(
            "{} on {name}: measured {:?} > bound {:?} + slack {:?}",
            v.setting, v.measured, v.bound, v.slack
        ));
    }
    Ok(v)
}

fn summary(name: &str, v: &Verdict) -> String {
    format!("{} on {name}: M={} worst_ratio={:.4}", v.setting, v.trials, v.worst_ratio)
}

fn c01_gd_contraction() -> Outcome {
    let f = fx("ls_4x2");
    let c = &f.instance.constants;
    let (l, mu) = (c.l()?, c.mu()?);
    let gamma = 1.0 / l;
    let tr = run(&RunConfig::for_fixture(&f, Algorithm::Gd, constant(gamma), 200), 0)?;
    let rho = 1.0 - gamma * mu;
    let scale = tr.rows[0].dist_sq;
    let mut worst = f64::NEG_INFINITY;
    for w in tr.rows.windows(2) {
        let excess = w[1].dist_sq - rho * w[0].dist_sq;
        worst = worst.max(excess);
        if excess > 1e-9 * scale {
            return fail(format!("t={}: {} > {} * {}", w[0].t, w[1].dist_sq, rho, w[0].dist_sq));
        }
    }
    Ok(format!("rho={rho}, 200 steps, max excess {worst:.3e}"))
}

fn c02_gd_convex_and_energy() -> Outcome {
    let mut notes = Vec::new();
    for name in ["ls_rankdef_3x3", "ls_6x2"] {
        let f = fx(name);
        let l = f.instance.constants.l()?;
        let ts: Vec<usize> = (1..=1000).collect();
        let v = verified(name, Experiment::new(Setting::GdConvex, constant(1.0 / l), 1000).checkpoints(&ts))?;
        let cfg = RunConfig::for_fixture(&f, Algorithm::Gd, constant(1.0 / l), 1000).with_iterates();
        let tr = run(&cfg, 0)?;
        let e = lyapunov_check(&cfg, &tr, EnergyKind::GdEnergy, l)?;
        if !e.pass {
            return fail(format!("{name}: energy increases at t={:?}", e.first_violation));
        }
        notes.push(format!("{} energy max_increase={:.2e}", summary(name, &v), e.max_increase));
    }
    Ok(notes.join("; "))
}

fn c03_gd_pl_nonconvex() -> Outcome {
    let base = fx("scalar_pl");
    let mu = base.instance.constants.mu_pl()?;
    if (mu - 1.0 / 40.0).abs() > 1e-15 {
        return fail(format!("mu_pl = {mu}, expected 1/40"));
    }
    let mut worst = f64::NEG_INFINITY;
    for x0 in [3.0, -7.0, 11.0] {
        let f = Fixture::new("scalar_pl", base.instance.clone(), None, vec![x0])?;
        let ts: Vec<usize> = (0..=500).collect();
        let out = verify_setting(&f, &Experiment::new(Setting::GdPl, constant(1.0 / 8.0), 500).checkpoints(&ts))?;
        if !out.verdict.pass {
            return fail(format!("x0={x0}: worst_ratio {}", out.verdict.worst_ratio));
        }
        worst = worst.max(out.verdict.worst_ratio);
    }
    Ok(format!("x0 in {{3, -7, 11}}, t <= 500, worst_ratio={worst:.4}"))
}

fn c04_sgd_strongly_convex() -> Outcome {
    let lmax = fx("ls_4x2").instance.constants.l_max()?;
    let exp = Experiment::new(Setting::SgdStronglyConvex, constant(0.9 / (2.0 * lmax)), 500)
        .trials(1000)
        .checkpoints(&[10, 100, 500]);
    Ok(summary("ls_4x2", &verified("ls_4x2", exp)?))
}

fn c05_sgd_convex_const() -> Outcome {
    let lmax = fx("ls_4x2").instance.constants.l_max()?;
    let exp = Experiment::new(Setting::SgdConvexConst, constant(1.0 / (4.0 * lmax)), 1000)
        .trials(1000)
        .checkpoints(&[100, 1000]);
    Ok(summary("ls_4x2", &verified("ls_4x2", exp)?))
}

fn c06_minibatch_enumeration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        for _ in 0..4 {
            let d = rng.gen_range(1..=3);
            let features: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let targets: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let inst = build_least_squares(features, targets)?;
            let sigma = inst.constants.sigma_star_f()?;
            let x_star = &inst.truth.x_star;
            let grad = inst.problem.grad(x_star);
            for b in 1..=n {
                let (mean, var) = enumerate_minibatch_oracle(&inst.problem, b, x_star)?;
                let expected = if b == n {
                    0.0
                } else {
                    (n - b) as f64 / (b as f64 * (n - 1) as f64) * sigma
                };
                let err_var = (var - expected).abs() / sigma.max(1.0);
                let err_mean = mean.iter().zip(&grad).map(|(a, g)| (a - g).abs()).fold(0.0, f64::max);
                worst = worst.max(err_var).max(err_mean);
                if err_var > 1e-12 || err_mean > 1e-12 {
                    return fail(format!("n={n} b={b}: variance {var} vs {expected}, mean error {err_mean:.3e}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (instance, b) pairs, max error {worst:.2e}"))
}

fn c07_minibatch_strongly_convex() -> Outcome {
    let (lb, _) = minibatch_constants(&fx("ls_6x2").instance.constants, 2)?;
    let exp = Experiment::new(Setting::MiniStronglyConvex, constant(0.9 / (2.0 * lb)), 300)
        .trials(1000)
        .batch_size(2);
    Ok(format!("b=2 L_b={lb:.4}: {}", summary("ls_6x2", &verified("ls_6x2", exp)?)))
}

fn c08_momentum_equivalence() -> Outcome {
    let mut covered = Vec::new();
    let mut worst: f64 = 0.0;
    for &name in FIXTURE_NAMES {
        let f = fx(name);
        if !f.instance.problem.is_smooth() {
            continue;
        }
        let eta = 1.0 / (4.0 * f.instance.constants.l_max()?);
        let traj = |form| -> Result<Vec<Vec<f64>>, Box<dyn Error>> {
            let cfg = RunConfig::for_fixture(&f, Algorithm::Momentum, StepSchedule::MomentumPair { eta }, 100)
                .with_seed(8)
                .with_iterates()
                .with_momentum_form(form);
            Ok(run(&cfg, 0)?.iterates()?.to_vec())
        };
        let buffer = traj(MomentumForm::Buffer)?;
        for form in [MomentumForm::HeavyBall, MomentumForm::Ima] {
            let other = traj(form)?;
            for (t, (a, b)) in buffer.iter().zip(&other).enumerate() {
                let gap = a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                worst = worst.max(gap);
                if gap > 1e-8 {
                    return fail(format!("{name} {form:?} t={t}: differs by {gap:.3e}"));
                }
            }
        }
        covered.push(name);
    }
    Ok(format!("{} smooth fixtures, max gap {worst:.2e}", covered.len()))
}

fn c09_momentum_bound() -> Outcome {
    let lmax = fx("ls_4x2").instance.constants.l_max()?;
    let exp = Experiment::new(Setting::MomentumConvex, StepSchedule::MomentumPair { eta: 1.0 / (4.0 * lmax) }, 500)
        .trials(1000)
        .checkpoints(&[50, 500]);
    Ok(summary("ls_4x2", &verified("ls_4x2", exp)?))
}

fn c10_subgradient() -> Outcome {
    let mut notes = Vec::new();
    for name in ["abs_2x1", "abs_strong_3x2"] {
        let f = fx(name);
        let c = &f.instance.constants;
        let (g, radius) = (c.g()?, c.b()?);
        let sched = StepSchedule::InvSqrt { gamma0: radius / g };
        for setting in [Setting::SsdConvexGeneral, Setting::PssdConvex] {
            let v = verified(name, Experiment::new(setting, sched, 400).trials(1000).checkpoints(&[400]))?;
            notes.push(summary(name, &v));
        }
        let cfg = RunConfig::for_fixture(&f, Algorithm::ProjectedSubgradient, sched, 400)
            .with_trials(100)
            .with_iterates();
        for tr in run_trials(&cfg)? {
            for (t, x) in tr.iterates()?.iter().enumerate() {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > radius {
                    return fail(format!("{name} trial {} t={t}: |x| = {norm} > B = {radius}", tr.trial));
                }
            }
        }
    }
    Ok(format!("{}; projected iterates feasible", notes.join("; ")))
}

fn c11_ssd_strongly_convex() -> Outcome {
    let mu = fx("abs_strong_3x2").instance.constants.mu()?;
    let gamma = (1.0 / (2.0 * mu * 10.0)).min(1.0 / mu) / 2.0;
    let exp = Experiment::new(Setting::SsdStronglyConvex, constant(gamma), 400).trials(1000);
    Ok(format!("gamma={gamma}: {}", summary("abs_strong_3x2", &verified("abs_strong_3x2", exp)?)))
}

fn c12_pgd() -> Outcome {
    let f = fx("lasso_4x2");
    let l = f.composite.as_ref().ok_or("lasso_4x2 has no regularizer")?.l();
    let ts: Vec<usize> = (1..=2000).collect();
    let v = verified("lasso_4x2", Experiment::new(Setting::PgdConvex, constant(1.0 / l), 2000).checkpoints(&ts))?;

    let cfg = RunConfig::for_fixture(&f, Algorithm::ProxGd, constant(1.0 / l), 2000).with_iterates();
    let tr = run(&cfg, 0)?;
    let scale = 1.0 + tr.rows[0].f_gap;
    for w in tr.rows.windows(2) {
        if w[1].f_gap > w[0].f_gap + 1e-12 * scale {
            return fail(format!("F increases at t={}: {} -> {}", w[0].t, w[0].f_gap, w[1].f_gap));
        }
    }
    let e = lyapunov_check(&cfg, &tr, EnergyKind::PgdEnergy, l)?;
    if !e.pass {
        return fail(format!("prox energy increases at t={:?}", e.first_violation));
    }

    let l6 = fx("lasso_6x2").composite.as_ref().ok_or("lasso_6x2 has no regularizer")?.l();
    let ts: Vec<usize> = (0..=300).collect();
    let s = verified("lasso_6x2", Experiment::new(Setting::PgdStronglyConvex, constant(1.0 / l6), 300).checkpoints(&ts))?;
    Ok(format!("{}; F monotone; {}", summary("lasso_4x2", &v), summary("lasso_6x2", &s)))
}

fn c13_spgd() -> Outcome {
    let lmax4 = fx("lasso_4x2").instance.constants.l_max()?;
    let lmax6 = fx("lasso_6x2").instance.constants.l_max()?;
    let a = verified(
        "lasso_4x2",
        Experiment::new(Setting::SpgdConvexConst, constant(0.8 / (4.0 * lmax4)), 300).trials(1000),
    )?;
    let b = verified(
        "lasso_6x2",
        Experiment::new(Setting::SpgdStronglyConvex, constant(0.5 / (2.0 * lmax6)), 300).trials(1000),
    )?;
    Ok(format!("{}; {}", summary("lasso_4x2", &a), summary("lasso_6x2", &b)))
}

/// Every corollary with a recommended step, on a fixture it applies to.
const PLUG_BACK: &[(&str, Setting, usize)] = &[
    ("ls_6x2", Setting::GdConvex, 1),
    ("ls_6x2", Setting::GdStronglyConvex, 1),
    ("scalar_pl", Setting::GdPl, 1),
    ("ls_4x2", Setting::SgdConvexConst, 1),
    ("ls_4x2", Setting::SgdStronglyConvex, 1),
    ("ls_4x2", Setting::SgdPl, 1),
    ("ls_4x2", Setting::MiniConvexConst, 2),
    ("ls_6x2", Setting::MiniStronglyConvex, 2),
    ("ls_4x2", Setting::MomentumConvex, 1),
    ("abs_2x1", Setting::SsdConvexGeneral, 1),
    ("abs_strong_3x2", Setting::SsdStronglyConvex, 1),
    ("lasso_4x2", Setting::PgdConvex, 1),
    ("lasso_6x2", Setting::PgdStronglyConvex, 1),
    ("lasso_4x2", Setting::SpgdConvexConst, 1),
    ("lasso_6x2", Setting::SpgdStronglyConvex, 1),
];

const PLUG_BACK_TRIALS: usize = 20;

fn c14_complexity_plug_back() -> Outcome {
    let mut runs = 0;
    let mut steps = 0;
    for &(name, setting, b) in PLUG_BACK {
        let f = fx(name);
        for eps in [1e-1, 1e-2] {
            let p = plug_back(&f, setting, eps, PLUG_BACK_TRIALS, b, 14)?;
            if !p.pass {
                return fail(format!(
                    "{setting} on {name} eps={eps}: after t={} at gamma={:?}, measured {} > target {} + slack {}",
                    p.t_min, p.gamma, p.measured, p.target, p.slack
                ));
            }
            runs += 1;
            steps += p.t_min * p.trials;
        }
    }
    Ok(format!("{runs} corollary runs ({} settings x 2 eps), {steps} iterations total", PLUG_BACK.len()))
}

fn c15_property_suite() -> Outcome {
    let cfg = SuiteConfig {
        samples: 10_000,
        ..SuiteConfig::default()
    };
    let mut expected = Vec::new();
    let mut checks = 0;
    for &name in FIXTURE_NAMES {
        let report = property_suite(&fx(name), &cfg);
        for c in &report.checks {
            checks += 1;
            match c.status {
                CheckStatus::Pass => {}
                CheckStatus::Fail => {
                    return fail(format!("{name}: {} violated by {:.3e}", c.name, c.max_violation));
                }
                CheckStatus::ExpectedFail => expected.push((name, c.name.clone())),
            }
        }
    }
    let want: Vec<(&str, String)> = EXPECTED_FAILURES.iter().map(|&(f, c)| (f, c.to_string())).collect();
    if expected != want {
        return fail(format!("expected-fail set {expected:?}, wanted {want:?}"));
    }
    Ok(format!("{checks} checks on {} fixtures; expected-fail: {expected:?}", FIXTURE_NAMES.len()))
}

fn c16_cli_determinism() -> Outcome {
    let dir = tempfile::tempdir()?;
    let cfg = dir.path().join("sgd.toml");
    std::fs::write(
        &cfg,
        r#"
algorithm = "minibatch_sgd"
iterations = 200
trials = 8
b = 2
seed = 16

[problem]
fixture = "ls_6x2"

[schedule]
kind = "inv_sqrt"
gamma0 = 0.5
unit = "1/L_max"
"#,
    )?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_descentlab"))
            .arg("run")
            .arg("--config")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out)
            .env_remove("DESCENTLAB_FIXTURES")
            .output()?;
        if !status.status.success() {
            return fail(format!("run {run} exited {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)));
        }
        outputs.push(std::fs::read(out.join("trace.csv"))?);
    }
    if outputs[0] != outputs[1] {
        return fail("trace.csv differs between identical runs".into());
    }
    Ok(format!("{} bytes identical across two runs", outputs[0].len()))
}

type Criterion = (u8, &'static str, u64, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    (1, "GD strong-convexity contraction", 1, c01_gd_contraction),
    (2, "GD convex bound and energy", 1, c02_gd_convex_and_energy),
    (3, "GD on nonconvex PL function", 1, c03_gd_pl_nonconvex),
    (4, "SGD strongly convex envelope", 30, c04_sgd_strongly_convex),
    (5, "SGD convex averaged envelope", 60, c05_sgd_convex_const),
    (6, "minibatch exactness", 5, c06_minibatch_enumeration),
    (7, "minibatch strongly convex envelope", 30, c07_minibatch_strongly_convex),
    (8, "momentum triple equivalence", 1, c08_momentum_equivalence),
    (9, "momentum bound", 60, c09_momentum_bound),
    (10, "SSD and PSSD", 60, c10_subgradient),
    (11, "strongly convex SSD", 30, c11_ssd_strongly_convex),
    (12, "PGD", 2, c12_pgd),
    (13, "SPGD", 60, c13_spgd),
    (14, "complexity plug-back", 120, c14_complexity_plug_back),
    (15, "property suite", 10, c15_property_suite),
    (16, "CLI determinism", 60, c16_cli_determinism),
];

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for &(id, title, budget, check) in CRITERIA {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let budget = Duration::from_secs(budget);
        let (pass, detail) = match result {
            Ok(Ok(detail)) if elapsed < budget => (true, detail),
            Ok(Ok(detail)) => (false, format!("{detail}; over budget")),
            Ok(Err(e)) => (false, e.to_string()),
            Err(panic) => (
                false,
                panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panicked".into()),
            ),
        };
        println!(
            "criterion {id:02} {} {title} [{:.2}s / {}s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
