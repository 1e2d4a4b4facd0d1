//! The core runs at `f32` too; only the tolerances change.

use descentlab::algorithms::{run, Algorithm, RunConfig, StepSchedule};
use descentlab::harness::{verify_setting, Experiment};
use descentlab::problems::fixture;
use descentlab::theory::{complexity_iterations, Setting};

#[test]
fn gd_contracts_in_single_precision() {
    let fx = fixture::<f32>("ls_6x2").unwrap();
    let c = &fx.instance.constants;
    let (l, mu) = (c.l().unwrap(), c.mu().unwrap());
    let tr = run(&RunConfig::for_fixture(&fx, Algorithm::Gd, StepSchedule::Constant { gamma: 1.0 / l }, 60), 0).unwrap();
    let rho = 1.0 - mu / l;
    for w in tr.rows.windows(2) {
        assert!(w[1].dist_sq <= rho * w[0].dist_sq + 1e-6, "t={}", w[0].t);
    }
    assert!(tr.rows[60].dist_sq < 1e-5);
}

#[test]
fn bounds_and_complexity_in_single_precision() {
    let fx = fixture::<f32>("ls_4x2").unwrap();
    let out = verify_setting(&fx, &Experiment::new(Setting::SgdStronglyConvex, StepSchedule::Constant { gamma: 0.1f32 }, 200).trials(100))
        .unwrap();
    assert!(out.verdict.pass, "{:?}", out.verdict);

    let inputs = fx.inputs_for(Algorithm::Gd);
    let a = complexity_iterations(Setting::GdConvex, &inputs, 1e-2f32).unwrap();
    let b = complexity_iterations(Setting::GdConvex, &fixture::<f64>("ls_4x2").unwrap().inputs_for(Algorithm::Gd), 1e-2).unwrap();
    assert!(a.t_min.abs_diff(b.t_min) <= 1);
}
