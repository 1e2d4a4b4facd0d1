//! Every theorem bound against the algorithm it describes, on fixtures.

use descentlab::algorithms::StepSchedule;
use descentlab::harness::{verify_setting, Experiment};
use descentlab::problems::fixture;
use descentlab::theory::Setting;

fn check(name: &str, exp: Experiment<f64>) {
    let fx = fixture::<f64>(name).unwrap();
    let out = verify_setting(&fx, &exp).unwrap_or_else(|e| panic!("{} on {name}: {e}", exp.setting));
    let v = &out.verdict;
    assert!(
        v.pass,
        "{} on {name}: measured {:?} bound {:?} slack {:?}",
        v.setting, v.measured, v.bound, v.slack
    );
}

fn c(gamma: f64) -> StepSchedule<f64> {
    StepSchedule::Constant { gamma }
}

const M: usize = 200;

#[test]
fn gd_settings() {
    check("ls_6x2", Experiment::new(Setting::GdConvex, c(1.0 / fixture::<f64>("ls_6x2").unwrap().instance.constants.l.unwrap()), 500));
    check("ls_rankdef_3x3", Experiment::new(Setting::GdConvex, c(0.1), 500));
    check("ls_6x2", Experiment::new(Setting::GdStronglyConvex, c(0.2), 300));
    check("scalar_pl", Experiment::new(Setting::GdPl, c(1.0 / 8.0), 500));
    check("ls_rankdef_3x3", Experiment::new(Setting::GdPl, c(0.1), 300));
}

#[test]
fn sgd_settings() {
    check("ls_4x2", Experiment::new(Setting::SgdConvexGeneral, StepSchedule::InvSqrt { gamma0: 0.2 }, 300).trials(M));
    check("ls_4x2", Experiment::new(Setting::SgdConvexConst, c(0.2), 300).trials(M));
    check("ls_4x2", Experiment::new(Setting::SgdConvexInvsqrt, StepSchedule::InvSqrt { gamma0: 0.2 }, 300).trials(M));
    check("ls_6x2", Experiment::new(Setting::SgdStronglyConvex, c(0.05), 300).trials(M));
    check("ls_4x2", Experiment::new(Setting::SgdPl, c(0.75 / (0.75 * 2.0)), 300).trials(M));
}

#[test]
fn minibatch_settings() {
    for b in [1, 2, 3, 6] {
        check("ls_6x2", Experiment::new(Setting::MiniConvexGeneral, StepSchedule::InvSqrt { gamma0: 0.05 }, 300).trials(M).batch_size(b));
        check("ls_6x2", Experiment::new(Setting::MiniConvexConst, c(0.05), 300).trials(M).batch_size(b));
        check("ls_6x2", Experiment::new(Setting::MiniStronglyConvex, c(0.05), 300).trials(M).batch_size(b));
    }
}

#[test]
fn momentum_setting() {
    check("ls_4x2", Experiment::new(Setting::MomentumConvex, StepSchedule::MomentumPair { eta: 0.125 }, 300).trials(M));
}

#[test]
fn subgradient_settings() {
    check("abs_2x1", Experiment::new(Setting::SsdConvexGeneral, StepSchedule::InvSqrt { gamma0: 0.5 }, 400).trials(M));
    check("abs_2x1", Experiment::new(Setting::SsdConvexInvsqrt, StepSchedule::InvSqrt { gamma0: 0.5 }, 400).trials(M));
    check("abs_strong_3x2", Experiment::new(Setting::SsdConvexGeneral, c(0.05), 400).trials(M));
    check("abs_2x1", Experiment::new(Setting::PssdConvex, StepSchedule::InvSqrt { gamma0: 0.5 }, 400).trials(M));
    check("abs_strong_3x2", Experiment::new(Setting::SsdStronglyConvex, c(0.5), 400).trials(M));
}

#[test]
fn prox_settings() {
    let l = fixture::<f64>("lasso_4x2").unwrap().composite.unwrap().l();
    check("lasso_4x2", Experiment::new(Setting::PgdConvex, c(1.0 / l), 500));
    check("lasso_6x2", Experiment::new(Setting::PgdStronglyConvex, c(0.2), 300));
    check("lasso_4x2", Experiment::new(Setting::SpgdConvexGeneral, StepSchedule::InvSqrt { gamma0: 0.1 }, 300).trials(M));
    check("lasso_4x2", Experiment::new(Setting::SpgdConvexConst, c(0.1), 300).trials(M));
    check("lasso_4x2", Experiment::new(Setting::SpgdConvexInvsqrt, StepSchedule::InvSqrt { gamma0: 0.1 }, 300).trials(M));
    check("lasso_6x2", Experiment::new(Setting::SpgdStronglyConvex, c(0.05), 300).trials(M));
    check("ls_4x2", Experiment::new(Setting::SpgdConvexConst, c(0.1), 300).trials(M));
}
