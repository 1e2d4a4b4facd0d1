use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, StepSchedule};
use crate::error::{Error, Result};
use crate::problems::minibatch_constants;
use crate::scalar::Scalar;
use crate::theory::TheoryInputs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    GdConvex,
    GdStronglyConvex,
    GdPl,
    SgdConvexGeneral,
    SgdConvexConst,
    SgdConvexInvsqrt,
    SgdStronglyConvex,
    SgdPl,
    MiniConvexGeneral,
    MiniConvexConst,
    MiniStronglyConvex,
    MomentumConvex,
    SsdConvexGeneral,
    SsdConvexInvsqrt,
    PssdConvex,
    SsdStronglyConvex,
    PgdConvex,
    PgdStronglyConvex,
    SpgdConvexGeneral,
    SpgdConvexConst,
    SpgdConvexInvsqrt,
    SpgdStronglyConvex,
}

impl Setting {
    pub const ALL: [Setting; 22] = [
        Setting::GdConvex,
        Setting::GdStronglyConvex,
        Setting::GdPl,
        Setting::SgdConvexGeneral,
        Setting::SgdConvexConst,
        Setting::SgdConvexInvsqrt,
        Setting::SgdStronglyConvex,
        Setting::SgdPl,
        Setting::MiniConvexGeneral,
        Setting::MiniConvexConst,
        Setting::MiniStronglyConvex,
        Setting::MomentumConvex,
        Setting::SsdConvexGeneral,
        Setting::SsdConvexInvsqrt,
        Setting::PssdConvex,
        Setting::SsdStronglyConvex,
        Setting::PgdConvex,
        Setting::PgdStronglyConvex,
        Setting::SpgdConvexGeneral,
        Setting::SpgdConvexConst,
        Setting::SpgdConvexInvsqrt,
        Setting::SpgdStronglyConvex,
    ];

    pub fn name(self) -> &'static str {
        use Setting::*;
        match self {
            GdConvex => "gd_convex",
            GdStronglyConvex => "gd_strongly_convex",
            GdPl => "gd_pl",
            SgdConvexGeneral => "sgd_convex_general",
            SgdConvexConst => "sgd_convex_const",
            SgdConvexInvsqrt => "sgd_convex_invsqrt",
            SgdStronglyConvex => "sgd_strongly_convex",
            SgdPl => "sgd_pl",
            MiniConvexGeneral => "mini_convex_general",
            MiniConvexConst => "mini_convex_const",
            MiniStronglyConvex => "mini_strongly_convex",
            MomentumConvex => "momentum_convex",
            SsdConvexGeneral => "ssd_convex_general",
            SsdConvexInvsqrt => "ssd_convex_invsqrt",
            PssdConvex => "pssd_convex",
            SsdStronglyConvex => "ssd_strongly_convex",
            PgdConvex => "pgd_convex",
            PgdStronglyConvex => "pgd_strongly_convex",
            SpgdConvexGeneral => "spgd_convex_general",
            SpgdConvexConst => "spgd_convex_const",
            SpgdConvexInvsqrt => "spgd_convex_invsqrt",
            SpgdStronglyConvex => "spgd_strongly_convex",
        }
    }

    /// The method whose iterates the bound speaks about.
    pub fn algorithm(self) -> Algorithm {
        use Setting::*;
        match self {
            GdConvex | GdStronglyConvex | GdPl => Algorithm::Gd,
            SgdConvexGeneral | SgdConvexConst | SgdConvexInvsqrt | SgdStronglyConvex | SgdPl => Algorithm::Sgd,
            MiniConvexGeneral | MiniConvexConst | MiniStronglyConvex => Algorithm::MinibatchSgd,
            MomentumConvex => Algorithm::Momentum,
            SsdConvexGeneral | SsdConvexInvsqrt => Algorithm::Subgradient,
            PssdConvex | SsdStronglyConvex => Algorithm::ProjectedSubgradient,
            PgdConvex | PgdStronglyConvex => Algorithm::ProxGd,
            SpgdConvexGeneral | SpgdConvexConst | SpgdConvexInvsqrt | SpgdStronglyConvex => Algorithm::ProxSgd,
        }
    }

    pub fn is_deterministic(self) -> bool {
        self.algorithm().is_deterministic()
    }

    /// Settings whose corollary targets `ε` times the initial quantity.
    pub fn is_relative(self) -> bool {
        matches!(self, Setting::GdStronglyConvex | Setting::GdPl | Setting::PgdStronglyConvex)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Setting::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown setting {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub min_t: usize,
    /// Hypotheses that were checked when the curve was built.
    pub constraints: Vec<String>,
}

/// Constants resolved for one setting; unused slots stay zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Resolved<S: Scalar> {
    /// Smoothness entering the step restriction (L, L_max or L_b).
    l: S,
    mu: S,
    /// Noise term: σ*_f, σ*_b, σ*_F or G².
    noise: S,
    /// Extra constant: L·L_max·Δ*_f for sgd_pl, B² for pssd.
    extra: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve<S: Scalar> {
    pub setting: Setting,
    pub inputs: TheoryInputs<S>,
    pub schedule: StepSchedule<S>,
    pub validity: Validity,
    /// Smoothness used by `p_{t,k}` weights for settings that average with them.
    pub l_ref: Option<S>,
    r: Resolved<S>,
}

struct Checker<'a> {
    setting: Setting,
    done: &'a mut Vec<String>,
}

impl Checker<'_> {
    fn le<S: Scalar>(&mut self, name: &str, lhs: S, rhs_name: &str, rhs: S) -> Result<()> {
        let c = format!("{name} ≤ {rhs_name}");
        if lhs <= rhs * (S::one() + S::lit(1e-12)) {
            self.done.push(c);
            Ok(())
        } else {
            Err(self.fail(format!("{c} ({name} = {lhs}, {rhs_name} = {rhs})")))
        }
    }

    fn lt<S: Scalar>(&mut self, name: &str, lhs: S, rhs_name: &str, rhs: S) -> Result<()> {
        let c = format!("{name} < {rhs_name}");
        if lhs < rhs {
            self.done.push(c);
            Ok(())
        } else {
            Err(self.fail(format!("{c} ({name} = {lhs}, {rhs_name} = {rhs})")))
        }
    }

    fn positive<S: Scalar>(&mut self, name: &str, v: S) -> Result<()> {
        let c = format!("{name} > 0");
        if v > S::zero() {
            self.done.push(c);
            Ok(())
        } else {
            Err(self.fail(format!("{c} ({name} = {v})")))
        }
    }

    fn schedule<S: Scalar>(&mut self, ok: bool, want: &str, got: &StepSchedule<S>) -> Result<()> {
        if ok {
            self.done.push(format!("{want} schedule"));
            Ok(())
        } else {
            Err(self.fail(format!("{want} schedule required (got {})", got.name())))
        }
    }

    fn fail(&self, constraint: String) -> Error {
        Error::Hypothesis {
            setting: self.setting.name().to_string(),
            constraint,
        }
    }
}

fn is_const<S: Scalar>(s: &StepSchedule<S>) -> bool {
    matches!(s, StepSchedule::Constant { .. } | StepSchedule::HorizonConstant { .. })
}

fn is_inv_sqrt<S: Scalar>(s: &StepSchedule<S>) -> bool {
    matches!(s, StepSchedule::InvSqrt { .. })
}

/// Builds the right-hand side of the theorem behind `setting`, after
/// checking its hypotheses on the supplied schedule and constants.
pub fn bound_curve<S: Scalar>(
    setting: Setting,
    inputs: &TheoryInputs<S>,
    schedule: StepSchedule<S>,
) -> Result<BoundCurve<S>> {
    use Setting::*;
    schedule.validate()?;
    let c = &inputs.constants;
    let mut done = Vec::new();
    let mut ck = Checker {
        setting,
        done: &mut done,
    };
    let gamma0 = schedule.gamma(0);
    let two = S::lit(2.0);
    let mut r = Resolved::default();
    let mut min_t = 0;
    let mut l_ref = None;

    match setting {
        GdConvex | GdStronglyConvex | GdPl | PgdConvex | PgdStronglyConvex => {
            ck.schedule(is_const(&schedule), "constant", &schedule)?;
            r.l = c.l()?;
            ck.le("gamma", gamma0, "1/L", S::one() / r.l)?;
            match setting {
                GdConvex | PgdConvex => min_t = 1,
                GdPl => {
                    r.mu = c.mu_pl()?;
                    ck.positive("mu_pl", r.mu)?;
                }
                _ => {
                    r.mu = c.mu()?;
                    ck.positive("mu", r.mu)?;
                }
            }
        }
        SgdConvexGeneral | SgdConvexConst | SgdConvexInvsqrt | SgdStronglyConvex => {
            r.l = c.l_max()?;
            r.noise = c.sigma_star_f()?;
            let cap = S::one() / (two * r.l);
            match setting {
                SgdConvexGeneral => {
                    ck.lt("gamma_t", gamma0, "1/(2L_max)", cap)?;
                    min_t = 1;
                    l_ref = Some(r.l);
                }
                SgdConvexConst => {
                    ck.schedule(is_const(&schedule), "constant", &schedule)?;
                    ck.lt("gamma", gamma0, "1/(2L_max)", cap)?;
                    min_t = 1;
                }
                SgdConvexInvsqrt => {
                    ck.schedule(is_inv_sqrt(&schedule), "inv_sqrt", &schedule)?;
                    ck.lt("gamma0", gamma0, "1/(2L_max)", cap)?;
                    min_t = 49;
                    l_ref = Some(r.l);
                }
                _ => {
                    ck.schedule(is_const(&schedule), "constant", &schedule)?;
                    ck.le("gamma", gamma0, "1/(2L_max)", cap)?;
                    r.mu = c.mu()?;
                    ck.positive("mu", r.mu)?;
                }
            }
        }
        SgdPl => {
            ck.schedule(is_const(&schedule), "constant", &schedule)?;
            let l = c.l()?;
            let l_max = c.l_max()?;
            r.mu = c.mu_pl()?;
            ck.positive("mu_pl", r.mu)?;
            ck.le("gamma", gamma0, "mu/(L·L_max)", r.mu / (l * l_max))?;
            r.extra = l * l_max * c.delta_star_f()?;
        }
        MiniConvexGeneral | MiniConvexConst | MiniStronglyConvex => {
            let b = inputs.batch_size.ok_or(Error::MissingConstant("b"))?;
            let (l_b, sigma_b) = minibatch_constants(c, b)?;
            r.l = l_b;
            r.noise = sigma_b;
            let cap = S::one() / (two * l_b);
            match setting {
                MiniConvexGeneral => {
                    ck.lt("gamma_t", gamma0, "1/(2L_b)", cap)?;
                    min_t = 1;
                    l_ref = Some(l_b);
                }
                MiniConvexConst => {
                    ck.schedule(is_const(&schedule), "constant", &schedule)?;
                    ck.lt("gamma", gamma0, "1/(2L_b)", cap)?;
                    min_t = 1;
                }
                _ => {
                    ck.schedule(is_const(&schedule), "constant", &schedule)?;
                    ck.le("gamma", gamma0, "1/(2L_b)", cap)?;
                    r.mu = c.mu()?;
                    ck.positive("mu", r.mu)?;
                }
            }
        }
        MomentumConvex => {
            let eta = match schedule {
                StepSchedule::MomentumPair { eta } => eta,
                _ => return Err(ck.fail(format!("momentum_pair schedule required (got {})", schedule.name()))),
            };
            r.l = c.l_max()?;
            r.noise = c.sigma_star_f()?;
            ck.le("eta", eta, "1/(4L_max)", S::one() / (S::lit(4.0) * r.l))?;
        }
        SsdConvexGeneral | SsdConvexInvsqrt => {
            let g = c.g()?;
            r.noise = g * g;
            if setting == SsdConvexInvsqrt {
                ck.schedule(is_inv_sqrt(&schedule), "inv_sqrt", &schedule)?;
                min_t = 2;
            } else {
                min_t = 1;
            }
        }
        PssdConvex => {
            ck.schedule(is_inv_sqrt(&schedule), "inv_sqrt", &schedule)?;
            let g = c.g()?;
            let b = c.b()?;
            r.noise = g * g;
            r.extra = b * b;
            min_t = 2;
        }
        SsdStronglyConvex => {
            ck.schedule(is_const(&schedule), "constant", &schedule)?;
            let g = c.g()?;
            r.noise = g * g;
            r.mu = c.mu()?;
            ck.positive("mu", r.mu)?;
            ck.le("gamma", gamma0, "1/mu", S::one() / r.mu)?;
        }
        SpgdConvexGeneral | SpgdConvexConst | SpgdConvexInvsqrt | SpgdStronglyConvex => {
            r.l = c.l_max()?;
            r.noise = c.sigma_star_cap_f()?;
            match setting {
                SpgdStronglyConvex => {
                    ck.schedule(is_const(&schedule), "constant", &schedule)?;
                    ck.le("gamma", gamma0, "1/(2L_max)", S::one() / (two * r.l))?;
                    r.mu = c.mu()?;
                    ck.positive("mu", r.mu)?;
                }
                _ => {
                    inputs.cap_f0_gap()?;
                    let cap = S::one() / (S::lit(4.0) * r.l);
                    match setting {
                        SpgdConvexConst => {
                            ck.schedule(is_const(&schedule), "constant", &schedule)?;
                            ck.lt("gamma", gamma0, "1/(4L_max)", cap)?;
                            min_t = 1;
                        }
                        SpgdConvexInvsqrt => {
                            ck.schedule(is_inv_sqrt(&schedule), "inv_sqrt", &schedule)?;
                            ck.lt("gamma0", gamma0, "1/(4L_max)", cap)?;
                            min_t = 3;
                        }
                        _ => {
                            ck.schedule(
                                !matches!(schedule, StepSchedule::MomentumPair { .. }),
                                "nonincreasing",
                                &schedule,
                            )?;
                            ck.lt("gamma0", gamma0, "1/(4L_max)", cap)?;
                            min_t = 1;
                        }
                    }
                }
            }
        }
    }

    Ok(BoundCurve {
        setting,
        inputs: inputs.clone(),
        schedule,
        validity: Validity {
            min_t,
            constraints: done,
        },
        l_ref,
        r,
    })
}

impl<S: Scalar> BoundCurve<S> {
    pub fn check(&self, t: usize) -> Result<()> {
        if t < self.validity.min_t {
            Err(Error::OutsideValidity {
                t,
                min_t: self.validity.min_t,
            })
        } else {
            Ok(())
        }
    }

    /// Bound at iteration `t`.
    pub fn eval(&self, t: usize) -> Result<S> {
        use Setting::*;
        self.check(t)?;
        let r = &self.r;
        let init = &self.inputs.init;
        let d2 = init.d_sq;
        let gamma = self.schedule.gamma(0);
        let one = S::one();
        let two = S::lit(2.0);
        let four = S::lit(4.0);
        let tf = S::of(t);
        let contraction = |mu: S| (one - gamma * mu).max(S::zero()).powi(t as i32);

        let v = match self.setting {
            GdConvex | PgdConvex => d2 / (two * gamma * tf),
            GdStronglyConvex | PgdStronglyConvex => contraction(r.mu) * d2,
            GdPl => contraction(r.mu) * init.f0_gap,
            SgdConvexGeneral | MiniConvexGeneral => {
                let (mut den, mut sq) = (S::zero(), S::zero());
                for k in 0..t {
                    let g = self.schedule.gamma(k);
                    den = den + g * (one - two * g * r.l);
                    sq = sq + g * g;
                }
                d2 / (two * den) + sq / den * r.noise
            }
            SgdConvexConst | MiniConvexConst => {
                let q = one - two * gamma * r.l;
                d2 / (two * gamma * q * tf) + gamma * r.noise / q
            }
            SgdConvexInvsqrt => {
                let rt = tf.sqrt();
                d2 / (two * gamma * rt) + gamma * tf.ln() * r.noise / rt
            }
            SgdStronglyConvex | MiniStronglyConvex | SpgdStronglyConvex => {
                contraction(r.mu) * d2 + two * gamma * r.noise / r.mu
            }
            SgdPl => contraction(r.mu) * init.f0_gap + gamma * r.extra / r.mu,
            MomentumConvex => {
                let eta = match self.schedule {
                    StepSchedule::MomentumPair { eta } => eta,
                    _ => unreachable!("checked at construction"),
                };
                d2 / (eta * (tf + one)) + two * eta * r.noise
            }
            SsdConvexGeneral => {
                let (mut sum, mut sq) = (S::zero(), S::zero());
                for k in 0..t {
                    let g = self.schedule.gamma(k);
                    sum = sum + g;
                    sq = sq + g * g;
                }
                d2 / (two * sum) + sq * r.noise / (two * sum)
            }
            SsdConvexInvsqrt => {
                let den = tf.sqrt() - one;
                d2 / (four * gamma * den) + gamma * r.noise * tf.ln() / (four * den)
            }
            PssdConvex => (S::lit(3.0) * r.extra / gamma + gamma * r.noise) / tf.sqrt(),
            SsdStronglyConvex => contraction(r.mu) * d2 + gamma * r.noise / r.mu,
            SpgdConvexGeneral | SpgdConvexConst | SpgdConvexInvsqrt => {
                let f0 = self.inputs.cap_f0_gap()?;
                let q = one - four * gamma * r.l;
                let (sum, sq) = match self.setting {
                    SpgdConvexConst => (gamma * tf, gamma * gamma * tf),
                    SpgdConvexInvsqrt => (two * gamma * (tf.sqrt() - two.sqrt()), gamma * gamma * tf.ln()),
                    _ => (0..t).fold((S::zero(), S::zero()), |(a, b), k| {
                        let g = self.schedule.gamma(k);
                        (a + g, b + g * g)
                    }),
                };
                (d2 + two * gamma * f0) / (two * q * sum) + two * r.noise / q * sq / sum
            }
        };
        Ok(v)
    }

    /// Per-step contraction factor for the settings stated as one-step
    /// inequalities (`1 − γμ`), `None` elsewhere.
    pub fn step_contraction(&self) -> Option<S> {
        match self.setting {
            Setting::GdStronglyConvex | Setting::PgdStronglyConvex => {
                Some(S::one() - self.schedule.gamma(0) * self.r.mu)
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemConstants;
    use crate::theory::Init;

    fn inputs(c: ProblemConstants<f64>, d_sq: f64, f0: f64) -> TheoryInputs<f64> {
        TheoryInputs::new(
            c,
            Init {
                d_sq,
                f0_gap: f0,
                cap_f0_gap: Some(f0),
            },
        )
    }

    #[test]
    fn names_round_trip() {
        for s in Setting::ALL {
            assert_eq!(s.name().parse::<Setting>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
    }

    #[test]
    fn gd_examples() {
        let c = ProblemConstants {
            l: Some(1.0),
            mu: Some(1.0),
            ..Default::default()
        };
        let curve = bound_curve(Setting::GdStronglyConvex, &inputs(c.clone(), 3.0, 1.0), StepSchedule::Constant { gamma: 1.0 }).unwrap();
        assert_eq!(curve.eval(0).unwrap(), 3.0);
        for t in 1..5 {
            assert_eq!(curve.eval(t).unwrap(), 0.0);
        }
        let convex = bound_curve(Setting::GdConvex, &inputs(c, 1.0, 1.0), StepSchedule::Constant { gamma: 0.5 }).unwrap();
        assert!((convex.eval(10).unwrap() - 0.1).abs() < 1e-16);
        assert!(matches!(convex.eval(0), Err(Error::OutsideValidity { t: 0, min_t: 1 })));
    }

    #[test]
    fn hypothesis_is_named() {
        let c = ProblemConstants {
            l: Some(2.0),
            mu: Some(1.0),
            ..Default::default()
        };
        let err = bound_curve(Setting::GdConvex, &inputs(c, 1.0, 1.0), StepSchedule::Constant { gamma: 1.0 }).unwrap_err();
        assert!(err.to_string().contains("gamma ≤ 1/L"), "{err}");
    }

    #[test]
    fn missing_constant_is_named() {
        let c = ProblemConstants {
            l_max: Some(2.0),
            mu: Some(1.0),
            ..Default::default()
        };
        let err = bound_curve(Setting::SgdStronglyConvex, &inputs(c, 1.0, 1.0), StepSchedule::Constant { gamma: 0.1 }).unwrap_err();
        assert_eq!(err, Error::MissingConstant("sigma_star_f"));
    }

    #[test]
    fn sgd_strongly_convex_matches_unrolled_recursion() {
        let (gamma, mu, d2, sigma) = (0.05, 0.75, 4.0, 0.8);
        let c = ProblemConstants {
            l_max: Some(2.0),
            mu: Some(mu),
            sigma_star_f: Some(sigma),
            ..Default::default()
        };
        let curve = bound_curve(Setting::SgdStronglyConvex, &inputs(c, d2, 1.0), StepSchedule::Constant { gamma }).unwrap();
        let mut e = d2;
        for t in 0..1000 {
            assert!(e <= curve.eval(t).unwrap() * (1.0 + 1e-12), "t={t}");
            e = (1.0 - gamma * mu) * e + 2.0 * gamma * gamma * sigma;
        }
    }

    #[test]
    fn momentum_display() {
        let c = ProblemConstants {
            l_max: Some(2.0),
            sigma_star_f: Some(0.5),
            ..Default::default()
        };
        let curve = bound_curve(Setting::MomentumConvex, &inputs(c, 2.0, 1.0), StepSchedule::MomentumPair { eta: 0.125 }).unwrap();
        assert!((curve.eval(7).unwrap() - (2.0 / (0.125 * 8.0) + 2.0 * 0.125 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn invsqrt_windows() {
        let c = ProblemConstants {
            l_max: Some(1.0),
            sigma_star_f: Some(1.0),
            sigma_star_cap_f: Some(1.0),
            g: Some(1.0),
            b: Some(1.0),
            ..Default::default()
        };
        let i = inputs(c, 1.0, 1.0);
        let s = StepSchedule::InvSqrt { gamma0: 0.1 };
        assert_eq!(bound_curve(Setting::SgdConvexInvsqrt, &i, s).unwrap().validity.min_t, 49);
        assert_eq!(bound_curve(Setting::SpgdConvexInvsqrt, &i, s).unwrap().validity.min_t, 3);
        assert_eq!(bound_curve(Setting::PssdConvex, &i, s).unwrap().validity.min_t, 2);
        assert!(bound_curve(Setting::SgdConvexInvsqrt, &i, StepSchedule::InvSqrt { gamma0: 0.5 }).is_err());
    }

    #[test]
    fn constant_general_equals_const_form() {
        let c = ProblemConstants {
            l_max: Some(2.0),
            sigma_star_f: Some(0.3),
            ..Default::default()
        };
        let i = inputs(c, 1.5, 1.0);
        let s = StepSchedule::Constant { gamma: 0.2 };
        let a = bound_curve(Setting::SgdConvexGeneral, &i, s).unwrap();
        let b = bound_curve(Setting::SgdConvexConst, &i, s).unwrap();
        for t in [1, 10, 100] {
            let (x, y) = (a.eval(t).unwrap(), b.eval(t).unwrap());
            assert!((x - y).abs() <= 1e-12 * y);
        }
    }
}
