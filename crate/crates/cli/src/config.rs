//! TOML experiment configuration.
//!
//! ```toml
//! setting = "sgd_strongly_convex"
//! iterations = 500
//! trials = 1000
//! seed = 7
//! checkpoints = [10, 100, 500]
//!
//! [problem]
//! fixture = "ls_4x2"
//!
//! [schedule]
//! kind = "constant"
//! gamma = 0.9
//! unit = "1/(2L_max)"
//! ```
//!
//! Inline problems replace `fixture` with `kind` plus data:
//! `least_squares` takes `features` and `targets`, `abs_loss` takes `rows`,
//! `targets`, `strong_mu` and `ball_B`. Any problem may set `x0`.

use std::fmt;
use std::path::{Path, PathBuf};

use descentlab::algorithms::{Algorithm, MomentumForm, RunConfig, StepSchedule};
use descentlab::harness::Experiment;
use descentlab::nonsmooth::Regularizer;
use descentlab::problems::{build_abs_loss, build_composite, build_least_squares, fixture, Fixture, FIXTURE_NAMES};
use descentlab::theory::Setting;
use serde::{Deserialize, Serialize};

pub const FIXTURES_ENV: &str = "DESCENTLAB_FIXTURES";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setting: Option<Setting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default = "one")]
    pub b: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum_form: Option<MomentumForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub problem: ProblemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularizer: Option<RegularizerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InlineKind {
    LeastSquares,
    AbsLoss,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<InlineKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strong_mu: Option<f64>,
    #[serde(rename = "ball_B", default, skip_serializing_if = "Option::is_none")]
    pub ball_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    InvSqrt,
    MomentumPair,
    HorizonConstant,
    ConstantMomentum,
}

/// Unit the step parameter is expressed in; `gamma = 0.9` with
/// `unit = "1/(2L_max)"` means `γ = 0.9/(2L_max)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepUnit {
    #[default]
    #[serde(rename = "1")]
    Absolute,
    #[serde(rename = "1/L")]
    InvL,
    #[serde(rename = "1/L_max")]
    InvLMax,
    #[serde(rename = "1/(2L_max)")]
    InvTwoLMax,
    #[serde(rename = "1/(4L_max)")]
    InvFourLMax,
    #[serde(rename = "1/mu")]
    InvMu,
}

impl fmt::Display for StepUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepUnit::Absolute => "1",
            StepUnit::InvL => "1/L",
            StepUnit::InvLMax => "1/L_max",
            StepUnit::InvTwoLMax => "1/(2L_max)",
            StepUnit::InvFourLMax => "1/(4L_max)",
            StepUnit::InvMu => "1/mu",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<StepUnit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegularizerSpec {
    Zero,
    L1 { lambda: f64 },
    BallIndicator {
        #[serde(rename = "B")]
        radius: f64,
    },
}

impl From<RegularizerSpec> for Regularizer<f64> {
    fn from(r: RegularizerSpec) -> Self {
        match r {
            RegularizerSpec::Zero => Regularizer::Zero,
            RegularizerSpec::L1 { lambda } => Regularizer::L1 { lambda },
            RegularizerSpec::BallIndicator { radius } => Regularizer::BallIndicator { radius },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

/// Configuration problems; the CLI maps these to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Algorithm to run: explicit, or the one the setting is about.
    pub fn algorithm(&self) -> Result<Algorithm, ConfigError> {
        match (self.algorithm, self.setting) {
            (Some(a), Some(s)) if a != s.algorithm() => err(format!(
                "field algorithm: {} does not match setting {} (which needs {})",
                a.name(),
                s,
                s.algorithm().name()
            )),
            (Some(a), _) => Ok(a),
            (None, Some(s)) => Ok(s.algorithm()),
            (None, None) => err("missing field algorithm (or setting)"),
        }
    }

    pub fn iterations(&self) -> Result<usize, ConfigError> {
        self.iterations.ok_or_else(|| ConfigError("missing field iterations".into()))
    }

    /// The problem, with the configured regularizer attached.
    pub fn fixture(&self) -> Result<Fixture<f64>, ConfigError> {
        let mut fx = resolve_problem(&self.problem)?;
        if let Some(reg) = self.regularizer {
            let reg: Regularizer<f64> = reg.into();
            reg.validate().map_err(|e| ConfigError(format!("regularizer: {e}")))?;
            let cp = if reg.is_zero() {
                None
            } else {
                Some(build_composite(&fx.instance, reg).map_err(|e| ConfigError(format!("regularizer: {e}")))?)
            };
            fx = Fixture::new(&fx.name, fx.instance, cp, fx.x0).map_err(|e| ConfigError(e.to_string()))?;
        }
        Ok(fx)
    }

    pub fn schedule(&self, fx: &Fixture<f64>) -> Result<StepSchedule<f64>, ConfigError> {
        let Some(spec) = &self.schedule else {
            return err("missing section [schedule]");
        };
        spec.resolve(fx)
    }

    /// Full run configuration, with every cross-field rule checked.
    pub fn run_config(&self, fx: &Fixture<f64>) -> Result<RunConfig<f64>, ConfigError> {
        let algorithm = self.algorithm()?;
        let cfg = RunConfig::for_fixture(fx, algorithm, self.schedule(fx)?, self.iterations()?)
            .with_trials(self.trials)
            .with_batch_size(self.b)
            .with_seed(self.seed)
            .with_momentum_form(self.momentum_form.unwrap_or_default());
        cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
        if let Some(ts) = &self.checkpoints {
            if let Some(t) = ts.iter().find(|&&t| t > cfg.iterations) {
                return err(format!("field checkpoints: {t} exceeds iterations = {}", cfg.iterations));
            }
        }
        Ok(cfg)
    }

    pub fn experiment(&self, fx: &Fixture<f64>) -> Result<Experiment<f64>, ConfigError> {
        let Some(setting) = self.setting else {
            return err("missing field setting");
        };
        self.algorithm()?;
        let mut exp = Experiment::new(setting, self.schedule(fx)?, self.iterations()?)
            .trials(self.trials)
            .batch_size(self.b)
            .seed(self.seed);
        exp.momentum_form = self.momentum_form.unwrap_or_default();
        exp.checkpoints = self.checkpoints.clone();
        Ok(exp)
    }
}

impl ScheduleSpec {
    pub fn resolve(&self, fx: &Fixture<f64>) -> Result<StepSchedule<f64>, ConfigError> {
        let unit = self.unit.unwrap_or_default();
        let c = &fx.instance.constants;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| ConfigError(format!("schedule unit {unit} needs constant {name}, which the problem does not provide")))
        };
        let factor = match unit {
            StepUnit::Absolute => 1.0,
            StepUnit::InvL => 1.0 / need(c.l, "L")?,
            StepUnit::InvLMax => 1.0 / need(c.l_max, "L_max")?,
            StepUnit::InvTwoLMax => 0.5 / need(c.l_max, "L_max")?,
            StepUnit::InvFourLMax => 0.25 / need(c.l_max, "L_max")?,
            StepUnit::InvMu => 1.0 / need(c.mu, "mu")?,
        };
        let field = |v: Option<f64>, name: &str| {
            v.map(|v| v * factor)
                .ok_or_else(|| ConfigError(format!("schedule kind {:?} needs field {name}", self.kind)))
        };
        let s = match self.kind {
            ScheduleKind::Constant => StepSchedule::Constant {
                gamma: field(self.gamma, "gamma")?,
            },
            ScheduleKind::InvSqrt => StepSchedule::InvSqrt {
                gamma0: field(self.gamma0, "gamma0")?,
            },
            ScheduleKind::MomentumPair => StepSchedule::MomentumPair {
                eta: field(self.eta, "eta")?,
            },
            ScheduleKind::HorizonConstant => StepSchedule::HorizonConstant {
                scale: field(self.scale, "scale")?,
                horizon: self
                    .horizon
                    .ok_or_else(|| ConfigError("schedule kind horizon_constant needs field horizon".into()))?,
            },
            ScheduleKind::ConstantMomentum => StepSchedule::ConstantMomentum {
                gamma: field(self.gamma, "gamma")?,
                beta: self
                    .beta
                    .ok_or_else(|| ConfigError("schedule kind constant_momentum needs field beta".into()))?,
            },
        };
        s.validate().map_err(|e| ConfigError(format!("schedule: {e}")))?;
        Ok(s)
    }
}

/// Fixture by name (external directory first, then the built-in
/// catalogue) or an inline problem.
pub fn resolve_problem(spec: &ProblemSpec) -> Result<Fixture<f64>, ConfigError> {
    let fx = match (&spec.fixture, spec.kind) {
        (Some(_), Some(_)) => return err("problem: give either fixture or kind, not both"),
        (None, None) => return err("problem: missing field fixture (or kind)"),
        (Some(name), None) => named_fixture(name)?,
        (None, Some(kind)) => inline(spec, kind, "inline")?,
    };
    match &spec.x0 {
        Some(x0) => Fixture::new(&fx.name, fx.instance, fx.composite, x0.clone())
            .map_err(|e| ConfigError(format!("problem.x0: {e}"))),
        None => Ok(fx),
    }
}

fn named_fixture(name: &str) -> Result<Fixture<f64>, ConfigError> {
    if let Ok(dir) = std::env::var(FIXTURES_ENV) {
        let path = Path::new(&dir).join(format!("{name}.toml"));
        if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            let spec: ProblemSpec =
                toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            let Some(kind) = spec.kind else {
                return err(format!("{}: external fixtures must be inline (set kind)", path.display()));
            };
            let fx = inline(&spec, kind, name)?;
            return match &spec.x0 {
                Some(x0) => Fixture::new(name, fx.instance, None, x0.clone()).map_err(|e| ConfigError(e.to_string())),
                None => Ok(fx),
            };
        }
    }
    fixture::<f64>(name).map_err(|_| {
        ConfigError(format!(
            "problem.fixture: unknown fixture {name:?} (built-in: {})",
            FIXTURE_NAMES.join(", ")
        ))
    })
}

fn inline(spec: &ProblemSpec, kind: InlineKind, name: &str) -> Result<Fixture<f64>, ConfigError> {
    let targets = spec.targets.clone().ok_or_else(|| ConfigError("problem: missing field targets".into()))?;
    let instance = match kind {
        InlineKind::LeastSquares => {
            let features = spec
                .features
                .clone()
                .ok_or_else(|| ConfigError("problem: least_squares needs field features".into()))?;
            build_least_squares(features, targets)
        }
        InlineKind::AbsLoss => {
            let rows = spec.rows.clone().ok_or_else(|| ConfigError("problem: abs_loss needs field rows".into()))?;
            let ball = spec.ball_b.ok_or_else(|| ConfigError("problem: abs_loss needs field ball_B".into()))?;
            build_abs_loss(rows, targets, spec.strong_mu.unwrap_or(0.0), ball)
        }
    }
    .map_err(|e| ConfigError(format!("problem: {e}")))?;
    let d = instance.problem.d();
    Fixture::new(name, instance, None, spec.x0.clone().unwrap_or_else(|| vec![0.0; d]))
        .map_err(|e| ConfigError(format!("problem: {e}")))
}
