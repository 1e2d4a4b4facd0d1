use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use descentlab::algorithms::{run_trials, CSV_HEADER};
use descentlab::harness::{property_suite, verify_setting, SuiteConfig};
use descentlab::problems::Fixture;
use descentlab::theory::{complexity_table, Cell, TheoryInputs};
use descentlab::Error;
use serde_json::json;

use crate::config::{resolve_problem, ConfigError, ExperimentConfig, ProblemSpec};

/// Why a command stopped; each maps to a fixed exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad config, violated hypothesis, missing constant: exit 2.
    Config(String),
    /// An iterate blew up: exit 3.
    Diverged(String),
    /// The measured quantity exceeded its bound: exit 4.
    Verdict(String),
    /// Anything else (I/O): exit 1.
    Other(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Diverged(_) => 3,
            Failure::Verdict(_) => 4,
            Failure::Other(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Diverged(m) | Failure::Verdict(m) | Failure::Other(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Diverged { .. } | Error::TrialsDiverged(_) => Failure::Diverged(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

/// Flags shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed_override: Option<u64>,
}

impl Options {
    fn load(&self) -> Result<ExperimentConfig, Failure> {
        let Some(path) = &self.config else {
            return Err(Failure::Config("--config is required for this command".into()));
        };
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(seed) = self.seed_override {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: Option<&ExperimentConfig>) -> Option<PathBuf> {
        self.out_dir
            .clone()
            .or_else(|| cfg.and_then(|c| c.output.as_ref()).and_then(|o| o.dir.clone()))
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn versions() -> serde_json::Value {
    json!({
        "descentlab": descentlab::VERSION,
        "descentlab-cli": env!("CARGO_PKG_VERSION"),
    })
}

/// Runs the configured experiment and writes the manifest, then the trace.
pub fn cmd_run(opts: &Options) -> Result<(), Failure> {
    let cfg = opts.load()?;
    let fx = cfg.fixture()?;
    let rc = cfg.run_config(&fx)?;

    let dir = opts.out_dir(Some(&cfg)).unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    let output = cfg.output.clone().unwrap_or_default();
    let trace_path = dir.join(output.trace.as_deref().unwrap_or("trace.csv"));
    let manifest_path = dir.join(output.manifest.as_deref().unwrap_or("manifest.json"));

    let manifest = json!({
        "command": "run",
        "config": cfg,
        "fixture": fx.name,
        "algorithm": rc.algorithm,
        "schedule": rc.schedule,
        "x0": rc.x0,
        "seed": rc.seed,
        "trials": rc.trials,
        "trial_seeds": format!("seed + trial for trial in 0..{}", rc.trials),
        "versions": versions(),
        "trace": trace_path.file_name().map(|n| n.to_string_lossy().into_owned()),
    });
    write_json(&manifest_path, &manifest)?;

    let traces = run_trials(&rc)?;
    let mut w = BufWriter::new(fs::File::create(&trace_path)?);
    writeln!(w, "{CSV_HEADER}")?;
    for tr in &traces {
        tr.write_csv_rows(&mut w)?;
    }
    w.flush()?;
    println!(
        "{} trial(s) x {} iterations of {} -> {}",
        rc.trials,
        rc.iterations,
        rc.algorithm.name(),
        trace_path.display()
    );
    Ok(())
}

/// Checks the configured setting's bound; prints the verdict as JSON.
pub fn cmd_verify(opts: &Options) -> Result<(), Failure> {
    let cfg = opts.load()?;
    let fx = cfg.fixture()?;
    let exp = cfg.experiment(&fx)?;
    cfg.run_config(&fx)?;
    let out = verify_setting(&fx, &exp)?;
    let v = &out.verdict;
    for (j, t) in v.checkpoints.iter().enumerate() {
        eprintln!(
            "t={t} measured={:.6e} stderr={:.3e} bound={:.6e}",
            v.measured[j], v.stderr[j], v.bound[j]
        );
    }
    let report = json!({
        "fixture": fx.name,
        "verdict": v,
        "validity": out.curve.validity,
        "versions": versions(),
    });
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::Other(e.to_string()))?);
    if let Some(dir) = opts.out_dir(Some(&cfg)) {
        fs::create_dir_all(&dir)?;
        write_json(&dir.join("verdict.json"), &report)?;
    }
    if v.pass {
        Ok(())
    } else {
        Err(Failure::Verdict(format!(
            "{} bound violated (worst ratio {:.4})",
            v.setting, v.worst_ratio
        )))
    }
}

/// Where the complexity table takes its constants from.
#[derive(Clone, Debug)]
pub enum ConstantsSource {
    Fixture(String),
    File(PathBuf),
    Config,
}

#[derive(Clone, Debug)]
pub struct TableArgs {
    pub source: ConstantsSource,
    pub epsilon: Option<f64>,
    pub b: Option<usize>,
    pub csv: Option<PathBuf>,
}

/// Constants a file may leave out: they only feed the Lipschitz column.
const OPTIONAL_IN_FILE: [&str; 2] = ["G", "B"];

pub fn table_text(opts: &Options, args: &TableArgs) -> Result<(String, String), Failure> {
    let cfg = match args.source {
        ConstantsSource::Config => Some(opts.load()?),
        _ => None,
    };
    let epsilon = args
        .epsilon
        .or(cfg.as_ref().and_then(|c| c.epsilon))
        .ok_or_else(|| Failure::Config("missing epsilon (--epsilon or field epsilon)".into()))?;
    let from_file = matches!(args.source, ConstantsSource::File(_));
    let mut inputs: TheoryInputs<f64> = match &args.source {
        ConstantsSource::Fixture(name) => {
            let fx = resolve_problem(&ProblemSpec {
                fixture: Some(name.clone()),
                ..Default::default()
            })?;
            TheoryInputs::new(fx.instance.constants.clone(), fx.init())
        }
        ConstantsSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        ConstantsSource::Config => {
            let cfg = cfg.as_ref().expect("loaded above");
            let fx = cfg.fixture()?;
            TheoryInputs::new(fx.instance.constants.clone(), fx.init()).with_batch_size(cfg.b)
        }
    };
    if let Some(b) = args.b {
        inputs.batch_size = Some(b);
    }
    let table = complexity_table(&inputs, epsilon);
    if from_file {
        let missing = table.rows.iter().flat_map(|r| &r.cells).find_map(|c| match c {
            Cell::Unavailable { reason, .. } => reason
                .strip_prefix("missing ")
                .filter(|name| !OPTIONAL_IN_FILE.contains(name))
                .map(str::to_string),
            _ => None,
        });
        if let Some(name) = missing {
            return Err(Failure::Config(format!("missing constant {name}")));
        }
    }
    Ok((table.to_text(), table.to_csv()))
}

pub fn cmd_table(opts: &Options, args: &TableArgs) -> Result<(), Failure> {
    let (text, csv) = table_text(opts, args)?;
    print!("{text}");
    if let Some(path) = &args.csv {
        fs::write(path, &csv)?;
    }
    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("table.txt"), &text)?;
        fs::write(dir.join("table.csv"), &csv)?;
    }
    Ok(())
}

/// Runs the property suite; exit 4 if anything outside the expected-fail
/// registry fails.
pub fn cmd_suite(opts: &Options, fixture: Option<&str>, samples: Option<usize>) -> Result<(), Failure> {
    let (fx, cfg): (Fixture<f64>, Option<ExperimentConfig>) = match fixture {
        Some(name) => (
            resolve_problem(&ProblemSpec {
                fixture: Some(name.to_string()),
                ..Default::default()
            })?,
            None,
        ),
        None => {
            let cfg = opts.load()?;
            (cfg.fixture()?, Some(cfg))
        }
    };
    let mut sc = SuiteConfig::default();
    if let Some(n) = samples.or(cfg.as_ref().and_then(|c| c.samples)) {
        sc.samples = n;
    }
    if let Some(c) = &cfg {
        sc.seed = c.seed;
    }
    if let Some(seed) = opts.seed_override {
        sc.seed = seed;
    }
    let report = property_suite(&fx, &sc);
    let value = serde_json::to_value(&report).map_err(|e| Failure::Other(e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&value).map_err(|e| Failure::Other(e.to_string()))?);
    if let Some(dir) = opts.out_dir(cfg.as_ref()) {
        fs::create_dir_all(&dir)?;
        write_json(&dir.join("suite.json"), &value)?;
    }
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.status == descentlab::harness::CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect();
        Err(Failure::Verdict(format!("property checks failed: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_contract() {
        assert_eq!(Failure::from(ConfigError("b out of range".into())).code(), 2);
        assert_eq!(Failure::from(Error::MissingConstant("sigma_star_f")).code(), 2);
        assert_eq!(Failure::from(Error::TrialsDiverged(vec![3])).code(), 3);
        assert_eq!(Failure::Verdict("bound violated".into()).code(), 4);
        assert_eq!(Failure::from(std::io::Error::other("disk")).code(), 1);
    }
}
