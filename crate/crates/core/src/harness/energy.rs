use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, RunConfig, Trace};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    GdEnergy,
    PgdEnergy,
}

impl EnergyKind {
    fn algorithm(self) -> Algorithm {
        match self {
            EnergyKind::GdEnergy => Algorithm::Gd,
            EnergyKind::PgdEnergy => Algorithm::ProxGd,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnergyKind::GdEnergy => "gd_energy",
            EnergyKind::PgdEnergy => "pgd_energy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyVerdict {
    pub kind: EnergyKind,
    pub energies: Vec<f64>,
    /// Largest `E_{t+1} − E_t − tolerance`; non-positive when monotone.
    pub max_increase: f64,
    /// First `t` with `E_{t+1} > E_t + tolerance`.
    pub first_violation: Option<usize>,
    pub pass: bool,
}

/// Checks that `E_t = ‖x_t − x*‖²/(2γ) + t·(gap_t)` never increases along a
/// (proximal) gradient descent trace run with constant `γ ≤ 1/L`.
pub fn lyapunov_check<S: Scalar>(cfg: &RunConfig<S>, trace: &Trace<S>, kind: EnergyKind, l: S) -> Result<EnergyVerdict> {
    let setting = kind.name().to_string();
    if cfg.algorithm != kind.algorithm() {
        return Err(Error::InvalidInput(format!(
            "{} needs a {} trace, got {}",
            setting,
            kind.algorithm().name(),
            cfg.algorithm.name()
        )));
    }
    if !cfg.schedule.is_constant() {
        return Err(Error::Hypothesis {
            setting,
            constraint: format!("constant schedule required (got {})", cfg.schedule.name()),
        });
    }
    let gamma = cfg.schedule.gamma(0);
    if gamma > (S::one() / l) * (S::one() + S::lit(1e-12)) {
        return Err(Error::Hypothesis {
            setting,
            constraint: format!("gamma ≤ 1/L (gamma = {gamma}, 1/L = {})", S::one() / l),
        });
    }
    let xs = trace.iterates()?;
    let energies: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(t, x)| {
            let gap = cfg.objective(x) - cfg.target.inf;
            (linalg::dist_sq(x, &cfg.target.x_star) / (S::lit(2.0) * gamma) + S::of(t) * gap).as_f64()
        })
        .collect();
    let mut max_increase = f64::NEG_INFINITY;
    let mut first_violation = None;
    for (t, w) in energies.windows(2).enumerate() {
        let excess = w[1] - w[0] - 1e-9 * (1.0 + w[0].abs());
        if excess > 0.0 && first_violation.is_none() {
            first_violation = Some(t);
        }
        max_increase = max_increase.max(excess);
    }
    Ok(EnergyVerdict {
        kind,
        energies,
        max_increase,
        pass: first_violation.is_none(),
        first_violation,
    })
}
