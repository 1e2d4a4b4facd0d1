use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::algorithms::Algorithm;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow<S: Scalar> {
    pub t: usize,
    /// Step used to leave `x_t` (the schedule value at `t`).
    pub gamma: S,
    pub f_gap: S,
    pub dist_sq: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace<S: Scalar> {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub seed: u64,
    pub rows: Vec<TraceRow<S>>,
    /// `x_0 ..= x_T`, present when the run asked for history.
    pub iterates: Option<Vec<Vec<S>>>,
}

pub const CSV_HEADER: &str = "trial,t,gamma_t,f_gap,dist_sq";

/// 17 significant digits, locale independent.
pub fn format_float<S: Scalar>(v: S) -> String {
    format!("{:.16e}", v)
}

impl<S: Scalar> Trace<S> {
    pub fn iterations(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn iterates(&self) -> Result<&[Vec<S>]> {
        self.iterates.as_deref().ok_or(Error::MissingHistory)
    }

    pub fn gammas(&self) -> impl Iterator<Item = S> + '_ {
        self.rows.iter().map(|r| r.gamma)
    }

    pub fn write_csv_rows<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.trial,
                r.t,
                format_float(r.gamma),
                format_float(r.f_gap),
                format_float(r.dist_sq)
            )?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        self.write_csv_rows(w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weighting<S: Scalar> {
    Uniform,
    GammaWeighted,
    /// `p_{t,k} ∝ γ_k (1 − 2γ_k L_ref)`
    Ptk {
        #[serde(rename = "L_ref")]
        l_ref: S,
    },
}

/// Normalized weights for `x̄^t = Σ_{k<t} p_{t,k} x^k` given the steps
/// `γ_0 .. γ_{t−1}`.
pub fn averaging_weights<S: Scalar>(gammas: &[S], weighting: Weighting<S>) -> Result<Vec<S>> {
    if gammas.is_empty() {
        return Err(Error::InvalidInput("averaging needs t >= 1".into()));
    }
    let raw: Vec<S> = match weighting {
        Weighting::Uniform => vec![S::one(); gammas.len()],
        Weighting::GammaWeighted => gammas.to_vec(),
        Weighting::Ptk { l_ref } => gammas
            .iter()
            .map(|&g| g * (S::one() - S::lit(2.0) * g * l_ref))
            .collect(),
    };
    if let Some(k) = raw.iter().position(|&w| !(w > S::zero())) {
        return Err(Error::NonPositiveWeight { k });
    }
    let total: S = raw.iter().copied().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Streaming form of [`averaged_iterate_at`]: push `x^k` with its step
/// `γ_k` and read the average of everything pushed so far.
#[derive(Clone, Debug)]
pub struct RunningAverage<S: Scalar> {
    weighting: Weighting<S>,
    sum: Vec<S>,
    total: S,
    count: usize,
}

impl<S: Scalar> RunningAverage<S> {
    pub fn new(weighting: Weighting<S>, d: usize) -> Self {
        Self {
            weighting,
            sum: vec![S::zero(); d],
            total: S::zero(),
            count: 0,
        }
    }

    pub fn push(&mut self, gamma: S, x: &[S]) -> Result<()> {
        let w = match self.weighting {
            Weighting::Uniform => S::one(),
            Weighting::GammaWeighted => gamma,
            Weighting::Ptk { l_ref } => gamma * (S::one() - S::lit(2.0) * gamma * l_ref),
        };
        if !(w > S::zero()) {
            return Err(Error::NonPositiveWeight { k: self.count });
        }
        linalg::axpy(w, x, &mut self.sum);
        self.total = self.total + w;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn current(&self) -> Result<Vec<S>> {
        if self.count == 0 {
            return Err(Error::InvalidInput("averaging needs t >= 1".into()));
        }
        Ok(linalg::scaled(S::one() / self.total, &self.sum))
    }
}

/// Averaged iterate over the first `t` iterates of the trace.
pub fn averaged_iterate_at<S: Scalar>(trace: &Trace<S>, weighting: Weighting<S>, t: usize) -> Result<Vec<S>> {
    let xs = trace.iterates()?;
    if t == 0 || t > trace.iterations() {
        return Err(Error::OutOfRange {
            field: "t",
            value: t.to_string(),
            allowed: format!("1..={}", trace.iterations()),
        });
    }
    let gammas: Vec<S> = trace.rows[..t].iter().map(|r| r.gamma).collect();
    let w = averaging_weights(&gammas, weighting)?;
    let mut out = vec![S::zero(); xs[0].len()];
    for (wk, xk) in w.iter().zip(xs) {
        linalg::axpy(*wk, xk, &mut out);
    }
    Ok(out)
}

/// `x̄^T` over the whole trace.
pub fn averaged_iterate<S: Scalar>(trace: &Trace<S>, weighting: Weighting<S>) -> Result<Vec<S>> {
    averaged_iterate_at(trace, weighting, trace.iterations())
}
