//! Closed-form convergence bounds and iteration-complexity calculators.

mod bound;
mod complexity;
mod table;

use serde::{Deserialize, Serialize};

use crate::problems::ProblemConstants;
use crate::scalar::Scalar;

pub use bound::{bound_curve, BoundCurve, Setting, Validity};
pub use complexity::{complexity_iterations, itercomplex, linear_plus_const, ComplexityAnswer};
pub use table::{complexity_table, Cell, ComplexityTable, TableRow, TABLE_COLUMNS};

/// Initial-condition quantities the bounds are stated in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Init<S: Scalar> {
    /// `‖x₀ − x*‖²`
    #[serde(rename = "D2")]
    pub d_sq: S,
    /// `f(x₀) − inf f`
    pub f0_gap: S,
    /// `F(x₀) − inf F` for composite problems
    #[serde(rename = "F0_gap", default)]
    pub cap_f0_gap: Option<S>,
}

/// Everything a bound or corollary may consume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryInputs<S: Scalar> {
    pub constants: ProblemConstants<S>,
    pub init: Init<S>,
    /// Minibatch size for the `mini_*` settings.
    #[serde(default)]
    pub batch_size: Option<usize>,
}

impl<S: Scalar> TheoryInputs<S> {
    pub fn new(constants: ProblemConstants<S>, init: Init<S>) -> Self {
        Self {
            constants,
            init,
            batch_size: None,
        }
    }

    pub fn with_batch_size(mut self, b: usize) -> Self {
        self.batch_size = Some(b);
        self
    }

    pub(crate) fn cap_f0_gap(&self) -> crate::error::Result<S> {
        self.init
            .cap_f0_gap
            .ok_or(crate::error::Error::MissingConstant("F0_gap"))
    }
}
