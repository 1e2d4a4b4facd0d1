//! First-order optimization lab: finite-sum problems, proximal operators,
//! gradient methods, their convergence bounds, and a harness that checks
//! measured traces against those bounds.
//!
//! Everything is generic over [`Scalar`]; the `f64` aliases below are what
//! the CLI and the tests use.

// `!(x > 0)` is how NaN gets rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod nonsmooth;
pub mod problems;
pub mod scalar;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Problem = problems::FiniteSumProblem<f64>;
pub type Constants = problems::ProblemConstants<f64>;
pub type Instance = problems::Instance<f64>;
pub type Fixture = problems::Fixture<f64>;
pub type Regularizer = nonsmooth::Regularizer<f64>;
pub type Schedule = algorithms::StepSchedule<f64>;
pub type RunConfig = algorithms::RunConfig<f64>;
pub type Trace = algorithms::Trace<f64>;
pub type Curve = theory::BoundCurve<f64>;
pub type Inputs = theory::TheoryInputs<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
