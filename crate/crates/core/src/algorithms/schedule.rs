use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Step-size (and momentum) schedules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule<S: Scalar> {
    Constant { gamma: S },
    /// `γ_t = γ₀ / √(t+1)`
    InvSqrt { gamma0: S },
    /// `γ_t = 2η/(t+3)`, `β_t = t/(t+2)`
    MomentumPair { eta: S },
    /// Constant step tuned to a horizon: `γ = scale / √horizon`.
    HorizonConstant { scale: S, horizon: usize },
    /// Constant `γ` with constant momentum `β ∈ [0, 1)`.
    ConstantMomentum { gamma: S, beta: S },
}

impl<S: Scalar> StepSchedule<S> {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: S| {
            if v > S::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::OutOfRange {
                    field,
                    value: v.to_string(),
                    allowed: "> 0".into(),
                })
            }
        };
        match *self {
            StepSchedule::Constant { gamma } => positive("gamma", gamma),
            StepSchedule::InvSqrt { gamma0 } => positive("gamma0", gamma0),
            StepSchedule::MomentumPair { eta } => positive("eta", eta),
            StepSchedule::HorizonConstant { scale, horizon } => {
                positive("scale", scale)?;
                if horizon == 0 {
                    return Err(Error::OutOfRange {
                        field: "horizon",
                        value: "0".into(),
                        allowed: ">= 1".into(),
                    });
                }
                Ok(())
            }
            StepSchedule::ConstantMomentum { gamma, beta } => {
                positive("gamma", gamma)?;
                if beta >= S::zero() && beta < S::one() {
                    Ok(())
                } else {
                    Err(Error::OutOfRange {
                        field: "beta",
                        value: beta.to_string(),
                        allowed: "[0, 1)".into(),
                    })
                }
            }
        }
    }

    pub fn gamma(&self, t: usize) -> S {
        match *self {
            StepSchedule::Constant { gamma } | StepSchedule::ConstantMomentum { gamma, .. } => gamma,
            StepSchedule::InvSqrt { gamma0 } => gamma0 / S::of(t + 1).sqrt(),
            StepSchedule::MomentumPair { eta } => S::lit(2.0) * eta / S::of(t + 3),
            StepSchedule::HorizonConstant { scale, horizon } => scale / S::of(horizon).sqrt(),
        }
    }

    /// Momentum parameter, `None` for schedules that carry none.
    pub fn beta(&self, t: usize) -> Option<S> {
        match *self {
            StepSchedule::MomentumPair { .. } => Some(S::of(t) / S::of(t + 2)),
            StepSchedule::ConstantMomentum { beta, .. } => Some(beta),
            _ => None,
        }
    }

    /// Averaging weight of the moving-average form; `λ_0 = 0` always.
    pub fn lambda(&self, t: usize) -> Option<S> {
        match *self {
            StepSchedule::MomentumPair { .. } => Some(S::of(t) / S::lit(2.0)),
            StepSchedule::ConstantMomentum { beta, .. } => Some(if t == 0 {
                S::zero()
            } else {
                beta / (S::one() - beta)
            }),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(
            self,
            StepSchedule::Constant { .. } | StepSchedule::HorizonConstant { .. } | StepSchedule::ConstantMomentum { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepSchedule::Constant { .. } => "constant",
            StepSchedule::InvSqrt { .. } => "inv_sqrt",
            StepSchedule::MomentumPair { .. } => "momentum_pair",
            StepSchedule::HorizonConstant { .. } => "horizon_constant",
            StepSchedule::ConstantMomentum { .. } => "constant_momentum",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_sqrt_exact() {
        let s = StepSchedule::InvSqrt { gamma0: 0.5 };
        for t in 0..50 {
            assert_eq!(s.gamma(t), 0.5 / ((t + 1) as f64).sqrt());
        }
    }

    #[test]
    fn momentum_pair_properties() {
        let eta = 0.125f64;
        let s = StepSchedule::MomentumPair { eta };
        assert_eq!(s.beta(0), Some(0.0));
        for t in 0..200 {
            assert!(s.gamma(t + 1) < s.gamma(t));
            // (1 + λ_{t+1}) γ_t = η
            let lhs = (1.0 + s.lambda(t + 1).unwrap()) * s.gamma(t);
            assert!((lhs - eta).abs() <= 1e-15 * eta);
        }
    }

    #[test]
    fn constant_is_flat() {
        let s = StepSchedule::Constant { gamma: 0.3 };
        assert!((0..10).all(|t| s.gamma(t) == 0.3));
        assert_eq!(s.beta(3), None);
        let h = StepSchedule::HorizonConstant { scale: 1.0, horizon: 100 };
        assert_eq!(h.gamma(7), 0.1);
    }

    #[test]
    fn validation() {
        assert!(StepSchedule::Constant { gamma: 0.0 }.validate().is_err());
        assert!(StepSchedule::ConstantMomentum { gamma: 0.1, beta: 1.0 }.validate().is_err());
        assert!(StepSchedule::HorizonConstant { scale: 1.0, horizon: 0 }.validate().is_err());
        assert!(StepSchedule::InvSqrt { gamma0: 0.1 }.validate().is_ok());
    }
}
