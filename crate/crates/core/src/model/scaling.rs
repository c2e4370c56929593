use crate::error::{Error, Result};

/// How the adaptation time is specified relative to the run length `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingMode {
    Direct(f64),
    /// `τ = α ε`
    SmallAdaptation(f64),
    /// `τ = β / ε`
    LargeAdaptation(f64),
}

impl ScalingMode {
    pub fn resolve(self, epsilon: f64) -> Result<f64> {
        resolve_tau(self, epsilon)
    }
}

pub fn resolve_tau(mode: ScalingMode, epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid("epsilon", epsilon, "must be positive"));
    }
    let check = |name, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::invalid(name, v, "must be positive"))
        }
    };
    match mode {
        ScalingMode::Direct(tau) => check("tau", tau),
        ScalingMode::SmallAdaptation(alpha) => Ok(check("alpha", alpha)? * epsilon),
        ScalingMode::LargeAdaptation(beta) => Ok(check("beta", beta)? / epsilon),
    }
}
