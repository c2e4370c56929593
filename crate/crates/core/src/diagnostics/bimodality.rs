use alloc::vec::Vec;
use core::fmt;

use crate::diagnostics::GridProfile;
use crate::error::{Error, Result};
use crate::math;

/// Curvature indicator at the centre of a 1D cell-averaged profile,
/// `(ρ[I/2+1] − ρ[I/2] − ρ[I/2−1] + ρ[I/2−2]) / Δx²`.
///
/// The stencil spans four cells, so on a smooth profile it returns twice
/// the second derivative at `x = 0` (cell averages of `x²` give exactly 4).
/// Only its sign is used: positive means a dip at the centre.
pub fn center_second_derivative(rho: &[f64], dx: f64) -> Result<f64> {
    let n = rho.len();
    if n < 4 {
        return Err(Error::TooFewCells { needed: 4, got: n });
    }
    if n % 2 != 0 {
        return Err(Error::Mismatch("the centre stencil needs an even number of cells"));
    }
    let h = n / 2;
    Ok((rho[h + 1] - rho[h] - rho[h - 1] + rho[h - 2]) / (dx * dx))
}

/// Thickness `√(ετ)` of the layer over which run lengths are reshaped by
/// memory near a kink of the field.
pub fn diffusion_layer_marker(epsilon: f64, tau: f64) -> f64 {
    math::sqrt(epsilon * tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Mc,
    Exks,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Mc => "MC",
            Source::Exks => "ExKS",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Centre curvature of `ρ` and `ρ_g` for one swept parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimodalityPoint {
    pub param: f64,
    pub rho_dd: f64,
    pub rho_g_dd: f64,
    pub source: Source,
}

impl BimodalityPoint {
    pub fn from_profile(param: f64, profile: &GridProfile, source: Source) -> Result<Self> {
        let dx = profile.dx();
        Ok(Self {
            param,
            rho_dd: center_second_derivative(&profile.rho, dx)?,
            rho_g_dd: center_second_derivative(&profile.rho_g, dx)?,
            source,
        })
    }

    pub fn is_bimodal(&self) -> bool {
        self.rho_dd > 0.0
    }
}

/// Evaluates every `(value, source)` pair with `run` and collects the centre
/// curvatures, ordered by value and then by the order of `sources`.
pub fn bimodality_sweep(
    values: &[f64],
    sources: &[Source],
    mut run: impl FnMut(f64, Source) -> Result<GridProfile>,
) -> Result<Vec<BimodalityPoint>> {
    let mut out = Vec::with_capacity(values.len() * sources.len());
    for &v in values {
        for &s in sources {
            out.push(BimodalityPoint::from_profile(v, &run(v, s)?, s)?);
        }
    }
    Ok(out)
}
