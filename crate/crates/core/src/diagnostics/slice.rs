use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostics::GridProfile;
use crate::error::{Error, Result};
use crate::math;
use crate::model::Dim;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Fix `x1`, vary `x2`.
    X1,
    /// Fix `x2`, vary `x1`.
    X2,
}

/// Values of a 2D profile along one lattice line.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    /// Coordinate along the line (cell centres).
    pub coord: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_f: Vec<f64>,
    pub rho_g: Vec<f64>,
    pub xi_bar: Vec<Option<f64>>,
}

/// Extracts the cells along `axis = value`. When `value` falls on the face
/// between two cell columns the two columns are averaged, so a slice through
/// the centre of an even lattice stays mirror symmetric.
pub fn slice_2d(profile: &GridProfile, axis: Axis, value: f64) -> Result<Slice> {
    if profile.dim != Dim::Two {
        return Err(Error::Mismatch("slices need a 2D profile"));
    }
    let n = profile.n_cells;
    let half = 0.5 * profile.domain_length;
    if !(value >= -half && value < half) {
        return Err(Error::OutOfDomain {
            value,
            low: -half,
            high: half,
        });
    }
    let dx = profile.dx();
    let pos = (value + half) / dx;
    let face = libm::round(pos);
    let columns: Vec<usize> = if math::abs(pos - face) < 1e-9 && face >= 1.0 && (face as usize) < n {
        vec![face as usize - 1, face as usize]
    } else {
        vec![(math::floor(pos) as usize).min(n - 1)]
    };
    let idx = |along: usize, col: usize| match axis {
        Axis::X1 => col + n * along,
        Axis::X2 => along + n * col,
    };
    let w = 1.0 / columns.len() as f64;
    let avg = |a: &[f64], j: usize| columns.iter().map(|&c| a[idx(j, c)]).sum::<f64>() * w;
    let xi = |j: usize| {
        let vals: Vec<f64> = columns.iter().filter_map(|&c| profile.xi_bar[idx(j, c)]).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    Ok(Slice {
        coord: profile.axis_centers(),
        rho: (0..n).map(|j| avg(&profile.rho, j)).collect(),
        rho_f: (0..n).map(|j| avg(&profile.rho_f, j)).collect(),
        rho_g: (0..n).map(|j| avg(&profile.rho_g, j)).collect(),
        xi_bar: (0..n).map(xi).collect(),
    })
}

/// Annular average of a 2D cell array around the origin, in bins of one
/// cell width by cell-centre radius. Returns `(bin centre radius, mean)`
/// for the non-empty bins.
pub fn radial_profile(profile: &GridProfile, values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if profile.dim != Dim::Two || values.len() != profile.total_cells() {
        return Err(Error::Mismatch("radial profiles need a full 2D cell array"));
    }
    let dx = profile.dx();
    let bins = (profile.n_cells as f64 * core::f64::consts::FRAC_1_SQRT_2) as usize + 2;
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (c, v) in values.iter().enumerate() {
        let [x1, x2] = profile.center(c);
        let b = (math::sqrt(x1 * x1 + x2 * x2) / dx) as usize;
        sum[b] += v;
        count[b] += 1;
    }
    Ok((0..bins)
        .filter(|&b| count[b] > 0)
        .map(|b| ((b as f64 + 0.5) * dx, sum[b] / count[b] as f64))
        .collect())
}
