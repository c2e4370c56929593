use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// A 1D profile sampled at increasing coordinates `x`, tagged with the
/// adaptation parameter `β` used to rescale its axis to `x/√β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledProfile {
    pub beta: f64,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide by the maximum value.
    #[default]
    Peak,
    /// Divide by the mean value.
    Mean,
}

impl Normalization {
    fn apply(&self, rho: &[f64]) -> Vec<f64> {
        let s = match self {
            Normalization::Peak => rho.iter().copied().fold(f64::MIN, f64::max),
            Normalization::Mean => rho.iter().sum::<f64>() / rho.len() as f64,
        };
        rho.iter().map(|r| r / s).collect()
    }
}

/// Piecewise-linear interpolation of `(xs, ys)` at `x`; `None` outside
/// `[xs[0], xs[n-1]]`.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let n = xs.len();
    if n == 0 || x < xs[0] || x > xs[n - 1] {
        return None;
    }
    let j = xs.partition_point(|&v| v <= x);
    if j == n {
        return Some(ys[n - 1]);
    }
    let (x0, x1) = (xs[j - 1], xs[j]);
    let t = (x - x0) / (x1 - x0);
    Some(ys[j - 1] + t * (ys[j] - ys[j - 1]))
}

/// Largest pairwise `L∞` distance between normalised profiles on the
/// rescaled axis `x/√β`, evaluated at every sample point of either profile
/// inside the common range.
pub fn rescale_collapse(profiles: &[ScaledProfile], norm: Normalization) -> Result<f64> {
    let scaled: Vec<(Vec<f64>, Vec<f64>)> = profiles
        .iter()
        .map(|p| {
            if p.x.len() != p.rho.len() || p.x.is_empty() {
                return Err(Error::Mismatch("profile coordinates and values differ in length"));
            }
            if !(p.beta > 0.0) {
                return Err(Error::invalid("beta", p.beta, "must be positive"));
            }
            let s = 1.0 / math::sqrt(p.beta);
            Ok((p.x.iter().map(|x| x * s).collect(), norm.apply(&p.rho)))
        })
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (a, (xa, ya)) in scaled.iter().enumerate() {
        for (xb, yb) in &scaled[a + 1..] {
            let mut hit = false;
            for (xs, ys, xo, yo) in [(xa, ya, xb, yb), (xb, yb, xa, ya)] {
                for (x, y) in xs.iter().zip(ys) {
                    if let Some(v) = interpolate(xo, yo, *x) {
                        hit = true;
                        worst = worst.max(math::abs(v - y));
                    }
                }
            }
            if !hit {
                return Err(Error::NoOverlap);
            }
        }
    }
    Ok(worst)
}

/// Location of the maximum of `rho`, refined by the vertex of the parabola
/// through the maximum and its neighbours on a uniform grid.
pub fn peak_position(x: &[f64], rho: &[f64]) -> Option<f64> {
    let n = rho.len().min(x.len());
    let (j, _) = rho[..n]
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &r)| match best {
            Some((_, b)) if b >= r => best,
            _ => Some((i, r)),
        })?;
    if j == 0 || j + 1 == n {
        return Some(x[j]);
    }
    let (l, c, r) = (rho[j - 1], rho[j], rho[j + 1]);
    let denom = l - 2.0 * c + r;
    if denom == 0.0 {
        return Some(x[j]);
    }
    let h = 0.5 * (x[j + 1] - x[j - 1]);
    Some(x[j] + 0.5 * h * (l - r) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn gauss(beta: f64, width: f64) -> ScaledProfile {
        let x: Vec<f64> = (0..200).map(|i| -5.0 + (i as f64 + 0.5) * 0.05).collect();
        let rho = x.iter().map(|x| 3.0 * libm::exp(-x * x / (beta * width))).collect();
        ScaledProfile { beta, x, rho }
    }

    #[test]
    fn single_profile_and_self_collapse() {
        assert_eq!(rescale_collapse(&[gauss(1.0, 1.0)], Normalization::Peak).unwrap(), 0.0);
        let e = rescale_collapse(&[gauss(1.0, 1.0), gauss(1.0, 1.0)], Normalization::Mean).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn scaled_family_collapses_up_to_interpolation() {
        let e = rescale_collapse(
            &[gauss(0.5, 1.0), gauss(1.0, 1.0), gauss(2.0, 1.0)],
            Normalization::Peak,
        )
        .unwrap();
        assert!(e < 2e-3, "{e}");
        let bad = rescale_collapse(&[gauss(1.0, 1.0), gauss(1.0, 2.0)], Normalization::Peak).unwrap();
        assert!(bad > 0.1);
    }

    #[test]
    fn disjoint_supports_are_rejected() {
        let a = ScaledProfile { beta: 1.0, x: vec![0.0, 1.0], rho: vec![1.0, 1.0] };
        let b = ScaledProfile { beta: 1.0, x: vec![2.0, 3.0], rho: vec![1.0, 1.0] };
        assert_eq!(rescale_collapse(&[a, b], Normalization::Peak), Err(Error::NoOverlap));
    }

    #[test]
    fn interpolation() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [0.0, 2.0, 0.0];
        assert_eq!(interpolate(&xs, &ys, 0.5), Some(1.0));
        assert_eq!(interpolate(&xs, &ys, 2.0), Some(1.0));
        assert_eq!(interpolate(&xs, &ys, 3.0), Some(0.0));
        assert_eq!(interpolate(&xs, &ys, 3.1), None);
    }

    #[test]
    fn parabolic_peak() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let rho: Vec<f64> = x.iter().map(|x| -(x - 1.234) * (x - 1.234)).collect();
        assert_relative_eq!(peak_position(&x, &rho).unwrap(), 1.234, epsilon = 1e-12);
        assert_eq!(peak_position(&[], &[]), None);
    }
}
