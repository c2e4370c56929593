use crate::math;
use crate::model::Dim;

/// Point in the periodic domain; the second component is unused for `d = 1`.
pub type Point = [f64; 2];

/// The prescribed chemoattractant `S = exp(-|x|)` (or `exp(-r)` in 2D) with
/// logarithmic sensing `M(S) = log S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChemoField {
    dim: Dim,
}

impl ChemoField {
    pub const fn new(dim: Dim) -> Self {
        Self { dim }
    }

    pub const fn dim(&self) -> Dim {
        self.dim
    }

    /// Distance from the attractant maximum, `|x|` or `r`.
    #[inline(always)]
    pub fn distance(&self, p: Point) -> f64 {
        match self.dim {
            Dim::One => math::abs(p[0]),
            Dim::Two => math::sqrt(p[0] * p[0] + p[1] * p[1]),
        }
    }

    /// Local equilibrium of the internal state, `M = log S`.
    #[inline(always)]
    pub fn equilibrium(&self, p: Point) -> f64 {
        -self.distance(p)
    }

    pub fn concentration(&self, p: Point) -> f64 {
        math::exp(-self.distance(p))
    }

    /// `∇M`; the zero vector at the singular point.
    pub fn gradient(&self, p: Point) -> Point {
        match self.dim {
            Dim::One => {
                if p[0] > 0.0 {
                    [-1.0, 0.0]
                } else if p[0] < 0.0 {
                    [1.0, 0.0]
                } else {
                    [0.0, 0.0]
                }
            }
            Dim::Two => {
                let r = self.distance(p);
                if r > 0.0 {
                    [-p[0] / r, -p[1] / r]
                } else {
                    [0.0, 0.0]
                }
            }
        }
    }
}

/// `M(S(x))` for a position given as a slice of length 1 or 2.
pub fn equilibrium_m(position: &[f64]) -> f64 {
    match position {
        [x] => -math::abs(*x),
        [x1, x2] => -math::sqrt(x1 * x1 + x2 * x2),
        _ => panic!("positions are 1D or 2D, got {} components", position.len()),
    }
}
