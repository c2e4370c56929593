use crate::math;

/// Response function `F(X) = χX / sqrt(1 + X²)`.
#[inline]
pub fn response_f(x: f64, chi: f64) -> f64 {
    // x / sqrt(1 + x^2) overflows for |x| > ~1e154; the hypot-free form
    // below stays finite for any finite input.
    let ax = math::abs(x);
    let unit = if ax > 1.0 {
        let r = 1.0 / ax;
        x.signum() / math::sqrt(1.0 + r * r)
    } else {
        x / math::sqrt(1.0 + x * x)
    };
    chi * unit
}

/// Tumbling-frequency modulation `Λ_δ(y) = 1 - F(y/δ)`.
#[inline]
pub fn lambda_response(y: f64, delta: f64, chi: f64) -> f64 {
    1.0 - response_f(y / delta, chi)
}

/// Stiffness and amplitude of the chemotactic response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    delta: f64,
    chi: f64,
}

impl Response {
    /// Callers are expected to have validated the pair (see [`crate::ModelParams`]).
    pub const fn new(delta: f64, chi: f64) -> Self {
        Self { delta, chi }
    }

    pub const fn delta(&self) -> f64 {
        self.delta
    }

    pub const fn chi(&self) -> f64 {
        self.chi
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        response_f(x, self.chi)
    }

    /// `Λ_δ(y)` with `y = M(S) - m`.
    #[inline]
    pub fn modulation(&self, y: f64) -> f64 {
        lambda_response(y, self.delta, self.chi)
    }

    /// `Λ'(0) = -F'(0)/δ = -χ/δ`.
    pub fn slope_at_zero(&self) -> f64 {
        -self.chi / self.delta
    }

    /// Open bounds `(1-χ, 1+χ)` of the modulation.
    pub fn bounds(&self) -> (f64, f64) {
        (1.0 - self.chi, 1.0 + self.chi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn response_values() {
        assert_eq!(response_f(0.0, 0.7), 0.0);
        assert_relative_eq!(response_f(1.0, 0.7), 0.494_974_746_830_583_2, epsilon = 1e-15);
        assert_relative_eq!(response_f(1e12, 0.7), 0.7, epsilon = 1e-15);
        assert_relative_eq!(response_f(-1e300, 0.7), -0.7, epsilon = 1e-15);
        assert_relative_eq!(response_f(f64::MAX, 0.7), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn modulation_values() {
        assert_eq!(lambda_response(0.0, 1.25, 0.7), 1.0);
        assert_relative_eq!(
            lambda_response(1.25, 1.25, 0.7),
            1.0 - 0.7 / 2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!(lambda_response(-1e9, 1.25, 0.7), 1.7, epsilon = 1e-12);
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let r = Response::new(0.3, 0.0);
        for y in [-1e6, -3.0, 0.0, 2.5, 1e6] {
            assert_eq!(r.modulation(y), 1.0);
        }
    }

    #[test]
    fn slope_at_origin_matches_finite_differences() {
        let r = Response::new(1.25, 0.7);
        let mut prev_err = f64::INFINITY;
        for h in [1e-1, 1e-2, 1e-3, 1e-4] {
            let fd = (r.modulation(h) - r.modulation(-h)) / (2.0 * h);
            let err = (fd - r.slope_at_zero()).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-7);
    }
}
