use crate::error::{Error, Result};

/// Discretisation of a continuum run. `dt = None` selects 90% of the
/// solver's stability limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Cells along `x`.
    pub n_x: usize,
    /// Cells along the internal coordinate `m` (ExKS only).
    pub n_m: usize,
    /// `m` ranges over `[-Y, Y]`.
    pub m_half_width: f64,
    pub dt: Option<f64>,
    pub t_end: f64,
}

impl GridSpec {
    pub fn ks(n_x: usize, t_end: f64) -> Self {
        Self {
            n_x,
            n_m: 0,
            m_half_width: 0.0,
            dt: None,
            t_end,
        }
    }

    pub fn exks(n_x: usize, n_m: usize, m_half_width: f64, t_end: f64) -> Self {
        Self {
            n_x,
            n_m,
            m_half_width,
            dt: None,
            t_end,
        }
    }

    /// Production ExKS grid: 100 × 800 cells, `Y = 5`,
    /// `Δt = 10^-4`, `t ≤ 25`.
    pub fn exks_reference() -> Self {
        Self::exks(100, 800, 5.0, 25.0).with_dt(1e-4)
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn dx(&self, length: f64) -> f64 {
        length / self.n_x as f64
    }

    pub fn dm(&self) -> f64 {
        2.0 * self.m_half_width / self.n_m as f64
    }

    pub(crate) fn check_x(&self) -> Result<()> {
        if self.n_x < 4 {
            return Err(Error::TooFewCells { needed: 4, got: self.n_x });
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::invalid("t_end", self.t_end, "must be non-negative"));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::invalid("dt", dt, "must be positive"));
            }
        }
        Ok(())
    }

    pub(crate) fn check_m(&self) -> Result<()> {
        if self.n_m < 3 {
            return Err(Error::TooFewCells { needed: 3, got: self.n_m });
        }
        if !(self.m_half_width.is_finite() && self.m_half_width > 0.0) {
            return Err(Error::invalid("m_half_width", self.m_half_width, "must be positive"));
        }
        Ok(())
    }

    /// Resolves the step against `limit`: the requested step must not exceed
    /// it. The horizon is split into equal steps no longer than the chosen
    /// one. Returns `(dt, steps)`.
    pub(crate) fn steps(&self, limit: f64) -> Result<(f64, u64)> {
        let dt = match self.dt {
            Some(dt) if dt > limit => return Err(Error::Cfl { dt, limit }),
            Some(dt) => dt,
            None => 0.9 * limit,
        };
        if self.t_end == 0.0 {
            return Ok((dt, 0));
        }
        let n = libm::ceil(self.t_end / dt * (1.0 - 1e-12));
        Ok((self.t_end / n, n as u64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_resolution() {
        let g = GridSpec::ks(100, 1.0).with_dt(0.1);
        assert_eq!(g.steps(0.2).unwrap(), (0.1, 10));
        assert!(matches!(g.steps(0.05), Err(Error::Cfl { .. })));
        let (dt, n) = GridSpec::ks(100, 1.0).steps(0.3).unwrap();
        assert_eq!(n, 4);
        assert_eq!(dt, 0.25);
        assert_eq!(GridSpec::exks_reference().dm(), 0.0125);
    }
}
