use crate::error::{Error, Result};
use crate::model::{Dim, ModelParams};

/// Full description of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub params: ModelParams,
    pub n_particles: usize,
    /// Cells per axis.
    pub n_cells: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Length of the final time window over which snapshots are averaged.
    pub avg_window: f64,
    /// Steps between two accumulated snapshots.
    pub snapshot_stride: u64,
    pub seed: u64,
}

/// Step bookkeeping derived from a validated [`McConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub n_steps: u64,
    /// First step (1-based) at which a snapshot is taken.
    pub first_snapshot: u64,
    pub stride: u64,
    pub snapshots: u64,
}

impl McConfig {
    /// Reduced-cost settings: `N = 10^5` (1D) or `10^6` (2D), `Δt = 10^-3`
    /// when the transition probabilities allow it, horizon `0.5 L²/ε`
    /// (`0.25 L²/ε` in 2D) and averaging over the final `0.1 L²/ε`.
    pub fn desk(params: ModelParams, seed: u64) -> Self {
        let l2e = params.domain_length() * params.domain_length() / params.epsilon();
        let (n_particles, n_cells, horizon) = match params.dim() {
            Dim::One => (100_000, 100, 0.5),
            Dim::Two => (1_000_000, 50, 0.25),
        };
        let dt = [1e-3, 5e-4, 2e-4, 1e-4, 5e-5, 2e-5, 1e-5]
            .into_iter()
            .find(|&dt| admissible(&params, dt))
            .unwrap_or(1e-6);
        Self {
            params,
            n_particles,
            n_cells,
            dt,
            t_end: horizon * l2e,
            avg_window: 0.1 * l2e,
            snapshot_stride: 100,
            seed,
        }
        .with_rounded_particles()
    }

    /// Production settings: `N = 720000` on 100 cells
    /// (1D) or `1.8×10^7` on 50×50 (2D), `Δt = 2×10^-4`, horizon `2 L²/ε`.
    pub fn full(params: ModelParams, seed: u64) -> Self {
        let l2e = params.domain_length() * params.domain_length() / params.epsilon();
        let (n_particles, n_cells) = match params.dim() {
            Dim::One => (720_000, 100),
            Dim::Two => (18_000_000, 50),
        };
        Self {
            params,
            n_particles,
            n_cells,
            dt: 2e-4,
            t_end: 2.0 * l2e,
            avg_window: 0.1 * l2e,
            snapshot_stride: 100,
            seed,
        }
        .with_rounded_particles()
    }

    pub fn total_cells(&self) -> usize {
        self.n_cells.pow(self.params.dim().get() as u32)
    }

    /// Rounds `n_particles` up to the next multiple of the cell count.
    pub fn with_rounded_particles(mut self) -> Self {
        let cells = self.total_cells().max(1);
        self.n_particles = self.n_particles.div_ceil(cells) * cells;
        self
    }

    pub fn per_cell(&self) -> usize {
        self.n_particles / self.total_cells()
    }

    /// Per-step run-to-tumble probability at the largest modulation `1+χ`.
    pub fn max_stop_probability(&self) -> f64 {
        self.dt * (1.0 + self.params.chi()) / self.params.epsilon()
    }

    pub fn restart_probability(&self) -> Option<f64> {
        self.params.mu_hat().map(|mu| self.dt * mu / self.params.epsilon())
    }

    pub fn validate(&self) -> Result<Schedule> {
        if self.n_cells == 0 {
            return Err(Error::TooFewCells { needed: 1, got: 0 });
        }
        let cells = self.total_cells();
        if self.n_particles == 0 || self.n_particles % cells != 0 {
            return Err(Error::IndivisibleParticles {
                particles: self.n_particles,
                cells,
            });
        }
        for (name, v) in [("dt", self.dt), ("t_end", self.t_end)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, v, "must be positive"));
            }
        }
        if !(self.avg_window.is_finite() && self.avg_window > 0.0) {
            return Err(Error::invalid("avg_window", self.avg_window, "must be positive"));
        }
        if self.avg_window > self.t_end * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "avg_window",
                self.avg_window,
                "must not exceed t_end",
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::invalid("snapshot_stride", 0.0, "must be at least 1"));
        }
        let p = self.max_stop_probability();
        if p > 1.0 {
            return Err(Error::ProbabilityExceedsOne { which: "run-to-tumble", prob: p });
        }
        if let Some(q) = self.restart_probability() {
            if q > 1.0 {
                return Err(Error::ProbabilityExceedsOne { which: "tumble-to-run", prob: q });
            }
        }
        let n_steps = whole_steps("t_end", self.t_end, self.dt)?;
        let window = whole_steps("avg_window", self.avg_window, self.dt)?.min(n_steps);
        let stride = self.snapshot_stride;
        // snapshots at multiples of `stride` in (n_steps - window, n_steps]
        let first = ((n_steps - window) / stride + 1) * stride;
        if first > n_steps {
            return Err(Error::invalid(
                "avg_window",
                self.avg_window,
                "shorter than one snapshot stride",
            ));
        }
        let snapshots = (n_steps - first) / stride + 1;
        Ok(Schedule {
            n_steps,
            first_snapshot: first,
            stride,
            snapshots,
        })
    }
}

fn admissible(params: &ModelParams, dt: f64) -> bool {
    let stop = dt * (1.0 + params.chi()) / params.epsilon();
    let restart = params.mu_hat().map_or(0.0, |mu| dt * mu / params.epsilon());
    stop <= 1.0 && restart <= 1.0
}

fn whole_steps(name: &'static str, span: f64, dt: f64) -> Result<u64> {
    let ratio = span / dt;
    let n = libm::round(ratio);
    if n < 1.0 || libm::fabs(ratio - n) > 1e-6 * n.max(1.0) {
        return Err(Error::invalid(name, span, "must be a whole number of time steps"));
    }
    Ok(n as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(0.1, 10.0, 0.3, 1.25, 0.7).unwrap()
    }

    #[test]
    fn desk_profile() {
        let c = McConfig::desk(params(), 1);
        assert_eq!(c.n_particles, 100_000);
        assert_eq!(c.dt, 1e-3);
        assert!((c.t_end - 500.0).abs() < 1e-9);
        let s = c.validate().unwrap();
        assert_eq!(s.n_steps, 500_000);
        assert_eq!(s.snapshots, 1000);
        assert_eq!(s.first_snapshot, 400_100);
        let c2 = McConfig::desk(params().with_dim(Dim::Two), 1);
        assert_eq!((c2.n_particles, c2.n_cells), (1_000_000, 50));
        assert_eq!(c2.validate().unwrap().n_steps, 250_000);
    }

    #[test]
    fn full_profile_settings() {
        let c = McConfig::full(params(), 1);
        assert_eq!((c.n_particles, c.n_cells, c.dt), (720_000, 100, 2e-4));
        assert!((c.t_end - 2000.0).abs() < 1e-9);
        let c2 = McConfig::full(params().with_dim(Dim::Two), 1);
        assert_eq!(c2.n_particles, 18_000_000);
    }

    #[test]
    fn rejects_invalid_settings() {
        let mut c = McConfig::desk(params(), 1);
        c.n_particles = 1001;
        assert!(matches!(c.validate(), Err(Error::IndivisibleParticles { .. })));
        assert_eq!(c.with_rounded_particles().n_particles, 1100);

        let mut c = McConfig::desk(params(), 1);
        c.dt = 0.1;
        assert!(matches!(c.validate(), Err(Error::ProbabilityExceedsOne { .. })));

        let mut c = McConfig::desk(params(), 1);
        c.avg_window = 2.0 * c.t_end;
        assert!(c.validate().is_err());

        let mut c = McConfig::desk(params(), 1);
        c.t_end = 1.0005;
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_epsilon_picks_admissible_step() {
        let p = ModelParams::new(0.001, 1.0, 0.3, 1.25, 0.7).unwrap();
        let c = McConfig::desk(p, 0);
        assert!(c.max_stop_probability() <= 1.0);
        assert!(c.restart_probability().unwrap() <= 1.0);
    }
}
