use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mc::{bin_profile, ParticleEnsemble};
use crate::model::{Dim, Point};

/// Cell-averaged observables on a periodic 1D interval or 2D lattice.
///
/// Densities are normalised so that a uniform population gives `ρ ≡ 1`.
/// 2D arrays are row-major with `x1` varying fastest. Run lengths are
/// `None` in cells without contributing particles.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    pub dim: Dim,
    /// Cells per axis.
    pub n_cells: usize,
    pub domain_length: f64,
    pub rho: Vec<f64>,
    pub rho_f: Vec<f64>,
    pub rho_g: Vec<f64>,
    pub xi_plus: Vec<Option<f64>>,
    pub xi_minus: Vec<Option<f64>>,
    pub xi_bar: Vec<Option<f64>>,
    /// Number of accumulated snapshots (1 for a single state).
    pub snapshots: u64,
    /// Length of the averaging window in time units.
    pub window: f64,
}

impl GridProfile {
    /// Assembles a profile from running/tumbling densities and run-length
    /// means. `xi_all` is the mean over every running particle in the cell;
    /// it stands in for `ξ̄` where one of the directional means is missing.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        dim: Dim,
        n_cells: usize,
        domain_length: f64,
        rho_f: Vec<f64>,
        rho_g: Vec<f64>,
        xi_plus: Vec<Option<f64>>,
        xi_minus: Vec<Option<f64>>,
        xi_all: Vec<Option<f64>>,
        snapshots: u64,
        window: f64,
    ) -> Self {
        let rho = rho_f.iter().zip(&rho_g).map(|(f, g)| f + g).collect();
        let xi_bar = xi_plus
            .iter()
            .zip(&xi_minus)
            .zip(&xi_all)
            .map(|((p, m), a)| match (p, m) {
                (Some(p), Some(m)) => Some(0.5 * (p + m)),
                _ => *a,
            })
            .collect();
        Self {
            dim,
            n_cells,
            domain_length,
            rho,
            rho_f,
            rho_g,
            xi_plus,
            xi_minus,
            xi_bar,
            snapshots,
            window,
        }
    }

    /// Profile of a 1D continuum solution. Directional run lengths are not
    /// resolved by the continuum models and are left missing.
    pub fn from_continuum(
        domain_length: f64,
        rho_f: Vec<f64>,
        rho_g: Vec<f64>,
        xi_bar: Vec<Option<f64>>,
    ) -> Result<Self> {
        let n = rho_f.len();
        if rho_g.len() != n || xi_bar.len() != n {
            return Err(Error::Mismatch("profile arrays differ in length"));
        }
        let p = Self::from_parts(
            Dim::One,
            n,
            domain_length,
            rho_f,
            rho_g,
            alloc::vec![None; n],
            alloc::vec![None; n],
            xi_bar,
            1,
            0.0,
        );
        p.ensure_finite()?;
        Ok(p)
    }

    pub fn total_cells(&self) -> usize {
        self.rho.len()
    }

    pub fn dx(&self) -> f64 {
        self.domain_length / self.n_cells as f64
    }

    /// Coordinate of the centre of cell `i` along one axis.
    pub fn axis_center(&self, i: usize) -> f64 {
        -0.5 * self.domain_length + (i as f64 + 0.5) * self.dx()
    }

    /// Cell-centre coordinates along one axis.
    pub fn axis_centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.axis_center(i)).collect()
    }

    /// Centre of flat cell index `c`.
    pub fn center(&self, c: usize) -> Point {
        match self.dim {
            Dim::One => [self.axis_center(c), 0.0],
            Dim::Two => [
                self.axis_center(c % self.n_cells),
                self.axis_center(c / self.n_cells),
            ],
        }
    }

    /// `Σ ρ Δx^d`; equals `L^d` for a normalised population.
    pub fn mass(&self) -> f64 {
        let cell = libm::pow(self.dx(), self.dim.get() as f64);
        self.rho.iter().sum::<f64>() * cell
    }

    pub fn ensure_finite(&self) -> Result<()> {
        let dens = self.rho_f.iter().chain(&self.rho_g).all(|v| v.is_finite());
        let xi = self
            .xi_plus
            .iter()
            .chain(&self.xi_minus)
            .chain(&self.xi_bar)
            .flatten()
            .all(|v| v.is_finite());
        if dens && xi {
            Ok(())
        } else {
            Err(Error::NonFinite("profile"))
        }
    }
}

/// Per-cell local mean run lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLengths {
    pub xi_plus: Vec<Option<f64>>,
    pub xi_minus: Vec<Option<f64>>,
    pub xi_bar: Vec<Option<f64>>,
}

/// Mean of `ε/Λ(y)` over running particles in each cell, split by whether
/// they climb or descend the gradient of `S`. Particles with no defined
/// direction relative to the gradient only enter `ξ̄`.
pub fn estimate_run_length(ensemble: &ParticleEnsemble, n_cells: usize) -> RunLengths {
    let p = bin_profile(ensemble, n_cells);
    RunLengths {
        xi_plus: p.xi_plus,
        xi_minus: p.xi_minus,
        xi_bar: p.xi_bar,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{init_ensemble, McConfig};
    use crate::model::ModelParams;

    #[test]
    fn xi_bar_combines_directional_means() {
        let p = GridProfile::from_parts(
            Dim::One,
            3,
            3.0,
            alloc::vec![1.0; 3],
            alloc::vec![0.5; 3],
            alloc::vec![Some(2.0), None, None],
            alloc::vec![Some(1.0), Some(1.0), None],
            alloc::vec![Some(1.7), Some(1.0), None],
            1,
            0.0,
        );
        assert_eq!(p.xi_bar, [Some(1.5), Some(1.0), None]);
        assert_eq!(p.rho, [1.5; 3]);
        assert_eq!(p.mass(), 4.5);
        assert_eq!(p.axis_centers(), [-1.0, 0.0, 1.0]);
    }

    #[test]
    fn run_lengths_are_bounded() {
        let params = ModelParams::new(0.1, 10.0, 0.3, 1.25, 0.7).unwrap();
        let cfg = McConfig {
            params,
            n_particles: 5000,
            n_cells: 10,
            dt: 1e-3,
            t_end: 1.0,
            avg_window: 1.0,
            snapshot_stride: 1,
            seed: 3,
        };
        let mut e = init_ensemble(&cfg).unwrap();
        for _ in 0..500 {
            e.step();
        }
        let r = estimate_run_length(&e, 10);
        let (lo, hi) = (0.1 / 1.7, 0.1 / 0.3);
        for v in r.xi_plus.iter().chain(&r.xi_minus).chain(&r.xi_bar).flatten() {
            assert!(*v >= lo && *v <= hi);
        }
    }

    #[test]
    fn chi_zero_gives_epsilon() {
        let params = ModelParams::new(0.1, 10.0, 0.3, 1.25, 0.0).unwrap();
        let cfg = McConfig {
            params,
            n_particles: 1000,
            n_cells: 10,
            dt: 1e-3,
            t_end: 1.0,
            avg_window: 1.0,
            snapshot_stride: 1,
            seed: 3,
        };
        let mut e = init_ensemble(&cfg).unwrap();
        for _ in 0..100 {
            e.step();
        }
        let r = estimate_run_length(&e, 10);
        for v in r.xi_plus.iter().chain(&r.xi_minus).flatten() {
            assert!((v - 0.1).abs() < 1e-15);
        }
    }
}
