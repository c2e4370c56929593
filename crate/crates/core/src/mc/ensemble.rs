use alloc::vec::Vec;

use crate::diagnostics::GridProfile;
use crate::error::Result;
use crate::mc::config::McConfig;
use crate::mc::engine::Tally;
use crate::mc::particle::{react, Line, Motion, Particle, Rates, Space, Square};
use crate::model::{Dim, ModelParams};
use crate::rng::{CounterRng, Stream};

/// Initial state of particle `index`: uniform inside its cell (cells are
/// filled in index order, `per_cell` particles each), `y = 0`, running in a
/// uniformly random direction. Uses the draws of step 0.
#[inline]
pub(crate) fn initial_particle<S: Space>(
    space: &S,
    stream: &Stream,
    index: usize,
    per_cell: usize,
) -> Particle {
    let cell = index / per_cell;
    let position = space.place(cell, [stream.uniform(0, 0), stream.uniform(0, 1)]);
    Particle {
        position,
        motion: Motion::Running(space.direction(stream.uniform(0, 2))),
        y: 0.0,
        log_s_prev: space.equilibrium(position),
    }
}

/// The whole particle population, advanced one step at a time.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    pub particles: Vec<Particle>,
    config: McConfig,
    rates: Rates,
    rng: CounterRng,
    step: u64,
}

pub fn init_ensemble(config: &McConfig) -> Result<ParticleEnsemble> {
    config.validate()?;
    let rates = Rates::new(&config.params, config.dt)?;
    let rng = CounterRng::new(config.seed);
    let per_cell = config.per_cell();
    let l = config.params.domain_length();
    let particles = match config.params.dim() {
        Dim::One => build(&Line::new(l, config.n_cells), &rng, config.n_particles, per_cell),
        Dim::Two => build(&Square::new(l, config.n_cells), &rng, config.n_particles, per_cell),
    };
    Ok(ParticleEnsemble {
        particles,
        config: *config,
        rates,
        rng,
        step: 0,
    })
}

fn build<S: Space>(space: &S, rng: &CounterRng, n: usize, per_cell: usize) -> Vec<Particle> {
    (0..n)
        .map(|i| initial_particle(space, &rng.stream(i as u64), i, per_cell))
        .collect()
}

impl ParticleEnsemble {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn config(&self) -> &McConfig {
        &self.config
    }

    pub fn params(&self) -> &ModelParams {
        &self.config.params
    }

    /// Completed steps.
    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn tumbling_fraction(&self) -> f64 {
        let t = self.particles.iter().filter(|p| !p.motion.is_running()).count();
        t as f64 / self.len() as f64
    }

    /// Advances every particle by one time step.
    pub fn step(&mut self) {
        self.step_observed(|_| {});
    }

    /// Like [`step`](Self::step), calling `observe` after the particles have
    /// moved and before their internal states and motion are updated (the
    /// point at which densities are binned).
    pub fn step_observed(&mut self, observe: impl FnOnce(&Self)) {
        let l = self.config.params.domain_length();
        match self.config.params.dim() {
            Dim::One => self.step_in(&Line::new(l, self.config.n_cells), observe),
            Dim::Two => self.step_in(&Square::new(l, self.config.n_cells), observe),
        }
    }

    fn step_in<S: Space>(&mut self, space: &S, observe: impl FnOnce(&Self)) {
        let dt = self.config.dt;
        let k = self.step + 1;
        for p in &mut self.particles {
            if let Motion::Running(dir) = p.motion {
                space.advance(&mut p.position, dir, dt);
            }
        }
        observe(self);
        for (i, p) in self.particles.iter_mut().enumerate() {
            let stream = self.rng.stream(i as u64);
            react(space, &self.rates, p, &stream, k);
        }
        self.step = k;
    }
}

/// Instantaneous grid observables of an ensemble (one snapshot).
pub fn bin_profile(ensemble: &ParticleEnsemble, n_cells: usize) -> GridProfile {
    let params = ensemble.params();
    let l = params.domain_length();
    let mut tally = match params.dim() {
        Dim::One => tally_of(&Line::new(l, n_cells), ensemble),
        Dim::Two => tally_of(&Square::new(l, n_cells), ensemble),
    };
    tally.snapshots = 1;
    tally.to_profile(params, n_cells, ensemble.len(), 0.0)
}

fn tally_of<S: Space>(space: &S, ensemble: &ParticleEnsemble) -> Tally {
    let params = ensemble.params();
    let mut tally = Tally::new(space.total_cells(), 1);
    let response = params.response();
    let eps = params.epsilon();
    for p in &ensemble.particles {
        tally.record(space, p, 0, |y| eps / response.modulation(y));
    }
    tally
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn config(n: usize, cells: usize, dim: Dim) -> McConfig {
        let params = ModelParams::new(0.1, 10.0, 0.3, 1.25, 0.7).unwrap().with_dim(dim);
        McConfig {
            params,
            n_particles: n,
            n_cells: cells,
            dt: 1e-3,
            t_end: 1.0,
            avg_window: 0.5,
            snapshot_stride: 100,
            seed: 11,
        }
    }

    #[test]
    fn uniform_initial_condition() {
        let e = init_ensemble(&config(100, 10, Dim::One)).unwrap();
        assert_eq!(e.len(), 100);
        assert!(e.particles.iter().all(|p| p.y == 0.0 && p.motion.is_running()));
        assert_eq!(e.tumbling_fraction(), 0.0);
        let line = Line::new(10.0, 10);
        let mut counts = [0usize; 10];
        for p in &e.particles {
            counts[line.cell_of(p.position)] += 1;
            assert!((p.s_prev() - (-p.position[0].abs()).exp()).abs() < 1e-15);
        }
        assert_eq!(counts, [10; 10]);
    }

    #[test]
    fn uniform_initial_condition_2d() {
        let e = init_ensemble(&config(4 * 2500, 50, Dim::Two)).unwrap();
        let sq = Square::new(10.0, 50);
        let mut counts = alloc::vec![0usize; 2500];
        for p in &e.particles {
            counts[sq.cell_of(p.position)] += 1;
            let Motion::Running(d) = p.motion else { panic!() };
            assert!((d[0] * d[0] + d[1] * d[1] - 1.0).abs() < 1e-12);
        }
        assert!(counts.iter().all(|&c| c == 4));
    }

    #[test]
    fn rejects_indivisible_count() {
        assert!(init_ensemble(&config(101, 10, Dim::One)).is_err());
    }

    #[test]
    fn count_is_conserved_and_positions_stay_inside() {
        let mut e = init_ensemble(&config(1000, 10, Dim::Two)).unwrap();
        for _ in 0..300 {
            e.step();
            assert_eq!(e.len(), 1000);
        }
        assert!(e
            .particles
            .iter()
            .all(|p| p.position.iter().all(|x| (-5.0..5.0).contains(x))));
        assert!(e.tumbling_fraction() > 0.0);
    }

    #[test]
    fn binned_profile_partitions_population() {
        let mut e = init_ensemble(&config(2000, 10, Dim::One)).unwrap();
        for _ in 0..200 {
            e.step();
        }
        let prof = bin_profile(&e, 10);
        let n_bar = 200.0;
        let total: f64 = prof.rho.iter().map(|r| r * n_bar).sum();
        assert!((total - 2000.0).abs() < 1e-9);
        for i in 0..10 {
            assert!((prof.rho[i] - prof.rho_f[i] - prof.rho_g[i]).abs() < 1e-15);
        }
        for p in &mut e.particles {
            p.motion = Motion::Tumbling;
        }
        let prof = bin_profile(&e, 10);
        assert!(prof.rho_f.iter().all(|&r| r == 0.0));
        assert_eq!(prof.rho_g, prof.rho);
        assert!(prof.xi_plus.iter().all(Option::is_none));
    }
}
