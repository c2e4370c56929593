use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::diagnostics::GridProfile;
use crate::error::{Error, Result};
use crate::mc::config::{McConfig, Schedule};
use crate::mc::kernel::Kernel;
use crate::mc::particle::{Line, Motion, Particle, Rates, Space, Square};
use crate::model::{Dim, ModelParams};
use crate::rng::{CounterRng, SeqRng};

/// Particles per work unit. Fixed so that the merge order, and with it the
/// floating-point sums, do not depend on how many threads run the chunks.
pub const CHUNK_SIZE: usize = 16_384;

/// Number of interleaved particle groups (`index % GROUPS`) tallied
/// separately for resampling error estimates.
pub const GROUPS: usize = 20;

/// Snapshot sums over a set of particles.
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    cells: usize,
    groups: usize,
    pub(crate) snapshots: u64,
    running: Vec<u64>,
    tumbling: Vec<u64>,
    xi_plus: Vec<f64>,
    n_plus: Vec<u64>,
    xi_minus: Vec<f64>,
    n_minus: Vec<u64>,
    xi_all: Vec<f64>,
    group_running: Vec<u64>,
    group_tumbling: Vec<u64>,
}

impl Tally {
    pub fn new(cells: usize, groups: usize) -> Self {
        Self {
            cells,
            groups,
            snapshots: 0,
            running: vec![0; cells],
            tumbling: vec![0; cells],
            xi_plus: vec![0.0; cells],
            n_plus: vec![0; cells],
            xi_minus: vec![0.0; cells],
            n_minus: vec![0; cells],
            xi_all: vec![0.0; cells],
            group_running: vec![0; cells * groups],
            group_tumbling: vec![0; cells * groups],
        }
    }

    #[inline(always)]
    pub(crate) fn record<S: Space>(
        &mut self,
        space: &S,
        p: &Particle,
        group: usize,
        run_length: impl Fn(f64) -> f64,
    ) {
        let c = space.cell_of(p.position);
        match p.motion {
            Motion::Running(dir) => {
                self.running[c] += 1;
                self.group_running[group * self.cells + c] += 1;
                let xi = run_length(p.y);
                self.xi_all[c] += xi;
                match space.climbing(p.position, dir) {
                    Some(true) => {
                        self.xi_plus[c] += xi;
                        self.n_plus[c] += 1;
                    }
                    Some(false) => {
                        self.xi_minus[c] += xi;
                        self.n_minus[c] += 1;
                    }
                    None => {}
                }
            }
            Motion::Tumbling => {
                self.tumbling[c] += 1;
                self.group_tumbling[group * self.cells + c] += 1;
            }
        }
    }

    /// Adds `other` into `self`. Counts are exact; the run-length sums are
    /// floating point, so callers merge in a fixed order.
    pub fn merge(&mut self, other: &Tally) {
        assert_eq!((self.cells, self.groups), (other.cells, other.groups));
        fn add<T: Copy + core::ops::AddAssign>(a: &mut [T], b: &[T]) {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x += y);
        }
        self.snapshots = self.snapshots.max(other.snapshots);
        add(&mut self.running, &other.running);
        add(&mut self.tumbling, &other.tumbling);
        add(&mut self.xi_plus, &other.xi_plus);
        add(&mut self.n_plus, &other.n_plus);
        add(&mut self.xi_minus, &other.xi_minus);
        add(&mut self.n_minus, &other.n_minus);
        add(&mut self.xi_all, &other.xi_all);
        add(&mut self.group_running, &other.group_running);
        add(&mut self.group_tumbling, &other.group_tumbling);
    }

    /// Total particle observations (particles × snapshots).
    pub fn observations(&self) -> u64 {
        self.running.iter().chain(&self.tumbling).sum()
    }

    pub fn tumbling_observations(&self) -> u64 {
        self.tumbling.iter().sum()
    }

    /// Averages the sums into densities normalised by `N̄ = N / cells`.
    pub(crate) fn to_profile(
        &self,
        params: &ModelParams,
        n_cells: usize,
        n_particles: usize,
        window: f64,
    ) -> GridProfile {
        let norm = 1.0 / (n_particles as f64 / self.cells as f64 * self.snapshots as f64);
        let rho_f: Vec<f64> = self.running.iter().map(|&c| c as f64 * norm).collect();
        let rho_g: Vec<f64> = self.tumbling.iter().map(|&c| c as f64 * norm).collect();
        let mean = |s: f64, n: u64| (n > 0).then(|| s / n as f64);
        let xi_plus: Vec<_> = (0..self.cells).map(|c| mean(self.xi_plus[c], self.n_plus[c])).collect();
        let xi_minus: Vec<_> =
            (0..self.cells).map(|c| mean(self.xi_minus[c], self.n_minus[c])).collect();
        let xi_all: Vec<_> = (0..self.cells).map(|c| mean(self.xi_all[c], self.running[c])).collect();
        GridProfile::from_parts(
            params.dim(),
            n_cells,
            params.domain_length(),
            rho_f,
            rho_g,
            xi_plus,
            xi_minus,
            xi_all,
            self.snapshots,
            window,
        )
    }

    fn group_profiles(&self, n_particles: usize, schedule: &Schedule) -> GroupProfiles {
        let g = self.groups;
        let mut rho_f = vec![0.0; g * self.cells];
        let mut rho_g = vec![0.0; g * self.cells];
        for group in 0..g {
            let members = n_particles / g + usize::from(group < n_particles % g);
            let norm = 1.0 / (members as f64 / self.cells as f64 * schedule.snapshots as f64);
            for c in 0..self.cells {
                let i = group * self.cells + c;
                rho_f[i] = self.group_running[i] as f64 * norm;
                rho_g[i] = self.group_tumbling[i] as f64 * norm;
            }
        }
        GroupProfiles {
            groups: g,
            cells: self.cells,
            weights: (0..g)
                .map(|group| (n_particles / g + usize::from(group < n_particles % g)) as f64)
                .collect(),
            rho_f,
            rho_g,
        }
    }
}

/// Time-averaged densities of each particle group. Particles do not
/// interact, so the groups are independent replicas of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupProfiles {
    pub groups: usize,
    pub cells: usize,
    weights: Vec<f64>,
    pub rho_f: Vec<f64>,
    pub rho_g: Vec<f64>,
}

impl GroupProfiles {
    pub fn rho_f(&self, group: usize) -> &[f64] {
        &self.rho_f[group * self.cells..(group + 1) * self.cells]
    }

    pub fn rho_g(&self, group: usize) -> &[f64] {
        &self.rho_g[group * self.cells..(group + 1) * self.cells]
    }

    /// Weighted mean of the selected groups (repeats allowed).
    fn pooled(&self, picks: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let mut f = vec![0.0; self.cells];
        let mut g = vec![0.0; self.cells];
        let mut w_sum = 0.0;
        for &k in picks {
            let w = self.weights[k];
            w_sum += w;
            for c in 0..self.cells {
                f[c] += w * self.rho_f[k * self.cells + c];
                g[c] += w * self.rho_g[k * self.cells + c];
            }
        }
        f.iter_mut().chain(g.iter_mut()).for_each(|v| *v /= w_sum);
        (f, g)
    }

    /// Bootstrap standard error of a statistic of the pooled `(ρ_f, ρ_g)`
    /// profiles, resampling whole groups with replacement.
    pub fn bootstrap_se(
        &self,
        resamples: usize,
        seed: u64,
        stat: impl Fn(&[f64], &[f64]) -> f64,
    ) -> f64 {
        let mut rng = SeqRng::new(seed);
        let mut picks = vec![0; self.groups];
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..resamples {
            picks.iter_mut().for_each(|p| *p = rng.below(self.groups));
            let (f, g) = self.pooled(&picks);
            let v = stat(&f, &g);
            s1 += v;
            s2 += v * v;
        }
        let n = resamples as f64;
        let var = (s2 / n - (s1 / n) * (s1 / n)) * n / (n - 1.0);
        libm::sqrt(var.max(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStats {
    pub n_particles: usize,
    pub n_steps: u64,
    pub snapshots: u64,
    /// Observed fraction of tumbling particles, as (tumbling, total) counts
    /// over all snapshots.
    pub tumbling_observations: u64,
    pub observations: u64,
}

impl RunStats {
    pub fn particle_steps(&self) -> u128 {
        self.n_particles as u128 * self.n_steps as u128
    }

    pub fn tumbling_fraction(&self) -> f64 {
        self.tumbling_observations as f64 / self.observations as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McOutput {
    /// Time average over the snapshots of the final window.
    pub profile: GridProfile,
    pub groups: GroupProfiles,
    pub stats: RunStats,
}

/// Particle-major Monte Carlo driver: each particle is carried through the
/// whole horizon by the event-driven kernel before the next one starts.
#[derive(Debug, Clone)]
pub struct McEngine {
    config: McConfig,
    schedule: Schedule,
    kernel: Kernel,
    rng: CounterRng,
}

impl McEngine {
    pub fn new(config: McConfig) -> Result<Self> {
        let schedule = config.validate()?;
        let rates = Rates::new(&config.params, config.dt)?;
        Ok(Self {
            config,
            schedule,
            kernel: Kernel::new(&config.params, &rates, config.dt),
            rng: CounterRng::new(config.seed),
        })
    }

    pub fn config(&self) -> &McConfig {
        &self.config
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn chunks(&self) -> usize {
        self.config.n_particles.div_ceil(CHUNK_SIZE)
    }

    pub fn chunk_range(&self, chunk: usize) -> Range<usize> {
        let start = chunk * CHUNK_SIZE;
        start..(start + CHUNK_SIZE).min(self.config.n_particles)
    }

    pub fn empty_tally(&self) -> Tally {
        let mut t = Tally::new(self.config.total_cells(), GROUPS);
        t.snapshots = self.schedule.snapshots;
        t
    }

    /// Simulates the particles of one chunk over the full horizon.
    pub fn run_chunk(&self, chunk: usize) -> Result<Tally> {
        let mut tally = self.empty_tally();
        let range = self.chunk_range(chunk);
        let l = self.config.params.domain_length();
        match self.config.params.dim() {
            Dim::One => self.simulate(&Line::new(l, self.config.n_cells), range, &mut tally)?,
            Dim::Two => self.simulate(&Square::new(l, self.config.n_cells), range, &mut tally)?,
        }
        Ok(tally)
    }

    fn simulate<S: Space>(&self, space: &S, range: Range<usize>, tally: &mut Tally) -> Result<()> {
        let per_cell = self.config.per_cell();
        let eps = self.config.params.epsilon();
        for index in range {
            let stream = self.rng.stream(index as u64);
            let p = self.kernel.simulate(
                space,
                &stream,
                index,
                per_cell,
                &self.schedule,
                index % GROUPS,
                eps,
                tally,
            );
            if !p.y.is_finite() {
                return Err(Error::NonFinite("internal state"));
            }
        }
        Ok(())
    }

    /// Converts merged chunk tallies into the run output.
    pub fn finish(&self, tally: &Tally) -> Result<McOutput> {
        let profile = tally.to_profile(
            &self.config.params,
            self.config.n_cells,
            self.config.n_particles,
            self.config.avg_window,
        );
        profile.ensure_finite()?;
        Ok(McOutput {
            profile,
            groups: tally.group_profiles(self.config.n_particles, &self.schedule),
            stats: RunStats {
                n_particles: self.config.n_particles,
                n_steps: self.schedule.n_steps,
                snapshots: self.schedule.snapshots,
                tumbling_observations: tally.tumbling_observations(),
                observations: tally.observations(),
            },
        })
    }

    /// Runs all chunks sequentially.
    pub fn run(&self) -> Result<McOutput> {
        let mut total = self.empty_tally();
        for chunk in 0..self.chunks() {
            total.merge(&self.run_chunk(chunk)?);
        }
        self.finish(&total)
    }
}
