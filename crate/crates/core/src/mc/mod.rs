//! Monte Carlo particle engine for the kinetic run-and-tumble equation.
//!
//! Particles carry the deviation `y = M(S) - m` of their internal state from
//! the local equilibrium. One time step is, in order: move, bin, update the
//! internal state from the change of the sensed signal, then draw the
//! run/tumble transition.
//!
//! Two drivers sample this process:
//!
//! * [`ParticleEnsemble`] applies the scheme literally, one step at a time
//!   for the whole population, with one Bernoulli draw per particle and
//!   step. It is the reference implementation and is handy for inspection.
//! * [`McEngine`] carries each particle through the whole horizon with an
//!   event-driven kernel: candidate transitions are thinned from geometric
//!   gaps and `y` is advanced between them without random draws. The law of
//!   the trajectories is the same; the work per step is a few floating-point
//!   operations. Draws are keyed by `(seed, particle, event)` and the
//!   particle range is split into fixed chunks merged in index order, so
//!   results do not depend on the thread count.

mod config;
mod engine;
mod ensemble;
mod kernel;
mod particle;

pub use config::{McConfig, Schedule};
pub use engine::{GroupProfiles, McEngine, McOutput, RunStats, Tally, CHUNK_SIZE, GROUPS};
pub use ensemble::{bin_profile, init_ensemble, ParticleEnsemble};
pub use particle::{
    advect, transition, update_internal, update_internal_log, Coast, Line, Motion, Particle,
    Rates, Space, Square,
};
