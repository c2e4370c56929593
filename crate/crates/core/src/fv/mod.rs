//! Explicit finite-volume solvers for the two continuum limits on the
//! periodic interval `[-L/2, L/2)`:
//!
//! * [`ks`]: the Keller–Segel drift–diffusion equation for `ρ(t, x)`,
//! * [`exks`]: the extended equation for `h(t, x, m)` over position and
//!   internal state.
//!
//! Both use conservative flux form, so the total mass is preserved up to
//! rounding, and both reject time steps above their positivity limit.

mod exks;
mod grid;
mod ks;

pub use exks::{
    exks_density, exks_run_length, exks_solve, exks_split_densities, exks_step,
    ks_exks_consistency, ExksInit, ExksSolver, ExksState,
};
pub use grid::GridSpec;
pub use ks::{ks_solve, ks_stable_dt, ks_steady_state, KsAlpha, KsSolver, KsState};

/// `z / (e^z - 1)`, with the removable singularity at 0 filled in.
pub(crate) fn bernoulli(z: f64) -> f64 {
    if crate::math::abs(z) < 1e-8 {
        1.0 - 0.5 * z
    } else {
        z / crate::math::exp_m1(z)
    }
}

/// Cell-centre coordinates of `n` cells on `[-L/2, L/2)`.
pub(crate) fn centers(length: f64, n: usize) -> alloc::vec::Vec<f64> {
    let dx = length / n as f64;
    (0..n).map(|i| -0.5 * length + (i as f64 + 0.5) * dx).collect()
}
