//! Observables computed from Monte Carlo or continuum profiles.

mod bimodality;
mod collapse;
mod profile;
mod slice;

pub use bimodality::{
    bimodality_sweep, center_second_derivative, diffusion_layer_marker, BimodalityPoint, Source,
};
pub use collapse::{interpolate, peak_position, rescale_collapse, Normalization, ScaledProfile};
pub use profile::{estimate_run_length, GridProfile, RunLengths};
pub use slice::{radial_profile, slice_2d, Axis, Slice};
