//! Numerical kernels for run-and-tumble chemotaxis with internal adaptation
//! and finite tumbling duration.
//!
//! The crate is `no_std` (with `alloc`). Float intrinsics always come from
//! the `libm` crate, so runs are bit-reproducible across platforms; the
//! `std` feature only adds `std::error::Error` support.
//!
//! * [`model`] holds the nondimensional parameters, the response function
//!   and the prescribed chemoattractant field.
//! * [`mc`] is the Monte Carlo particle engine for the kinetic equation.
//! * [`fv`] contains the finite-volume solvers for the KS and ExKS limits.
//! * [`diagnostics`] has the observables computed from either engine.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod fv;
pub(crate) mod math;
pub mod mc;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
pub use model::{ChemoField, Dim, ModelParams, Response, ScalingMode};
