//! Model parameters, chemotactic response and the prescribed chemical field.

mod field;
mod params;
mod response;
mod scaling;

pub use field::{equilibrium_m, ChemoField, Point};
pub use params::{Dim, ModelParams};
pub use response::{lambda_response, response_f, Response};
pub use scaling::{resolve_tau, ScalingMode};
