use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{which} probability per step is {prob}, which exceeds 1")]
    ProbabilityExceedsOne { which: &'static str, prob: f64 },

    #[error("{particles} particles cannot be spread evenly over {cells} cells")]
    IndivisibleParticles { particles: usize, cells: usize },

    #[error("time step {dt} exceeds the stability limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("non-finite value detected in {0}")]
    NonFinite(&'static str),

    #[error("negative density {value} at cell ({i}, {k})")]
    NegativeDensity { value: f64, i: usize, k: usize },

    #[error("at least {needed} cells are required, got {got}")]
    TooFewCells { needed: usize, got: usize },

    #[error("coordinate {value} lies outside the domain [{low}, {high})")]
    OutOfDomain { value: f64, low: f64, high: f64 },

    #[error("rescaled profiles do not overlap")]
    NoOverlap,

    #[error("{0}")]
    Mismatch(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
