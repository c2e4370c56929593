use crate::error::{Error, Result};
use crate::model::Response;

/// Spatial dimension of the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub const fn get(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    pub fn from_usize(d: usize) -> Option<Self> {
        match d {
            1 => Some(Dim::One),
            2 => Some(Dim::Two),
            _ => None,
        }
    }

    /// Velocity-average diffusion coefficient `c_d = 1/d`.
    pub fn c_d(self) -> f64 {
        1.0 / self.get() as f64
    }
}

/// Nondimensional model parameters.
///
/// All fields are finite and validated on construction; the struct is
/// immutable afterwards (the `with_*` methods return a fresh, re-validated
/// copy). `chi = 0` is accepted as the chemotaxis-free control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    epsilon: f64,
    tau: f64,
    nu: f64,
    delta: f64,
    chi: f64,
    domain_length: f64,
    dim: Dim,
}

pub const DEFAULT_DOMAIN_LENGTH: f64 = 10.0;

impl ModelParams {
    /// One-dimensional parameters on the default domain `L = 10`.
    pub fn new(epsilon: f64, tau: f64, nu: f64, delta: f64, chi: f64) -> Result<Self> {
        Self {
            epsilon,
            tau,
            nu,
            delta,
            chi,
            domain_length: DEFAULT_DOMAIN_LENGTH,
            dim: Dim::One,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        positive("epsilon", self.epsilon)?;
        positive("tau", self.tau)?;
        positive("delta", self.delta)?;
        positive("domain_length", self.domain_length)?;
        finite("nu", self.nu)?;
        if self.nu < 0.0 {
            return Err(Error::invalid("nu", self.nu, "must be non-negative"));
        }
        finite("chi", self.chi)?;
        if !(0.0..1.0).contains(&self.chi) {
            return Err(Error::invalid("chi", self.chi, "must lie in [0, 1)"));
        }
        Ok(self)
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        self.tau = tau;
        self.validated()
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        self.nu = nu;
        self.validated()
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validated()
    }

    pub fn with_response(mut self, delta: f64, chi: f64) -> Result<Self> {
        self.delta = delta;
        self.chi = chi;
        self.validated()
    }

    pub fn with_domain_length(mut self, domain_length: f64) -> Result<Self> {
        self.domain_length = domain_length;
        self.validated()
    }

    pub fn with_dim(mut self, dim: Dim) -> Self {
        self.dim = dim;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn chi(&self) -> f64 {
        self.chi
    }
    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }
    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Restart rate `μ̂ = 1/ν`; `None` in the instantaneous-tumble limit `ν = 0`.
    pub fn mu_hat(&self) -> Option<f64> {
        (self.nu > 0.0).then(|| 1.0 / self.nu)
    }

    pub fn c_d(&self) -> f64 {
        self.dim.c_d()
    }

    /// `σ_ν = 1 + ν`, the time-scale factor of the KS limit.
    pub fn sigma_nu(&self) -> f64 {
        1.0 + self.nu
    }

    pub fn response(&self) -> Response {
        Response::new(self.delta, self.chi)
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must be finite"))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, v, "must be positive"))
    }
}
