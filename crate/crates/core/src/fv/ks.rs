use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fv::{bernoulli, centers, GridSpec};
use crate::math;
use crate::model::ModelParams;

/// Ratio `α` of adaptation time to mean run duration. `Infinite` is the
/// limit reached by the extended model as `β → 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KsAlpha {
    Finite(f64),
    Infinite,
}

impl KsAlpha {
    /// Drift coefficient `Λ'(0) α/(1+α)`, or `Λ'(0)` for `α = ∞`.
    pub fn drift(&self, params: &ModelParams) -> Result<f64> {
        let slope = params.response().slope_at_zero();
        match *self {
            KsAlpha::Finite(a) if a.is_finite() && a > 0.0 => Ok(slope * a / (1.0 + a)),
            KsAlpha::Finite(a) => Err(Error::invalid("alpha", a, "must be positive")),
            KsAlpha::Infinite => Ok(slope),
        }
    }
}

/// Cell averages of `ρ` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct KsState {
    pub rho: Vec<f64>,
    pub length: f64,
    pub t: f64,
    pub steps: u64,
    pub dt: f64,
    /// `Σ|ρⁿ⁺¹ − ρⁿ| Δx / Δt` over the last step (0 before any step).
    pub residual: f64,
}

impl KsState {
    pub fn uniform(length: f64, n_x: usize) -> Self {
        Self {
            rho: vec![1.0; n_x],
            length,
            t: 0.0,
            steps: 0,
            dt: 0.0,
            residual: 0.0,
        }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.rho.len() as f64
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.dx()
    }
}

/// Explicit solver for `σ_ν ∂_t ρ = ∂_x c_d [∂_x ρ + a ρ ∂_x M]`.
///
/// Face fluxes use exponential fitting,
/// `J = (c_d/Δx) [B(−P) ρ_i − B(P) ρ_{i+1}]` with `P = −a (M_{i+1} − M_i)`
/// and `B(z) = z/(e^z − 1)`. This reduces to centred differences where the
/// drift vanishes and, because the zero-flux condition is
/// `ρ_{i+1}/ρ_i = e^{−a ΔM}`, its discrete steady state is the exact
/// `exp(−a M)` sampled at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct KsSolver {
    /// `Δt c_d / (σ_ν Δx²)` times the Bernoulli weights of each face
    /// `i+½`: `(B(−P), B(P))`.
    faces: Vec<(f64, f64)>,
    dx: f64,
    dt: f64,
    steps: u64,
    length: f64,
}

impl KsSolver {
    pub fn new(params: &ModelParams, alpha: KsAlpha, grid: &GridSpec) -> Result<Self> {
        grid.check_x()?;
        let (weights, dx) = face_weights(params, alpha, grid.n_x)?;
        let limit = limit_from(&weights, params, dx);
        let (dt, steps) = grid.steps(limit)?;
        let scale = dt * params.c_d() / (params.sigma_nu() * dx * dx);
        Ok(Self {
            faces: weights.iter().map(|(a, b)| (a * scale, b * scale)).collect(),
            dx,
            dt,
            steps,
            length: params.domain_length(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One explicit Euler step.
    pub fn step(&self, state: &mut KsState, scratch: &mut Vec<f64>) -> Result<()> {
        let n = state.rho.len();
        if n != self.faces.len() {
            return Err(Error::Mismatch("state and solver grids differ"));
        }
        let rho = &state.rho;
        // scaled fluxes through face i+½
        scratch.clear();
        scratch.extend((0..n).map(|i| {
            let (bm, bp) = self.faces[i];
            bm * rho[i] - bp * rho[(i + 1) % n]
        }));
        let mut change = 0.0;
        let mut finite = true;
        for i in 0..n {
            let d = scratch[(i + n - 1) % n] - scratch[i];
            state.rho[i] += d;
            change += math::abs(d);
            finite &= state.rho[i].is_finite();
        }
        if !finite {
            return Err(Error::NonFinite("KS density"));
        }
        state.t += self.dt;
        state.steps += 1;
        state.dt = self.dt;
        state.residual = change * self.dx / self.dt;
        Ok(())
    }

    pub fn run(&self, mut state: KsState) -> Result<KsState> {
        let mut scratch = Vec::with_capacity(state.rho.len());
        for _ in 0..self.steps {
            self.step(&mut state, &mut scratch)?;
        }
        Ok(state)
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

fn face_weights(params: &ModelParams, alpha: KsAlpha, n: usize) -> Result<(Vec<(f64, f64)>, f64)> {
    let a = alpha.drift(params)?;
    let l = params.domain_length();
    let m: Vec<f64> = centers(l, n).iter().map(|x| -math::abs(*x)).collect();
    let weights = (0..n)
        .map(|i| {
            let p = -a * (m[(i + 1) % n] - m[i]);
            (bernoulli(-p), bernoulli(p))
        })
        .collect();
    Ok((weights, l / n as f64))
}

fn limit_from(weights: &[(f64, f64)], params: &ModelParams, dx: f64) -> f64 {
    let n = weights.len();
    // outflow weight of cell i: B(−P) on its right face plus B(P) on its left face
    let worst = (0..n)
        .map(|i| weights[i].0 + weights[(i + n - 1) % n].1)
        .fold(0.0, f64::max);
    params.sigma_nu() * dx * dx / (params.c_d() * worst)
}

/// Largest step for which the explicit update keeps `ρ` non-negative.
pub fn ks_stable_dt(params: &ModelParams, alpha: KsAlpha, n_x: usize) -> Result<f64> {
    let (w, dx) = face_weights(params, alpha, n_x)?;
    Ok(limit_from(&w, params, dx))
}

/// Advances `ρ ≡ 1` to `grid.t_end`.
pub fn ks_solve(params: &ModelParams, alpha: KsAlpha, grid: &GridSpec) -> Result<KsState> {
    let solver = KsSolver::new(params, alpha, grid)?;
    solver.run(KsState::uniform(params.domain_length(), grid.n_x))
}

/// Fixed point of the discrete scheme, `ρ_i ∝ exp(−a M(x_i))`, normalised
/// to mass `L`.
pub fn ks_steady_state(params: &ModelParams, alpha: KsAlpha, n_x: usize) -> Result<Vec<f64>> {
    if n_x < 4 {
        return Err(Error::TooFewCells { needed: 4, got: n_x });
    }
    let a = alpha.drift(params)?;
    let l = params.domain_length();
    let mut rho: Vec<f64> = centers(l, n_x).iter().map(|x| math::exp(a * math::abs(*x))).collect();
    let mean = rho.iter().sum::<f64>() / n_x as f64;
    rho.iter_mut().for_each(|r| *r /= mean);
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(nu: f64, chi: f64) -> ModelParams {
        ModelParams::new(0.1, 0.1, nu, 1.25, chi).unwrap()
    }

    #[test]
    fn drift_coefficients() {
        let p = params(0.3, 0.7);
        assert_relative_eq!(KsAlpha::Finite(1.0).drift(&p).unwrap(), -0.28, epsilon = 1e-15);
        assert_relative_eq!(KsAlpha::Infinite.drift(&p).unwrap(), -0.56, epsilon = 1e-15);
        assert!(KsAlpha::Finite(0.0).drift(&p).is_err());
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let p = params(0.3, 0.7);
        let grid = GridSpec::ks(100, 1.0);
        let solver = KsSolver::new(&p, KsAlpha::Finite(1.0), &grid).unwrap();
        let rho = ks_steady_state(&p, KsAlpha::Finite(1.0), 100).unwrap();
        let mut s = KsState::uniform(10.0, 100);
        s.rho = rho.clone();
        solver.step(&mut s, &mut Vec::new()).unwrap();
        for (a, b) in s.rho.iter().zip(&rho) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn converges_to_exponential_profile() {
        let p = params(0.3, 0.7);
        let s = ks_solve(&p, KsAlpha::Finite(1.0), &GridSpec::ks(100, 150.0)).unwrap();
        let c = s.rho[50] / (-0.28f64 * 0.05).exp();
        let x = centers(10.0, 100);
        for (r, x) in s.rho.iter().zip(&x) {
            assert_relative_eq!(*r, c * (-0.28 * x.abs()).exp(), max_relative = 1e-6);
        }
        assert!(s.residual < 1e-6);
    }

    #[test]
    fn no_chemotaxis_keeps_uniform_state() {
        let s = ks_solve(&params(0.3, 0.0), KsAlpha::Finite(1.0), &GridSpec::ks(20, 5.0)).unwrap();
        assert!(s.rho.iter().all(|r| (r - 1.0).abs() < 1e-14));
    }

    #[test]
    fn rejects_unstable_step() {
        let p = params(0.0, 0.7);
        let limit = ks_stable_dt(&p, KsAlpha::Infinite, 100).unwrap();
        let g = GridSpec::ks(100, 1.0).with_dt(1.01 * limit);
        assert!(matches!(ks_solve(&p, KsAlpha::Infinite, &g), Err(Error::Cfl { .. })));
    }

    #[test]
    fn mass_and_symmetry_are_preserved() {
        let p = params(0.3, 0.7);
        let solver = KsSolver::new(&p, KsAlpha::Finite(4.0), &GridSpec::ks(64, 1.0)).unwrap();
        let mut s = KsState::uniform(10.0, 64);
        for (i, r) in s.rho.iter_mut().enumerate() {
            let x = i.min(63 - i) as f64;
            *r = 1.0 + 0.5 * (x * 0.3).sin();
        }
        let m0 = s.mass();
        let mut scratch = Vec::new();
        for _ in 0..1000 {
            let before = s.mass();
            solver.step(&mut s, &mut scratch).unwrap();
            assert!((s.mass() - before).abs() <= 1e-12 * before);
        }
        assert!((s.mass() - m0).abs() < 1e-11 * m0);
        for i in 0..32 {
            assert!((s.rho[i] - s.rho[63 - i]).abs() < 1e-13);
        }
        assert!(s.rho.iter().all(|&r| r >= 0.0));
    }
}
