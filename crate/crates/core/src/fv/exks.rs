use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostics::GridProfile;
use crate::error::{Error, Result};
use crate::fv::{centers, ks_steady_state, GridSpec, KsAlpha};
use crate::math;
use crate::model::{ModelParams, Response};

/// Cell averages of `h(t, x, m)`, stored row by row in `x`
/// (`h[i * n_m + k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExksState {
    pub h: Vec<f64>,
    pub n_x: usize,
    pub n_m: usize,
    pub length: f64,
    pub m_half_width: f64,
    pub t: f64,
    pub steps: u64,
    pub dt: f64,
    /// `Σ|ρⁿ⁺¹ − ρⁿ| Δx / Δt` over the last step of a solve.
    pub residual: f64,
}

/// Initial distribution over the internal coordinate; uniform in `x` with
/// unit density in every case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExksInit {
    /// Narrow triangle centred at `m = 0`: weights `(1, 2, 1)/4` over three
    /// cells when `K` is odd, the cell averages `(1, 3, 3, 1)/8` of a hat of
    /// half-width `2Δm` when `K` is even.
    #[default]
    Triangle,
    /// Uniform over `[-Y, Y]`.
    Flat,
}

impl ExksState {
    pub fn new(length: f64, grid: &GridSpec, init: ExksInit) -> Result<Self> {
        grid.check_x()?;
        grid.check_m()?;
        let (nx, nm) = (grid.n_x, grid.n_m);
        let dm = grid.dm();
        let mut column = vec![0.0; nm];
        match init {
            ExksInit::Flat => column.iter_mut().for_each(|v| *v = 1.0 / (nm as f64 * dm)),
            ExksInit::Triangle if nm % 2 == 1 => {
                let c = nm / 2;
                for (k, w) in [(c - 1, 0.25), (c, 0.5), (c + 1, 0.25)] {
                    column[k] = w / dm;
                }
            }
            ExksInit::Triangle => {
                if nm < 4 {
                    return Err(Error::TooFewCells { needed: 4, got: nm });
                }
                let c = nm / 2;
                for (k, w) in [(c - 2, 0.125), (c - 1, 0.375), (c, 0.375), (c + 1, 0.125)] {
                    column[k] = w / dm;
                }
            }
        }
        let mut h = Vec::with_capacity(nx * nm);
        for _ in 0..nx {
            h.extend_from_slice(&column);
        }
        Ok(Self {
            h,
            n_x: nx,
            n_m: nm,
            length,
            m_half_width: grid.m_half_width,
            t: 0.0,
            steps: 0,
            dt: 0.0,
            residual: 0.0,
        })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_x as f64
    }

    pub fn dm(&self) -> f64 {
        2.0 * self.m_half_width / self.n_m as f64
    }

    pub fn m_centers(&self) -> Vec<f64> {
        let dm = self.dm();
        (0..self.n_m).map(|k| -self.m_half_width + (k as f64 + 0.5) * dm).collect()
    }

    pub fn x_centers(&self) -> Vec<f64> {
        centers(self.length, self.n_x)
    }

    pub fn mass(&self) -> f64 {
        self.h.iter().sum::<f64>() * self.dx() * self.dm()
    }

    /// Fraction of the mass in the two outermost cells at each end of the
    /// internal coordinate.
    pub fn edge_mass_fraction(&self) -> f64 {
        let nm = self.n_m;
        let edge: f64 = self
            .h
            .chunks_exact(nm)
            .map(|row| row[0] + row[1] + row[nm - 2] + row[nm - 1])
            .sum();
        edge / self.h.iter().sum::<f64>()
    }
}

/// Explicit solver for
/// `∂_t h = ∂_x[(c_d/Λ(M−m)) ∂_x (h/(1+νΛ(M−m)))] − ∂_m[((M−m)/β) h]`.
///
/// Diffusion acts on `φ = h/(1+νΛ)` with centred differences and the face
/// coefficient `c_d/Λ` evaluated at `(x_{i+½}, m_k)`; transport in `m` is
/// donor-cell upwind with face velocity `(M_i − m_{k+½})/β` and no flux
/// through `m = ±Y`. The stability limit is the largest step for which
/// every cell keeps a non-negative self-coefficient, which guarantees
/// positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExksSolver {
    n_x: usize,
    n_m: usize,
    length: f64,
    m_half_width: f64,
    /// `1/(1+νΛ(M_i − m_k))`
    weight: Vec<f64>,
    /// `Δt c_d / (Λ(M_{i+½} − m_k) Δx²)`
    face: Vec<f64>,
    /// `Δt/(β Δm)` times the face velocity numerator `M_i − m_{k+½}` is
    /// linear in `k`, so only `M_i` and the constants are stored.
    m_eq: Vec<f64>,
    adv: f64,
    limit: f64,
    dt: f64,
    steps: u64,
    dx: f64,
    dm: f64,
}

impl ExksSolver {
    pub fn new(params: &ModelParams, beta: f64, grid: &GridSpec) -> Result<Self> {
        grid.check_x()?;
        grid.check_m()?;
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", beta, "must be positive"));
        }
        let (nx, nm) = (grid.n_x, grid.n_m);
        let l = params.domain_length();
        let dx = grid.dx(l);
        let dm = grid.dm();
        let y = grid.m_half_width;
        let response = params.response();
        let nu = params.nu();
        let c_d = params.c_d();
        let xc = centers(l, nx);
        let m_eq: Vec<f64> = xc.iter().map(|x| -math::abs(*x)).collect();
        // face i+½ sits at x_i + Δx/2; the last one is the periodic face at −L/2
        let m_face: Vec<f64> = (0..nx)
            .map(|i| {
                if i + 1 == nx {
                    -0.5 * l
                } else {
                    -math::abs(-0.5 * l + (i + 1) as f64 * dx)
                }
            })
            .collect();
        let mc: Vec<f64> = (0..nm).map(|k| -y + (k as f64 + 0.5) * dm).collect();
        let mut weight = vec![0.0; nx * nm];
        let mut face = vec![0.0; nx * nm];
        for i in 0..nx {
            for k in 0..nm {
                weight[i * nm + k] = 1.0 / (1.0 + nu * response.modulation(m_eq[i] - mc[k]));
                face[i * nm + k] = c_d / (response.modulation(m_face[i] - mc[k]) * dx * dx);
            }
        }
        // outflow rate of each cell, to bound the step
        let mut worst = 0.0f64;
        for i in 0..nx {
            let left = (i + nx - 1) % nx;
            for k in 0..nm {
                let diff = (face[i * nm + k] + face[left * nm + k]) * weight[i * nm + k];
                let up = if k + 1 < nm { (m_eq[i] - (-y + (k + 1) as f64 * dm)).max(0.0) } else { 0.0 };
                let down = if k > 0 { (-y + k as f64 * dm - m_eq[i]).max(0.0) } else { 0.0 };
                worst = worst.max(diff + (up + down) / (beta * dm));
            }
        }
        let limit = if worst > 0.0 { 1.0 / worst } else { f64::INFINITY };
        let (dt, steps) = grid.steps(limit)?;
        face.iter_mut().for_each(|f| *f *= dt);
        Ok(Self {
            n_x: nx,
            n_m: nm,
            length: l,
            m_half_width: y,
            weight,
            face,
            m_eq,
            adv: dt / (beta * dm),
            limit,
            dt,
            steps,
            dx,
            dm,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Largest step that keeps every self-coefficient non-negative.
    pub fn stable_dt(&self) -> f64 {
        self.limit
    }

    fn check(&self, state: &ExksState) -> Result<()> {
        if state.n_x != self.n_x || state.n_m != self.n_m || state.h.len() != self.n_x * self.n_m {
            return Err(Error::Mismatch("state and solver grids differ"));
        }
        Ok(())
    }

    /// One explicit step from `state.h` into `next` (which is resized as
    /// needed), then swaps the buffers.
    pub fn step(&self, state: &mut ExksState, next: &mut Vec<f64>) -> Result<()> {
        self.check(state)?;
        let (nx, nm) = (self.n_x, self.n_m);
        let h = &state.h;
        next.clear();
        next.extend(h.iter().zip(&self.weight).map(|(h, w)| h * w));
        // `next` holds φ for now; build the new h row by row into a second
        // region appended after it
        next.resize(2 * nx * nm, 0.0);
        let (phi, out) = next.split_at_mut(nx * nm);
        let y = self.m_half_width;
        let mut lowest = (0.0, 0, 0);
        for i in 0..nx {
            let left = (i + nx - 1) % nx;
            let right = (i + 1) % nx;
            let row = &h[i * nm..(i + 1) * nm];
            let p0 = &phi[i * nm..(i + 1) * nm];
            let pl = &phi[left * nm..(left + 1) * nm];
            let pr = &phi[right * nm..(right + 1) * nm];
            let fr = &self.face[i * nm..(i + 1) * nm];
            let fl = &self.face[left * nm..(left + 1) * nm];
            let dst = &mut out[i * nm..(i + 1) * nm];
            let mi = self.m_eq[i];
            let mut flux_below = 0.0;
            for k in 0..nm {
                let flux_above = if k + 1 < nm {
                    let u = mi - (-y + (k + 1) as f64 * self.dm);
                    self.adv * if u > 0.0 { u * row[k] } else { u * row[k + 1] }
                } else {
                    0.0
                };
                let v = row[k] + fr[k] * (pr[k] - p0[k]) - fl[k] * (p0[k] - pl[k])
                    - (flux_above - flux_below);
                dst[k] = v;
                if !(v >= lowest.0) {
                    lowest = (v, i, k);
                }
                flux_below = flux_above;
            }
        }
        let (v, i, k) = lowest;
        if v.is_nan() {
            return Err(Error::NonFinite("ExKS density"));
        }
        if v < -1e-12 {
            return Err(Error::NegativeDensity { value: v, i, k });
        }
        state.h.copy_from_slice(out);
        state.t += self.dt;
        state.steps += 1;
        state.dt = self.dt;
        Ok(())
    }

    /// Runs all steps of the configured horizon, recording the density
    /// residual of the final step.
    pub fn run(&self, mut state: ExksState) -> Result<ExksState> {
        let mut buf = Vec::with_capacity(2 * state.h.len());
        for s in 0..self.steps {
            if s + 1 == self.steps {
                let before = exks_density(&state);
                self.step(&mut state, &mut buf)?;
                let after = exks_density(&state);
                let change: f64 = before.iter().zip(&after).map(|(a, b)| math::abs(b - a)).sum();
                state.residual = change * self.dx / self.dt;
            } else {
                self.step(&mut state, &mut buf)?;
            }
        }
        if state.h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ExKS density"));
        }
        Ok(state)
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

/// One explicit step; builds the solver coefficients on every call, so
/// prefer [`ExksSolver`] for repeated steps.
pub fn exks_step(
    state: &ExksState,
    params: &ModelParams,
    beta: f64,
    dt: Option<f64>,
) -> Result<ExksState> {
    let grid = GridSpec {
        n_x: state.n_x,
        n_m: state.n_m,
        m_half_width: state.m_half_width,
        dt,
        t_end: 0.0,
    };
    let solver = ExksSolver::new(params, beta, &grid)?;
    let mut next = state.clone();
    solver.step(&mut next, &mut Vec::new())?;
    Ok(next)
}

/// Advances `init` to `grid.t_end`.
pub fn exks_solve(
    params: &ModelParams,
    beta: f64,
    grid: &GridSpec,
    init: ExksInit,
) -> Result<ExksState> {
    let solver = ExksSolver::new(params, beta, grid)?;
    solver.run(ExksState::new(params.domain_length(), grid, init)?)
}

/// `ρ_i = Σ_k h_ik Δm`.
pub fn exks_density(state: &ExksState) -> Vec<f64> {
    let dm = state.dm();
    state.h.chunks_exact(state.n_m).map(|row| row.iter().sum::<f64>() * dm).collect()
}

/// Applies `f(A, Λ)` to every cell, where `A = h/(1+νΛ)` is the density of
/// running cells, and integrates over `m`.
fn integrate(state: &ExksState, params: &ModelParams, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let response: Response = params.response();
    let nu = params.nu();
    let dm = state.dm();
    let mc = state.m_centers();
    state
        .x_centers()
        .iter()
        .zip(state.h.chunks_exact(state.n_m))
        .map(|(x, row)| {
            let m_eq = -math::abs(*x);
            row.iter()
                .zip(&mc)
                .map(|(h, m)| {
                    let lam = response.modulation(m_eq - m);
                    f(h / (1.0 + nu * lam), lam)
                })
                .sum::<f64>()
                * dm
        })
        .collect()
}

/// Running and tumbling densities `(∫A dm, ∫νΛA dm)`.
pub fn exks_split_densities(state: &ExksState, params: &ModelParams) -> (Vec<f64>, Vec<f64>) {
    let nu = params.nu();
    (
        integrate(state, params, |a, _| a),
        integrate(state, params, |a, lam| nu * lam * a),
    )
}

/// Local mean run length: the running-cell average of `ε/Λ`. Cells without
/// running mass get `None`.
pub fn exks_run_length(state: &ExksState, params: &ModelParams) -> Vec<Option<f64>> {
    let eps = params.epsilon();
    let num = integrate(state, params, |a, lam| eps / lam * a);
    let den = integrate(state, params, |a, _| a);
    num.iter().zip(&den).map(|(n, d)| (*d > 0.0).then(|| n / d)).collect()
}

impl ExksState {
    /// Densities and run lengths as a profile.
    pub fn profile(&self, params: &ModelParams) -> Result<GridProfile> {
        let (f, g) = exks_split_densities(self, params);
        GridProfile::from_continuum(self.length, f, g, exks_run_length(self, params))
    }
}

/// Distance between the steady density of the extended model at small `β`
/// and the KS steady state with `α = ∞`: both are scaled to unit mean and
/// the largest cell difference is divided by the KS maximum.
pub fn ks_exks_consistency(params: &ModelParams, grid: &GridSpec, beta_small: f64) -> Result<f64> {
    let state = exks_solve(params, beta_small, grid, ExksInit::default())?;
    let exks = exks_density(&state);
    let ks = ks_steady_state(params, KsAlpha::Infinite, grid.n_x)?;
    Ok(normalized_distance(&exks, &ks))
}

pub(crate) fn normalized_distance(a: &[f64], reference: &[f64]) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ma, mr) = (mean(a), mean(reference));
    let peak = reference.iter().fold(0.0f64, |m, v| m.max(v / mr));
    a.iter()
        .zip(reference)
        .map(|(x, r)| math::abs(x / ma - r / mr))
        .fold(0.0, f64::max)
        / peak
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(nu: f64, delta: f64, chi: f64) -> ModelParams {
        ModelParams::new(0.1, 10.0, nu, delta, chi).unwrap()
    }

    fn small_grid(t_end: f64) -> GridSpec {
        GridSpec::exks(20, 40, 5.0, t_end)
    }

    #[test]
    fn initial_state_is_normalised() {
        for nm in [40, 41] {
            let g = GridSpec::exks(20, nm, 5.0, 1.0);
            let s = ExksState::new(10.0, &g, ExksInit::Triangle).unwrap();
            assert_relative_eq!(s.mass(), 10.0, epsilon = 1e-12);
            for r in exks_density(&s) {
                assert_relative_eq!(r, 1.0, epsilon = 1e-12);
            }
            let mean_m: f64 = s.h[..nm].iter().zip(s.m_centers()).map(|(h, m)| h * m).sum();
            assert!(mean_m.abs() < 1e-12);
        }
        let s = ExksState::new(10.0, &small_grid(1.0), ExksInit::Flat).unwrap();
        assert_relative_eq!(exks_density(&s)[3], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_field_density() {
        let g = small_grid(1.0);
        let mut s = ExksState::new(10.0, &g, ExksInit::Flat).unwrap();
        s.h.iter_mut().for_each(|h| *h = 2.0);
        for r in exks_density(&s) {
            assert_relative_eq!(r, 20.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn split_densities() {
        let g = small_grid(2.0);
        let p = params(0.3, 1.25, 0.7);
        let s = exks_solve(&p, 1.0, &g, ExksInit::Triangle).unwrap();
        let rho = exks_density(&s);
        let (f, gg) = exks_split_densities(&s, &p);
        for i in 0..20 {
            assert!((f[i] + gg[i] - rho[i]).abs() < 1e-12);
        }
        let p0 = params(0.0, 1.25, 0.7);
        let (_, g0) = exks_split_densities(&s, &p0);
        assert!(g0.iter().all(|&v| v == 0.0));
        let pc = params(0.3, 1.25, 0.0);
        let (fc, gc) = exks_split_densities(&s, &pc);
        for i in 0..20 {
            assert_relative_eq!(gc[i] / fc[i], 0.3, epsilon = 1e-12);
        }
        for xi in exks_run_length(&s, &pc) {
            assert_relative_eq!(xi.unwrap(), 0.1, epsilon = 1e-14);
        }
        for xi in exks_run_length(&s, &p).into_iter().flatten() {
            assert!(xi > 0.1 / 1.7 && xi < 0.1 / 0.3);
        }
    }

    #[test]
    fn mass_is_conserved_and_state_stays_symmetric() {
        let g = small_grid(1.0);
        let p = params(0.3, 0.5, 0.7);
        let solver = ExksSolver::new(&p, 0.5, &g).unwrap();
        let mut s = ExksState::new(10.0, &g, ExksInit::Triangle).unwrap();
        let m0 = s.mass();
        let mut buf = Vec::new();
        for _ in 0..500 {
            let before = s.mass();
            solver.step(&mut s, &mut buf).unwrap();
            assert!((s.mass() - before).abs() < 1e-12 * before);
        }
        assert!((s.mass() - m0).abs() < 1e-11 * m0);
        assert!(s.h.iter().all(|&v| v >= 0.0));
        let rho = exks_density(&s);
        for i in 0..10 {
            assert!((rho[i] - rho[19 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn no_chemotaxis_stays_uniform_in_x() {
        let g = small_grid(3.0);
        let s = exks_solve(&params(0.0, 1.0, 0.0), 1.0, &g, ExksInit::Triangle).unwrap();
        let rho = exks_density(&s);
        for r in rho {
            assert_relative_eq!(r, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn step_function_matches_solver() {
        let g = small_grid(1.0);
        let p = params(0.3, 1.25, 0.7);
        let s = ExksState::new(10.0, &g, ExksInit::Triangle).unwrap();
        let solver = ExksSolver::new(&p, 1.0, &g).unwrap();
        let a = exks_step(&s, &p, 1.0, Some(solver.dt())).unwrap();
        let mut b = s.clone();
        solver.step(&mut b, &mut Vec::new()).unwrap();
        assert_eq!(a.h, b.h);
    }

    #[test]
    fn unstable_step_is_rejected() {
        let g = small_grid(1.0);
        let p = params(0.3, 1.25, 0.7);
        let limit = ExksSolver::new(&p, 1.0, &g).unwrap().stable_dt();
        assert!(matches!(
            ExksSolver::new(&p, 1.0, &g.with_dt(limit * 1.001)),
            Err(Error::Cfl { .. })
        ));
    }
}
