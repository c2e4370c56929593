use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{Dim, ModelParams, Point, Response};
use crate::rng::Stream;

/// Motion state: running with a unit direction, or tumbling in place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Running(Point),
    Tumbling,
}

impl Motion {
    pub fn is_running(&self) -> bool {
        matches!(self, Motion::Running(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub position: Point,
    pub motion: Motion,
    /// Internal-state deviation `y = M(S) - m`.
    pub y: f64,
    /// `log S` sensed at the end of the previous step. Storing the logarithm
    /// keeps the pathway update exact across periodic wraps while letting
    /// the sensed ratio be formed without an exponential per step.
    pub log_s_prev: f64,
}

impl Particle {
    pub fn s_prev(&self) -> f64 {
        math::exp(self.log_s_prev)
    }
}

/// Geometry of the periodic domain: placement, motion, binning and the
/// climbing/descending classification.
pub trait Space: Copy + Send + Sync {
    fn dim(&self) -> Dim;
    /// Cells per axis.
    fn cells(&self) -> usize;
    fn total_cells(&self) -> usize;
    /// `M(S)` at `p`.
    fn equilibrium(&self, p: Point) -> f64;
    fn advance(&self, p: &mut Point, dir: Point, dt: f64);
    /// Uniformly random direction from a uniform variate.
    fn direction(&self, u: f64) -> Point;
    /// Position uniformly placed inside cell `cell` from two uniform variates.
    fn place(&self, cell: usize, u: [f64; 2]) -> Point;
    fn cell_of(&self, p: Point) -> usize;
    /// `Some(true)` when moving up the gradient of `S`, `Some(false)` when
    /// moving down, `None` where the gradient vanishes or the motion is
    /// orthogonal to it.
    fn climbing(&self, p: Point, dir: Point) -> Option<bool>;

    /// Advances a running particle through `n` full steps without
    /// transitions: move, then update `y` from the change of `log S`.
    #[inline(always)]
    fn coast(&self, p: &mut Particle, dir: Point, n: u64, c: &Coast) {
        for _ in 0..n {
            c.explicit_step(self, p, dir);
        }
    }
}

/// Constants for advancing `y` over many steps between transitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coast {
    pub(crate) dt: f64,
    pub(crate) inv_dt: f64,
    /// `q = 1/(1 + Δt/τ)`
    pub(crate) decay: f64,
    pub(crate) ln_decay: f64,
    /// `q/(1 - q) = τ/Δt`
    pub(crate) gain: f64,
    /// `e^{±Δt} - 1`: the sensed-signal change of one step towards (`up`)
    /// or away from (`down`) the source in 1D.
    pub(crate) c_up: f64,
    pub(crate) c_down: f64,
    /// `q^k` for `k = 0..=BLOCK`.
    pub(crate) q_pow: [f64; BLOCK + 1],
}

/// Steps summed at once by the blocked 2D update.
pub(crate) const BLOCK: usize = 32;

const STEPS: [f64; BLOCK + 1] = {
    let mut t = [0.0; BLOCK + 1];
    let mut k = 0;
    while k <= BLOCK {
        t[k] = k as f64;
        k += 1;
    }
    t
};

impl Coast {
    pub fn new(params: &ModelParams, dt: f64) -> Self {
        let r = dt / params.tau();
        let decay = 1.0 / (1.0 + r);
        let mut q_pow = [1.0; BLOCK + 1];
        for k in 1..=BLOCK {
            q_pow[k] = q_pow[k - 1] * decay;
        }
        Self {
            dt,
            inv_dt: 1.0 / dt,
            decay,
            q_pow,
            ln_decay: -libm::log1p(r),
            gain: 1.0 / r,
            c_up: math::exp_m1(dt),
            c_down: math::exp_m1(-dt),
        }
    }

    #[inline(always)]
    pub(crate) fn explicit_step<S: Space>(&self, space: &S, p: &mut Particle, dir: Point) {
        space.advance(&mut p.position, dir, self.dt);
        let m = space.equilibrium(p.position);
        p.y = update_internal_log(p.y, m - p.log_s_prev, self.decay);
        p.log_s_prev = m;
    }

    /// `q^n`.
    #[inline(always)]
    pub(crate) fn decay_pow(&self, n: u64) -> f64 {
        math::exp(n as f64 * self.ln_decay)
    }

    /// `y` after `n` steps of `y ← (y + c) q` with constant `c`:
    /// `q^n y + c q (1 - q^n)/(1 - q)`.
    #[inline(always)]
    pub(crate) fn constant_drive(&self, y: f64, c: f64, n: u64) -> f64 {
        let e = math::exp_m1(n as f64 * self.ln_decay);
        y + e * (y - c * self.gain)
    }
}

#[inline(always)]
fn wrap(x: f64, half: f64, length: f64) -> f64 {
    if x >= half {
        x - length
    } else if x < -half {
        let w = x + length;
        // x + L can round up onto the excluded right edge
        if w >= half {
            -half
        } else {
            w
        }
    } else {
        x
    }
}

#[inline(always)]
fn axis_cell(x: f64, half: f64, inv_dx: f64, cells: usize) -> usize {
    let c = ((x + half) * inv_dx) as usize;
    if c >= cells {
        cells - 1
    } else {
        c
    }
}

/// Periodic interval `[-L/2, L/2)` with `v ∈ {-1, +1}` while running.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    length: f64,
    half: f64,
    dx: f64,
    inv_dx: f64,
    cells: usize,
}

impl Line {
    pub fn new(length: f64, cells: usize) -> Self {
        let dx = length / cells as f64;
        Self {
            length,
            half: 0.5 * length,
            dx,
            inv_dx: 1.0 / dx,
            cells,
        }
    }
}

impl Space for Line {
    fn dim(&self) -> Dim {
        Dim::One
    }
    fn cells(&self) -> usize {
        self.cells
    }
    fn total_cells(&self) -> usize {
        self.cells
    }
    #[inline(always)]
    fn equilibrium(&self, p: Point) -> f64 {
        -math::abs(p[0])
    }
    #[inline(always)]
    fn advance(&self, p: &mut Point, dir: Point, dt: f64) {
        p[0] = wrap(p[0] + dir[0] * dt, self.half, self.length);
    }
    #[inline(always)]
    fn direction(&self, u: f64) -> Point {
        if u < 0.5 {
            [-1.0, 0.0]
        } else {
            [1.0, 0.0]
        }
    }
    fn place(&self, cell: usize, u: [f64; 2]) -> Point {
        [-self.half + (cell as f64 + u[0]) * self.dx, 0.0]
    }
    #[inline(always)]
    fn cell_of(&self, p: Point) -> usize {
        axis_cell(p[0], self.half, self.inv_dx, self.cells)
    }
    /// Between the kinks of `M = -|x|` (at the origin and at the periodic
    /// boundary) every step changes `log S` by exactly `±Δt`, so the
    /// recursion for `y` is summed in closed form; steps next to a kink are
    /// taken explicitly.
    #[inline]
    fn coast(&self, p: &mut Particle, dir: Point, mut n: u64, c: &Coast) {
        let v = dir[0];
        while n > 0 {
            let x = p.position[0];
            let toward = x * v < 0.0;
            let ax = math::abs(x);
            let dist = if toward { ax } else { self.half - ax };
            let regular = ((dist * c.inv_dt) as u64).saturating_sub(1).min(n);
            if regular > 0 {
                let dy = if toward { c.c_up } else { c.c_down };
                p.y = c.constant_drive(p.y, dy, regular);
                p.position[0] = x + regular as f64 * v * c.dt;
                p.log_s_prev = -math::abs(p.position[0]);
                n -= regular;
            }
            if n > 0 {
                c.explicit_step(self, p, dir);
                n -= 1;
            }
        }
    }

    #[inline(always)]
    fn climbing(&self, p: Point, dir: Point) -> Option<bool> {
        // ∇S points towards the origin
        let s = p[0] * dir[0];
        if s < 0.0 {
            Some(true)
        } else if s > 0.0 {
            Some(false)
        } else {
            None
        }
    }
}

/// Periodic square `[-L/2, L/2)²` with unit-speed directions `(cos θ, sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Square {
    line: Line,
}

impl Square {
    pub fn new(length: f64, cells: usize) -> Self {
        Self {
            line: Line::new(length, cells),
        }
    }
}

impl Space for Square {
    fn dim(&self) -> Dim {
        Dim::Two
    }
    fn cells(&self) -> usize {
        self.line.cells
    }
    fn total_cells(&self) -> usize {
        self.line.cells * self.line.cells
    }
    #[inline(always)]
    fn equilibrium(&self, p: Point) -> f64 {
        -math::sqrt(p[0] * p[0] + p[1] * p[1])
    }
    #[inline(always)]
    fn advance(&self, p: &mut Point, dir: Point, dt: f64) {
        let l = &self.line;
        p[0] = wrap(p[0] + dir[0] * dt, l.half, l.length);
        p[1] = wrap(p[1] + dir[1] * dt, l.half, l.length);
    }
    #[inline(always)]
    fn direction(&self, u: f64) -> Point {
        let (s, c) = math::sin_cos(TAU * u);
        [c, s]
    }
    fn place(&self, cell: usize, u: [f64; 2]) -> Point {
        let l = &self.line;
        let (c1, c2) = (cell % l.cells, cell / l.cells);
        [
            -l.half + (c1 as f64 + u[0]) * l.dx,
            -l.half + (c2 as f64 + u[1]) * l.dx,
        ]
    }
    #[inline(always)]
    fn cell_of(&self, p: Point) -> usize {
        let l = &self.line;
        axis_cell(p[0], l.half, l.inv_dx, l.cells)
            + l.cells * axis_cell(p[1], l.half, l.inv_dx, l.cells)
    }
    /// Between periodic wraps the position is affine in the step count, so
    /// each block of steps evaluates `log S` independently per step and sums
    /// the `y` recursion as `q^b y + Σ_j q^{b-j+1} c_j`.
    #[inline]
    fn coast(&self, p: &mut Particle, dir: Point, mut n: u64, c: &Coast) {
        if c.dt > math::SMALL_STEP {
            for _ in 0..n {
                c.explicit_step(self, p, dir);
            }
            return;
        }
        let half = self.line.half;
        let reach = |x: f64, v: f64| {
            if v > 0.0 {
                (half - x) * c.inv_dt / v
            } else if v < 0.0 {
                (x + half) * c.inv_dt / -v
            } else {
                f64::INFINITY
            }
        };
        let (sx, sy) = (dir[0] * c.dt, dir[1] * c.dt);
        let mut r = [0.0; BLOCK + 1];
        while n > 0 {
            let [x0, y0] = p.position;
            let free = reach(x0, dir[0]).min(reach(y0, dir[1]));
            let free = if free < 1e18 { (free as u64).saturating_sub(1) } else { u64::MAX };
            let mut todo = free.min(n);
            n -= todo;
            let mut j0 = 0u64;
            while todo > 0 {
                let b = (todo as usize).min(BLOCK);
                let base = j0 as f64;
                r[0] = -p.log_s_prev;
                for (rj, k) in r[1..=b].iter_mut().zip(&STEPS[1..=b]) {
                    let (x, y) = (x0 + (base + k) * sx, y0 + (base + k) * sy);
                    *rj = x * x + y * y;
                }
                math::sqrt_in_place(&mut r[1..=b]);
                let term = |j: usize| c.q_pow[b - j + 1] * math::exp_m1_tiny(r[j - 1] - r[j]);
                // four partial sums keep the additions independent
                let (mut a0, mut a1, mut a2, mut a3) = (c.q_pow[b] * p.y, 0.0, 0.0, 0.0);
                let mut j = 1;
                while j + 3 <= b {
                    a0 += term(j);
                    a1 += term(j + 1);
                    a2 += term(j + 2);
                    a3 += term(j + 3);
                    j += 4;
                }
                while j <= b {
                    a0 += term(j);
                    j += 1;
                }
                p.y = (a0 + a1) + (a2 + a3);
                p.log_s_prev = -r[b];
                j0 += b as u64;
                todo -= b as u64;
            }
            if j0 > 0 {
                let k = j0 as f64;
                p.position = [x0 + k * sx, y0 + k * sy];
            }
            if n > 0 {
                c.explicit_step(self, p, dir);
                n -= 1;
            }
        }
    }

    #[inline(always)]
    fn climbing(&self, p: Point, dir: Point) -> Option<bool> {
        let s = p[0] * dir[0] + p[1] * dir[1];
        if s < 0.0 {
            Some(true)
        } else if s > 0.0 {
            Some(false)
        } else {
            None
        }
    }
}

/// Moves a running particle by `v Δt` and wraps it into `[-L/2, L/2)^d`.
/// Tumbling particles stay put.
pub fn advect<S: Space>(space: &S, mut particle: Particle, dt: f64) -> Particle {
    if let Motion::Running(dir) = particle.motion {
        space.advance(&mut particle.position, dir, dt);
    }
    particle
}

/// Semi-implicit update of the internal-state deviation,
/// `(y - y_prev)/Δt = (S_now - S_prev)/(Δt S_prev) - y/τ`.
pub fn update_internal(y_prev: f64, s_prev: f64, s_now: f64, dt: f64, tau: f64) -> Result<f64> {
    if !(s_prev > 0.0) {
        return Err(Error::invalid("s_prev", s_prev, "sensed concentration must be positive"));
    }
    Ok((y_prev + (s_now - s_prev) / s_prev) / (1.0 + dt / tau))
}

/// Same update written with `log(S_now/S_prev)` and the decay factor
/// `1/(1 + Δt/τ)`.
#[inline(always)]
pub fn update_internal_log(y_prev: f64, log_ratio: f64, decay: f64) -> f64 {
    (y_prev + math::exp_m1_small(log_ratio)) * decay
}

/// Per-step transition probabilities for a given `(params, Δt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    response: Response,
    /// `Δt/ε`
    stop_scale: f64,
    stop_lo: f64,
    stop_hi: f64,
    /// `Δt μ̂/ε`, or `None` for instantaneous tumbles.
    restart: Option<f64>,
    /// `1/(1 + Δt/τ)`
    pub(crate) decay: f64,
}

impl Rates {
    pub fn new(params: &ModelParams, dt: f64) -> Result<Self> {
        let response = params.response();
        let stop_scale = dt / params.epsilon();
        let (lo, hi) = response.bounds();
        let stop_hi = stop_scale * hi;
        if stop_hi > 1.0 {
            return Err(Error::ProbabilityExceedsOne { which: "run-to-tumble", prob: stop_hi });
        }
        let restart = params.mu_hat().map(|mu| stop_scale * mu);
        if let Some(q) = restart {
            if q > 1.0 {
                return Err(Error::ProbabilityExceedsOne { which: "tumble-to-run", prob: q });
            }
        }
        Ok(Self {
            response,
            stop_scale,
            stop_lo: stop_scale * lo,
            stop_hi,
            restart,
            decay: 1.0 / (1.0 + dt / params.tau()),
        })
    }

    /// Run-to-tumble probability `Δt Λ_δ(y)/ε`.
    pub fn stop_probability(&self, y: f64) -> f64 {
        self.stop_scale * self.response.modulation(y)
    }

    pub fn restart_probability(&self) -> Option<f64> {
        self.restart
    }

    /// `Δt/ε`
    pub fn stop_scale(&self) -> f64 {
        self.stop_scale
    }

    /// Decides the motion after one step from the uniform variates `u_event`
    /// (event test) and `u_dir` (new direction, only consumed on a restart).
    #[inline(always)]
    pub(crate) fn decide<S: Space>(
        &self,
        space: &S,
        motion: Motion,
        y: f64,
        u_event: f64,
        u_dir: impl FnOnce() -> f64,
    ) -> Motion {
        match motion {
            Motion::Running(_) => {
                // Λ is bounded by (1-χ, 1+χ); most draws are settled without it
                if u_event >= self.stop_hi
                    || (u_event >= self.stop_lo && u_event >= self.stop_probability(y))
                {
                    motion
                } else if self.restart.is_some() {
                    Motion::Tumbling
                } else {
                    Motion::Running(space.direction(u_dir()))
                }
            }
            Motion::Tumbling => match self.restart {
                Some(q) if u_event < q => Motion::Running(space.direction(u_dir())),
                _ => Motion::Tumbling,
            },
        }
    }
}

/// Draws the run/tumble transition of `particle` at `step` from its random
/// stream (lane 0 decides the event, lane 1 a fresh direction). With `ν = 0`
/// a stopped particle restarts within the same step.
pub fn transition<S: Space>(
    space: &S,
    rates: &Rates,
    mut particle: Particle,
    stream: &Stream,
    step: u64,
) -> Particle {
    particle.motion = rates.decide(
        space,
        particle.motion,
        particle.y,
        stream.uniform(step, 0),
        || stream.uniform(step, 1),
    );
    particle
}

/// Internal update followed by the transition (steps 3 and 4 of a time step).
#[inline(always)]
pub(crate) fn react<S: Space>(
    space: &S,
    rates: &Rates,
    p: &mut Particle,
    stream: &Stream,
    step: u64,
) {
    let m_now = space.equilibrium(p.position);
    p.y = update_internal_log(p.y, m_now - p.log_s_prev, rates.decay);
    p.log_s_prev = m_now;
    p.motion = rates.decide(space, p.motion, p.y, stream.uniform(step, 0), || {
        stream.uniform(step, 1)
    });
}
