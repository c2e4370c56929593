use crate::mc::config::Schedule;
use crate::mc::engine::Tally;
use crate::mc::ensemble::initial_particle;
use crate::mc::particle::{Coast, Motion, Particle, Rates, Space};
use crate::model::{ModelParams, Response};
use crate::rng::Stream;

/// Event-driven sampler for one particle.
///
/// In the step-by-step scheme a running particle stops at step `k` with
/// probability `p(y_k) = Δt Λ(y_k)/ε ≤ p̂ = Δt(1+χ)/ε`. Drawing candidate
/// steps with probability `p̂` and accepting each with `Λ(y_k)/(1+χ)` gives
/// the same law, and the gap to the next candidate is geometric, so the
/// random stream is touched once per candidate instead of once per step.
/// Restarts are geometric with the constant restart probability. Between
/// events `y` is advanced deterministically by [`Space::coast`].
///
/// Draws are keyed by the particle's event counter: lane 0 samples the gap,
/// lane 1 the acceptance test and lane 2 a new direction.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    coast: Coast,
    response: Response,
    /// `ln(1 - p̂)`
    ln_stay_running: f64,
    upper: f64,
    /// `ln(1 - Δt μ̂/ε)`, or `None` for instantaneous tumbles.
    ln_stay_tumbling: Option<f64>,
}

/// Steps to the next success of a per-step Bernoulli trial, given
/// `ln(1 - p)` and a uniform `u ∈ [0, 1)`.
#[inline(always)]
fn geometric(ln_fail: f64, u: f64) -> u64 {
    // 1 - u lies in (0, 1]
    let g = libm::log(1.0 - u) / ln_fail;
    if g < 1e18 {
        1 + g as u64
    } else {
        u64::MAX / 2
    }
}

impl Kernel {
    pub(crate) fn new(params: &ModelParams, rates: &Rates, dt: f64) -> Self {
        let (_, upper) = params.response().bounds();
        let p_hat = rates.stop_scale() * upper;
        Self {
            coast: Coast::new(params, dt),
            response: params.response(),
            ln_stay_running: libm::log1p(-p_hat),
            upper,
            ln_stay_tumbling: rates.restart_probability().map(|q| libm::log1p(-q)),
        }
    }

    #[inline(always)]
    fn coast<S: Space>(&self, space: &S, p: &mut Particle, n: u64) {
        match p.motion {
            Motion::Running(dir) => space.coast(p, dir, n, &self.coast),
            Motion::Tumbling => p.y *= self.coast.decay_pow(n),
        }
    }

    /// Simulates particle `index` over the whole schedule, recording it into
    /// `tally` after the move of every snapshot step.
    #[inline]
    pub(crate) fn simulate<S: Space>(
        &self,
        space: &S,
        stream: &Stream,
        index: usize,
        per_cell: usize,
        schedule: &Schedule,
        group: usize,
        eps: f64,
        tally: &mut Tally,
    ) -> Particle {
        let run_length = |y: f64| eps / self.response.modulation(y);
        let mut p = initial_particle(space, stream, index, per_cell);
        let mut done = 0u64;
        let mut next_snapshot = schedule.first_snapshot;
        let mut event = 1u64;
        loop {
            let ln_stay = match p.motion {
                Motion::Running(_) => self.ln_stay_running,
                Motion::Tumbling => self.ln_stay_tumbling.unwrap_or(f64::NEG_INFINITY),
            };
            let target = done.saturating_add(geometric(ln_stay, stream.uniform(event, 0)));
            while next_snapshot <= target.min(schedule.n_steps) {
                self.coast(space, &mut p, next_snapshot - 1 - done);
                done = next_snapshot - 1;
                let mut seen = p;
                if let Motion::Running(dir) = p.motion {
                    space.advance(&mut seen.position, dir, self.coast.dt);
                }
                tally.record(space, &seen, group, run_length);
                next_snapshot += schedule.stride;
            }
            if target > schedule.n_steps {
                self.coast(space, &mut p, schedule.n_steps - done);
                return p;
            }
            self.coast(space, &mut p, target - done);
            done = target;
            p.motion = match p.motion {
                Motion::Running(dir) => {
                    let lam = self.response.modulation(p.y);
                    if stream.uniform(event, 1) * self.upper >= lam {
                        Motion::Running(dir)
                    } else if self.ln_stay_tumbling.is_some() {
                        Motion::Tumbling
                    } else {
                        Motion::Running(space.direction(stream.uniform(event, 2)))
                    }
                }
                Motion::Tumbling => Motion::Running(space.direction(stream.uniform(event, 2))),
            };
            event += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::particle::{Line, Square};
    use crate::rng::SeqRng;

    #[test]
    fn geometric_gaps_have_the_right_mean() {
        let p: f64 = 0.02;
        let ln = (1.0 - p).ln();
        let mut rng = SeqRng::new(5);
        let n = 200_000;
        let mut sum = 0.0;
        let mut ones = 0;
        for _ in 0..n {
            let g = geometric(ln, rng.uniform());
            sum += g as f64;
            ones += usize::from(g == 1);
        }
        assert!((sum / n as f64 - 1.0 / p).abs() < 0.01 / p);
        assert!((ones as f64 / n as f64 - p).abs() < 4.0 * (p / n as f64).sqrt());
        assert_eq!(geometric(f64::NEG_INFINITY, 0.3), 1);
        assert_eq!(geometric(f64::NEG_INFINITY, 0.0), 1);
    }

    fn explicit<S: Space>(space: &S, c: &Coast, mut p: Particle, dir: [f64; 2], n: u64) -> Particle {
        for _ in 0..n {
            c.explicit_step(space, &mut p, dir);
        }
        p
    }

    #[test]
    fn closed_form_coasting_matches_explicit_steps() {
        let params = ModelParams::new(0.1, 2.0, 0.3, 1.25, 0.7).unwrap();
        let c = Coast::new(&params, 1e-3);
        let line = Line::new(10.0, 100);
        for (x0, v, n) in [(1.0, -1.0, 3000), (-4.2, -1.0, 12_345), (0.0, 1.0, 20_000), (4.9995, 1.0, 7)] {
            let p0 = Particle {
                position: [x0, 0.0],
                motion: Motion::Running([v, 0.0]),
                y: 0.3,
                log_s_prev: -f64::abs(x0),
            };
            let want = explicit(&line, &c, p0, [v, 0.0], n);
            let mut got = p0;
            line.coast(&mut got, [v, 0.0], n, &c);
            assert!((got.position[0] - want.position[0]).abs() < 1e-9, "{x0} {v}");
            assert!((got.y - want.y).abs() < 1e-9 * (1.0 + want.y.abs()), "{} {}", got.y, want.y);
            assert!((got.log_s_prev - want.log_s_prev).abs() < 1e-9);
        }
        let sq = Square::new(10.0, 10);
        for (pos, dir, n) in [
            ([1.0, 2.0], [0.6, -0.8], 500),
            ([-0.3, 0.01], [0.8, 0.6], 5000),
            ([4.99, -4.99], [0.6, -0.8], 20_001),
            ([0.0, 0.0], [1.0, 0.0], 3),
        ] {
            let p0 = Particle {
                position: pos,
                motion: Motion::Running(dir),
                y: 0.1,
                log_s_prev: -f64::hypot(pos[0], pos[1]),
            };
            let want = explicit(&sq, &c, p0, dir, n);
            let mut got = p0;
            sq.coast(&mut got, dir, n, &c);
            for a in 0..2 {
                assert!((got.position[a] - want.position[a]).abs() < 1e-9);
            }
            assert!((got.y - want.y).abs() < 1e-10 * (1.0 + want.y.abs()), "{} {}", got.y, want.y);
            assert!((got.log_s_prev - want.log_s_prev).abs() < 1e-9);
        }
    }

    #[test]
    fn tumbling_decay() {
        let params = ModelParams::new(0.1, 2.0, 0.3, 1.25, 0.7).unwrap();
        let c = Coast::new(&params, 1e-3);
        let q: f64 = 1.0 / (1.0 + 1e-3 / 2.0);
        assert!((c.decay_pow(1000) - q.powi(1000)).abs() < 1e-13);
        assert!((c.constant_drive(0.5, 0.0, 10) - 0.5 * q.powi(10)).abs() < 1e-15);
    }
}
