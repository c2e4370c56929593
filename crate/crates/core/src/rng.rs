//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, particle, step, lane)`, so a
//! particle's trajectory does not depend on how the ensemble is scheduled
//! across threads or on the order particles are visited. The mixing function
//! is the SplitMix64 finalizer applied twice (once to the particle key, once
//! to the key combined with the counter), which removes the shift structure a
//! plain Weyl sequence would have between streams.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Independent draws available per particle per step.
pub const LANES: u64 = 4;

#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline(always)]
pub fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Master generator keyed by a 64-bit seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub const fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub const fn seed(&self) -> u64 {
        self.seed
    }

    #[inline(always)]
    pub fn stream(&self, index: u64) -> Stream {
        let key = mix64(mix64(self.seed ^ 0x5851_f42d_4c95_7f2d) ^ index.wrapping_mul(GOLDEN));
        Stream { key }
    }
}

/// The random stream owned by a single particle (or any other index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    key: u64,
}

impl Stream {
    #[inline(always)]
    pub fn bits(&self, step: u64, lane: u64) -> u64 {
        debug_assert!(lane < LANES);
        let counter = step.wrapping_mul(LANES).wrapping_add(lane);
        mix64(self.key ^ mix64(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline(always)]
    pub fn uniform(&self, step: u64, lane: u64) -> f64 {
        to_unit(self.bits(step, lane))
    }
}

/// Sequential adapter over a [`Stream`], for the places (bootstrap
/// resampling, tests) where a plain "next number" interface is handier.
#[derive(Debug, Clone)]
pub struct SeqRng {
    stream: Stream,
    counter: u64,
}

impl SeqRng {
    pub fn new(seed: u64) -> Self {
        Self {
            stream: CounterRng::new(seed).stream(u64::MAX),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.stream.bits(self.counter / LANES, self.counter % LANES);
        self.counter += 1;
        v
    }

    pub fn uniform(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    /// Uniform integer in `0..n` (Lemire's multiply-shift; the bias is
    /// below 2^-40 for the small `n` used here).
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_the_counter() {
        let rng = CounterRng::new(42);
        let a = rng.stream(7).uniform(1000, 2);
        let b = CounterRng::new(42).stream(7).uniform(1000, 2);
        assert_eq!(a, b);
        assert_ne!(a, rng.stream(8).uniform(1000, 2));
        assert_ne!(a, rng.stream(7).uniform(1001, 2));
        assert_ne!(a, rng.stream(7).uniform(1000, 1));
        assert_ne!(a, CounterRng::new(43).stream(7).uniform(1000, 2));
    }

    #[test]
    fn uniform_moments_and_histogram() {
        let rng = CounterRng::new(1);
        let n = 200_000u64;
        let mut bins = [0u64; 20];
        let (mut s1, mut s2) = (0.0, 0.0);
        for i in 0..n {
            // walk both the particle and the step axis
            let u = rng.stream(i % 1000).uniform(i / 1000, i % LANES);
            assert!((0.0..1.0).contains(&u));
            s1 += u;
            s2 += u * u;
            bins[(u * 20.0) as usize] += 1;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!((mean - 0.5).abs() < 4.0 * (1.0 / 12.0 / n as f64).sqrt());
        assert!((var - 1.0 / 12.0).abs() < 2e-3);
        let expect = n as f64 / 20.0;
        let chi2: f64 = bins.iter().map(|&b| (b as f64 - expect).powi(2) / expect).sum();
        // 19 dof, p = 0.001 critical value 43.8
        assert!(chi2 < 43.8, "chi2 = {chi2}");
    }

    #[test]
    fn neighbouring_streams_are_uncorrelated() {
        let rng = CounterRng::new(9);
        let n = 50_000u64;
        let (mut sxy, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for step in 0..n {
            let x = rng.stream(0).uniform(step, 0);
            let y = rng.stream(1).uniform(step, 0);
            sxy += x * y;
            sx += x;
            sy += y;
        }
        let nf = n as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let corr = cov * 12.0;
        assert!(corr.abs() < 4.0 / nf.sqrt(), "corr = {corr}");
    }

    #[test]
    fn below_is_in_range() {
        let mut r = SeqRng::new(3);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            let k = r.below(7);
            seen[k] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
