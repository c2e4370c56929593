// Float intrinsics. Everything goes through the `libm` crate, with or without
// `std`, so results are bit-identical across platforms.

#[inline(always)]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline(always)]
pub fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}
#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline(always)]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline(always)]
pub fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

#[inline(always)]
pub fn abs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & !(1u64 << 63))
}

/// `e^d - 1` for the small per-step changes of the sensed log-concentration.
#[inline(always)]
pub fn exp_m1_small(d: f64) -> f64 {
    if abs(d) <= SMALL_STEP {
        exp_m1_tiny(d)
    } else {
        exp_m1(d)
    }
}

/// Square roots of a slice, two lanes at a time where SSE2 is available
/// (the results are correctly rounded either way).
#[inline(always)]
pub fn sqrt_in_place(v: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    {
        use core::arch::x86_64::{_mm_loadu_pd, _mm_sqrt_pd, _mm_storeu_pd};
        let mut pairs = v.chunks_exact_mut(2);
        for pair in &mut pairs {
            // SAFETY: SSE2 is part of the x86_64 baseline and `pair` holds
            // exactly two contiguous f64 values.
            unsafe { _mm_storeu_pd(pair.as_mut_ptr(), _mm_sqrt_pd(_mm_loadu_pd(pair.as_ptr()))) };
        }
        for x in pairs.into_remainder() {
            *x = sqrt(*x);
        }
    }
    #[cfg(not(target_arch = "x86_64"))]
    for x in v.iter_mut() {
        *x = sqrt(*x);
    }
}

/// Largest `|d|` accepted by [`exp_m1_tiny`], `2^-9`.
pub const SMALL_STEP: f64 = 0.001953125;

/// Branch-free `e^d - 1` for `|d| <= SMALL_STEP`: the degree-5 Taylor
/// polynomial, whose truncation error `d^6/720` is below half an ulp there.
#[inline(always)]
pub fn exp_m1_tiny(d: f64) -> f64 {
    d * (1.0 + d * (0.5 + d * (1.0 / 6.0 + d * (1.0 / 24.0 + d * (1.0 / 120.0)))))
}
