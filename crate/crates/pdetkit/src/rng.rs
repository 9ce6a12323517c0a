//! Seedable, portable random number generation.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood 2014): 64 bits of state,
//! one multiply-xorshift finalizer per output. Uniform doubles take the top
//! 53 bits of an output word; normals use the plain (non-caching) Box-Muller
//! transform, two uniforms per draw. Everything is integer/IEEE-754 exact,
//! so identical seeds produce bit-identical streams on every platform.
//! Per-trial streams are derived by mixing a stream index into the seed.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 stream.
#[derive(Clone, Debug)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Independent stream derived from `(seed, stream)`; stream 0 is not the
    /// same as `Rng::new(seed)`.
    pub fn from_seed_stream(seed: u64, stream: u64) -> Self {
        Rng {
            state: mix64(seed ^ mix64(stream.wrapping_add(1).wrapping_mul(GOLDEN))),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]` (safe to pass to `ln`).
    #[inline]
    fn next_f64_open(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Log-uniform in `[lo, hi]`, `0 < lo <= hi`.
    pub fn next_log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo > 0.0 && lo <= hi);
        (lo.ln() + self.next_f64() * (hi.ln() - lo.ln())).exp()
    }
}
