//! Seeded randomness helpers.
//!
//! Everything randomized in this crate draws from a `ChaCha8Rng` through the
//! helpers below, which only consume raw `next_u64` output. This keeps
//! generated bytes stable across dependency upgrades: no distribution code
//! from the `rand` ecosystem is involved.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from a base seed and a tag (splitmix64 mix).
pub(crate) fn subseed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Unbiased uniform draw from `0..n` via rejection sampling. `n` must be ≥ 1.
pub(crate) fn uniform_usize(rng: &mut ChaCha8Rng, n: usize) -> usize {
    debug_assert!(n >= 1);
    let n = n as u64;
    let zone = u64::MAX - u64::MAX % n;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % n) as usize;
        }
    }
}

/// Signed uniform draw from `lo..=hi`.
pub(crate) fn uniform_i64(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    debug_assert!(lo <= hi);
    let span = (hi - lo) as usize + 1;
    lo + uniform_usize(rng, span) as i64
}

/// Uniform `f32` in `[lo, hi)` built from 24 random mantissa bits.
pub(crate) fn uniform_f32(rng: &mut ChaCha8Rng, lo: f32, hi: f32) -> f32 {
    let u = (rng.next_u64() >> 40) as f32 / (1u64 << 24) as f32;
    lo + u * (hi - lo)
}

/// Uniform `f64` in `[lo, hi)` built from 53 random mantissa bits.
pub(crate) fn uniform_f64(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + u * (hi - lo)
}

/// Fisher-Yates shuffle.
pub(crate) fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_usize(rng, i + 1);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_usize_covers_range() {
        let mut rng = rng_from_seed(1);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            seen[uniform_usize(&mut rng, 7)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = rng_from_seed(42);
        let mut b = rng_from_seed(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn uniform_f32_stays_in_range() {
        let mut rng = rng_from_seed(3);
        for _ in 0..1000 {
            let v = uniform_f32(&mut rng, -0.25, 0.25);
            assert!((-0.25..0.25).contains(&v));
        }
    }
}
