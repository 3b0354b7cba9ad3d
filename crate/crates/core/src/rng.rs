//! Reproducible randomness for permutation tests.
//!
//! Recipe, fixed so that other implementations can reproduce results bit for
//! bit:
//!
//! * Generator: SplitMix64 (`state += 0x9E3779B97F4A7C15`, then the standard
//!   `30/27/31` xor-shift-multiply finalizer).
//! * Permutation `i` (0-based) draws from its own SplitMix64 whose initial
//!   state is the `(i+1)`-th output of a SplitMix64 seeded with `seed`. Each
//!   permutation is therefore independent of scheduling.
//! * Shuffle: Fisher–Yates from the last position down to 1; for position
//!   `j` the swap partner is `(u * (j + 1)) >> 64` where `u` is the next
//!   64-bit output.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Generator for permutation `index` under `seed`.
pub fn permutation_stream(seed: u64, index: u64) -> SplitMix64 {
    // The n-th output of SplitMix64(seed) only depends on seed + n * gamma.
    let mut master = SplitMix64::seed_from_u64(seed.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)));
    SplitMix64::seed_from_u64(master.next_u64())
}

/// Uniform index in `0..bound` by 128-bit multiply-shift.
pub fn bounded(rng: &mut impl RngCore, bound: u64) -> u64 {
    ((u128::from(rng.next_u64()) * u128::from(bound)) >> 64) as u64
}

pub fn shuffle<T>(items: &mut [T], rng: &mut impl RngCore) {
    for j in (1..items.len()).rev() {
        let k = bounded(rng, j as u64 + 1) as usize;
        items.swap(j, k);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_matches_sequential_outputs() {
        let mut master = SplitMix64::seed_from_u64(42);
        for i in 0..5 {
            let expected_state = master.next_u64();
            let mut a = permutation_stream(42, i);
            let mut b = SplitMix64::seed_from_u64(expected_state);
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn splitmix_reference_values() {
        // Published reference outputs for seed 1234567.
        let mut rng = SplitMix64::seed_from_u64(1234567);
        let got: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(got, [6457827717110365317, 3203168211198807973, 9817491932198370423]);
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut v: Vec<u32> = (0..50).collect();
        shuffle(&mut v, &mut permutation_stream(7, 3));
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }

    #[test]
    fn bounded_stays_in_range() {
        let mut rng = permutation_stream(0, 0);
        assert!((0..1000).all(|_| bounded(&mut rng, 3) < 3));
    }
}
