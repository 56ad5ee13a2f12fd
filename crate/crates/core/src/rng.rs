//! Seed derivation. Every random object in the crate is reproducible from a
//! `u64` seed plus a small tuple of integer coordinates, so independent pieces
//! (design columns, trials, AsTIM coefficient columns) can be generated in any
//! order or in parallel and still agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combine a seed with a sequence of coordinates into a new 64-bit seed.
#[inline]
pub fn derive(seed: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(mix64(seed), |acc, &c| mix64(acc ^ mix64(c.wrapping_add(0x632B_E59B_D9B4_E019))))
}

/// Uniform integer in `[0, bound)` from a 64-bit hash (multiply-high reduction).
#[inline]
pub fn reduce(hash: u64, bound: u64) -> u64 {
    ((hash as u128 * bound as u128) >> 64) as u64
}

pub fn stream(seed: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, coords))
}

/// FNV-1a, used for short content fingerprints in verifier records.
pub fn fingerprint(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_depends_on_every_coordinate() {
        let a = derive(7, &[1, 2]);
        assert_ne!(a, derive(7, &[2, 1]));
        assert_ne!(a, derive(8, &[1, 2]));
        assert_ne!(a, derive(7, &[1, 2, 0]));
        assert_eq!(a, derive(7, &[1, 2]));
    }

    #[test]
    fn reduce_stays_in_range() {
        for i in 0..1000u64 {
            assert!(reduce(mix64(i), 17) < 17);
        }
        assert_eq!(reduce(u64::MAX, 1), 0);
    }
}
