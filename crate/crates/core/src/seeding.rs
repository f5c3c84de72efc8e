//! Deterministic seed derivation for chunked Monte-Carlo work.
//!
//! Every stochastic routine splits its work into fixed-size chunks whose
//! boundaries do not depend on the number of worker threads. Chunk `i` draws
//! from a ChaCha stream seeded by `derive_seed(master, i)`, so results are
//! identical for any degree of parallelism.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn chunk_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

/// Splits `total` items into chunks of `chunk` items (last one may be short).
pub fn chunk_ranges(total: usize, chunk: usize) -> Vec<std::ops::Range<usize>> {
    assert!(chunk > 0);
    (0..total.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(total))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_per_index() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 0));
    }

    #[test]
    fn chunks_cover_range() {
        let r = chunk_ranges(10, 4);
        assert_eq!(r, vec![0..4, 4..8, 8..10]);
        assert!(chunk_ranges(0, 4).is_empty());
    }
}
