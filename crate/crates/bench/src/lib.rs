//! Deterministic fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rmlab::decoder::{transmit, BscChannel, Codebook};
use rmlab::info::DenseDistribution;
use rmlab::{BitVector, RmCode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(n: usize, seed: u64) -> BitVector {
    BitVector::random(n, &mut rng(seed))
}

pub fn random_distribution(k: usize, seed: u64) -> DenseDistribution {
    DenseDistribution::random(k, &mut rng(seed))
}

/// Codebook of `RM(m, r)` with a received word at noise level `delta`.
pub fn noisy_word(m: usize, r: usize, delta: f64, seed: u64) -> (Codebook, BscChannel, BitVector) {
    let cb = Codebook::new(RmCode::new(m, r).expect("valid code")).expect("small code");
    let ch = BscChannel::new(delta).expect("valid noise");
    let mut g = rng(seed);
    let x = cb.word(0);
    let y = transmit(&x, &ch, &mut g);
    (cb, ch, y)
}
