use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rmlab::decoder::{
    bit_error_experiment, bitmap_decode_exact, exact_bit_error_profile, ml_decode_exact,
    punctured_list_decode, BscChannel, Codebook, DecoderKind, ExperimentSpec, PunctureParams,
};
use rmlab::info::{ruzsa_dist, DenseDistribution};
use rmlab::pfr::{nearest_subspace, pfr_check};
use rmlab::RmCode;

#[test]
fn low_noise_round_trip_through_every_decoder() {
    let cb = Codebook::new(RmCode::new(4, 1).unwrap()).unwrap();
    let ch = BscChannel::new(0.02).unwrap();
    for i in [0usize, 5, 17, 31] {
        let x = cb.word(i);
        let mut y = x.clone();
        y.flip(3);
        assert_eq!(ml_decode_exact(&cb, &y, &ch).unwrap(), x);
        assert_eq!(bitmap_decode_exact(&cb, &y, &ch).unwrap().hard, x);
        let params = PunctureParams::new(0.02, 0.02, cb.words().len());
        let out = punctured_list_decode(&cb, &y, &params, 9).unwrap();
        assert_eq!(out.decoded, x);
    }
}

#[test]
fn exact_profile_matches_monte_carlo() {
    let cb = Codebook::new(RmCode::new(4, 1).unwrap()).unwrap();
    let exact = exact_bit_error_profile(&cb, 0.1).unwrap();
    let mean = exact.iter().sum::<f64>() / exact.len() as f64;
    assert_abs_diff_eq!(mean, 0.019448, epsilon = 5e-7);
    let est = bit_error_experiment(
        &cb,
        &ExperimentSpec {
            delta: 0.1,
            decoder: DecoderKind::BitMap,
            puncture: None,
            trials: 20_000,
            seed: 3,
        },
    )
    .unwrap();
    assert!(
        est.ci.0 <= mean && mean <= est.ci.1,
        "{:?} vs {mean}",
        est.ci
    );
}

#[test]
fn pfr_oracle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let p = DenseDistribution::random(3, &mut rng);
        let q = DenseDistribution::random(3, &mut rng);
        let d = ruzsa_dist(&p, &q).unwrap();
        let (_, best) = nearest_subspace(&p).unwrap();
        assert!(best <= 6.0 * d + 1e-12);
        assert!(pfr_check(&p, &q).is_ok());
    }
}
