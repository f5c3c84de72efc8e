//! Binary symmetric channel simulation and exhaustive decoders for small
//! Reed-Muller codes, including the puncture-and-list decoder.
//!
//! Codewords are held as `u64` words, so every decoder here needs `n <= 64`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::BitVector;
use crate::info::binary_entropy;
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::rm::RmCode;
use crate::seeding::chunk_rng;

/// Largest `m` for which codewords fit a machine word.
pub const MAX_DECODE_M: usize = 6;
/// Largest dimension for exact bit-MAP decoding.
pub const MAX_BITMAP_K: usize = 16;
/// Largest dimension for ML decoding and list building.
pub const MAX_LIST_K: usize = 20;
/// Largest length for the exact per-bit error enumeration.
pub const MAX_EXACT_PROFILE_N: usize = 16;
/// Largest length for the error-split enumeration.
pub const MAX_SPLIT_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BscChannel {
    delta: f64,
}

impl BscChannel {
    /// Crossover probability in `[0, 1/2]`.
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&delta) {
            return Err(Error::InvalidParameter(format!(
                "crossover probability {delta} must lie in [0, 1/2]"
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn capacity(&self) -> f64 {
        1.0 - binary_entropy(self.delta)
    }

    /// Noise word with i.i.d. `Ber(δ)` bits in the low `n` positions.
    pub fn noise<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> u64 {
        (0..n).fold(0, |acc, i| acc | (rng.gen_bool(self.delta) as u64) << i)
    }
}

/// `y = x + z` with `z ~ Ber(δ)^n`.
pub fn transmit<R: Rng + ?Sized>(x: &BitVector, ch: &BscChannel, rng: &mut R) -> BitVector {
    let mut y = x.clone();
    for i in 0..x.len() {
        if rng.gen_bool(ch.delta) {
            y.flip(i);
        }
    }
    y
}

/// [`transmit`] with a fresh generator seeded from `seed`.
pub fn transmit_seeded(x: &BitVector, ch: &BscChannel, seed: u64) -> BitVector {
    transmit(x, ch, &mut chunk_rng(seed, 0))
}

/// `1 - h(δ')`, the largest rate the puncture-and-list decoder accepts.
pub fn max_rate(delta_prime: f64) -> f64 {
    1.0 - binary_entropy(delta_prime)
}

/// All codewords of a code; codeword `i` is the encoding of message `i`.
#[derive(Debug, Clone)]
pub struct Codebook {
    code: RmCode,
    words: Vec<u64>,
}

impl Codebook {
    pub fn new(code: RmCode) -> Result<Self> {
        if code.m() > MAX_DECODE_M {
            return Err(Error::guard(
                "m for codebook decoding",
                MAX_DECODE_M,
                code.m(),
            ));
        }
        if code.k() > MAX_LIST_K {
            return Err(Error::guard("code dimension k", MAX_LIST_K, code.k()));
        }
        let words = code.codewords_u64()?;
        Ok(Self { code, words })
    }

    pub fn code(&self) -> &RmCode {
        &self.code
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn k(&self) -> usize {
        self.code.k()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn word(&self, i: usize) -> BitVector {
        BitVector::from_u64(self.n(), self.words[i])
    }

    fn pack(&self, y: &BitVector) -> Result<u64> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: y.len(),
            });
        }
        Ok(y.to_u64().expect("n <= 64"))
    }
}

#[inline]
fn dist(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

/// Likelihood `δ^d (1-δ)^{n-d}` up to the common factor `(1-δ)^n`.
fn likelihood_table(n: usize, delta: f64) -> Vec<f64> {
    let rho = if delta < 0.5 {
        delta / (1.0 - delta)
    } else {
        1.0
    };
    (0..=n).map(|d| rho.powi(d as i32)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitMapDecision {
    /// `P(X_i = 1 | Y = y)`.
    pub posteriors: Vec<f64>,
    /// Threshold decisions, ties to 0.
    pub hard: BitVector,
}

fn posteriors_u64(cb: &Codebook, y: u64, like: &[f64]) -> Vec<f64> {
    let n = cb.n();
    let mut total = CompensatedSum::new();
    let mut ones = vec![CompensatedSum::new(); n];
    for &c in &cb.words {
        let w = like[dist(c, y) as usize];
        total.add(w);
        let mut bits = c;
        while bits != 0 {
            ones[bits.trailing_zeros() as usize].add(w);
            bits &= bits - 1;
        }
    }
    let t = total.value();
    ones.iter().map(|o| o.value() / t).collect()
}

fn hard_decisions(post: &[f64]) -> u64 {
    post.iter()
        .enumerate()
        .fold(0, |acc, (i, &p)| acc | ((p > 0.5) as u64) << i)
}

fn check_bitmap(cb: &Codebook) -> Result<()> {
    if cb.k() > MAX_BITMAP_K {
        return Err(Error::guard(
            "code dimension k for bit-MAP",
            MAX_BITMAP_K,
            cb.k(),
        ));
    }
    Ok(())
}

/// Exact per-bit posteriors by summing over the whole codebook.
pub fn bitmap_decode_exact(
    cb: &Codebook,
    y: &BitVector,
    ch: &BscChannel,
) -> Result<BitMapDecision> {
    check_bitmap(cb)?;
    let yw = cb.pack(y)?;
    let posteriors = posteriors_u64(cb, yw, &likelihood_table(cb.n(), ch.delta));
    let hard = BitVector::from_u64(cb.n(), hard_decisions(&posteriors));
    Ok(BitMapDecision { posteriors, hard })
}

fn ml_index(cb: &Codebook, y: u64) -> usize {
    let mut best = (u32::MAX, 0);
    for (i, &c) in cb.words.iter().enumerate() {
        let d = dist(c, y);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Closest codeword; ties go to the smallest message index.
pub fn ml_decode_exact(cb: &Codebook, y: &BitVector, _ch: &BscChannel) -> Result<BitVector> {
    let yw = cb.pack(y)?;
    Ok(cb.word(ml_index(cb, yw)))
}

/// Message indices of the `l` most likely codewords, most likely first;
/// ties go to the smaller index.
fn list_indices(cb: &Codebook, y: u64, l: usize) -> Vec<usize> {
    let mut order: Vec<(u32, usize)> = cb
        .words
        .iter()
        .enumerate()
        .map(|(i, &c)| (dist(c, y), i))
        .collect();
    let l = l.min(order.len());
    if l < order.len() {
        order.select_nth_unstable(l);
        order.truncate(l);
    }
    order.sort_unstable();
    order.into_iter().map(|(_, i)| i).collect()
}

/// The `l` most likely codewords given `y`, by likelihood then index.
pub fn build_list(
    cb: &Codebook,
    y: &BitVector,
    _ch: &BscChannel,
    l: usize,
) -> Result<Vec<BitVector>> {
    if l == 0 {
        return Err(Error::InvalidParameter("list size must be positive".into()));
    }
    let yw = cb.pack(y)?;
    Ok(list_indices(cb, yw, l)
        .into_iter()
        .map(|i| cb.word(i))
        .collect())
}

/// Position of the codeword with index `truth` in the likelihood order for `y`.
fn rank_of(cb: &Codebook, y: u64, truth: usize) -> usize {
    let key = (dist(cb.words[truth], y), truth);
    cb.words
        .iter()
        .enumerate()
        .filter(|&(i, &c)| (dist(c, y), i) < key)
        .count()
}

/// Parameters of the puncture-and-list decoder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PunctureParams {
    pub delta: f64,
    pub delta_prime: f64,
    pub list_size: usize,
    /// Decode even when the rate is not below `1 - h(δ')`.
    pub bypass_rate_check: bool,
}

impl PunctureParams {
    pub fn new(delta: f64, delta_prime: f64, list_size: usize) -> Self {
        Self {
            delta,
            delta_prime,
            list_size,
            bypass_rate_check: false,
        }
    }

    /// `γ = 2(δ' - δ) / (1 - 2δ)`.
    pub fn gamma(&self) -> f64 {
        2.0 * (self.delta_prime - self.delta) / (1.0 - 2.0 * self.delta)
    }

    pub fn validate(&self, code: &RmCode) -> Result<()> {
        BscChannel::new(self.delta)?;
        if !(self.delta < 0.5 && self.delta <= self.delta_prime && self.delta_prime < 0.5) {
            return Err(Error::Config(format!(
                "need delta <= delta' < 1/2, got delta = {}, delta' = {}",
                self.delta, self.delta_prime
            )));
        }
        if self.list_size == 0 {
            return Err(Error::Config("list size must be positive".into()));
        }
        let cap = max_rate(self.delta_prime);
        if !self.bypass_rate_check && code.rate() >= cap {
            return Err(Error::Config(format!(
                "rate {:.4} of RM({}, {}) is not below 1 - h(delta') = {cap:.4}",
                code.rate(),
                code.m(),
                code.r()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PuncturedDecode {
    pub decoded: BitVector,
    /// Message indices of the list, most likely first.
    pub list: Vec<usize>,
    /// The randomised positions.
    pub punctured: BitVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeOutcome {
    pub decoded: BitVector,
    pub bit_errors: usize,
    pub list_contained_truth: bool,
    pub list_size: usize,
}

impl DecodeOutcome {
    pub fn assess(cb: &Codebook, truth: usize, result: &PuncturedDecode) -> Self {
        let t = cb.word(truth);
        Self {
            bit_errors: result.decoded.hamming_distance(&t),
            decoded: result.decoded.clone(),
            list_contained_truth: result.list.contains(&truth),
            list_size: result.list.len(),
        }
    }
}

fn punctured_core<R: Rng + ?Sized>(
    cb: &Codebook,
    y: u64,
    p: &PunctureParams,
    forced: Option<u64>,
    rng: &mut R,
) -> (usize, Vec<usize>, u64) {
    let n = cb.n();
    let gamma = p.gamma();
    let s =
        forced.unwrap_or_else(|| (0..n).fold(0, |acc, i| acc | (rng.gen_bool(gamma) as u64) << i));
    let fresh: u64 = (0..n).fold(0, |acc, i| acc | (rng.gen_bool(0.5) as u64) << i);
    let y2 = (y & !s) | (fresh & s);
    let list = list_indices(cb, y2, p.list_size);
    let mut best = (u32::MAX, 0);
    for &i in &list {
        let d = dist(cb.words[i] & s, y & s);
        if d < best.0 {
            best = (d, i);
        }
    }
    (best.1, list, s)
}

/// Puncture-and-list decoding of `y_prime`: positions join `S`
/// independently with probability `γ`, are overwritten with fresh fair bits,
/// the `L` most likely codewords for the result are listed, and the member
/// agreeing with `y_prime` on most of `S` is returned (first in list order on
/// ties). `forced` replaces the random choice of `S`.
pub fn punctured_list_decode_with<R: Rng + ?Sized>(
    cb: &Codebook,
    y_prime: &BitVector,
    params: &PunctureParams,
    forced: Option<&BitVector>,
    rng: &mut R,
) -> Result<PuncturedDecode> {
    params.validate(cb.code())?;
    let y = cb.pack(y_prime)?;
    let forced = forced.map(|s| cb.pack(s)).transpose()?;
    let (i, list, s) = punctured_core(cb, y, params, forced, rng);
    Ok(PuncturedDecode {
        decoded: cb.word(i),
        list,
        punctured: BitVector::from_u64(cb.n(), s),
    })
}

pub fn punctured_list_decode(
    cb: &Codebook,
    y_prime: &BitVector,
    params: &PunctureParams,
    seed: u64,
) -> Result<PuncturedDecode> {
    punctured_list_decode_with(cb, y_prime, params, None, &mut chunk_rng(seed, 0))
}

/// `P(X_i ≠ X̂_i)` for bit-MAP decoding, exactly, for every position.
pub fn exact_bit_error_profile(cb: &Codebook, delta: f64) -> Result<Vec<f64>> {
    check_bitmap(cb)?;
    BscChannel::new(delta)?;
    let n = cb.n();
    if n > MAX_EXACT_PROFILE_N {
        return Err(Error::guard(
            "code length n for exact bit error",
            MAX_EXACT_PROFILE_N,
            n,
        ));
    }
    let like = likelihood_table(n, delta);
    let scale = (1.0 - delta).powi(n as i32) / cb.words.len() as f64;
    let per_y: Vec<Vec<f64>> = (0..1u64 << n)
        .into_par_iter()
        .map(|y| {
            let hard = hard_decisions(&posteriors_u64(cb, y, &like));
            let mut err = vec![0.0; n];
            for &c in &cb.words {
                let w = like[dist(c, y) as usize];
                let mut wrong = c ^ hard;
                while wrong != 0 {
                    err[wrong.trailing_zeros() as usize] += w;
                    wrong &= wrong - 1;
                }
            }
            err
        })
        .collect();
    Ok((0..n)
        .map(|i| scale * compensated_sum(per_y.iter().map(|e| e[i])))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DecoderKind {
    BitMap,
    Ml,
    PuncturedList,
}

impl DecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::BitMap => "bitmap",
            DecoderKind::Ml => "ml",
            DecoderKind::PuncturedList => "punctured-list",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub delta: f64,
    pub decoder: DecoderKind,
    /// Required for [`DecoderKind::PuncturedList`].
    pub puncture: Option<PunctureParams>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitErrorEstimate {
    pub trials: usize,
    pub n: usize,
    pub bit_errors: u64,
    /// Fraction of wrong bits over all trials and positions.
    pub p_bit: f64,
    /// Wilson 95% interval for `p_bit`.
    pub ci: (f64, f64),
    /// Standard error of `p_bit` from per-trial error counts.
    pub stderr: f64,
    /// Error rate per position.
    pub per_bit: Vec<f64>,
    /// Fraction of trials whose list held the transmitted codeword.
    pub list_containment: Option<f64>,
    /// Hamming distances of list members from the transmitted codeword.
    pub list_distance_histogram: Option<Vec<u64>>,
}

impl BitErrorEstimate {
    pub fn worst_position(&self) -> f64 {
        self.per_bit.iter().copied().fold(0.0, f64::max)
    }
}

pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `total`.
pub fn wilson_interval(successes: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let nt = total as f64;
    let p = successes as f64 / nt;
    let z2 = z * z;
    let denom = 1.0 + z2 / nt;
    let centre = (p + z2 / (2.0 * nt)) / denom;
    let half = z * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == total {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Clone, Default)]
struct Tally {
    per_bit: Vec<u64>,
    errors: u64,
    errors_sq: u64,
    contained: u64,
    histogram: Vec<u64>,
}

impl Tally {
    fn new(n: usize) -> Self {
        Self {
            per_bit: vec![0; n],
            histogram: vec![0; n + 1],
            ..Self::default()
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        for (a, b) in self.per_bit.iter_mut().zip(&o.per_bit) {
            *a += b;
        }
        for (a, b) in self.histogram.iter_mut().zip(&o.histogram) {
            *a += b;
        }
        self.errors += o.errors;
        self.errors_sq += o.errors_sq;
        self.contained += o.contained;
        self
    }
}

/// Trials per parallel work unit.
const TRIAL_BLOCK: usize = 256;

/// Monte-Carlo bit-error rate of a decoder. Trial `t` draws its message,
/// noise and decoder randomness from stream `t` of `seed`, and all counts are
/// integers, so results do not depend on scheduling.
pub fn bit_error_experiment(cb: &Codebook, spec: &ExperimentSpec) -> Result<BitErrorEstimate> {
    let ch = BscChannel::new(spec.delta)?;
    if spec.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let puncture = match spec.decoder {
        DecoderKind::PuncturedList => {
            let p = spec.puncture.clone().ok_or_else(|| {
                Error::Config("punctured-list decoding needs delta' and a list size".into())
            })?;
            if (p.delta - spec.delta).abs() > 0.0 {
                return Err(Error::Config(
                    "puncture delta differs from channel delta".into(),
                ));
            }
            p.validate(cb.code())?;
            Some(p)
        }
        DecoderKind::BitMap => {
            check_bitmap(cb)?;
            None
        }
        DecoderKind::Ml => None,
    };
    let n = cb.n();
    let like = likelihood_table(n, spec.delta);
    let ncw = cb.words.len();
    let blocks = spec.trials.div_ceil(TRIAL_BLOCK);
    let tally = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut t = Tally::new(n);
            for trial in b * TRIAL_BLOCK..((b + 1) * TRIAL_BLOCK).min(spec.trials) {
                let mut rng = chunk_rng(spec.seed, trial as u64);
                let msg = rng.gen_range(0..ncw);
                let x = cb.words[msg];
                let y = x ^ ch.noise(n, &mut rng);
                let decoded = match spec.decoder {
                    DecoderKind::BitMap => hard_decisions(&posteriors_u64(cb, y, &like)),
                    DecoderKind::Ml => cb.words[ml_index(cb, y)],
                    DecoderKind::PuncturedList => {
                        let p = puncture.as_ref().expect("validated");
                        let (i, list, _) = punctured_core(cb, y, p, None, &mut rng);
                        if list.contains(&msg) {
                            t.contained += 1;
                        }
                        for &j in &list {
                            t.histogram[dist(cb.words[j], x) as usize] += 1;
                        }
                        cb.words[i]
                    }
                };
                let mut wrong = decoded ^ x;
                let e = wrong.count_ones() as u64;
                t.errors += e;
                t.errors_sq += e * e;
                while wrong != 0 {
                    t.per_bit[wrong.trailing_zeros() as usize] += 1;
                    wrong &= wrong - 1;
                }
            }
            t
        })
        .reduce(|| Tally::new(n), Tally::merge);

    let trials = spec.trials as f64;
    let total = (n * spec.trials) as u64;
    let p_bit = tally.errors as f64 / total as f64;
    let mean = tally.errors as f64 / trials;
    let var = if spec.trials > 1 {
        ((tally.errors_sq as f64 - trials * mean * mean) / (trials - 1.0)).max(0.0)
    } else {
        0.0
    };
    let punctured = spec.decoder == DecoderKind::PuncturedList;
    Ok(BitErrorEstimate {
        trials: spec.trials,
        n,
        bit_errors: tally.errors,
        p_bit,
        ci: wilson_interval(tally.errors, total, WILSON_Z),
        stderr: (var / trials).sqrt() / n as f64,
        per_bit: tally.per_bit.iter().map(|&c| c as f64 / trials).collect(),
        list_containment: punctured.then(|| tally.contained as f64 / trials),
        list_distance_histogram: punctured.then_some(tally.histogram),
    })
}

/// Fraction of trials in which the transmitted codeword ranks among the `L`
/// most likely codewords, for each requested `L`.
pub fn list_containment(
    cb: &Codebook,
    delta: f64,
    list_sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let ch = BscChannel::new(delta)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let n = cb.n();
    let ncw = cb.words.len();
    let ranks: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = chunk_rng(seed, trial as u64);
            let msg = rng.gen_range(0..ncw);
            let y = cb.words[msg] ^ ch.noise(n, &mut rng);
            rank_of(cb, y, msg)
        })
        .collect();
    Ok(list_sizes
        .iter()
        .map(|&l| {
            (
                l,
                ranks.iter().filter(|&&r| r < l).count() as f64 / trials as f64,
            )
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSplitReport {
    pub n: usize,
    pub delta: f64,
    pub gamma: f64,
    /// `δ + γ - 2γδ`.
    pub combined: f64,
    /// `P(S_i = 1 | U_i = 1)`.
    pub in_factor: f64,
    /// `P(S_i = 1 | U_i = 0)`.
    pub out_factor: f64,
    /// Largest deviation of `P(S Δ T = U)` from the product law.
    pub marginal_residual: f64,
    /// Largest deviation of `P(S ⊇ W | S Δ T = U)` from the product formula.
    pub containment_residual: f64,
    /// Largest deviation of `P(S = W | S Δ T = U)` from the product formula.
    pub independence_residual: f64,
}

impl ErrorSplitReport {
    pub fn max_residual(&self) -> f64 {
        self.marginal_residual
            .max(self.containment_residual)
            .max(self.independence_residual)
    }
}

fn ratio_or_zero(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        0.0
    }
}

/// Exhaustive check of how `U = S Δ T` splits, for `S ~ Ber(γ)^n` and
/// `T ~ Ber(δ)^n` independent.
pub fn error_split_check(n: usize, delta: f64, gamma: f64) -> Result<ErrorSplitReport> {
    if n > MAX_SPLIT_N {
        return Err(Error::guard("length n for error split", MAX_SPLIT_N, n));
    }
    for (name, v) in [("delta", delta), ("gamma", gamma)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} must lie in [0, 1]"
            )));
        }
    }
    let size = 1usize << n;
    let bern = |q: f64, x: usize| {
        let w = x.count_ones() as i32;
        q.powi(w) * (1.0 - q).powi(n as i32 - w)
    };
    let ps: Vec<f64> = (0..size).map(|s| bern(gamma, s)).collect();
    let pt: Vec<f64> = (0..size).map(|t| bern(delta, t)).collect();
    let combined = delta + gamma - 2.0 * gamma * delta;
    let in_factor = ratio_or_zero(
        gamma * (1.0 - delta),
        gamma * (1.0 - delta) + delta * (1.0 - gamma),
    );
    let out_factor = ratio_or_zero(gamma * delta, gamma * delta + (1.0 - gamma) * (1.0 - delta));

    let rows: Vec<(f64, f64, f64)> = (0..size)
        .into_par_iter()
        .map(|u| {
            // P(S = s, U = u) = P(S = s) P(T = s ^ u)
            let joint: Vec<f64> = (0..size).map(|s| ps[s] * pt[s ^ u]).collect();
            let pu = compensated_sum(joint.iter().copied());
            let marginal = (pu - bern(combined, u)).abs();
            if pu <= 0.0 {
                return (marginal, 0.0, 0.0);
            }
            let cond: Vec<f64> = joint.iter().map(|&p| p / pu).collect();
            let factor = |i: usize, in_s: bool| {
                let q = if u >> i & 1 == 1 {
                    in_factor
                } else {
                    out_factor
                };
                if in_s {
                    q
                } else {
                    1.0 - q
                }
            };
            let mut indep = 0.0f64;
            for (w, &c) in cond.iter().enumerate() {
                let prod: f64 = (0..n).map(|i| factor(i, w >> i & 1 == 1)).product();
                indep = indep.max((c - prod).abs());
            }
            // superset sums: sup[w] = Σ_{s ⊇ w} cond[s]
            let mut sup = cond;
            for i in 0..n {
                for w in 0..size {
                    if w >> i & 1 == 0 {
                        sup[w] += sup[w | 1 << i];
                    }
                }
            }
            let mut contain = 0.0f64;
            for (w, &v) in sup.iter().enumerate() {
                let prod: f64 = (0..n)
                    .filter(|&i| w >> i & 1 == 1)
                    .map(|i| factor(i, true))
                    .product();
                contain = contain.max((v - prod).abs());
            }
            (marginal, contain, indep)
        })
        .collect();
    let max = |f: fn(&(f64, f64, f64)) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(ErrorSplitReport {
        n,
        delta,
        gamma,
        combined,
        in_factor,
        out_factor,
        marginal_residual: max(|r| r.0),
        containment_residual: max(|r| r.1),
        independence_residual: max(|r| r.2),
    })
}
