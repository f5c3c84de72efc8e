//! Layer entropies of the transformed noise `W = G Z`, `Z ~ Ber(δ)^n`, and the
//! identities and bounds built from them.
//!
//! `W` is indexed in bin-weight order, so the degree-`r` layer `W_r` is the set
//! of coordinates whose index has popcount `r`, listed by ascending index, and
//! `W_{>r}` collects all coordinates of higher popcount. Because `G` is an
//! involution, `P(W = w) = P(Z = G w)`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::{BitVector, Subspace};
use crate::info::{
    binary_entropy, cond_ruzsa_dist, ruzsa_dist_mixed, DenseDistribution, JointDistribution,
};
use crate::numeric::{binomial, compensated_sum, plogp, CompensatedSum};
use crate::rm::{
    dim_le, full_transform, full_transform_u64, layer_indices, layer_size, set_total_order_cmp,
    SetMask,
};
use crate::seeding::{chunk_ranges, chunk_rng};
use crate::symmetry::{layer_restriction, AffineMap};

/// Largest `m` for the exact joint of `W` (`2^{2^m}` outcomes).
pub const MAX_EXACT_M: usize = 4;
/// Largest `m` for pair quantities and the `(U, Z)` enumeration.
pub const MAX_PAIR_M: usize = 3;
/// Largest `m` for Monte-Carlo estimation.
pub const MAX_MC_M: usize = 14;
pub const MIN_MC_SAMPLES: usize = 1000;
/// Samples per Monte-Carlo chunk; chunk boundaries never depend on threads.
pub const MC_CHUNK: usize = 4096;

/// Largest key width, in bits, for the dense pair enumeration.
const MAX_PAIR_KEY_BITS: usize = 24;

/// Binary symmetric noise level. Values up to and including `1/2` are
/// accepted so that the full-entropy case can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    delta: f64,
}

impl NoiseModel {
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&delta) {
            return Err(Error::InvalidParameter(format!(
                "noise level delta = {delta} must lie in [0, 1/2]"
            )));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `h(δ)`.
    pub fn entropy(&self) -> f64 {
        binary_entropy(self.delta)
    }
}

fn check_m(m: usize, limit: usize, what: &'static str) -> Result<()> {
    if m > limit {
        return Err(Error::guard(what, limit, m));
    }
    Ok(())
}

fn check_r(m: usize, r: usize) -> Result<()> {
    if r > m {
        return Err(Error::InvalidParameter(format!(
            "layer r = {r} exceeds m = {m}"
        )));
    }
    Ok(())
}

/// Packs the bits of `w` at `coords` into an integer, first coordinate lowest.
#[inline]
pub fn pack_bits(w: u64, coords: &[usize]) -> usize {
    coords
        .iter()
        .enumerate()
        .fold(0, |acc, (t, &c)| acc | (((w >> c) & 1) as usize) << t)
}

/// Bin-weight indices of popcount strictly greater than `r`.
pub fn above_indices(m: usize, r: usize) -> Vec<usize> {
    (0..1usize << m)
        .filter(|i| i.count_ones() as usize > r)
        .collect()
}

fn mask_of(coords: &[usize]) -> u64 {
    coords.iter().fold(0, |acc, &c| acc | 1 << c)
}

fn noise_weights(n: usize, delta: f64) -> Vec<f64> {
    (0..=n)
        .map(|w| delta.powi(w as i32) * (1.0 - delta).powi((n - w) as i32))
        .collect()
}

/// The exact law of `W = G Z`, one entry per outcome `w ∈ F_2^n`.
#[derive(Debug, Clone)]
pub struct LayeredNoiseJoint {
    m: usize,
    delta: f64,
    probs: Vec<f64>,
}

impl LayeredNoiseJoint {
    pub fn new(m: usize, delta: f64) -> Result<Self> {
        check_m(m, MAX_EXACT_M, "m for the exact noise joint")?;
        NoiseModel::new(delta)?;
        let n = 1usize << m;
        let weights = noise_weights(n, delta);
        let mut probs = vec![0.0; 1 << n];
        for z in 0..1u64 << n {
            probs[full_transform_u64(m, z) as usize] = weights[z.count_ones() as usize];
        }
        Ok(Self { m, delta, probs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    pub fn prob(&self, w: u64) -> f64 {
        self.probs[w as usize]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Entropy of the coordinates selected by `mask`.
    pub fn marginal_entropy(&self, mask: u64) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        let mut acc = vec![CompensatedSum::new(); self.probs.len()];
        for (w, &p) in self.probs.iter().enumerate() {
            acc[w & mask as usize].add(p);
        }
        compensated_sum(acc.iter().map(|a| plogp(a.value())))
    }

    /// `P(W_i = 1)`.
    pub fn coordinate_marginal(&self, i: usize) -> f64 {
        compensated_sum(
            self.probs
                .iter()
                .enumerate()
                .filter(|(w, _)| w >> i & 1 == 1)
                .map(|(_, &p)| p),
        )
    }

    /// `(W_r, W_{>r})` as a joint conditioned on its second component.
    pub fn layer_joint(&self, r: usize) -> Result<JointDistribution> {
        check_r(self.m, r)?;
        let xs = layer_indices(self.m, r);
        let ys = above_indices(self.m, r);
        let (ka, kb) = (xs.len(), ys.len());
        let mut acc = vec![CompensatedSum::new(); 1 << (ka + kb)];
        for (w, &p) in self.probs.iter().enumerate() {
            let w = w as u64;
            acc[(pack_bits(w, &ys) << ka) | pack_bits(w, &xs)].add(p);
        }
        JointDistribution::new(ka, kb, acc.iter().map(|a| a.value()).collect())
    }

    /// `f_{m,r} = H(W_r | W_{>r})`.
    pub fn layer_entropy(&self, r: usize) -> f64 {
        let ge = mask_of(&above_indices(self.m, r)) | mask_of(&layer_indices(self.m, r));
        let gt = mask_of(&above_indices(self.m, r));
        self.marginal_entropy(ge) - self.marginal_entropy(gt)
    }

    /// `a_{m,r} = H(W_{≤r} | W_{>r}) = H(W) - H(W_{>r})`.
    pub fn cumulative_entropy(&self, r: usize) -> f64 {
        let all = if self.n() == 64 {
            u64::MAX
        } else {
            (1u64 << self.n()) - 1
        };
        self.marginal_entropy(all) - self.marginal_entropy(mask_of(&above_indices(self.m, r)))
    }

    pub fn profile(&self) -> EntropyProfile {
        let f: Vec<f64> = (0..=self.m).map(|r| self.layer_entropy(r)).collect();
        EntropyProfile::from_layers(self.m, self.delta, f)
    }
}

/// `P(W_i = 1)` by the pile-up lemma: `W_i` is the XOR of `2^{|i|}` noise bits.
pub fn pile_up(delta: f64, popcount: usize) -> f64 {
    0.5 * (1.0 - (1.0 - 2.0 * delta).powi(1 << popcount))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyProfile {
    pub m: usize,
    pub delta: f64,
    /// `f_{m,r}` for `r = 0..=m`.
    pub f: Vec<f64>,
    /// `a_{m,r} = Σ_{i≤r} f_{m,i}`.
    pub a: Vec<f64>,
    /// `f_{m,r} / C(m,r)`.
    pub favg: Vec<f64>,
}

impl EntropyProfile {
    pub fn from_layers(m: usize, delta: f64, f: Vec<f64>) -> Self {
        let mut a = Vec::with_capacity(f.len());
        let mut acc = CompensatedSum::new();
        for &x in &f {
            acc.add(x);
            a.push(acc.value());
        }
        let favg = f
            .iter()
            .enumerate()
            .map(|(r, &x)| x / layer_size(m, r) as f64)
            .collect();
        Self {
            m,
            delta,
            f,
            a,
            favg,
        }
    }

    pub fn total(&self) -> f64 {
        *self.a.last().expect("at least one layer")
    }

    /// `2^m h(δ)`.
    pub fn expected_total(&self) -> f64 {
        (1u64 << self.m) as f64 * binary_entropy(self.delta)
    }

    pub fn conservation_residual(&self) -> f64 {
        (self.total() - self.expected_total()).abs()
    }
}

pub fn noise_layer_joint(m: usize, delta: f64) -> Result<LayeredNoiseJoint> {
    LayeredNoiseJoint::new(m, delta)
}

pub fn layer_entropies(m: usize, delta: f64) -> Result<EntropyProfile> {
    Ok(LayeredNoiseJoint::new(m, delta)?.profile())
}

/// The law of `(U, Y)` with `U` uniform on all `2^n` coefficient vectors
/// (bin-weight order) and `Y = G U + Z`; entry `(u << n) | y`.
#[derive(Debug, Clone)]
pub struct CoefficientChannel {
    m: usize,
    probs: Vec<f64>,
}

impl CoefficientChannel {
    pub fn new(m: usize, delta: f64) -> Result<Self> {
        check_m(m, MAX_PAIR_M, "m for the (U, Z) enumeration")?;
        NoiseModel::new(delta)?;
        let n = 1usize << m;
        let weights = noise_weights(n, delta);
        let pu = 1.0 / (1u64 << n) as f64;
        let mut probs = vec![0.0; 1 << (2 * n)];
        for u in 0..1u64 << n {
            let x = full_transform_u64(m, u);
            for z in 0..1u64 << n {
                probs[((u << n) | (x ^ z)) as usize] = pu * weights[z.count_ones() as usize];
            }
        }
        Ok(Self { m, probs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    /// Joint of `(U_targets, (Y, U_conditioning))`.
    pub fn joint(&self, targets: &[usize], conditioning: &[usize]) -> Result<JointDistribution> {
        let n = self.n();
        let ka = targets.len();
        let kb = n + conditioning.len();
        let mut acc = vec![CompensatedSum::new(); 1 << (ka + kb)];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let u = (idx >> n) as u64;
            let y = idx & ((1 << n) - 1);
            let key = (((pack_bits(u, conditioning) << n) | y) << ka) | pack_bits(u, targets);
            acc[key].add(p);
        }
        JointDistribution::new(ka, kb, acc.iter().map(|a| a.value()).collect())
    }
}

/// Sets `B` with `B < A` in the successive-decoding total order.
pub fn predecessors(m: usize, a: SetMask) -> Vec<usize> {
    (0..1u32 << m)
        .filter(|&b| set_total_order_cmp(b, a) == std::cmp::Ordering::Less)
        .map(|b| b as usize)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerSetProfile {
    pub m: usize,
    pub delta: f64,
    /// `f_A`, indexed by the set's bitmask.
    pub f: Vec<f64>,
    /// `Z_A`, indexed by the set's bitmask.
    pub z: Vec<f64>,
}

impl PerSetProfile {
    pub fn total(&self) -> f64 {
        compensated_sum(self.f.iter().copied())
    }
}

/// `f_A = H(U_A | Y, {U_B : B < A})` and `Z_A`, the matching Bhattacharyya
/// parameter, for every `A ⊆ [m]`.
pub fn per_set_profile(m: usize, delta: f64) -> Result<PerSetProfile> {
    let ch = CoefficientChannel::new(m, delta)?;
    let mut f = Vec::with_capacity(1 << m);
    let mut z = Vec::with_capacity(1 << m);
    for a in 0..1u32 << m {
        let j = ch.joint(&[a as usize], &predecessors(m, a))?;
        f.push(j.cond_entropy());
        z.push(j.bhattacharyya()?);
    }
    Ok(PerSetProfile { m, delta, f, z })
}

pub fn per_set_entropy(m: usize, a: SetMask, delta: f64) -> Result<f64> {
    let ch = CoefficientChannel::new(m, delta)?;
    Ok(ch.joint(&[a as usize], &predecessors(m, a))?.cond_entropy())
}

pub fn per_set_bhattacharyya(m: usize, a: SetMask, delta: f64) -> Result<f64> {
    let ch = CoefficientChannel::new(m, delta)?;
    ch.joint(&[a as usize], &predecessors(m, a))?
        .bhattacharyya()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimpEqReport {
    pub m: usize,
    pub r: usize,
    pub delta: f64,
    /// `H(U_r | Y, U_{>r})` from the `(U, Z)` enumeration.
    pub direct: f64,
    /// `H(W_r | W_{>r})`.
    pub transformed: f64,
    pub residual: f64,
}

pub fn simp_eq_check(m: usize, r: usize, delta: f64) -> Result<SimpEqReport> {
    check_r(m, r)?;
    let ch = CoefficientChannel::new(m, delta)?;
    let direct = ch
        .joint(&layer_indices(m, r), &above_indices(m, r))?
        .cond_entropy();
    let transformed = LayeredNoiseJoint::new(m, delta)?.layer_entropy(r);
    Ok(SimpEqReport {
        m,
        r,
        delta,
        direct,
        transformed,
        residual: (direct - transformed).abs(),
    })
}

/// `H(W_r + W'_r | W_{>r}, W'_{>r})` by enumerating pairs of outcomes of
/// `(W_r, W_{>r})`. Falls back to slice-wise convolution when the dense pair
/// key would be too wide.
pub fn pair_sum_entropy(joint: &LayeredNoiseJoint, r: usize) -> Result<f64> {
    let lj = joint.layer_joint(r)?;
    let (c, g) = (lj.ka(), lj.kb());
    if c + 2 * g > MAX_PAIR_KEY_BITS {
        return pair_sum_entropy_slices(joint, r);
    }
    let support: Vec<(usize, usize, f64)> = lj
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (i & ((1 << c) - 1), i >> c, p))
        .collect();
    let mut acc = vec![CompensatedSum::new(); 1 << (c + 2 * g)];
    for &(x, y, p) in &support {
        for &(x2, y2, q) in &support {
            acc[((y2 << g | y) << c) | (x ^ x2)].add(p * q);
        }
    }
    let joint_h = compensated_sum(acc.iter().map(|a| plogp(a.value())));
    Ok(joint_h - 2.0 * lj.marginal_y().entropy())
}

/// The same quantity through the conditional Ruzsa distance machinery.
pub fn pair_sum_entropy_slices(joint: &LayeredNoiseJoint, r: usize) -> Result<f64> {
    let lj = joint.layer_joint(r)?;
    Ok(cond_ruzsa_dist(&lj, &lj)? + lj.cond_entropy())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub m: usize,
    pub r: usize,
    pub delta: f64,
    /// `a_{m+1,r}` computed directly.
    pub lhs: f64,
    /// `2 a_{m,r} - H(W_r + W'_r | W_{>r}, W'_{>r})`.
    pub rhs: f64,
    pub residual: f64,
}

pub fn balance_check(m: usize, r: usize, delta: f64) -> Result<BalanceReport> {
    check_m(m, MAX_PAIR_M, "m for pair quantities")?;
    check_r(m, r)?;
    let small = LayeredNoiseJoint::new(m, delta)?;
    let big = LayeredNoiseJoint::new(m + 1, delta)?;
    let lhs = big.cumulative_entropy(r);
    let rhs = 2.0 * small.cumulative_entropy(r) - pair_sum_entropy(&small, r)?;
    Ok(BalanceReport {
        m,
        r,
        delta,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

fn pair_guard(m: usize, allow_m4: bool) -> Result<()> {
    let limit = if allow_m4 { MAX_EXACT_M } else { MAX_PAIR_M };
    check_m(m, limit, "m for pair quantities")
}

/// `Δ = d(W_r|W_{>r}; W_r|W_{>r}) = H(W_r + W'_r | W_{>r}, W'_{>r}) - f_{m,r}`.
pub fn entropy_doubling(m: usize, r: usize, delta: f64) -> Result<f64> {
    entropy_doubling_with(m, r, delta, false)
}

/// As [`entropy_doubling`]; `allow_m4` lifts the guard to `m = 4`.
pub fn entropy_doubling_with(m: usize, r: usize, delta: f64, allow_m4: bool) -> Result<f64> {
    pair_guard(m, allow_m4)?;
    check_r(m, r)?;
    let joint = LayeredNoiseJoint::new(m, delta)?;
    Ok(pair_sum_entropy(&joint, r)? - joint.layer_entropy(r))
}

/// `Δ` as `cond_ruzsa_dist` of the materialised layer joint with itself.
pub fn entropy_doubling_via_cond_ruzsa(m: usize, r: usize, delta: f64) -> Result<f64> {
    pair_guard(m, false)?;
    let lj = LayeredNoiseJoint::new(m, delta)?.layer_joint(r)?;
    cond_ruzsa_dist(&lj, &lj)
}

/// Multiplier of the doubling in the gap bound.
pub const FR_GAP_CONSTANT: f64 = 140.0;
const GAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrGapReport {
    pub m: usize,
    pub r: usize,
    pub delta: f64,
    pub f: f64,
    pub layer_size: usize,
    /// `min(f, C(m,r) - f)`.
    pub gap: f64,
    /// `Δ`.
    pub doubling: f64,
    /// `gap / Δ`, absent when `Δ = 0`.
    pub ratio: Option<f64>,
    pub holds: bool,
}

/// Checks `min(f_{m,r}, C(m,r) - f_{m,r}) <= 140 Δ`.
pub fn fr_gap_check(m: usize, r: usize, delta: f64) -> Result<FrGapReport> {
    fr_gap_check_with(m, r, delta, false)
}

pub fn fr_gap_check_with(m: usize, r: usize, delta: f64, allow_m4: bool) -> Result<FrGapReport> {
    pair_guard(m, allow_m4)?;
    check_r(m, r)?;
    let joint = LayeredNoiseJoint::new(m, delta)?;
    let f = joint.layer_entropy(r);
    let doubling = pair_sum_entropy(&joint, r)? - f;
    let c = layer_size(m, r);
    let gap = f.min(c as f64 - f).max(0.0);
    let ratio = (doubling > 0.0).then(|| gap / doubling);
    Ok(FrGapReport {
        m,
        r,
        delta,
        f,
        layer_size: c,
        gap,
        doubling,
        ratio,
        holds: gap <= FR_GAP_CONSTANT * doubling + GAP_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermInvarianceReport {
    /// `d(U_G; W_r | W_{>r})`.
    pub before: f64,
    /// `d(U_{πG}; W_r | W_{>r})`.
    pub after: f64,
    pub residual: f64,
}

/// Compares `d(U_G; W_r|W_{>r})` with `d(U_{πG}; W_r|W_{>r})` for
/// `π = layer_restriction(f, r)`.
pub fn perm_invariance_check(
    m: usize,
    r: usize,
    delta: f64,
    g: &Subspace,
    f: &AffineMap,
) -> Result<PermInvarianceReport> {
    check_m(m, MAX_PAIR_M, "m for the permutation check")?;
    check_r(m, r)?;
    if f.m() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: f.m(),
        });
    }
    let c = layer_size(m, r);
    if g.ambient_dim() != c {
        return Err(Error::DimensionMismatch {
            expected: c,
            found: g.ambient_dim(),
        });
    }
    let lj = LayeredNoiseJoint::new(m, delta)?.layer_joint(r)?;
    let pi = layer_restriction(f, r)?;
    let pg = pi.apply_subspace(g)?;
    let before = ruzsa_dist_mixed(&DenseDistribution::uniform_on(g)?, &lj)?;
    let after = ruzsa_dist_mixed(&DenseDistribution::uniform_on(&pg)?, &lj)?;
    Ok(PermInvarianceReport {
        before,
        after,
        residual: (before - after).abs(),
    })
}

fn dim_le_f64(m: usize, r: usize) -> f64 {
    (0..=r.min(m)).map(|i| binomial(m, i) as f64).sum()
}

/// `min { r : C(m,≤r)/2^m >= 1 - h(δ)/(1-ε) }`.
pub fn r_star(m: usize, delta: f64, epsilon: f64) -> usize {
    let target = 1.0 - binary_entropy(delta) / (1.0 - epsilon);
    let total = 2f64.powi(m as i32);
    (0..=m)
        .find(|&r| dim_le_f64(m, r) / total >= target)
        .unwrap_or(m)
}

/// Largest `r` whose rate `C(m,≤r)/2^m` stays strictly below capacity
/// `1 - h(δ)`; `None` when even `r = 0` does not.
pub fn capacity_profile(m: usize, delta: f64) -> Option<usize> {
    let cap = 1.0 - binary_entropy(delta);
    let total = 2f64.powi(m as i32);
    (0..=m).rev().find(|&r| dim_le_f64(m, r) / total < cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateProfile {
    /// [`capacity_profile`].
    Capacity,
    /// `r*(m, ε)`.
    RStar,
    /// `r*(m, ε) - 1`, the largest degree strictly inside the strong regime.
    BelowRStar,
}

impl RateProfile {
    pub fn degree(&self, m: usize, delta: f64, epsilon: f64) -> Option<usize> {
        match self {
            RateProfile::Capacity => capacity_profile(m, delta),
            RateProfile::RStar => Some(r_star(m, delta, epsilon)),
            RateProfile::BelowRStar => r_star(m, delta, epsilon).checked_sub(1),
        }
    }
}

/// Propagated upper bounds `B[m][r] >= a_{m,r}` for `base_m <= m <= m_max`.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceTable {
    pub epsilon: f64,
    pub delta: f64,
    pub base_m: usize,
    pub m_max: usize,
    /// `bounds[m - base_m][r]` for `r = 0..=m`.
    pub bounds: Vec<Vec<f64>>,
    /// Whether the strong step produced `bounds[m - base_m][r]`.
    pub strong: Vec<Vec<bool>>,
}

impl RecurrenceTable {
    pub fn bound(&self, m: usize, r: usize) -> f64 {
        self.bounds[m - self.base_m][r]
    }

    /// `B[m][r] / C(m,≤r)`.
    pub fn normalized(&self, m: usize, r: usize) -> f64 {
        self.bound(m, r) / dim_le_f64(m, r)
    }

    /// `B[m][r] / 2^m`.
    pub fn per_bit(&self, m: usize, r: usize) -> f64 {
        self.bound(m, r) / 2f64.powi(m as i32)
    }

    /// Normalised bounds along a rate profile for `m_from..=m_max`.
    pub fn trend(&self, profile: RateProfile, m_from: usize) -> TrendReport {
        let points: Vec<TrendPoint> = (m_from.max(self.base_m)..=self.m_max)
            .filter_map(|m| {
                profile
                    .degree(m, self.delta, self.epsilon)
                    .map(|r| TrendPoint {
                        m,
                        r,
                        normalized: self.normalized(m, r),
                    })
            })
            .collect();
        let increases = points
            .windows(2)
            .filter(|w| w[1].normalized > w[0].normalized)
            .map(|w| w[1].m)
            .collect();
        let slope = regression_slope(
            &points
                .iter()
                .filter(|p| p.normalized > 0.0)
                .map(|p| ((p.m as f64).sqrt(), p.normalized.log2()))
                .collect::<Vec<_>>(),
        );
        TrendReport {
            profile,
            points,
            increases,
            slope,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendPoint {
    pub m: usize,
    pub r: usize,
    pub normalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub profile: RateProfile,
    pub points: Vec<TrendPoint>,
    /// Values of `m` at which the normalised bound went up.
    pub increases: Vec<usize>,
    /// Least-squares slope of `log2(normalised bound)` against `sqrt(m)`.
    pub slope: Option<f64>,
}

impl TrendReport {
    pub fn nonincreasing(&self) -> bool {
        self.increases.is_empty()
    }
}

fn regression_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Base of the propagation; exact layer entropies are available here.
pub const RECURRENCE_BASE_M: usize = MAX_EXACT_M;

/// Propagates upper bounds on `a_{m,r}` from exact values at `m = 4`, using
/// `B[m+1][r] = (1-ε/140) B[m][r] + (1+ε/140) B[m][r-1]` when `r <= r*(m,ε)`
/// and `B[m][r] + B[m][r-1]` otherwise, capped by `C(m+1,≤r)` and
/// `2^{m+1} h(δ)`.
pub fn recurrence_propagate(epsilon: f64, delta: f64, m_max: usize) -> Result<RecurrenceTable> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must lie in [0, 1)"
        )));
    }
    NoiseModel::new(delta)?;
    let base_m = RECURRENCE_BASE_M;
    if m_max < base_m || m_max > 1000 {
        return Err(Error::InvalidParameter(format!(
            "m_max = {m_max} must lie in [{base_m}, 1000]"
        )));
    }
    let h = binary_entropy(delta);
    let base = layer_entropies(base_m, delta)?;
    let mut bounds = vec![base.a.clone()];
    let mut strong = vec![vec![false; base_m + 1]];
    let c = epsilon / FR_GAP_CONSTANT;
    for m in base_m..m_max {
        let prev = &bounds[m - base_m];
        let rs = r_star(m, delta, epsilon);
        let total = 2f64.powi(m as i32 + 1) * h;
        let mut row = Vec::with_capacity(m + 2);
        let mut srow = Vec::with_capacity(m + 2);
        for r in 0..=m {
            let lower = if r == 0 { 0.0 } else { prev[r - 1] };
            let use_strong = r <= rs;
            let raw = if use_strong {
                (1.0 - c) * prev[r] + (1.0 + c) * lower
            } else {
                prev[r] + lower
            };
            row.push(raw.min(dim_le_f64(m + 1, r)).min(total));
            srow.push(use_strong);
        }
        row.push(total);
        srow.push(false);
        bounds.push(row);
        strong.push(srow);
    }
    Ok(RecurrenceTable {
        epsilon,
        delta,
        base_m,
        m_max,
        bounds,
        strong,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn sample_noise(n: usize, delta: f64, rng: &mut impl rand::Rng) -> BitVector {
    let mut z = BitVector::zeros(n);
    for i in 0..n {
        if rng.gen_bool(delta) {
            z.set(i, true);
        }
    }
    z
}

fn restrict(w: &BitVector, coords: &[usize]) -> BitVector {
    let mut out = BitVector::zeros(coords.len());
    for (t, &c) in coords.iter().enumerate() {
        if w.get(c) {
            out.set(t, true);
        }
    }
    out
}

/// Plug-in estimate of `H(W_r | W_{>r})` from sampled noise. Results depend
/// only on `(m, r, δ, samples, seed)`, never on the number of threads.
pub fn mc_layer_entropy(
    m: usize,
    r: usize,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_m(m, MAX_MC_M, "m for Monte-Carlo layer entropy")?;
    check_r(m, r)?;
    NoiseModel::new(delta)?;
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "samples = {samples} is below the minimum {MIN_MC_SAMPLES}"
        )));
    }
    let n = 1usize << m;
    let mut ge: Vec<usize> = layer_indices(m, r);
    let layer_len = ge.len();
    ge.extend(above_indices(m, r));

    let chunks = chunk_ranges(samples, MC_CHUNK);
    let partial: Vec<HashMap<BitVector, u64>> = chunks
        .par_iter()
        .enumerate()
        .map(|(ci, range)| {
            let mut rng = chunk_rng(seed, ci as u64);
            let mut counts = HashMap::new();
            for _ in range.clone() {
                let w = full_transform(m, &sample_noise(n, delta, &mut rng));
                *counts.entry(restrict(&w, &ge)).or_insert(0u64) += 1;
            }
            counts
        })
        .collect();
    let mut joint: HashMap<BitVector, u64> = HashMap::new();
    for part in partial {
        for (k, c) in part {
            *joint.entry(k).or_insert(0) += c;
        }
    }
    let mut cond: HashMap<BitVector, u64> = HashMap::new();
    for (k, &c) in &joint {
        *cond.entry(k.slice(layer_len, k.len())).or_insert(0) += c;
    }
    let mut entries: Vec<(BitVector, u64)> = joint.into_iter().collect();
    entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));

    let total = samples as f64;
    let values: Vec<(f64, f64)> = entries
        .iter()
        .map(|(k, c)| {
            let cy = cond[&k.slice(layer_len, k.len())];
            (*c as f64, -((*c as f64) / cy as f64).log2())
        })
        .collect();
    let estimate = compensated_sum(values.iter().map(|(c, v)| c * v)) / total;
    let var =
        compensated_sum(values.iter().map(|(c, v)| c * (v - estimate).powi(2))) / (total - 1.0);
    Ok(McEstimate {
        estimate: estimate.max(0.0),
        stderr: (var / total).sqrt(),
        samples,
    })
}

/// `C(m, ≤r)` re-exported for reports.
pub fn code_dimension(m: usize, r: usize) -> usize {
    dim_le(m, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::enumerate_subspaces;
    use crate::rm::{set_from_elements, succeeds};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const DELTAS: [f64; 3] = [0.05, 0.1, 0.25];

    #[test]
    fn zero_noise_is_a_point_mass() {
        let j = LayeredNoiseJoint::new(3, 0.0).unwrap();
        assert_eq!(j.prob(0), 1.0);
        let p = j.profile();
        assert!(p.f.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn half_noise_is_uniform() {
        let j = LayeredNoiseJoint::new(2, 0.5).unwrap();
        for w in 0..16 {
            assert_abs_diff_eq!(j.prob(w), 1.0 / 16.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn m1_joint_by_hand() {
        // (W_0, W_1) = (Z_1, Z_1 + Z_2)
        let d = 0.1;
        let j = LayeredNoiseJoint::new(1, d).unwrap();
        let mut expected = [0.0; 4];
        for z in 0..4u64 {
            let (z1, z2) = (z & 1, z >> 1 & 1);
            let w = z1 | (z1 ^ z2) << 1;
            expected[w as usize] +=
                if z1 == 1 { d } else { 1.0 - d } * if z2 == 1 { d } else { 1.0 - d };
        }
        for w in 0..4 {
            assert_abs_diff_eq!(j.prob(w as u64), expected[w], epsilon = 1e-15);
        }
    }

    #[test]
    fn m1_closed_forms() {
        for d in DELTAS {
            let p = layer_entropies(1, d).unwrap();
            let h18 = binary_entropy(2.0 * d * (1.0 - d));
            assert_abs_diff_eq!(p.f[1], h18, epsilon = 1e-12);
            assert_abs_diff_eq!(p.f[0], 2.0 * binary_entropy(d) - h18, epsilon = 1e-12);
        }
        let p = layer_entropies(1, 0.1).unwrap();
        assert_abs_diff_eq!(p.f[1], 0.680_077, epsilon = 1e-5);
    }

    #[test]
    fn conservation_up_to_m4() {
        for m in 1..=4 {
            for d in DELTAS {
                let p = layer_entropies(m, d).unwrap();
                assert!(p.conservation_residual() < 1e-9, "m={m} d={d}");
            }
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(
            LayeredNoiseJoint::new(5, 0.1),
            Err(Error::GuardExceeded { limit: 4, .. })
        ));
        assert!(matches!(
            CoefficientChannel::new(4, 0.1),
            Err(Error::GuardExceeded { limit: 3, .. })
        ));
        assert!(matches!(
            balance_check(4, 1, 0.1),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(LayeredNoiseJoint::new(2, 0.7).is_err());
    }

    #[test]
    fn coordinate_marginals_follow_pile_up() {
        let j = LayeredNoiseJoint::new(3, 0.1).unwrap();
        for i in 0..8usize {
            assert_abs_diff_eq!(
                j.coordinate_marginal(i),
                pile_up(0.1, i.count_ones() as usize),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn favg_monotonicity() {
        for d in DELTAS {
            let profiles: Vec<EntropyProfile> =
                (1..=4).map(|m| layer_entropies(m, d).unwrap()).collect();
            for m in 1..=3 {
                let p = &profiles[m - 1];
                let q = &profiles[m];
                for r in 0..=m {
                    assert!(q.favg[r] <= p.favg[r] + 1e-9, "m={m} r={r}");
                    if r < m {
                        assert!(p.favg[r] <= p.favg[r + 1] + 1e-9, "m={m} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn simp_eq_holds() {
        for m in 1..=3 {
            for r in 0..=m {
                for d in DELTAS {
                    let rep = simp_eq_check(m, r, d).unwrap();
                    assert!(rep.residual < 1e-9, "{rep:?}");
                }
            }
        }
    }

    #[test]
    fn per_set_zero_noise() {
        let p = per_set_profile(2, 0.0).unwrap();
        assert!(p.f.iter().all(|&x| x.abs() < 1e-12));
        assert!(p.z.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn per_set_sums_and_layers() {
        for d in DELTAS {
            let m = 3;
            let p = per_set_profile(m, d).unwrap();
            assert_abs_diff_eq!(p.total(), 8.0 * binary_entropy(d), epsilon = 1e-9);
            let layers = layer_entropies(m, d).unwrap();
            for r in 0..=m {
                let s: f64 = layer_indices(m, r).iter().map(|&a| p.f[a]).sum();
                assert_abs_diff_eq!(s, layers.f[r], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn per_set_partial_order_monotone() {
        for m in 1..=3 {
            for d in DELTAS {
                let p = per_set_profile(m, d).unwrap();
                for a in 0..1u32 << m {
                    for b in 0..1u32 << m {
                        if succeeds(a, b) {
                            assert!(p.f[a as usize] <= p.f[b as usize] + 1e-9);
                        }
                    }
                }
                for a in 0..1usize << m {
                    let (z, h) = (p.z[a], p.f[a]);
                    assert!(z + 1e-12 >= h);
                    assert!(1.0 - z * z + 1e-12 >= (1.0 - h) * (1.0 - h));
                }
            }
        }
    }

    #[test]
    fn bhattacharyya_squares_under_extension() {
        for d in DELTAS {
            let p2 = per_set_profile(2, d).unwrap();
            let p3 = per_set_profile(3, d).unwrap();
            for a in 0..4usize {
                assert!(p3.z[a] <= p2.z[a] * p2.z[a] + 1e-12, "A={a} d={d}");
            }
        }
    }

    #[test]
    fn single_set_helpers_agree_with_profile() {
        let p = per_set_profile(3, 0.1).unwrap();
        let a = set_from_elements(&[1, 3]);
        assert_abs_diff_eq!(
            per_set_entropy(3, a, 0.1).unwrap(),
            p.f[a as usize],
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            per_set_bhattacharyya(3, a, 0.1).unwrap(),
            p.z[a as usize],
            epsilon = 1e-15
        );
    }

    #[test]
    fn balance_identity() {
        assert!(balance_check(1, 1, 0.0).unwrap().lhs.abs() < 1e-15);
        for m in 1..=3 {
            for r in 0..=m {
                for d in DELTAS {
                    let rep = balance_check(m, r, d).unwrap();
                    assert!(rep.residual < 1e-9, "{rep:?}");
                }
            }
        }
    }

    #[test]
    fn doubling_paths_agree() {
        for m in 1..=3 {
            for r in 0..=m {
                for d in [0.05, 0.1, 0.3] {
                    let a = entropy_doubling(m, r, d).unwrap();
                    let b = entropy_doubling_via_cond_ruzsa(m, r, d).unwrap();
                    assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                    assert!(a >= -1e-12);
                }
            }
        }
        assert_abs_diff_eq!(entropy_doubling(2, 1, 0.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entropy_doubling(2, 1, 0.5).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fr_gap_grid() {
        for m in [2, 3] {
            for r in 0..=m {
                for d in [0.0, 0.05, 0.1, 0.2, 0.3, 0.5] {
                    let rep = fr_gap_check(m, r, d).unwrap();
                    assert!(rep.holds, "{rep:?}");
                }
            }
        }
    }

    #[test]
    fn perm_invariance_example_and_random() {
        let g = Subspace::span(2, &[BitVector::from_bits(&[1, 0])]).unwrap();
        let f = AffineMap::new(
            crate::f2::BitMatrix::from_bits(&[&[1, 0], &[1, 1]]),
            BitVector::from_bits(&[1, 0]),
        )
        .unwrap();
        assert!(perm_invariance_check(2, 1, 0.1, &g, &f).unwrap().residual < 1e-9);
        let id = perm_invariance_check(2, 1, 0.1, &g, &AffineMap::identity(2)).unwrap();
        assert_eq!(id.residual, 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let r = rng.gen_range(1..=2);
            let subs = enumerate_subspaces(3).unwrap();
            let g = &subs[rng.gen_range(0..subs.len())];
            let f = AffineMap::random(3, &mut rng);
            assert!(perm_invariance_check(3, r, 0.1, g, &f).unwrap().residual < 1e-9);
        }
    }

    #[test]
    fn r_star_and_capacity_profile() {
        // h(0.1) = 0.469, so the target rate is about 0.531 at ε = 0.
        assert_eq!(r_star(4, 0.1, 0.0), 2);
        assert_eq!(capacity_profile(4, 0.1), Some(1));
        for m in 4..40 {
            let r = capacity_profile(m, 0.1).unwrap();
            assert!(dim_le_f64(m, r) / 2f64.powi(m as i32) < 1.0 - binary_entropy(0.1));
            assert!(r_star(m, 0.1, 0.05) >= r);
        }
    }

    #[test]
    fn recurrence_degenerate_cases() {
        let t = recurrence_propagate(0.05, 0.0, 20).unwrap();
        assert!(t.bounds.iter().flatten().all(|&b| b == 0.0));
        // with ε = 0 the step is additive and capped by Pascal growth
        let t = recurrence_propagate(0.0, 0.1, 20).unwrap();
        for m in 5..=20 {
            for r in 0..=m {
                let pascal =
                    t.bound(m - 1, r.min(m - 1)) + if r > 0 { t.bound(m - 1, r - 1) } else { 0.0 };
                assert!(t.bound(m, r) <= pascal + 1e-9 || r == m);
            }
        }
    }

    #[test]
    fn recurrence_bounds_dominate_exact_base_and_grow_in_r() {
        let t = recurrence_propagate(0.05, 0.1, 30).unwrap();
        for m in 4..=30 {
            for r in 1..=m {
                assert!(t.bound(m, r) + 1e-9 >= t.bound(m, r - 1));
                assert!(t.bound(m, r) <= dim_le_f64(m, r) + 1e-9);
            }
        }
    }

    #[test]
    fn mc_matches_exact_and_is_deterministic() {
        let exact = layer_entropies(2, 0.1).unwrap().f[1];
        let a = mc_layer_entropy(2, 1, 0.1, 20_000, 9).unwrap();
        let b = mc_layer_entropy(2, 1, 0.1, 20_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(
            (a.estimate - exact).abs() <= 3.0 * a.stderr + 1e-3,
            "{a:?} vs {exact}"
        );
        let z = mc_layer_entropy(3, 1, 0.0, 1000, 1).unwrap();
        assert_eq!(z.estimate, 0.0);
        assert!(mc_layer_entropy(15, 1, 0.1, 1000, 1).is_err());
        assert!(mc_layer_entropy(3, 1, 0.1, 999, 1).is_err());
    }
}
