//! Exact distributions over F_2^k and the information measures built on them.
//!
//! All logarithms are base 2. Probabilities at or below `1e-15` contribute
//! nothing to entropy sums. Sums run in fixed index order with compensated
//! accumulation, so every result is reproducible bit-for-bit.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::f2::{BitVector, Subspace};
use crate::numeric::{compensated_sum, plogp, CompensatedSum, ZERO_PROB};

/// Largest `k` for a single dense table.
pub const MAX_K: usize = 20;
/// Largest `ka + kb` for a joint table.
pub const MAX_JOINT_BITS: usize = 24;
/// Convolutions with `k` above this use the Walsh-Hadamard transform.
pub const DIRECT_CONVOLUTION_MAX_K: usize = 10;

const SUM_TOLERANCE: f64 = 1e-12;

fn validate(probs: &[f64]) -> Result<()> {
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
    {
        return Err(Error::InvalidDistribution(format!(
            "entry {i} is {p}, expected a finite nonnegative number"
        )));
    }
    let total = compensated_sum(probs.iter().copied());
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    Ok(())
}

fn entropy_of(probs: &[f64]) -> f64 {
    compensated_sum(probs.iter().map(|&p| plogp(p)))
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// In-place unnormalised Walsh-Hadamard transform; length must be a power of two.
pub fn fwht(a: &mut [f64]) {
    let n = a.len();
    assert!(n.is_power_of_two(), "fwht needs a power-of-two length");
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (a[i], a[i + h]);
                a[i] = x + y;
                a[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// A probability table over F_2^k, indexed by the integer whose bit `i` is
/// coordinate `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDistribution {
    k: usize,
    probs: Vec<f64>,
}

impl DenseDistribution {
    pub fn new(k: usize, probs: Vec<f64>) -> Result<Self> {
        if k > MAX_K {
            return Err(Error::guard("distribution bits k", MAX_K, k));
        }
        if probs.len() != 1 << k {
            return Err(Error::DimensionMismatch {
                expected: 1 << k,
                found: probs.len(),
            });
        }
        validate(&probs)?;
        Ok(Self { k, probs })
    }

    /// Builds from unnormalised nonnegative weights.
    pub fn from_weights(k: usize, weights: Vec<f64>) -> Result<Self> {
        let total = compensated_sum(weights.iter().copied());
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(k, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn point_mass(k: usize, x: usize) -> Self {
        let mut probs = vec![0.0; 1 << k];
        probs[x] = 1.0;
        Self { k, probs }
    }

    pub fn uniform(k: usize) -> Self {
        let n = 1usize << k;
        Self {
            k,
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Uniform distribution on a subspace, written `U_G`.
    pub fn uniform_on(g: &Subspace) -> Result<Self> {
        let k = g.ambient_dim();
        if k > MAX_K {
            return Err(Error::guard("distribution bits k", MAX_K, k));
        }
        let mut probs = vec![0.0; 1 << k];
        let w = 1.0 / (1u64 << g.dim()) as f64;
        for e in g.elements() {
            probs[e.to_u64().expect("k <= 20") as usize] = w;
        }
        Ok(Self { k, probs })
    }

    /// I.i.d. `Ber(delta)` coordinates.
    pub fn bernoulli_product(k: usize, delta: f64) -> Self {
        let probs = (0..1usize << k)
            .map(|x| {
                let w = x.count_ones() as i32;
                delta.powi(w) * (1.0 - delta).powi(k as i32 - w)
            })
            .collect();
        Self { k, probs }
    }

    /// A random distribution with a random support of random size and
    /// exponential weights on it.
    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        let n = 1usize << k;
        let size = rng.gen_range(1..=n);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        let mut w = vec![0.0; n];
        for &i in &idx[..size] {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            w[i] = -u.ln();
        }
        Self::from_weights(k, w).expect("positive weights")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    /// Distribution of `f(X)` for a map into F_2^{k_out}.
    pub fn pushforward(&self, k_out: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        if k_out > MAX_K {
            return Err(Error::guard("distribution bits k", MAX_K, k_out));
        }
        let mut acc = vec![CompensatedSum::new(); 1 << k_out];
        for (x, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                acc[f(x)].add(p);
            }
        }
        Ok(Self {
            k: k_out,
            probs: acc.iter().map(|a| a.value()).collect(),
        })
    }

    fn check_same_k(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: other.k,
            });
        }
        Ok(())
    }
}

/// Distribution of `X + Y` for independent `X ~ p`, `Y ~ q`.
pub fn convolve(p: &DenseDistribution, q: &DenseDistribution) -> Result<DenseDistribution> {
    p.check_same_k(q)?;
    if p.k <= DIRECT_CONVOLUTION_MAX_K {
        Ok(convolve_direct(p, q))
    } else {
        Ok(convolve_wht(p, q))
    }
}

fn convolve_direct(p: &DenseDistribution, q: &DenseDistribution) -> DenseDistribution {
    let n = p.probs.len();
    let mut out = vec![CompensatedSum::new(); n];
    for (x, &px) in p.probs.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &qy) in q.probs.iter().enumerate() {
            if qy != 0.0 {
                out[x ^ y].add(px * qy);
            }
        }
    }
    DenseDistribution {
        k: p.k,
        probs: out.iter().map(|a| a.value()).collect(),
    }
}

fn convolve_wht(p: &DenseDistribution, q: &DenseDistribution) -> DenseDistribution {
    let mut a = p.probs.clone();
    let mut b = q.probs.clone();
    fwht(&mut a);
    fwht(&mut b);
    let mut c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    fwht(&mut c);
    let n = c.len() as f64;
    DenseDistribution {
        k: p.k,
        probs: c.into_iter().map(|v| (v / n).max(0.0)).collect(),
    }
}

/// Both convolution paths, exposed for cross-checking.
pub fn convolve_with(
    p: &DenseDistribution,
    q: &DenseDistribution,
    use_transform: bool,
) -> Result<DenseDistribution> {
    p.check_same_k(q)?;
    Ok(if use_transform {
        convolve_wht(p, q)
    } else {
        convolve_direct(p, q)
    })
}

/// `d(X,Y) = H(X'+Y') - (H(X) + H(Y)) / 2`.
pub fn ruzsa_dist(p: &DenseDistribution, q: &DenseDistribution) -> Result<f64> {
    let s = convolve(p, q)?;
    Ok(s.entropy() - 0.5 * (p.entropy() + q.entropy()))
}

/// Joint law of `(X, Y)` with `X ∈ F_2^{ka}`, `Y ∈ F_2^{kb}`; entry
/// `y * 2^ka + x` holds `P(X = x, Y = y)`. The second component is the one
/// conditioned on.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    ka: usize,
    kb: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(ka: usize, kb: usize, probs: Vec<f64>) -> Result<Self> {
        if ka + kb > MAX_JOINT_BITS {
            return Err(Error::guard(
                "joint distribution bits",
                MAX_JOINT_BITS,
                ka + kb,
            ));
        }
        if probs.len() != 1 << (ka + kb) {
            return Err(Error::DimensionMismatch {
                expected: 1 << (ka + kb),
                found: probs.len(),
            });
        }
        validate(&probs)?;
        Ok(Self { ka, kb, probs })
    }

    /// `(X, Y)` independent with the given marginals.
    pub fn independent(x: &DenseDistribution, y: &DenseDistribution) -> Self {
        let mut probs = Vec::with_capacity(1 << (x.k + y.k));
        for &py in &y.probs {
            for &px in &x.probs {
                probs.push(px * py);
            }
        }
        Self {
            ka: x.k,
            kb: y.k,
            probs,
        }
    }

    /// `X` paired with a constant (zero-bit) second component.
    pub fn unconditioned(x: &DenseDistribution) -> Self {
        Self {
            ka: x.k,
            kb: 0,
            probs: x.probs.clone(),
        }
    }

    pub fn random<R: Rng + ?Sized>(ka: usize, kb: usize, rng: &mut R) -> Self {
        let d = DenseDistribution::random(ka + kb, rng);
        Self {
            ka,
            kb,
            probs: d.probs,
        }
    }

    pub fn ka(&self) -> usize {
        self.ka
    }

    pub fn kb(&self) -> usize {
        self.kb
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[(y << self.ka) | x]
    }

    /// The joint table viewed as a single distribution on `(x, y)`.
    pub fn as_dense(&self) -> DenseDistribution {
        DenseDistribution {
            k: self.ka + self.kb,
            probs: self.probs.clone(),
        }
    }

    pub fn marginal_x(&self) -> DenseDistribution {
        let mut acc = vec![CompensatedSum::new(); 1 << self.ka];
        for (i, &p) in self.probs.iter().enumerate() {
            acc[i & ((1 << self.ka) - 1)].add(p);
        }
        DenseDistribution {
            k: self.ka,
            probs: acc.iter().map(|a| a.value()).collect(),
        }
    }

    pub fn marginal_y(&self) -> DenseDistribution {
        let w = 1usize << self.ka;
        let probs = self
            .probs
            .chunks(w)
            .map(|c| compensated_sum(c.iter().copied()))
            .collect();
        DenseDistribution { k: self.kb, probs }
    }

    /// The conditional law of `X` given `Y = y` with its weight `P(Y = y)`,
    /// or `None` when `P(Y = y)` is negligible.
    pub fn slice(&self, y: usize) -> Option<(f64, DenseDistribution)> {
        let w = 1usize << self.ka;
        let row = &self.probs[y * w..(y + 1) * w];
        let py = compensated_sum(row.iter().copied());
        if py <= ZERO_PROB {
            return None;
        }
        Some((
            py,
            DenseDistribution {
                k: self.ka,
                probs: row.iter().map(|p| p / py).collect(),
            },
        ))
    }

    /// All non-negligible slices in increasing `y`.
    pub fn slices(&self) -> Vec<(f64, DenseDistribution)> {
        (0..1usize << self.kb)
            .filter_map(|y| self.slice(y))
            .collect()
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    /// `H(X | Y) = H(X, Y) - H(Y)`.
    pub fn cond_entropy(&self) -> f64 {
        self.joint_entropy() - self.marginal_y().entropy()
    }

    /// `-Σ p(x, y) log2 p(x | y)`, computed slice by slice.
    pub fn cond_entropy_direct(&self) -> f64 {
        let w = 1usize << self.ka;
        let mut acc = CompensatedSum::new();
        for row in self.probs.chunks(w) {
            let py = compensated_sum(row.iter().copied());
            if py <= ZERO_PROB {
                continue;
            }
            for &p in row {
                if p > ZERO_PROB {
                    acc.add(-p * (p / py).log2());
                }
            }
        }
        acc.value()
    }

    /// `I(X; Y) = H(X) - H(X | Y)`.
    pub fn mutual_info(&self) -> f64 {
        self.marginal_x().entropy() - self.cond_entropy()
    }

    /// `E_y [1 - max_x P(x | y)]`, the error of the MAP guess of `X` from `Y`.
    pub fn ml_error(&self) -> f64 {
        let w = 1usize << self.ka;
        compensated_sum(self.probs.chunks(w).map(|row| {
            let total = compensated_sum(row.iter().copied());
            let best = row.iter().copied().fold(0.0, f64::max);
            total - best
        }))
    }

    /// `Z = Σ_y sqrt(P(y | 0) P(y | 1))` for a uniform bit `X`.
    pub fn bhattacharyya(&self) -> Result<f64> {
        if self.ka != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.ka,
            });
        }
        let p1 = self.marginal_x().probs[1];
        if (p1 - 0.5).abs() > 1e-9 {
            return Err(Error::NonUniformBit(p1));
        }
        Ok(2.0 * compensated_sum(self.probs.chunks(2).map(|c| (c[0] * c[1]).sqrt())))
    }
}

/// Law of `(X, Y, Z)`; entry `(z << (kx + ky)) | (y << kx) | x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleDistribution {
    kx: usize,
    ky: usize,
    kz: usize,
    probs: Vec<f64>,
}

impl TripleDistribution {
    pub fn new(kx: usize, ky: usize, kz: usize, probs: Vec<f64>) -> Result<Self> {
        let total = kx + ky + kz;
        if total > MAX_JOINT_BITS {
            return Err(Error::guard(
                "joint distribution bits",
                MAX_JOINT_BITS,
                total,
            ));
        }
        if probs.len() != 1 << total {
            return Err(Error::DimensionMismatch {
                expected: 1 << total,
                found: probs.len(),
            });
        }
        validate(&probs)?;
        Ok(Self { kx, ky, kz, probs })
    }

    pub fn random<R: Rng + ?Sized>(kx: usize, ky: usize, kz: usize, rng: &mut R) -> Self {
        let d = DenseDistribution::random(kx + ky + kz, rng);
        Self {
            kx,
            ky,
            kz,
            probs: d.probs,
        }
    }

    /// `(X, Z)` as a joint conditioned on `Z`.
    pub fn xz(&self) -> JointDistribution {
        self.project(self.kx, |x, _, z| (z << self.kx) | x)
    }

    pub fn yz(&self) -> JointDistribution {
        self.project(self.ky, |_, y, z| (z << self.ky) | y)
    }

    /// `((X, Y), Z)`.
    pub fn xy_z(&self) -> JointDistribution {
        JointDistribution {
            ka: self.kx + self.ky,
            kb: self.kz,
            probs: self.probs.clone(),
        }
    }

    fn project(&self, ka: usize, f: impl Fn(usize, usize, usize) -> usize) -> JointDistribution {
        let mut acc = vec![CompensatedSum::new(); 1 << (ka + self.kz)];
        let mx = (1 << self.kx) - 1;
        let my = (1 << self.ky) - 1;
        for (i, &p) in self.probs.iter().enumerate() {
            let x = i & mx;
            let y = (i >> self.kx) & my;
            let z = i >> (self.kx + self.ky);
            acc[f(x, y, z)].add(p);
        }
        JointDistribution {
            ka,
            kb: self.kz,
            probs: acc.iter().map(|a| a.value()).collect(),
        }
    }

    /// `I(X; Y | Z) = H(X|Z) + H(Y|Z) - H(X,Y|Z)`.
    pub fn cond_mutual_info(&self) -> f64 {
        self.xz().cond_entropy() + self.yz().cond_entropy() - self.xy_z().cond_entropy()
    }
}

/// WHT spectra of the non-negligible slices of a joint, with their weights.
fn slice_spectra(j: &JointDistribution) -> Vec<(f64, Vec<f64>)> {
    j.slices()
        .into_iter()
        .map(|(w, d)| {
            let mut s = d.probs;
            fwht(&mut s);
            (w, s)
        })
        .collect()
}

fn entropy_of_product(a: &[f64], b: &[f64], buf: &mut [f64]) -> f64 {
    for ((o, x), y) in buf.iter_mut().zip(a).zip(b) {
        *o = x * y;
    }
    fwht(buf);
    let n = buf.len() as f64;
    compensated_sum(buf.iter().map(|&v| plogp((v / n).max(0.0))))
}

/// `H(X' + Y' | A', B')` for independent copies. Outer slices are processed
/// in parallel; partial sums are combined in slice order.
pub(crate) fn expected_pair_sum_entropy(jxa: &JointDistribution, jyb: &JointDistribution) -> f64 {
    let sx = slice_spectra(jxa);
    let sy = slice_spectra(jyb);
    let width = 1usize << jxa.ka;
    let partial: Vec<f64> = sx
        .par_iter()
        .map(|(wa, a)| {
            let mut buf = vec![0.0; width];
            let mut acc = CompensatedSum::new();
            for (wb, b) in &sy {
                acc.add(wb * entropy_of_product(a, b, &mut buf));
            }
            wa * acc.value()
        })
        .collect();
    compensated_sum(partial)
}

/// `d(X|A, Y|B) = H(X'+Y' | A', B') - (H(X|A) + H(Y|B)) / 2` for independent
/// copies, evaluated slice by slice over `(a, b)`.
pub fn cond_ruzsa_dist(jxa: &JointDistribution, jyb: &JointDistribution) -> Result<f64> {
    if jxa.ka != jyb.ka {
        return Err(Error::DimensionMismatch {
            expected: jxa.ka,
            found: jyb.ka,
        });
    }
    let sum = expected_pair_sum_entropy(jxa, jyb);
    Ok(sum - 0.5 * (jxa.cond_entropy() + jyb.cond_entropy()))
}

/// `d(X, Y|B)` with `X` unconditioned.
pub fn ruzsa_dist_mixed(x: &DenseDistribution, jyb: &JointDistribution) -> Result<f64> {
    cond_ruzsa_dist(&JointDistribution::unconditioned(x), jyb)
}

/// `E_a d(X | A = a, Y | B)`, which equals [`cond_ruzsa_dist`].
pub fn cond_ruzsa_dist_averaged(jxa: &JointDistribution, jyb: &JointDistribution) -> Result<f64> {
    if jxa.ka != jyb.ka {
        return Err(Error::DimensionMismatch {
            expected: jxa.ka,
            found: jyb.ka,
        });
    }
    let mut acc = CompensatedSum::new();
    for (w, xa) in jxa.slices() {
        acc.add(w * ruzsa_dist_mixed(&xa, jyb)?);
    }
    Ok(acc.value())
}

/// Coordinates of a vector as an index into a dense table.
pub fn index_of(v: &BitVector) -> usize {
    v.to_u64().expect("vector too long for a dense index") as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::enumerate_subspaces;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::{any, prop_assert, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(DenseDistribution::point_mass(3, 5).entropy(), 0.0);
        assert_abs_diff_eq!(
            DenseDistribution::uniform(3).entropy(),
            3.0,
            epsilon = 1e-12
        );
        let b = DenseDistribution::bernoulli_product(2, 0.1);
        assert_abs_diff_eq!(b.entropy(), 2.0 * binary_entropy(0.1), epsilon = 1e-12);
        assert_abs_diff_eq!(b.entropy(), 0.937_991_7, epsilon = 1e-6);
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(
            DenseDistribution::new(1, vec![0.5, 0.6]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            DenseDistribution::new(2, vec![0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            DenseDistribution::new(21, vec![]),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(DenseDistribution::new(1, vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn cond_entropy_examples() {
        let x = DenseDistribution::random(2, &mut rng(1));
        let y = DenseDistribution::random(2, &mut rng(2));
        let j = JointDistribution::independent(&x, &y);
        assert_abs_diff_eq!(j.cond_entropy(), x.entropy(), epsilon = 1e-12);
        // X = Y
        let mut probs = vec![0.0; 16];
        for v in 0..4 {
            probs[(v << 2) | v] = x.prob(v);
        }
        let same = JointDistribution::new(2, 2, probs).unwrap();
        assert_abs_diff_eq!(same.cond_entropy(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(same.mutual_info(), x.entropy(), epsilon = 1e-12);
    }

    #[test]
    fn mutual_info_of_copy_of_uniform() {
        let mut probs = vec![0.0; 16];
        for v in 0..4 {
            probs[(v << 2) | v] = 0.25;
        }
        let j = JointDistribution::new(2, 2, probs).unwrap();
        assert_abs_diff_eq!(j.mutual_info(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cond_entropy_formulas_agree() {
        let mut r = rng(3);
        for _ in 0..200 {
            let j = JointDistribution::random(2, 2, &mut r);
            assert_abs_diff_eq!(j.cond_entropy(), j.cond_entropy_direct(), epsilon = 1e-12);
            // chain rule
            assert_abs_diff_eq!(
                j.joint_entropy(),
                j.marginal_y().entropy() + j.cond_entropy(),
                epsilon = 1e-12
            );
            assert!(j.cond_entropy() <= j.marginal_x().entropy() + 1e-12);
            assert!(j.cond_entropy() >= -1e-12);
        }
    }

    #[test]
    fn cond_mutual_info_nonnegative_and_chain_rule() {
        let mut r = rng(4);
        for _ in 0..200 {
            let t = TripleDistribution::random(1, 2, 2, &mut r);
            let i = t.cond_mutual_info();
            assert!(i >= -1e-12);
            // I(X;Y|Z) = H(X|Z) - H(X|Y,Z)
            let h_x_given_yz = {
                let j = JointDistribution {
                    ka: 1,
                    kb: 4,
                    probs: t.probs.clone(),
                };
                j.cond_entropy()
            };
            assert_abs_diff_eq!(i, t.xz().cond_entropy() - h_x_given_yz, epsilon = 1e-12);
        }
    }

    #[test]
    fn convolution_examples() {
        let mut r = rng(5);
        let p = DenseDistribution::random(3, &mut r);
        let id = convolve(&p, &DenseDistribution::point_mass(3, 0)).unwrap();
        for x in 0..8 {
            assert_abs_diff_eq!(id.prob(x), p.prob(x), epsilon = 1e-15);
        }
        let g = Subspace::span(3, &[BitVector::from_bits(&[1, 1, 0])]).unwrap();
        let ug = DenseDistribution::uniform_on(&g).unwrap();
        let s = convolve(&ug, &ug).unwrap();
        for x in 0..8 {
            assert_abs_diff_eq!(s.prob(x), ug.prob(x), epsilon = 1e-15);
        }
        let b = DenseDistribution::bernoulli_product(1, 0.1);
        let bb = convolve(&b, &b).unwrap();
        assert_abs_diff_eq!(bb.prob(1), 0.18, epsilon = 1e-15);
    }

    #[test]
    fn convolution_paths_agree() {
        let mut r = rng(6);
        for k in [1, 4, 8, 11] {
            let p = DenseDistribution::random(k, &mut r);
            let q = DenseDistribution::random(k, &mut r);
            let a = convolve_with(&p, &q, false).unwrap();
            let b = convolve_with(&p, &q, true).unwrap();
            for x in 0..1 << k {
                assert_abs_diff_eq!(a.prob(x), b.prob(x), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn convolution_dimension_mismatch() {
        let p = DenseDistribution::uniform(2);
        let q = DenseDistribution::uniform(3);
        assert!(matches!(
            convolve(&p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ruzsa_dist(&p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ruzsa_subspace_examples() {
        let e1 = Subspace::span(2, &[BitVector::unit(2, 0)]).unwrap();
        let e2 = Subspace::span(2, &[BitVector::unit(2, 1)]).unwrap();
        let u1 = DenseDistribution::uniform_on(&e1).unwrap();
        let u2 = DenseDistribution::uniform_on(&e2).unwrap();
        assert_abs_diff_eq!(ruzsa_dist(&u1, &u1).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ruzsa_dist(&u1, &u2).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ruzsa_half_subspace_distance_exhaustive_d3() {
        let subs = enumerate_subspaces(3).unwrap();
        for g in &subs {
            let ug = DenseDistribution::uniform_on(g).unwrap();
            for h in &subs {
                let uh = DenseDistribution::uniform_on(h).unwrap();
                let d = ruzsa_dist(&ug, &uh).unwrap();
                assert_abs_diff_eq!(d, 0.5 * g.dist(h).unwrap() as f64, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn ruzsa_triangle_and_entropy_gap() {
        let mut r = rng(7);
        for _ in 0..1000 {
            let k = r.gen_range(1..=4);
            let x = DenseDistribution::random(k, &mut r);
            let y = DenseDistribution::random(k, &mut r);
            let z = DenseDistribution::random(k, &mut r);
            let dxy = ruzsa_dist(&x, &y).unwrap();
            let dxz = ruzsa_dist(&x, &z).unwrap();
            let dzy = ruzsa_dist(&z, &y).unwrap();
            assert!(dxy <= dxz + dzy + 1e-10);
            assert!(dxy + 1e-10 >= 0.5 * (x.entropy() - y.entropy()).abs());
            let s = convolve(&x, &y).unwrap().entropy();
            assert!(s + 1e-10 >= x.entropy().max(y.entropy()));
        }
    }

    #[test]
    fn cond_ruzsa_degenerate_conditioning() {
        let mut r = rng(8);
        for _ in 0..50 {
            let x = DenseDistribution::random(3, &mut r);
            let y = DenseDistribution::random(3, &mut r);
            let a = JointDistribution::unconditioned(&x);
            let b = JointDistribution::independent(&y, &DenseDistribution::point_mass(2, 3));
            assert_abs_diff_eq!(
                cond_ruzsa_dist(&a, &b).unwrap(),
                ruzsa_dist(&x, &y).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    /// Oracle: materialise the 4-way joint of (X, A, Y, B), push forward to
    /// (X + Y, A, B) and take the conditional entropy from the table.
    fn cond_ruzsa_table(jxa: &JointDistribution, jyb: &JointDistribution) -> f64 {
        let (k, ka, kb) = (jxa.ka, jxa.kb, jyb.kb);
        let mut out = vec![0.0; 1 << (k + ka + kb)];
        for a in 0..1 << ka {
            for x in 0..1 << k {
                let pxa = jxa.prob(x, a);
                for b in 0..1 << kb {
                    for y in 0..1 << k {
                        let idx = ((b << ka | a) << k) | (x ^ y);
                        out[idx] += pxa * jyb.prob(y, b);
                    }
                }
            }
        }
        let sum = JointDistribution {
            ka: k,
            kb: ka + kb,
            probs: out,
        };
        sum.cond_entropy() - 0.5 * (jxa.cond_entropy() + jyb.cond_entropy())
    }

    #[test]
    fn cond_ruzsa_matches_table_and_averaged_forms() {
        let mut r = rng(9);
        for _ in 0..200 {
            let jxa = JointDistribution::random(2, 2, &mut r);
            let jyb = JointDistribution::random(2, 1, &mut r);
            let d = cond_ruzsa_dist(&jxa, &jyb).unwrap();
            assert_abs_diff_eq!(d, cond_ruzsa_table(&jxa, &jyb), epsilon = 1e-12);
            assert_abs_diff_eq!(
                d,
                cond_ruzsa_dist_averaged(&jxa, &jyb).unwrap(),
                epsilon = 1e-12
            );
            assert!(d >= -1e-12);
        }
    }

    #[test]
    fn cond_ruzsa_self_conditioning() {
        // A = X: each slice is a point mass.
        let mut r = rng(10);
        let x = DenseDistribution::random(2, &mut r);
        let mut probs = vec![0.0; 16];
        for v in 0..4 {
            probs[(v << 2) | v] = x.prob(v);
        }
        let jxa = JointDistribution::new(2, 2, probs).unwrap();
        let jyb = JointDistribution::random(2, 2, &mut r);
        assert_abs_diff_eq!(
            cond_ruzsa_dist(&jxa, &jyb).unwrap(),
            cond_ruzsa_table(&jxa, &jyb),
            epsilon = 1e-12
        );
    }

    fn bit_channel(delta: f64) -> JointDistribution {
        // xi uniform, nu = xi + Ber(delta); first component xi.
        let probs = vec![
            0.5 * (1.0 - delta),
            0.5 * delta,
            0.5 * delta,
            0.5 * (1.0 - delta),
        ];
        JointDistribution::new(1, 1, probs).unwrap()
    }

    #[test]
    fn bhattacharyya_examples() {
        let indep = JointDistribution::independent(
            &DenseDistribution::uniform(1),
            &DenseDistribution::random(2, &mut rng(11)),
        );
        assert_abs_diff_eq!(indep.bhattacharyya().unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            bit_channel(0.0).bhattacharyya().unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            bit_channel(0.1).bhattacharyya().unwrap(),
            0.6,
            epsilon = 1e-12
        );
        let skew = JointDistribution::new(1, 0, vec![0.7, 0.3]).unwrap();
        assert!(matches!(skew.bhattacharyya(), Err(Error::NonUniformBit(_))));
    }

    #[test]
    fn bhattacharyya_dominates_entropy() {
        let mut r = rng(12);
        for _ in 0..500 {
            let kb = r.gen_range(0..=3);
            // force a uniform first bit by symmetrising a random table
            let half = DenseDistribution::random(kb, &mut r);
            let other = DenseDistribution::random(kb, &mut r);
            let mut probs = vec![0.0; 2 << kb];
            for y in 0..1 << kb {
                probs[y << 1] = 0.5 * half.prob(y);
                probs[(y << 1) | 1] = 0.5 * other.prob(y);
            }
            let j = JointDistribution::new(1, kb, probs).unwrap();
            let z = j.bhattacharyya().unwrap();
            let h = j.cond_entropy();
            assert!((0.0..=1.0 + 1e-12).contains(&z));
            assert!(z + 1e-12 >= h);
            assert!(1.0 - z * z + 1e-12 >= (1.0 - h) * (1.0 - h));
        }
    }

    #[test]
    fn ml_error_examples_and_bound() {
        let det = bit_channel(0.0);
        assert_abs_diff_eq!(det.ml_error(), 0.0, epsilon = 1e-15);
        let indep = JointDistribution::independent(
            &DenseDistribution::uniform(1),
            &DenseDistribution::uniform(2),
        );
        assert_abs_diff_eq!(indep.ml_error(), 0.5, epsilon = 1e-15);
        let mut r = rng(13);
        for _ in 0..1000 {
            let j = JointDistribution::random(r.gen_range(1..=3), r.gen_range(0..=3), &mut r);
            assert!(j.ml_error() <= j.cond_entropy() + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn entropy_within_bounds(seed in any::<u64>(), k in 0usize..6) {
            let p = DenseDistribution::random(k, &mut rng(seed));
            let h = p.entropy();
            prop_assert!(h >= -1e-12 && h <= k as f64 + 1e-12);
        }

        #[test]
        fn ruzsa_nonnegative(seed in any::<u64>(), k in 1usize..5) {
            let mut r = rng(seed);
            let p = DenseDistribution::random(k, &mut r);
            let q = DenseDistribution::random(k, &mut r);
            prop_assert!(ruzsa_dist(&p, &q).unwrap() >= -1e-12);
        }
    }
}
