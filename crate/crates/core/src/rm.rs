//! Reed-Muller codes: monomial orders, evaluation and coefficient maps,
//! generator matrices and their recursive block structure.
//!
//! Two orderings of the `2^m` monomials coexist:
//!
//! - **degree-lex**: increasing degree, lexicographic on the ascending
//!   element list within a degree. Generator-matrix columns use this order.
//! - **bin-weight**: monomial `x_S` sits at index `mask(S)`, i.e. the index
//!   whose binary expansion (least significant bit = `x_1`) is the indicator
//!   of `S`. Evaluation points and the coefficient vectors fed to
//!   [`full_transform`] use this order.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::f2::{BitMatrix, BitVector};
use crate::numeric::binomial;

/// Largest `m` accepted by the order and matrix builders.
pub const MAX_M: usize = 24;
/// Largest code dimension for which the codebook may be enumerated.
pub const MAX_ENUM_K: usize = 20;

/// A subset of `[m]`, bit `j` standing for variable `x_{j+1}`.
pub type SetMask = u32;

/// Elements of a set in ascending 1-based form.
pub fn set_elements(mask: SetMask) -> Vec<usize> {
    (0..32)
        .filter(|j| mask >> j & 1 == 1)
        .map(|j| j + 1)
        .collect()
}

pub fn set_from_elements(elements: &[usize]) -> SetMask {
    elements.iter().fold(0, |acc, &e| {
        assert!((1..=32).contains(&e), "variable index {e} out of range");
        acc | 1 << (e - 1)
    })
}

/// Human-readable monomial: `1`, `x1`, `x1x3`, ...
pub fn monomial_name(mask: SetMask) -> String {
    if mask == 0 {
        return "1".to_string();
    }
    set_elements(mask).iter().map(|e| format!("x{e}")).collect()
}

/// `sum_{i<=r} C(m, i)`.
pub fn dim_le(m: usize, r: usize) -> usize {
    (0..=r.min(m)).map(|i| binomial(m, i) as usize).sum()
}

/// `C(m, r)` as a `usize`.
pub fn layer_size(m: usize, r: usize) -> usize {
    binomial(m, r) as usize
}

/// Degree-lex comparison: cardinality first, then the ascending element
/// lists lexicographically (`{1,2} < {1,3}`, `{1,5} < {2,3}`).
pub fn degree_lex_cmp(a: SetMask, b: SetMask) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| {
        // The lowest differing element decides: whoever owns it is smaller.
        let diff = a ^ b;
        if diff == 0 {
            Ordering::Equal
        } else if a & (diff & diff.wrapping_neg()) != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    })
}

/// All subsets of `[m]` in degree-lex order; position 0 is the empty set.
pub fn monomial_order(m: usize) -> Vec<SetMask> {
    assert!(m <= MAX_M, "m = {m} exceeds {MAX_M}");
    let mut all: Vec<SetMask> = (0..1u32 << m).collect();
    all.sort_by(|&a, &b| degree_lex_cmp(a, b));
    all
}

/// Bin-weight indices of the degree-`r` monomials, ascending.
pub fn layer_indices(m: usize, r: usize) -> Vec<usize> {
    (0..1usize << m)
        .filter(|i| i.count_ones() as usize == r)
        .collect()
}

/// The total order on sets used for successive decoding: smaller sets are
/// greater; equal-size sets compare their elements from largest down, and the
/// first larger element wins.
pub fn set_total_order_cmp(a: SetMask, b: SetMask) -> Ordering {
    match b.count_ones().cmp(&a.count_ones()) {
        Ordering::Equal => {
            let diff = a ^ b;
            if diff == 0 {
                Ordering::Equal
            } else {
                let top = 31 - diff.leading_zeros();
                if a >> top & 1 == 1 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        }
        o => o,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetRelation {
    /// `A ≻ B` (includes `A = B`).
    Succeeds,
    /// `B ≻ A` and `A ≠ B`.
    Precedes,
    Incomparable,
}

/// `A ≻ B` iff `|A| <= |B|` and the k-th largest element of `A` is at least
/// the k-th largest element of `B` for every `k <= |A|`.
pub fn succeeds(a: SetMask, b: SetMask) -> bool {
    if a.count_ones() > b.count_ones() {
        return false;
    }
    let mut ea = set_elements(a);
    let mut eb = set_elements(b);
    ea.reverse();
    eb.reverse();
    ea.iter().zip(&eb).all(|(x, y)| x >= y)
}

pub fn set_partial_order(a: SetMask, b: SetMask) -> SetRelation {
    if succeeds(a, b) {
        SetRelation::Succeeds
    } else if succeeds(b, a) {
        SetRelation::Precedes
    } else {
        SetRelation::Incomparable
    }
}

/// Bijection between subsets of `[m]` and degree-lex positions.
#[derive(Debug, Clone)]
pub struct MonomialIndexer {
    m: usize,
    order: Vec<SetMask>,
    position: Vec<usize>,
}

impl MonomialIndexer {
    pub fn new(m: usize) -> Self {
        let order = monomial_order(m);
        let mut position = vec![0; order.len()];
        for (p, &s) in order.iter().enumerate() {
            position[s as usize] = p;
        }
        Self { m, order, position }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Monomial at degree-lex position `p`.
    pub fn set_at(&self, p: usize) -> SetMask {
        self.order[p]
    }

    /// Degree-lex position of a monomial.
    pub fn position_of(&self, s: SetMask) -> usize {
        self.position[s as usize]
    }

    pub fn order(&self) -> &[SetMask] {
        &self.order
    }

    /// Reorders a degree-lex indexed vector into bin-weight indexing.
    pub fn deg_lex_to_bin_weight(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.order.len());
        let mut out = BitVector::zeros(v.len());
        for p in v.iter_ones() {
            out.set(self.order[p] as usize, true);
        }
        out
    }

    pub fn bin_weight_to_deg_lex(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.order.len());
        let mut out = BitVector::zeros(v.len());
        for s in v.iter_ones() {
            out.set(self.position[s], true);
        }
        out
    }
}

/// Evaluation vector of `x_S`: entry `i` is 1 iff `S ⊆ mask(i)`.
pub fn eval_monomial(m: usize, s: SetMask) -> BitVector {
    let n = 1usize << m;
    let mut v = BitVector::zeros(n);
    for i in 0..n {
        if i as SetMask & s == s {
            v.set(i, true);
        }
    }
    v
}

/// Evaluates the polynomial with degree-lex indexed coefficients at every
/// point of the hypercube.
pub fn eval_poly(m: usize, coeffs: &BitVector) -> BitVector {
    let idx = MonomialIndexer::new(m);
    full_transform(m, &idx.deg_lex_to_bin_weight(coeffs))
}

/// `G_full · v` in bin-weight indexing, via the subset-sum butterfly. The map
/// sends coefficients to evaluations and, being an involution, back again.
pub fn full_transform(m: usize, v: &BitVector) -> BitVector {
    let n = 1usize << m;
    assert_eq!(v.len(), n, "full_transform needs a vector of length 2^m");
    if n <= 64 {
        return BitVector::from_u64(n, full_transform_u64(m, v.to_u64().expect("fits")));
    }
    let mut words = v.words().to_vec();
    for w in words.iter_mut() {
        for (b, mask) in BUTTERFLY_MASKS.iter().enumerate() {
            *w ^= (*w & mask) << (1 << b);
        }
    }
    for b in 6..m {
        let h = 1usize << (b - 6);
        for i in 0..words.len() {
            if i & h != 0 {
                words[i] ^= words[i ^ h];
            }
        }
    }
    BitVector::from_words(n, words)
}

/// [`full_transform`] on a packed vector, `m <= 6`.
#[inline]
pub fn full_transform_u64(m: usize, mut x: u64) -> u64 {
    debug_assert!(m <= 6);
    for (b, mask) in BUTTERFLY_MASKS.iter().enumerate().take(m) {
        x ^= (x & mask) << (1 << b);
    }
    x
}

/// Entry `b` has bit `i` set iff bit `b` of `i` is clear.
const BUTTERFLY_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// `[[1,0],[1,1]]^{⊗m}`, rows and columns in bin-weight order.
pub fn full_matrix(m: usize) -> BitMatrix {
    let g1 = BitMatrix::from_bits(&[&[1, 0], &[1, 1]]);
    (0..m).fold(BitMatrix::identity(1), |acc, _| acc.kronecker(&g1))
}

/// `n × C(m,≤r)` generator matrix; columns are monomial evaluations in
/// degree-lex order.
pub fn generator_matrix(m: usize, r: usize) -> BitMatrix {
    assert!(r <= m, "degree r = {r} exceeds m = {m}");
    let idx = MonomialIndexer::new(m);
    let cols: Vec<BitVector> = idx.order()[..dim_le(m, r)]
        .iter()
        .map(|&s| eval_monomial(m, s))
        .collect();
    BitMatrix::from_columns(1 << m, &cols)
}

/// Column permutation of `G_r^{(m+1)}` that exposes the block recursion:
/// first the monomials free of `x_{m+1}` (degree-lex, i.e. the columns of
/// `G_r^{(m)}`), then `x_S x_{m+1}` for `S` running over the columns of
/// `G_{r-1}^{(m)}`. Entry `j` is the degree-lex column of `G_r^{(m+1)}` that
/// lands in position `j`.
pub fn recursion_column_permutation(m: usize, r: usize) -> Vec<usize> {
    assert!(r >= 1 && r <= m + 1);
    let big = MonomialIndexer::new(m + 1);
    let small = monomial_order(m);
    let top = 1 << m;
    let without = small[..dim_le(m, r)].iter().copied();
    let with = small[..dim_le(m, r - 1)].iter().map(|&s| s | top);
    without.chain(with).map(|s| big.position_of(s)).collect()
}

/// `[[G_r^{(m)}, 0], [G_r^{(m)}, G_{r-1}^{(m)}]]` built from the smaller
/// generator matrices.
pub fn recursion_block_matrix(m: usize, r: usize) -> BitMatrix {
    assert!(r >= 1 && r <= m);
    let gr = generator_matrix(m, r);
    let gr1 = generator_matrix(m, r - 1);
    let zero = BitMatrix::zeros(gr.num_rows(), gr1.num_cols());
    BitMatrix::block(&gr, &zero, &gr, &gr1)
}

/// A Reed-Muller code `RM(m, r)` with its degree-lex column order.
#[derive(Debug, Clone)]
pub struct RmCode {
    m: usize,
    r: usize,
    columns: Vec<SetMask>,
    generator: BitMatrix,
}

impl RmCode {
    pub fn new(m: usize, r: usize) -> Result<Self> {
        if m > MAX_M {
            return Err(Error::guard("m", MAX_M, m));
        }
        if r > m {
            return Err(Error::InvalidParameter(format!(
                "degree r = {r} must satisfy 0 <= r <= m = {m}"
            )));
        }
        let columns = monomial_order(m)[..dim_le(m, r)].to_vec();
        Ok(Self {
            m,
            r,
            columns,
            generator: generator_matrix(m, r),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Block length `2^m`.
    pub fn n(&self) -> usize {
        1 << self.m
    }

    /// Dimension `C(m, ≤r)`.
    pub fn k(&self) -> usize {
        self.columns.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    pub fn column_order(&self) -> &[SetMask] {
        &self.columns
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    /// `G u` for a message of length `k`.
    pub fn encode(&self, u: &BitVector) -> Result<BitVector> {
        if u.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: u.len(),
            });
        }
        Ok(self.generator.mul_vec(u))
    }

    /// Encodes the message whose bit `j` is `(index >> j) & 1`.
    pub fn encode_index(&self, index: u64) -> BitVector {
        let k = self.k();
        let mut c = BitVector::zeros(self.n());
        let gt = self.generator_columns();
        for (j, col) in gt.iter().enumerate().take(k) {
            if index >> j & 1 == 1 {
                c += col;
            }
        }
        c
    }

    fn generator_columns(&self) -> Vec<BitVector> {
        self.columns
            .iter()
            .map(|&s| eval_monomial(self.m, s))
            .collect()
    }

    /// Every codeword, indexed by message integer (see [`Self::encode_index`]).
    pub fn codewords(&self) -> Result<Vec<BitVector>> {
        if self.k() > MAX_ENUM_K {
            return Err(Error::guard("code dimension k", MAX_ENUM_K, self.k()));
        }
        let cols = self.generator_columns();
        let total = 1usize << self.k();
        let mut out = Vec::with_capacity(total);
        out.push(BitVector::zeros(self.n()));
        for col in &cols {
            let extra: Vec<BitVector> = out.iter().map(|c| c + col).collect();
            out.extend(extra);
        }
        Ok(out)
    }

    /// Codewords packed into `u64` words; requires `n <= 64`.
    pub fn codewords_u64(&self) -> Result<Vec<u64>> {
        if self.n() > 64 {
            return Err(Error::guard(
                "block length n for packed codebook",
                64,
                self.n(),
            ));
        }
        Ok(self
            .codewords()?
            .iter()
            .map(|c| c.to_u64().expect("n <= 64"))
            .collect())
    }
}

/// Minimum Hamming weight over nonzero codewords, by Gray-code enumeration.
pub fn min_distance_bruteforce(code: &RmCode) -> Result<usize> {
    let k = code.k();
    if k > MAX_ENUM_K {
        return Err(Error::guard("code dimension k", MAX_ENUM_K, k));
    }
    let cols = code.generator_columns();
    let mut c = BitVector::zeros(code.n());
    let mut best = usize::MAX;
    for step in 1u64..(1u64 << k) {
        c += &cols[step.trailing_zeros() as usize];
        best = best.min(c.weight());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert_eq, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orders_for_small_m() {
        assert_eq!(monomial_order(1), vec![0, 1]);
        assert_eq!(monomial_order(2), vec![0b00, 0b01, 0b10, 0b11]);
        let m3: Vec<String> = monomial_order(3).into_iter().map(monomial_name).collect();
        assert_eq!(
            m3,
            ["1", "x1", "x2", "x3", "x1x2", "x1x3", "x2x3", "x1x2x3"]
        );
    }

    #[test]
    fn lex_examples_within_degree() {
        let s = set_from_elements;
        assert_eq!(degree_lex_cmp(s(&[1, 2]), s(&[1, 3])), Ordering::Less);
        assert_eq!(degree_lex_cmp(s(&[1, 5]), s(&[2, 3])), Ordering::Less);
        let order = monomial_order(5);
        let p = |e: &[usize]| order.iter().position(|&x| x == s(e)).unwrap();
        assert!(p(&[1, 5]) < p(&[2, 3]));
    }

    #[test]
    fn displayed_g3_full() {
        let expected = BitMatrix::from_bits(&[
            &[1, 0, 0, 0, 0, 0, 0, 0],
            &[1, 1, 0, 0, 0, 0, 0, 0],
            &[1, 0, 1, 0, 0, 0, 0, 0],
            &[1, 1, 1, 0, 1, 0, 0, 0],
            &[1, 0, 0, 1, 0, 0, 0, 0],
            &[1, 1, 0, 1, 0, 1, 0, 0],
            &[1, 0, 1, 1, 0, 0, 1, 0],
            &[1, 1, 1, 1, 1, 1, 1, 1],
        ]);
        assert_eq!(generator_matrix(3, 3), expected);
    }

    #[test]
    fn g1_full() {
        assert_eq!(
            generator_matrix(1, 1),
            BitMatrix::from_bits(&[&[1, 0], &[1, 1]])
        );
        assert_eq!(full_matrix(1), generator_matrix(1, 1));
    }

    #[test]
    fn eval_poly_examples() {
        // degree-lex coefficients for m = 2: [1, x1, x2, x1x2]
        let one = BitVector::from_bits(&[1, 0, 0, 0]);
        assert_eq!(eval_poly(2, &one).to_bits(), vec![1, 1, 1, 1]);
        let x1x2 = BitVector::from_bits(&[0, 0, 0, 1]);
        assert_eq!(eval_poly(2, &x1x2).to_bits(), vec![0, 0, 0, 1]);
        let sum = BitVector::from_bits(&[0, 1, 1, 0]);
        assert_eq!(eval_poly(2, &sum).to_bits(), vec![0, 1, 1, 0]);
    }

    #[test]
    fn full_transform_matches_kronecker_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 0..=8 {
            let g = full_matrix(m);
            for _ in 0..20 {
                let v = BitVector::random(1 << m, &mut rng);
                assert_eq!(full_transform(m, &v), g.mul_vec(&v), "m = {m}");
            }
        }
    }

    #[test]
    fn full_transform_examples() {
        assert!(full_transform(3, &BitVector::zeros(8)).is_zero());
        let x1x2 = BitVector::unit(4, 0b11);
        assert_eq!(full_transform(2, &x1x2).to_bits(), vec![0, 0, 0, 1]);
    }

    #[test]
    fn full_transform_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let m = rand::Rng::gen_range(&mut rng, 0..=6);
            let v = BitVector::random(1 << m, &mut rng);
            assert_eq!(full_transform(m, &full_transform(m, &v)), v);
        }
    }

    #[test]
    fn generator_is_reordered_full_matrix() {
        for m in 0..=5 {
            let full = full_matrix(m);
            let order: Vec<usize> = monomial_order(m).iter().map(|&s| s as usize).collect();
            for r in 0..=m {
                let cols = &order[..dim_le(m, r)];
                assert_eq!(generator_matrix(m, r), full.select_columns(cols));
            }
        }
    }

    #[test]
    fn recursion_holds_after_column_permutation() {
        for m in 1..=5 {
            for r in 1..=m {
                let lhs =
                    generator_matrix(m + 1, r).select_columns(&recursion_column_permutation(m, r));
                assert_eq!(lhs, recursion_block_matrix(m, r), "m = {m}, r = {r}");
            }
        }
    }

    #[test]
    fn column_weights() {
        for m in 0..=5 {
            let g = generator_matrix(m, m);
            for (j, &s) in monomial_order(m).iter().enumerate() {
                assert_eq!(g.column(j).weight(), 1 << (m - s.count_ones() as usize));
            }
        }
    }

    #[test]
    fn min_distance_matches_formula() {
        for m in 0..=4 {
            for r in 0..=m {
                let code = RmCode::new(m, r).unwrap();
                assert_eq!(min_distance_bruteforce(&code).unwrap(), 1 << (m - r));
            }
        }
    }

    #[test]
    fn codebook_guard() {
        let code = RmCode::new(6, 3).unwrap();
        assert_eq!(code.k(), 42);
        assert!(matches!(code.codewords(), Err(Error::GuardExceeded { .. })));
        assert!(matches!(
            min_distance_bruteforce(&code),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn codewords_agree_with_encode() {
        let code = RmCode::new(4, 2).unwrap();
        let book = code.codewords().unwrap();
        assert_eq!(book.len(), 1 << 11);
        for idx in [0u64, 1, 5, 1000, 2047] {
            let u = BitVector::from_u64(code.k(), idx);
            assert_eq!(code.encode(&u).unwrap(), book[idx as usize]);
            assert_eq!(code.encode_index(idx), book[idx as usize]);
        }
    }

    #[test]
    fn indexer_roundtrip() {
        let idx = MonomialIndexer::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let v = BitVector::random(16, &mut rng);
            assert_eq!(idx.bin_weight_to_deg_lex(&idx.deg_lex_to_bin_weight(&v)), v);
        }
        for p in 0..16 {
            assert_eq!(idx.position_of(idx.set_at(p)), p);
        }
    }

    #[test]
    fn total_order_examples() {
        let s = set_from_elements;
        // smaller sets are greater
        assert_eq!(set_total_order_cmp(s(&[3]), s(&[1, 2])), Ordering::Greater);
        assert_eq!(set_total_order_cmp(0, s(&[1])), Ordering::Greater);
        // equal size: compare from the largest element down
        assert_eq!(set_total_order_cmp(s(&[1, 3]), s(&[2, 3])), Ordering::Less);
        assert_eq!(
            set_total_order_cmp(s(&[1, 4]), s(&[2, 3])),
            Ordering::Greater
        );
    }

    #[test]
    fn total_order_is_a_total_order() {
        let all: Vec<SetMask> = (0..32).collect();
        let mut sorted = all.clone();
        sorted.sort_by(|&a, &b| set_total_order_cmp(a, b));
        for w in sorted.windows(2) {
            assert_eq!(set_total_order_cmp(w[0], w[1]), Ordering::Less);
        }
        for &a in &all {
            for &b in &all {
                assert_eq!(
                    set_total_order_cmp(a, b),
                    set_total_order_cmp(b, a).reverse()
                );
            }
        }
    }

    #[test]
    fn partial_order_examples() {
        let s = set_from_elements;
        assert_eq!(
            set_partial_order(s(&[3]), s(&[1, 2])),
            SetRelation::Succeeds
        );
        assert_eq!(
            set_partial_order(s(&[1, 2]), s(&[3])),
            SetRelation::Precedes
        );
        assert_eq!(
            set_partial_order(s(&[1]), s(&[2, 3])),
            SetRelation::Incomparable
        );
        for a in 0..16 {
            assert!(succeeds(a, a));
        }
    }

    /// Definition oracle written independently on sorted element lists.
    fn succeeds_oracle(a: SetMask, b: SetMask) -> bool {
        let mut ea = set_elements(a);
        let mut eb = set_elements(b);
        ea.sort_unstable_by(|x, y| y.cmp(x));
        eb.sort_unstable_by(|x, y| y.cmp(x));
        if ea.len() > eb.len() {
            return false;
        }
        (0..ea.len()).all(|k| ea[k] >= eb[k])
    }

    #[test]
    fn partial_order_exhaustive_m4() {
        for a in 0..16 {
            for b in 0..16 {
                assert_eq!(succeeds(a, b), succeeds_oracle(a, b));
                // the partial order refines into the total order
                if succeeds(a, b) {
                    assert_ne!(set_total_order_cmp(a, b), Ordering::Less);
                }
                if succeeds(a, b) && succeeds(b, a) {
                    assert_eq!(a, b);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn degree_lex_is_antisymmetric(a in 0u32..1024, b in 0u32..1024) {
            prop_assert_eq!(degree_lex_cmp(a, b), degree_lex_cmp(b, a).reverse());
            prop_assert_eq!(degree_lex_cmp(a, b) == Ordering::Equal, a == b);
        }

        #[test]
        fn eval_poly_is_linear(seed in any::<u64>(), m in 0usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = BitVector::random(1 << m, &mut rng);
            let b = BitVector::random(1 << m, &mut rng);
            prop_assert_eq!(eval_poly(m, &(&a + &b)), &eval_poly(m, &a) + &eval_poly(m, &b));
        }
    }
}
