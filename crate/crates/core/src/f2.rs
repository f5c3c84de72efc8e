//! Bit-packed linear algebra over F_2.
//!
//! Vectors are packed little-endian into `u64` words: coordinate `i` lives in
//! word `i / 64` at bit `i % 64`. Bits past `len` are always zero, so derived
//! equality and hashing are exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};

use rand::Rng;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// An element of F_2^len.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// The `i`-th standard basis vector.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// Builds a vector from 0/1 entries. Any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Low `len` bits of `value`; coordinate `i` is bit `i`.
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= WORD, "from_u64 needs len <= 64, got {len}");
        let mut v = Self::zeros(len);
        if len > 0 {
            let mask = if len == WORD {
                u64::MAX
            } else {
                (1u64 << len) - 1
            };
            v.words[0] = value & mask;
        }
        v
    }

    /// Packs the vector into a `u64`. Returns `None` when `len > 64`.
    pub fn to_u64(&self) -> Option<u64> {
        match self.len {
            0 => Some(0),
            l if l <= WORD => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = rng.gen();
        }
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "index {i} out of range for length {}",
            self.len
        );
        let bit = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= bit;
        } else {
            self.words[i / WORD] &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product over F_2.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn hamming_distance(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Index of the lowest set coordinate.
    pub fn leading_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD + t)
                }
            })
        })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        assert_eq!(words.len(), words_for(len));
        let mut v = Self { len, words };
        v.clear_tail();
        v
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut v = Self::zeros(self.len + other.len);
        for i in self.iter_ones() {
            v.set(i, true);
        }
        for i in other.iter_ones() {
            v.set(self.len + i, true);
        }
        v
    }

    /// Coordinates `start..end` as a new vector.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len);
        let mut v = Self::zeros(end - start);
        for i in self.iter_ones().filter(|&i| i >= start && i < end) {
            v.set(i - start, true);
        }
        v
    }
}

impl AddAssign<&BitVector> for BitVector {
    fn add_assign(&mut self, rhs: &BitVector) {
        assert_eq!(self.len, rhs.len, "adding vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl Add<&BitVector> for &BitVector {
    type Output = BitVector;
    fn add(self, rhs: &BitVector) -> BitVector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for BitVector {
    type Output = BitVector;
    fn add(mut self, rhs: BitVector) -> BitVector {
        self += &rhs;
        self
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl serde::Serialize for BitVector {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A dense matrix over F_2 stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    /// Row-major 0/1 literal. Panics on ragged input.
    pub fn from_bits(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged matrix literal");
                BitVector::from_bits(r)
            })
            .collect();
        Self { cols, rows }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.rows[i].set(j, true);
                }
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in c.iter_ones() {
                m.rows[i].set(j, true);
            }
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            cols,
            rows: (0..rows).map(|_| BitVector::random(cols, rng)).collect(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value)
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> BitVector {
        let mut c = BitVector::zeros(self.num_rows());
        for (i, r) in self.rows.iter().enumerate() {
            if r.get(j) {
                c.set(i, true);
            }
        }
        c
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.num_rows());
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.iter_ones() {
                t.rows[j].set(i, true);
            }
        }
        t
    }

    /// `M v` over F_2.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        let mut out = BitVector::zeros(self.num_rows());
        for (i, r) in self.rows.iter().enumerate() {
            if r.dot(v) {
                out.set(i, true);
            }
        }
        out
    }

    /// `v^T M`, i.e. the XOR of the rows selected by `v`.
    pub fn vec_mul(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.num_rows(), v.len(), "vector-matrix dimension mismatch");
        let mut out = BitVector::zeros(self.cols);
        for i in v.iter_ones() {
            out += &self.rows[i];
        }
        out
    }

    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(
            self.cols,
            rhs.num_rows(),
            "matrix product dimension mismatch"
        );
        BitMatrix {
            cols: rhs.cols,
            rows: self.rows.iter().map(|r| rhs.vec_mul(r)).collect(),
        }
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kronecker(&self, rhs: &BitMatrix) -> BitMatrix {
        let (ra, ca) = (self.num_rows(), self.cols);
        let (rb, cb) = (rhs.num_rows(), rhs.cols);
        BitMatrix::from_fn(ra * rb, ca * cb, |i, j| {
            self.get(i / rb, j / cb) && rhs.get(i % rb, j % cb)
        })
    }

    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        BitMatrix::from_fn(self.num_rows(), cols.len(), |i, j| self.get(i, cols[j]))
    }

    pub fn select_rows(&self, rows: &[usize]) -> BitMatrix {
        BitMatrix {
            cols: self.cols,
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn block(a: &BitMatrix, b: &BitMatrix, c: &BitMatrix, d: &BitMatrix) -> BitMatrix {
        assert_eq!(a.num_rows(), b.num_rows());
        assert_eq!(c.num_rows(), d.num_rows());
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let top = a.rows.iter().zip(&b.rows).map(|(x, y)| x.concat(y));
        let bottom = c.rows.iter().zip(&d.rows).map(|(x, y)| x.concat(y));
        BitMatrix {
            cols: a.cols + b.cols,
            rows: top.chain(bottom).collect(),
        }
    }

    /// Reduced row echelon form with pivot columns ascending, the rank, and
    /// the pivot column of each nonzero row.
    pub fn rref_with_pivots(&self) -> (BitMatrix, usize, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..self.cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(col)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.get(col) {
                    *row += &pivot_row;
                }
            }
            pivots.push(col);
            r += 1;
        }
        (
            BitMatrix {
                cols: self.cols,
                rows,
            },
            r,
            pivots,
        )
    }

    pub fn rref(&self) -> (BitMatrix, usize) {
        let (m, rank, _) = self.rref_with_pivots();
        (m, rank)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    pub fn is_invertible(&self) -> bool {
        self.num_rows() == self.cols && self.rank() == self.cols
    }

    /// Inverse via Gauss-Jordan on `[M | I]`.
    pub fn inverse(&self) -> Result<BitMatrix> {
        let n = self.num_rows();
        if n != self.cols {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.cols,
            });
        }
        let aug = BitMatrix::block(
            self,
            &BitMatrix::identity(n),
            &BitMatrix::zeros(0, n),
            &BitMatrix::zeros(0, n),
        );
        let (red, _, pivots) = aug.rref_with_pivots();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::SingularMatrix);
        }
        Ok(BitMatrix {
            cols: n,
            rows: red.rows.iter().map(|r| r.slice(n, 2 * n)).collect(),
        })
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.num_rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// A linear subspace of F_2^d in canonical form: the nonzero rows of the RREF
/// of any spanning set, pivot columns ascending. Equal subspaces have equal
/// representations, so `==` is subspace equality.
#[derive(Clone, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<BitVector>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: (0..ambient_dim)
                .map(|i| BitVector::unit(ambient_dim, i))
                .collect(),
        }
    }

    pub fn span<'a, I>(ambient_dim: usize, generators: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a BitVector>,
    {
        let rows: Vec<BitVector> = generators.into_iter().cloned().collect();
        let m = BitMatrix::from_rows(ambient_dim, rows)?;
        Ok(Self::from_matrix_rows(&m))
    }

    /// Row space of `m`.
    /// A random subspace: uniform over all subspaces when `d <= 5`, otherwise
    /// the span of a random number of random vectors.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        if d <= 5 {
            let all = enumerate_subspaces(d).expect("d <= 5");
            return all[rng.gen_range(0..all.len())].clone();
        }
        let count = rng.gen_range(0..=d);
        let gens: Vec<BitVector> = (0..count).map(|_| BitVector::random(d, rng)).collect();
        Self::span(d, &gens).expect("generators have length d")
    }

    pub fn from_matrix_rows(m: &BitMatrix) -> Self {
        let (red, rank) = m.rref();
        Self {
            ambient_dim: m.num_cols(),
            basis: red.rows[..rank].to_vec(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BitVector] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient_dim
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        Ok(())
    }

    /// Membership by reduction against the RREF basis.
    pub fn contains(&self, v: &BitVector) -> bool {
        if v.len() != self.ambient_dim {
            return false;
        }
        let mut rem = v.clone();
        for b in &self.basis {
            let pivot = b.leading_one().expect("basis rows are nonzero");
            if rem.get(pivot) {
                rem += b;
            }
        }
        rem.is_zero()
    }

    /// All `2^dim` elements, ordered by the binary counter over basis rows.
    pub fn elements(&self) -> Vec<BitVector> {
        let mut out = Vec::with_capacity(1 << self.dim());
        out.push(BitVector::zeros(self.ambient_dim));
        for b in &self.basis {
            let extra: Vec<BitVector> = out.iter().map(|e| e + b).collect();
            out.extend(extra);
        }
        out
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Subspace::span(self.ambient_dim, self.basis.iter().chain(&other.basis))
    }

    /// Intersection by the Zassenhaus construction: reduce rows `(g | g)` and
    /// `(h | 0)`; rows whose left half vanishes span `G ∩ H` on the right.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let d = self.ambient_dim;
        let zero = BitVector::zeros(d);
        let rows: Vec<BitVector> = self
            .basis
            .iter()
            .map(|g| g.concat(g))
            .chain(other.basis.iter().map(|h| h.concat(&zero)))
            .collect();
        let m = BitMatrix::from_rows(2 * d, rows)?;
        let (red, rank) = m.rref();
        let inter: Vec<BitVector> = red.rows[..rank]
            .iter()
            .filter(|r| r.slice(0, d).is_zero())
            .map(|r| r.slice(d, 2 * d))
            .collect();
        Subspace::span(d, &inter)
    }

    /// `2 dim(G+H) - dim(G) - dim(H)`.
    pub fn dist(&self, other: &Self) -> Result<usize> {
        let s = self.sum(other)?;
        Ok(2 * s.dim() - self.dim() - other.dim())
    }

    /// `{v : <v, g> = 0 for all g in G}`.
    pub fn orthogonal_complement(&self) -> Self {
        let d = self.ambient_dim;
        let pivots: Vec<usize> = self
            .basis
            .iter()
            .map(|b| b.leading_one().expect("nonzero"))
            .collect();
        // Null space of the RREF basis: one vector per free column.
        let mut gens = Vec::new();
        for free in (0..d).filter(|c| !pivots.contains(c)) {
            let mut v = BitVector::unit(d, free);
            for (b, &p) in self.basis.iter().zip(&pivots) {
                if b.get(free) {
                    v.set(p, true);
                }
            }
            gens.push(v);
        }
        Subspace::span(d, &gens).expect("same ambient dimension")
    }

    /// Image under a square linear map.
    pub fn image(&self, map: &BitMatrix) -> Result<Self> {
        if map.num_cols() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: map.num_cols(),
            });
        }
        let imgs: Vec<BitVector> = self.basis.iter().map(|b| map.mul_vec(b)).collect();
        Subspace::span(map.num_rows(), &imgs)
    }

    /// True if `map(G) ⊆ G`; for invertible maps this is `map(G) = G`.
    pub fn is_invariant_under(&self, map: &BitMatrix) -> bool {
        self.basis.iter().all(|b| self.contains(&map.mul_vec(b)))
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: ambient dimension, then dimension, then RREF rows.
impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ambient_dim
            .cmp(&other.ambient_dim)
            .then(self.dim().cmp(&other.dim()))
            .then_with(|| self.basis.cmp(&other.basis))
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(d={}, basis=[", self.ambient_dim)?;
        for (i, b) in self.basis.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("])")
    }
}

pub const MAX_ENUMERATION_DIM: usize = 7;

/// Every subspace of F_2^d exactly once, sorted by the canonical order.
///
/// Generated directly as RREF patterns: choose pivot columns, then fill the
/// non-pivot entries to the right of each pivot freely.
pub fn enumerate_subspaces(d: usize) -> Result<Vec<Subspace>> {
    if d > MAX_ENUMERATION_DIM {
        return Err(Error::guard(
            "subspace enumeration dimension",
            MAX_ENUMERATION_DIM,
            d,
        ));
    }
    let mut out = Vec::new();
    for pivot_mask in 0u32..(1 << d) {
        let pivots: Vec<usize> = (0..d).filter(|&c| pivot_mask >> c & 1 == 1).collect();
        // free slots: (row, column) with column > pivot and not a pivot column
        let slots: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(row, &p)| {
                (p + 1..d)
                    .filter(move |&c| pivot_mask >> c & 1 == 0)
                    .map(move |c| (row, c))
            })
            .collect();
        for fill in 0u64..(1u64 << slots.len()) {
            let mut basis: Vec<BitVector> = pivots.iter().map(|&p| BitVector::unit(d, p)).collect();
            for (s, &(row, c)) in slots.iter().enumerate() {
                if fill >> s & 1 == 1 {
                    basis[row].set(c, true);
                }
            }
            out.push(Subspace {
                ambient_dim: d,
                basis,
            });
        }
    }
    out.sort();
    Ok(out)
}
