//! Affine substitutions `x -> Ax + b` acting on Reed-Muller evaluations and
//! coefficients, their restriction to a single degree layer, and searches over
//! the generated group.
//!
//! Conventions:
//!
//! - Points of F_2^m are bitmasks (bit `j` = `x_{j+1}`), matching evaluation
//!   coordinate order.
//! - The evaluation permutation `σ` satisfies
//!   `eval(P(Ax+b))_i = eval(P)_{σ(i)}`, so `σ(i)` is the index of `A p_i + b`.
//! - `coef_map(f)` sends `coef(P)` to `coef(P ∘ f)` in bin-weight order. As a
//!   consequence `coef_map(f ∘ g) = coef_map(g) · coef_map(f)`.
//! - Degree-`r` layers list their monomials by ascending bitmask.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::{enumerate_subspaces, BitMatrix, BitVector, Subspace, MAX_ENUMERATION_DIM};
use crate::rm::{full_transform, layer_indices, layer_size, monomial_name, SetMask};

/// Default number of orbit states explored by [`max_orbit_distance`].
pub const DEFAULT_ORBIT_BUDGET: usize = 100_000;

/// `x -> A x + b` with `A` invertible.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffineMap {
    a: BitMatrix,
    b: BitVector,
}

impl AffineMap {
    pub fn new(a: BitMatrix, b: BitVector) -> Result<Self> {
        let m = a.num_rows();
        if a.num_cols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: a.num_cols(),
            });
        }
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: b.len(),
            });
        }
        if !a.is_invertible() {
            return Err(Error::SingularMatrix);
        }
        Ok(Self { a, b })
    }

    pub fn linear(a: BitMatrix) -> Result<Self> {
        let m = a.num_rows();
        Self::new(a, BitVector::zeros(m))
    }

    pub fn identity(m: usize) -> Self {
        Self {
            a: BitMatrix::identity(m),
            b: BitVector::zeros(m),
        }
    }

    pub fn translation(b: BitVector) -> Self {
        Self {
            a: BitMatrix::identity(b.len()),
            b,
        }
    }

    /// Uniform over invertible `A` (rejection sampling) and all `b`.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        loop {
            let a = BitMatrix::random(m, m, rng);
            if a.is_invertible() {
                return Self {
                    a,
                    b: BitVector::random(m, rng),
                };
            }
        }
    }

    pub fn m(&self) -> usize {
        self.a.num_rows()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.a
    }

    pub fn shift(&self) -> &BitVector {
        &self.b
    }

    /// Image of the point with bitmask `x`.
    pub fn apply(&self, x: usize) -> usize {
        let m = self.m();
        let v = BitVector::from_u64(m, x as u64);
        let y = &self.a.mul_vec(&v) + &self.b;
        y.to_u64().expect("m <= 64") as usize
    }

    /// `x -> self(inner(x))`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            a: self.a.mul(&inner.a),
            b: &self.a.mul_vec(&inner.b) + &self.b,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let ai = self.a.inverse().expect("A is invertible by construction");
        let b = ai.mul_vec(&self.b);
        AffineMap { a: ai, b }
    }
}

impl fmt::Debug for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffineMap(A={:?}, b={})", self.a, self.b)
    }
}

/// A permutation of `{0, ..., n-1}`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "{images:?} is not a permutation"
                )));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// Builds from 1-based cycles, e.g. `[[1, 4, 3, 2]]` for `(1432)`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for (k, &from) in cycle.iter().enumerate() {
                let to = cycle[(k + 1) % cycle.len()];
                if from == 0 || from > n || to == 0 || to > n {
                    return Err(Error::InvalidParameter(format!(
                        "cycle entry out of range 1..={n}"
                    )));
                }
                images[from - 1] = to - 1;
            }
        }
        Self::from_images(images)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// 1-based one-line notation.
    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|i| i + 1).collect()
    }

    /// 1-based cycles, fixed points omitted, each starting at its least element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.images[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i + 1);
                i = self.images[i];
            }
            out.push(cycle);
        }
        out
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Self { images: inv }
    }

    /// `i -> self(inner(i))`.
    pub fn compose(&self, inner: &Permutation) -> Self {
        Self {
            images: inner.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    /// `(v_{σ(0)}, v_{σ(1)}, ...)`.
    pub fn pull(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.len());
        let mut out = BitVector::zeros(v.len());
        for (i, &s) in self.images.iter().enumerate() {
            if v.get(s) {
                out.set(i, true);
            }
        }
        out
    }
}

/// `σ` with `eval(P ∘ f)_i = eval(P)_{σ(i)}`.
pub fn eval_permutation(f: &AffineMap) -> Permutation {
    let n = 1usize << f.m();
    Permutation {
        images: (0..n).map(|x| f.apply(x)).collect(),
    }
}

fn poly_mul(p: &BitVector, q: &BitVector) -> BitVector {
    let mut out = BitVector::zeros(p.len());
    for s in p.iter_ones() {
        for t in q.iter_ones() {
            out.flip(s | t);
        }
    }
    out
}

/// The `2^m × 2^m` matrix taking `coef(P)` to `coef(P ∘ f)`; column `S` holds
/// the coefficients of `prod_{j in S} (Ax + b)_j`.
pub fn coef_map(f: &AffineMap) -> BitMatrix {
    let m = f.m();
    let n = 1usize << m;
    let forms: Vec<BitVector> = (0..m)
        .map(|j| {
            let mut v = BitVector::zeros(n);
            if f.b.get(j) {
                v.set(0, true);
            }
            for k in f.a.row(j).iter_ones() {
                v.set(1 << k, true);
            }
            v
        })
        .collect();
    let mut cols: Vec<BitVector> = Vec::with_capacity(n);
    for s in 0..n {
        let col = if s == 0 {
            BitVector::unit(n, 0)
        } else {
            // extend the product for s without its top variable
            let top = usize::BITS - 1 - s.leading_zeros();
            poly_mul(&cols[s & !(1 << top)], &forms[top as usize])
        };
        cols.push(col);
    }
    BitMatrix::from_columns(n, &cols)
}

/// `G · P_σ · G`, the coefficient map obtained by conjugating the evaluation
/// permutation with the full transform.
pub fn coef_map_via_eval(f: &AffineMap) -> BitMatrix {
    let m = f.m();
    let n = 1usize << m;
    let sigma = eval_permutation(f);
    let cols: Vec<BitVector> = (0..n)
        .map(|j| full_transform(m, &sigma.pull(&full_transform(m, &BitVector::unit(n, j)))))
        .collect();
    BitMatrix::from_columns(n, &cols)
}

/// An invertible linear map on the degree-`r` coefficient layer.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LayerAutomorphism {
    m: usize,
    r: usize,
    matrix: BitMatrix,
}

impl LayerAutomorphism {
    pub fn new(m: usize, r: usize, matrix: BitMatrix) -> Result<Self> {
        let c = layer_size(m, r);
        if matrix.num_rows() != c || matrix.num_cols() != c {
            return Err(Error::DimensionMismatch {
                expected: c,
                found: matrix.num_rows(),
            });
        }
        if !matrix.is_invertible() {
            return Err(Error::SingularMatrix);
        }
        Ok(Self { m, r, matrix })
    }

    pub fn identity(m: usize, r: usize) -> Self {
        Self {
            m,
            r,
            matrix: BitMatrix::identity(layer_size(m, r)),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LayerAutomorphism) -> Self {
        assert_eq!((self.m, self.r), (inner.m, inner.r));
        Self {
            m: self.m,
            r: self.r,
            matrix: self.matrix.mul(&inner.matrix),
        }
    }

    pub fn apply(&self, v: &BitVector) -> BitVector {
        self.matrix.mul_vec(v)
    }

    pub fn apply_subspace(&self, g: &Subspace) -> Result<Subspace> {
        g.image(&self.matrix)
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == BitMatrix::identity(self.matrix.num_rows())
    }
}

impl fmt::Debug for LayerAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LayerAutomorphism(m={}, r={}, {:?})",
            self.m, self.r, self.matrix
        )
    }
}

/// `coef_map(f)` restricted to the rows and columns of degree-`r` monomials.
pub fn layer_restriction(f: &AffineMap, r: usize) -> Result<LayerAutomorphism> {
    let m = f.m();
    if r > m {
        return Err(Error::InvalidParameter(format!(
            "layer r = {r} exceeds m = {m}"
        )));
    }
    let full = coef_map(f);
    let idx = layer_indices(m, r);
    let matrix = full.select_rows(&idx).select_columns(&idx);
    LayerAutomorphism::new(m, r, matrix)
}

/// `x_i <-> x_j` (0-based variable indices).
pub fn swap_map(m: usize, i: usize, j: usize) -> AffineMap {
    let mut a = BitMatrix::identity(m);
    a.set(i, i, false);
    a.set(j, j, false);
    a.set(i, j, true);
    a.set(j, i, true);
    AffineMap::linear(a).expect("permutation matrix")
}

/// `x_i -> x_i + x_j`, `x_j -> x_i` (0-based variable indices).
pub fn shear_map(m: usize, i: usize, j: usize) -> AffineMap {
    let mut a = BitMatrix::identity(m);
    a.set(i, j, true);
    a.set(j, i, true);
    a.set(j, j, false);
    AffineMap::linear(a).expect("invertible by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GeneratorKind {
    /// `T_{i,j}`.
    Swap,
    /// `T'_{i,j}`.
    Shear,
}

#[derive(Debug, Clone)]
pub struct SymGenerator {
    pub kind: GeneratorKind,
    /// 1-based variable indices.
    pub i: usize,
    pub j: usize,
    pub map: AffineMap,
    pub layer: LayerAutomorphism,
}

impl SymGenerator {
    pub fn label(&self) -> String {
        match self.kind {
            GeneratorKind::Swap => format!("T{},{}", self.i, self.j),
            GeneratorKind::Shear => format!("T'{},{}", self.i, self.j),
        }
    }
}

/// `T_{i,j}` for `i < j` and `T'_{i,j}` for every ordered pair `i != j`,
/// restricted to layer `r`. Together they generate `GL_m`.
pub fn sym_generators(m: usize, r: usize) -> Result<Vec<SymGenerator>> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "generators need m >= 2, got {m}"
        )));
    }
    if r > m {
        return Err(Error::InvalidParameter(format!(
            "layer r = {r} exceeds m = {m}"
        )));
    }
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let map = swap_map(m, i, j);
            let layer = layer_restriction(&map, r)?;
            out.push(SymGenerator {
                kind: GeneratorKind::Swap,
                i: i + 1,
                j: j + 1,
                map,
                layer,
            });
        }
    }
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let map = shear_map(m, i, j);
            let layer = layer_restriction(&map, r)?;
            out.push(SymGenerator {
                kind: GeneratorKind::Shear,
                i: i + 1,
                j: j + 1,
                map,
                layer,
            });
        }
    }
    Ok(out)
}

/// Subspaces of `F_2^{C(m,r)}` fixed setwise by every generator.
pub fn invariant_subspaces(m: usize, r: usize) -> Result<Vec<Subspace>> {
    let c = layer_size(m, r);
    if c > MAX_ENUMERATION_DIM {
        return Err(Error::guard(
            "layer dimension C(m,r)",
            MAX_ENUMERATION_DIM,
            c,
        ));
    }
    let gens = if m >= 2 {
        sym_generators(m, r)?
    } else {
        Vec::new()
    };
    Ok(enumerate_subspaces(c)?
        .into_iter()
        .filter(|g| gens.iter().all(|t| g.is_invariant_under(t.layer.matrix())))
        .collect())
}

/// `ceil((2/9) · min(dim G, C - dim G))`.
pub fn orbit_distance_bound(dim: usize, c: usize) -> usize {
    (2 * dim.min(c - dim)).div_ceil(9)
}

#[derive(Debug, Clone)]
pub struct OrbitSearch {
    /// Best `π` found; the identity when the orbit is trivial.
    pub best: LayerAutomorphism,
    /// Generator indices applied first-to-last to produce `best`.
    pub word: Vec<usize>,
    pub distance: usize,
    pub bound: usize,
    pub states_explored: usize,
    /// The whole orbit was explored within the budget.
    pub complete: bool,
}

impl OrbitSearch {
    pub fn reached_bound(&self) -> bool {
        self.distance >= self.bound
    }
}

/// Breadth-first search over the orbit of `g` under the layer generators,
/// maximising `dist(g, π g)`. Ties go to the first state reached, which is the
/// shortlex-smallest generator word.
pub fn max_orbit_distance(g: &Subspace, m: usize, r: usize, budget: usize) -> Result<OrbitSearch> {
    let c = layer_size(m, r);
    if g.ambient_dim() != c {
        return Err(Error::DimensionMismatch {
            expected: c,
            found: g.ambient_dim(),
        });
    }
    let bound = orbit_distance_bound(g.dim(), c);
    let gens = if m >= 2 {
        sym_generators(m, r)?
    } else {
        Vec::new()
    };

    // parent[state] = (previous state, generator index)
    let mut index: HashMap<Subspace, usize> = HashMap::new();
    let mut states: Vec<Subspace> = vec![g.clone()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    index.insert(g.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut best = (0usize, 0usize);
    let mut complete = true;

    'bfs: while let Some(s) = queue.pop_front() {
        for (gi, t) in gens.iter().enumerate() {
            let img = states[s].image(t.layer.matrix())?;
            if index.contains_key(&img) {
                continue;
            }
            if states.len() >= budget {
                complete = false;
                break 'bfs;
            }
            let d = g.dist(&img)?;
            let id = states.len();
            index.insert(img.clone(), id);
            states.push(img);
            parent.push(Some((s, gi)));
            queue.push_back(id);
            if d > best.0 {
                best = (d, id);
            }
        }
    }

    let mut word = Vec::new();
    let mut cur = best.1;
    while let Some((prev, gi)) = parent[cur] {
        word.push(gi);
        cur = prev;
    }
    word.reverse();
    let mut pi = LayerAutomorphism::identity(m, r);
    for &gi in &word {
        pi = gens[gi].layer.compose(&pi);
    }
    Ok(OrbitSearch {
        best: pi,
        word,
        distance: best.0,
        bound,
        states_explored: states.len(),
        complete,
    })
}

/// Names of the degree-`r` monomials in layer order.
pub fn layer_monomial_names(m: usize, r: usize) -> Vec<String> {
    layer_indices(m, r)
        .into_iter()
        .map(|s| monomial_name(s as SetMask))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rm::eval_poly;
    use crate::rm::MonomialIndexer;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn worked_example_map() -> AffineMap {
        AffineMap::new(
            BitMatrix::from_bits(&[&[1, 0], &[1, 1]]),
            BitVector::from_bits(&[1, 0]),
        )
        .unwrap()
    }

    #[test]
    fn identity_eval_permutation() {
        assert_eq!(
            eval_permutation(&AffineMap::identity(3)),
            Permutation::identity(8)
        );
    }

    #[test]
    fn example_eval_permutation() {
        let sigma = eval_permutation(&worked_example_map());
        assert_eq!(sigma.one_line(), vec![2, 3, 4, 1]);
        // the cycle (1432) is the inverse under this one-line convention
        let cyc = Permutation::from_cycles(4, &[&[1, 4, 3, 2]]).unwrap();
        assert_eq!(cyc, sigma.inverse());
        assert_eq!(cyc.cycles(), vec![vec![1, 4, 3, 2]]);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = BitMatrix::from_bits(&[&[1, 1], &[1, 1]]);
        assert_eq!(AffineMap::linear(a), Err(Error::SingularMatrix));
    }

    #[test]
    fn eval_permutation_matches_reevaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let idx = MonomialIndexer::new(3);
        for _ in 0..10 {
            let f = AffineMap::random(3, &mut rng);
            let sigma = eval_permutation(&f);
            for _ in 0..50 {
                let coeffs = BitVector::random(8, &mut rng);
                let ev = eval_poly(3, &coeffs);
                // evaluate P(Ax+b) directly at every point
                let direct: Vec<bool> = (0..8).map(|x| ev.get(f.apply(x))).collect();
                assert_eq!(sigma.pull(&ev), BitVector::from_bools(&direct));
                // and through the substituted coefficients
                let sub = coef_map(&f).mul_vec(&idx.deg_lex_to_bin_weight(&coeffs));
                assert_eq!(full_transform(3, &sub), sigma.pull(&ev));
            }
        }
    }

    #[test]
    fn example_coef_map() {
        let c = coef_map(&worked_example_map());
        for bits in 0..16u64 {
            let u = BitVector::from_u64(4, bits);
            let b = u.to_bits();
            let expected = [b[0] ^ b[1], b[1] ^ b[2], b[2] ^ b[3], b[3]];
            assert_eq!(c.mul_vec(&u).to_bits(), expected);
        }
        let layer = layer_restriction(&worked_example_map(), 1).unwrap();
        assert_eq!(*layer.matrix(), BitMatrix::from_bits(&[&[1, 1], &[0, 1]]));
    }

    #[test]
    fn identity_coef_map() {
        assert_eq!(coef_map(&AffineMap::identity(4)), BitMatrix::identity(16));
    }

    #[test]
    fn coef_map_agrees_with_conjugated_eval_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..=4 {
            for _ in 0..20 {
                let f = AffineMap::random(m, &mut rng);
                assert_eq!(coef_map(&f), coef_map_via_eval(&f));
            }
        }
    }

    #[test]
    fn composition_conventions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = AffineMap::random(3, &mut rng);
            let g = AffineMap::random(3, &mut rng);
            let fg = f.compose(&g);
            assert_eq!(
                eval_permutation(&fg),
                eval_permutation(&f).compose(&eval_permutation(&g))
            );
            assert_eq!(coef_map(&fg), coef_map(&g).mul(&coef_map(&f)));
            assert_eq!(f.compose(&f.inverse()), AffineMap::identity(3));
        }
    }

    #[test]
    fn coef_map_preserves_degree_filtration() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in 1..=5 {
            let f = AffineMap::random(m, &mut rng);
            let c = coef_map(&f);
            for j in 0..1usize << m {
                for i in c.column(j).iter_ones() {
                    assert!(i.count_ones() <= j.count_ones());
                }
            }
        }
    }

    #[test]
    fn layer_restrictions_invertible_and_functorial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let m = rng.gen_range(1..=5);
            let r = rng.gen_range(0..=m);
            let f = AffineMap::random(m, &mut rng);
            let g = AffineMap::random(m, &mut rng);
            let lf = layer_restriction(&f, r).unwrap();
            let lg = layer_restriction(&g, r).unwrap();
            let lfg = layer_restriction(&f.compose(&g), r).unwrap();
            assert_eq!(lfg, lg.compose(&lf));
        }
    }

    #[test]
    fn translations_act_trivially_on_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for m in 1..=4 {
            let t = AffineMap::translation(BitVector::random(m, &mut rng));
            for r in 0..=m {
                assert!(layer_restriction(&t, r).unwrap().is_identity());
            }
        }
    }

    /// Substitution oracle: apply the generator to `x_I` symbolically and keep
    /// the degree-`r` part.
    fn generator_action_oracle(kind: GeneratorKind, i: usize, j: usize, set: usize) -> Vec<usize> {
        let (bi, bj) = (1 << i, 1 << j);
        let has_i = set & bi != 0;
        let has_j = set & bj != 0;
        match kind {
            GeneratorKind::Swap => {
                if has_i == has_j {
                    vec![set]
                } else {
                    vec![set ^ bi ^ bj]
                }
            }
            GeneratorKind::Shear => match (has_i, has_j) {
                (false, false) => vec![set],
                (true, false) => vec![set, set ^ bi ^ bj],
                (false, true) => vec![set ^ bi ^ bj],
                // x_i x_j -> (x_i + x_j) x_i = x_i x_j + x_i; top layer keeps x_I
                (true, true) => vec![set],
            },
        }
    }

    #[test]
    fn generators_match_symbolic_substitution_m3_r2() {
        let (m, r) = (3, 2);
        let idx = layer_indices(m, r);
        for t in sym_generators(m, r).unwrap() {
            for (col, &set) in idx.iter().enumerate() {
                let mut expected: Vec<usize> =
                    generator_action_oracle(t.kind, t.i - 1, t.j - 1, set)
                        .into_iter()
                        .map(|s| idx.iter().position(|&x| x == s).unwrap())
                        .collect();
                expected.sort_unstable();
                let got: Vec<usize> = t.layer.matrix().column(col).iter_ones().collect();
                assert_eq!(
                    got,
                    expected,
                    "{} on {}",
                    t.label(),
                    monomial_name(set as u32)
                );
            }
        }
    }

    #[test]
    fn generator_sum_identities() {
        for (m, r) in [(3, 1), (3, 2), (4, 2), (5, 3)] {
            let idx = layer_indices(m, r);
            let gens = sym_generators(m, r).unwrap();
            for t in gens.iter().filter(|t| t.kind == GeneratorKind::Swap) {
                assert!(t.layer.compose(&t.layer).is_identity());
            }
            for i in 0..m {
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let sw = gens
                        .iter()
                        .find(|t| {
                            t.kind == GeneratorKind::Swap
                                && t.i == i.min(j) + 1
                                && t.j == i.max(j) + 1
                        })
                        .unwrap();
                    let sh = gens
                        .iter()
                        .find(|t| t.kind == GeneratorKind::Shear && t.i == i + 1 && t.j == j + 1)
                        .unwrap();
                    for (col, &set) in idx.iter().enumerate() {
                        let v = BitVector::unit(idx.len(), col);
                        let sum = &sw.layer.apply(&v) + &sh.layer.apply(&v);
                        let (hi, hj) = (set >> i & 1 == 1, set >> j & 1 == 1);
                        if hi && !hj {
                            assert_eq!(sum, v);
                        } else {
                            assert!(sum.is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn invariant_subspaces_are_trivial() {
        for (m, r) in [(3, 1), (3, 2), (4, 1), (4, 3), (3, 3)] {
            let inv = invariant_subspaces(m, r).unwrap();
            let c = layer_size(m, r);
            assert_eq!(
                inv,
                vec![Subspace::zero(c), Subspace::full(c)],
                "m={m} r={r}"
            );
        }
        assert!(matches!(
            invariant_subspaces(5, 2),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn orbit_search_trivial_cases() {
        let (m, r) = (3, 2);
        for g in [Subspace::zero(3), Subspace::full(3)] {
            let s = max_orbit_distance(&g, m, r, DEFAULT_ORBIT_BUDGET).unwrap();
            assert_eq!((s.distance, s.bound), (0, 0));
            assert!(s.best.is_identity());
        }
    }

    #[test]
    fn orbit_search_reaches_bound_on_f32() {
        for g in enumerate_subspaces(3).unwrap() {
            let s = max_orbit_distance(&g, 3, 2, DEFAULT_ORBIT_BUDGET).unwrap();
            assert!(s.complete);
            assert!(s.reached_bound());
            assert_eq!(
                g.dist(&s.best.apply_subspace(&g).unwrap()).unwrap(),
                s.distance
            );
            if !g.is_zero() && !g.is_full() {
                assert!(s.distance >= 2);
                assert!(s.word.len() <= 6);
            }
        }
    }
}
