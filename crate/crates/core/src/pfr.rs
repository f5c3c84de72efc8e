//! Exhaustive subspace oracles for the entropic Freiman-Ruzsa inequality,
//! its conditional form, and the projection conjecture.

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::{enumerate_subspaces, Subspace};
use crate::info::{
    cond_ruzsa_dist, convolve, ruzsa_dist, ruzsa_dist_mixed, DenseDistribution, JointDistribution,
};
use crate::seeding::chunk_rng;

/// Largest ambient dimension for subspace scans.
pub const MAX_SCAN_K: usize = 5;
/// Largest ambient dimension for conditional scans.
pub const MAX_CEFR_K: usize = 4;
pub const PFR_CONSTANT: f64 = 6.0;
pub const CEFR_CONSTANT: f64 = 7.0;
/// Two values closer than this are treated as tied in an argmin.
pub const TIE_TOLERANCE: f64 = 1e-12;
const BOUND_TOLERANCE: f64 = 1e-10;

/// All subspaces of `F_2^k` in canonical order, with their uniform laws.
pub struct SubspaceTable {
    pub subspaces: Vec<Subspace>,
    pub uniforms: Vec<DenseDistribution>,
}

impl SubspaceTable {
    fn build(k: usize) -> Self {
        let subspaces = enumerate_subspaces(k).expect("k within enumeration range");
        let uniforms = subspaces
            .iter()
            .map(|g| DenseDistribution::uniform_on(g).expect("small k"))
            .collect();
        Self {
            subspaces,
            uniforms,
        }
    }

    /// Shared table for `k <= MAX_SCAN_K`.
    pub fn get(k: usize) -> Result<&'static SubspaceTable> {
        static TABLES: [OnceLock<SubspaceTable>; MAX_SCAN_K + 1] =
            [const { OnceLock::new() }; MAX_SCAN_K + 1];
        if k > MAX_SCAN_K {
            return Err(Error::guard("subspace scan dimension k", MAX_SCAN_K, k));
        }
        Ok(TABLES[k].get_or_init(|| Self::build(k)))
    }
}

/// Index of the first value within [`TIE_TOLERANCE`] of the minimum.
fn argmin_first(values: &[f64]) -> usize {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    values
        .iter()
        .position(|&v| v <= min + TIE_TOLERANCE)
        .expect("nonempty scan")
}

/// `d(U_G, X)` for every subspace `G` in canonical order.
pub fn subspace_distances(p: &DenseDistribution) -> Result<Vec<f64>> {
    let table = SubspaceTable::get(p.k())?;
    table
        .uniforms
        .par_iter()
        .map(|u| ruzsa_dist(u, p))
        .collect()
}

/// The subspace minimising `d(U_G, X)`; ties go to the smaller dimension,
/// then to the canonical order.
pub fn nearest_subspace(p: &DenseDistribution) -> Result<(Subspace, f64)> {
    let table = SubspaceTable::get(p.k())?;
    let d = subspace_distances(p)?;
    let i = argmin_first(&d);
    Ok((table.subspaces[i].clone(), d[i]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrReport {
    pub best_subspace: Subspace,
    pub best_distance: f64,
    pub reference_distance: f64,
    /// `best_distance / reference_distance`, or 0 when both vanish.
    pub factor: f64,
    pub budget: f64,
}

impl FrReport {
    fn new(
        best_subspace: Subspace,
        best_distance: f64,
        reference_distance: f64,
        budget: f64,
    ) -> Self {
        let factor = if reference_distance > BOUND_TOLERANCE {
            best_distance / reference_distance
        } else if best_distance <= BOUND_TOLERANCE {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            best_subspace,
            best_distance,
            reference_distance,
            factor,
            budget,
        }
    }

    fn holds(&self) -> bool {
        self.best_distance <= self.budget * self.reference_distance + BOUND_TOLERANCE
    }
}

/// Checks `min_G d(X, U_G) <= 6 d(X, Y)`.
pub fn pfr_check(p: &DenseDistribution, q: &DenseDistribution) -> Result<FrReport> {
    let reference = ruzsa_dist(p, q)?;
    let (g, best) = nearest_subspace(p)?;
    let report = FrReport::new(g, best, reference, PFR_CONSTANT);
    if !report.holds() {
        return Err(Error::TheoremViolation {
            check: "pfr",
            detail: format!(
                "min d(X, U_G) = {best} > 6 d(X, Y) = {}",
                PFR_CONSTANT * reference
            ),
        });
    }
    Ok(report)
}

/// Checks `min_G d(Y|B, U_G) <= 7 d(X|A, Y|B)`.
pub fn cefr_check(jxa: &JointDistribution, jyb: &JointDistribution) -> Result<FrReport> {
    let k = jyb.ka();
    if k > MAX_CEFR_K {
        return Err(Error::guard("conditional scan dimension k", MAX_CEFR_K, k));
    }
    let reference = cond_ruzsa_dist(jxa, jyb)?;
    let table = SubspaceTable::get(k)?;
    let d: Vec<f64> = table
        .uniforms
        .par_iter()
        .map(|u| ruzsa_dist_mixed(u, jyb))
        .collect::<Result<_>>()?;
    let i = argmin_first(&d);
    let report = FrReport::new(table.subspaces[i].clone(), d[i], reference, CEFR_CONSTANT);
    if !report.holds() {
        return Err(Error::TheoremViolation {
            check: "cefr",
            detail: format!(
                "min d(Y|B, U_G) = {} > 7 d(X|A, Y|B) = {}",
                d[i],
                CEFR_CONSTANT * reference
            ),
        });
    }
    Ok(report)
}

/// `H(Proj_{G^⊥}(X))`: entropy of the coordinates `x · h` for a basis `h` of
/// `G^⊥`.
pub fn projection_entropy(p: &DenseDistribution, g: &Subspace) -> Result<f64> {
    if g.ambient_dim() != p.k() {
        return Err(Error::DimensionMismatch {
            expected: p.k(),
            found: g.ambient_dim(),
        });
    }
    let perp = g.orthogonal_complement();
    let masks: Vec<u64> = perp
        .basis()
        .iter()
        .map(|h| h.to_u64().expect("small k"))
        .collect();
    let proj = p.pushforward(masks.len(), |x| {
        masks.iter().enumerate().fold(0, |acc, (t, &h)| {
            acc | (((x as u64 & h).count_ones() & 1) as usize) << t
        })
    })?;
    Ok(proj.entropy())
}

/// `H(U_G + X) - dim G`, the other side of the projection identity.
pub fn sum_entropy_gap(p: &DenseDistribution, g: &Subspace) -> Result<f64> {
    let u = DenseDistribution::uniform_on(g)?;
    Ok(convolve(p, &u)?.entropy() - g.dim() as f64)
}

/// Smallest `c1` for which the search is still informative; beyond it the
/// FR inequality already provides a subspace.
pub const CONJECTURE_C1_LIMIT: f64 = 11.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureResult {
    pub c1: f64,
    /// `H(X)`.
    pub entropy: f64,
    /// `(1 + c1)(H(X' + X) - H(X))`.
    pub budget: f64,
    /// Qualifying subspace of minimal dimension.
    pub subspace: Option<Subspace>,
    /// `H(U_G + X) - H(U_G)` for the returned subspace.
    pub gap: Option<f64>,
    /// `dim G / H(X)`, or 0 when `H(X) = 0`.
    pub dim_ratio: f64,
    /// Number of subspaces satisfying the inequality.
    pub qualifying: usize,
    /// Set when `c1 >= 11`.
    pub beyond_c1_limit: bool,
}

/// Finds a minimal-dimension `G` with
/// `H(U_G + X) - H(U_G) <= (1 + c1)(H(X' + X) - H(X))`.
pub fn conjecture_search(p: &DenseDistribution, c1: f64) -> Result<ConjectureResult> {
    if !(c1.is_finite() && c1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "c1 = {c1} must be positive"
        )));
    }
    let k = p.k();
    let table = SubspaceTable::get(k)?;
    let entropy = p.entropy();
    let beyond_c1_limit = c1 >= CONJECTURE_C1_LIMIT;
    if entropy <= TIE_TOLERANCE {
        return Ok(ConjectureResult {
            c1,
            entropy,
            budget: 0.0,
            subspace: Some(Subspace::zero(k)),
            gap: Some(0.0),
            dim_ratio: 0.0,
            qualifying: table.subspaces.len(),
            beyond_c1_limit,
        });
    }
    let budget = (1.0 + c1) * (convolve(p, p)?.entropy() - entropy);
    let gaps: Vec<f64> = table
        .subspaces
        .par_iter()
        .map(|g| sum_entropy_gap(p, g))
        .collect::<Result<_>>()?;
    let ok: Vec<usize> = (0..gaps.len())
        .filter(|&i| gaps[i] <= budget + TIE_TOLERANCE)
        .collect();
    let first = ok.first().copied();
    Ok(ConjectureResult {
        c1,
        entropy,
        budget,
        subspace: first.map(|i| table.subspaces[i].clone()),
        gap: first.map(|i| gaps[i]),
        dim_ratio: first.map_or(f64::NAN, |i| table.subspaces[i].dim() as f64 / entropy),
        qualifying: ok.len(),
        beyond_c1_limit,
    })
}

/// A random pair on `F_2^k` with `k` drawn from `1..=max_k`.
pub fn random_pair<R: Rng + ?Sized>(
    max_k: usize,
    rng: &mut R,
) -> (DenseDistribution, DenseDistribution) {
    let k = rng.gen_range(1..=max_k);
    (
        DenseDistribution::random(k, rng),
        DenseDistribution::random(k, rng),
    )
}

/// A random pair of conditioned variables with `ka <= max_k`, at most two
/// conditioning bits each.
pub fn random_conditional_pair<R: Rng + ?Sized>(
    max_k: usize,
    rng: &mut R,
) -> (JointDistribution, JointDistribution) {
    let k = rng.gen_range(1..=max_k);
    let a = rng.gen_range(0..=2);
    let b = rng.gen_range(0..=2);
    (
        JointDistribution::random(k, a, rng),
        JointDistribution::random(k, b, rng),
    )
}

/// `pfr_check` on `pairs` random instances; instance `i` is drawn from its
/// own stream of `seed`.
pub fn pfr_sweep(max_k: usize, pairs: usize, seed: u64) -> Result<Vec<FrReport>> {
    (0..pairs)
        .into_par_iter()
        .map(|i| {
            let (p, q) = random_pair(max_k, &mut chunk_rng(seed, i as u64));
            pfr_check(&p, &q)
        })
        .collect()
}

/// `cefr_check` on `pairs` random conditioned instances.
pub fn cefr_sweep(max_k: usize, pairs: usize, seed: u64) -> Result<Vec<FrReport>> {
    (0..pairs)
        .into_par_iter()
        .map(|i| {
            let (x, y) = random_conditional_pair(max_k, &mut chunk_rng(seed, i as u64));
            cefr_check(&x, &y)
        })
        .collect()
}
