//! The acceptance checks, runnable at two scales.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use rmlab::analysis::{
    balance_check, fr_gap_check, layer_entropies, per_set_profile, perm_invariance_check,
    recurrence_propagate, simp_eq_check, RateProfile,
};
use rmlab::decoder::{
    bit_error_experiment, error_split_check, exact_bit_error_profile, Codebook, DecoderKind,
    ExperimentSpec, PunctureParams,
};
use rmlab::f2::{enumerate_subspaces, BitMatrix, BitVector, Subspace};
use rmlab::info::{binary_entropy, ruzsa_dist, DenseDistribution};
use rmlab::pfr::{cefr_sweep, pfr_sweep, projection_entropy, sum_entropy_gap};
use rmlab::rm::{
    full_matrix, full_transform, generator_matrix, layer_size, recursion_block_matrix,
    recursion_column_permutation, succeeds,
};
use rmlab::seeding::chunk_rng;
use rmlab::symmetry::{invariant_subspaces, AffineMap, DEFAULT_ORBIT_BUDGET};
use rmlab::RmCode;

use crate::args::{Cli, VerifyProfile};
use crate::commands::{execute, orbit_scan};
use crate::error::CliResult;

const DELTAS: [f64; 3] = [0.05, 0.1, 0.25];

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub module: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} [{}] {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.module,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub profile: VerifyProfile,
    pub passed: usize,
    pub failed: usize,
    pub criteria: Vec<CriterionResult>,
}

fn run_check(
    id: u8,
    module: &'static str,
    title: &'static str,
    f: impl FnOnce() -> CliResult<(bool, String)>,
) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        module,
        title,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn full(p: VerifyProfile) -> bool {
    p == VerifyProfile::Full
}

/// Generator recursion, the displayed full matrix, and the involution.
pub fn criterion_1(p: VerifyProfile) -> CriterionResult {
    run_check(1, "rmcode", "generator recursion and involution", || {
        let mut bad = Vec::new();
        for m in 1..=4 {
            for r in 1..=m {
                let lhs =
                    generator_matrix(m + 1, r).select_columns(&recursion_column_permutation(m, r));
                if lhs != recursion_block_matrix(m, r) {
                    bad.push(format!("recursion m={m} r={r}"));
                }
            }
        }
        let displayed = BitMatrix::from_bits(&[
            &[1, 0, 0, 0, 0, 0, 0, 0],
            &[1, 1, 0, 0, 0, 0, 0, 0],
            &[1, 0, 1, 0, 0, 0, 0, 0],
            &[1, 1, 1, 0, 1, 0, 0, 0],
            &[1, 0, 0, 1, 0, 0, 0, 0],
            &[1, 1, 0, 1, 0, 1, 0, 0],
            &[1, 0, 1, 1, 0, 0, 1, 0],
            &[1, 1, 1, 1, 1, 1, 1, 1],
        ]);
        if generator_matrix(3, 3) != displayed {
            bad.push("G3 full differs from the displayed matrix".into());
        }
        for m in 0..=6 {
            let g = full_matrix(m);
            if g.mul(&g) != BitMatrix::identity(1 << m) {
                bad.push(format!("G^2 != I at m={m}"));
            }
        }
        let exhaustive_m = if full(p) { 4 } else { 3 };
        for m in 0..=exhaustive_m {
            let n = 1usize << m;
            if (0..1u64 << n).any(|x| {
                let v = BitVector::from_u64(n, x);
                full_transform(m, &full_transform(m, &v)) != v
            }) {
                bad.push(format!("transform not an involution at m={m}"));
            }
        }
        let mut rng = chunk_rng(1, 0);
        for m in 5..=6 {
            for _ in 0..1000 {
                let v = BitVector::random(1 << m, &mut rng);
                if full_transform(m, &full_transform(m, &v)) != v {
                    bad.push(format!("transform not an involution at m={m}"));
                    break;
                }
            }
        }
        Ok((
            bad.is_empty(),
            if bad.is_empty() {
                "recursion m<=4, displayed G3, involution m<=6".into()
            } else {
                bad.join("; ")
            },
        ))
    })
}

/// Entropy conservation and the m = 1 closed forms.
pub fn criterion_2(p: VerifyProfile) -> CriterionResult {
    run_check(2, "analysis", "entropy conservation", || {
        let m_max = if full(p) { 4 } else { 3 };
        let mut worst: f64 = 0.0;
        for m in 1..=m_max {
            for d in DELTAS {
                worst = worst.max(layer_entropies(m, d)?.conservation_residual());
            }
        }
        let mut closed: f64 = 0.0;
        for d in DELTAS {
            let prof = layer_entropies(1, d)?;
            let h18 = binary_entropy(2.0 * d * (1.0 - d));
            closed = closed
                .max((prof.f[1] - h18).abs())
                .max((prof.f[0] - (2.0 * binary_entropy(d) - h18)).abs());
        }
        Ok((
            worst < 1e-9 && closed < 1e-12,
            format!("max conservation residual {worst:.2e} (m<={m_max}), closed-form residual {closed:.2e}"),
        ))
    })
}

pub fn criterion_3(p: VerifyProfile) -> CriterionResult {
    run_check(3, "analysis", "simp_eq", || {
        let m_max = if full(p) { 3 } else { 2 };
        let mut worst: f64 = 0.0;
        for m in 1..=m_max {
            for r in 0..=m {
                for d in DELTAS {
                    worst = worst.max(simp_eq_check(m, r, d)?.residual);
                }
            }
        }
        Ok((
            worst < 1e-9,
            format!("max residual {worst:.2e} (m<={m_max})"),
        ))
    })
}

pub fn criterion_4(p: VerifyProfile) -> CriterionResult {
    run_check(4, "analysis", "balance identity", || {
        let m_max = if full(p) { 3 } else { 2 };
        let cases: Vec<(usize, usize, f64)> = (1..=m_max)
            .flat_map(|m| (0..=m).flat_map(move |r| DELTAS.map(|d| (m, r, d))))
            .collect();
        let worst = cases
            .par_iter()
            .map(|&(m, r, d)| balance_check(m, r, d).map(|b| b.residual))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok((
            worst < 1e-9,
            format!("max residual {worst:.2e} (m<={m_max})"),
        ))
    })
}

pub fn criterion_5(p: VerifyProfile) -> CriterionResult {
    run_check(
        5,
        "analysis",
        "monotonicity and Bhattacharyya bounds",
        || {
            let slack = 1e-9;
            let m_max = if full(p) { 3 } else { 2 };
            let mut bad = Vec::new();
            for d in DELTAS {
                let prof: Vec<_> = (1..=m_max + 1)
                    .map(|m| layer_entropies(m, d))
                    .collect::<Result<_, _>>()?;
                for m in 1..=m_max {
                    let (a, b) = (&prof[m - 1], &prof[m]);
                    for r in 0..=m {
                        if b.favg[r] > a.favg[r] + slack {
                            bad.push(format!(
                                "favg[{}][{r}] > favg[{m}][{r}] at delta {d}",
                                m + 1
                            ));
                        }
                        if r < m && a.favg[r] > a.favg[r + 1] + slack {
                            bad.push(format!(
                                "favg[{m}][{r}] > favg[{m}][{}] at delta {d}",
                                r + 1
                            ));
                        }
                    }
                }
                let sets: Vec<_> = (1..=m_max)
                    .map(|m| per_set_profile(m, d))
                    .collect::<Result<_, _>>()?;
                for (idx, ps) in sets.iter().enumerate() {
                    let m = idx + 1;
                    for x in 0..1u32 << m {
                        for y in 0..1u32 << m {
                            if succeeds(x, y) && ps.f[x as usize] > ps.f[y as usize] + slack {
                                bad.push(format!("f_{x} > f_{y} at m={m} delta {d}"));
                            }
                        }
                    }
                    for s in 0..1usize << m {
                        let (z, h) = (ps.z[s], ps.f[s]);
                        if z + slack < h || 1.0 - z * z + slack < (1.0 - h) * (1.0 - h) {
                            bad.push(format!("Z/H bounds at set {s}, m={m}, delta {d}"));
                        }
                    }
                }
                if m_max >= 3 {
                    let (z2, z3) = (&sets[1].z, &sets[2].z);
                    for s in 0..4 {
                        if z3[s] > z2[s] * z2[s] + slack {
                            bad.push(format!("Z^(3)_{s} > (Z^(2)_{s})^2 at delta {d}"));
                        }
                    }
                }
            }
            Ok((
                bad.is_empty(),
                if bad.is_empty() {
                    format!("all orders hold for m<={m_max}")
                } else {
                    bad.join("; ")
                },
            ))
        },
    )
}

pub fn criterion_6(p: VerifyProfile) -> CriterionResult {
    run_check(6, "infodist", "Ruzsa calculus", || {
        let instances = if full(p) { 1000 } else { 200 };
        let tol = 1e-10;
        let violations: usize = (0..instances)
            .into_par_iter()
            .map(|i| -> CliResult<usize> {
                let mut rng = chunk_rng(6, i as u64);
                let k = 1 + i % 4;
                let x = DenseDistribution::random(k, &mut rng);
                let y = DenseDistribution::random(k, &mut rng);
                let z = DenseDistribution::random(k, &mut rng);
                let (dxy, dyz, dxz) = (
                    ruzsa_dist(&x, &y)?,
                    ruzsa_dist(&y, &z)?,
                    ruzsa_dist(&x, &z)?,
                );
                let mut v = 0;
                if dxz > dxy + dyz + tol {
                    v += 1;
                }
                if dxy + tol < 0.5 * (x.entropy() - y.entropy()).abs() {
                    v += 1;
                }
                let g = Subspace::random(k, &mut rng);
                let h = Subspace::random(k, &mut rng);
                let du = ruzsa_dist(
                    &DenseDistribution::uniform_on(&g)?,
                    &DenseDistribution::uniform_on(&h)?,
                )?;
                if (du - 0.5 * g.dist(&h)? as f64).abs() > tol {
                    v += 1;
                }
                Ok(v)
            })
            .collect::<CliResult<Vec<_>>>()?
            .into_iter()
            .sum();
        let subs = enumerate_subspaces(3)?;
        let mut exhaustive = 0;
        for g in &subs {
            for h in &subs {
                let du = ruzsa_dist(
                    &DenseDistribution::uniform_on(g)?,
                    &DenseDistribution::uniform_on(h)?,
                )?;
                if (du - 0.5 * g.dist(h)? as f64).abs() > tol {
                    exhaustive += 1;
                }
            }
        }
        Ok((
            violations == 0 && exhaustive == 0,
            format!(
                "{instances} random instances: {violations} violations; {} subspace pairs in F_2^3: {exhaustive} violations",
                subs.len() * subs.len()
            ),
        ))
    })
}

pub fn criterion_7(p: VerifyProfile) -> CriterionResult {
    run_check(
        7,
        "pfrlab",
        "PFR/CEFR oracles and projection identity",
        || {
            let (pairs, cond) = if full(p) { (200, 100) } else { (50, 30) };
            let pfr = pfr_sweep(4, pairs, 7)?;
            let cefr = cefr_sweep(3, cond, 11)?;
            let max_pfr = pfr.iter().map(|r| r.factor).fold(0.0, f64::max);
            let max_cefr = cefr.iter().map(|r| r.factor).fold(0.0, f64::max);
            let subs = enumerate_subspaces(3)?;
            let mut worst: f64 = 0.0;
            let mut rng = chunk_rng(77, 0);
            let mut dists = vec![
                DenseDistribution::uniform(3),
                DenseDistribution::point_mass(3, 5),
            ];
            dists.extend((0..50).map(|_| DenseDistribution::random(3, &mut rng)));
            for d in &dists {
                for g in &subs {
                    worst = worst.max((projection_entropy(d, g)? - sum_entropy_gap(d, g)?).abs());
                }
            }
            Ok((
            max_pfr <= 6.0 && max_cefr <= 7.0 && worst <= 1e-12,
            format!(
                "max PFR factor {max_pfr:.4} over {pairs} pairs, max CEFR factor {max_cefr:.4} over {cond}, projection residual {worst:.2e}"
            ),
        ))
        },
    )
}

pub fn criterion_8(p: VerifyProfile) -> CriterionResult {
    run_check(
        8,
        "symmetry",
        "invariant subspaces, orbit distance, permutation invariance",
        || {
            let mut bad = Vec::new();
            let layers: &[(usize, usize)] = if full(p) {
                &[(3, 1), (3, 2), (4, 1), (4, 3)]
            } else {
                &[(3, 1), (3, 2)]
            };
            for &(m, r) in layers {
                let inv = invariant_subspaces(m, r)?;
                if !(inv.len() == 2 && inv.iter().all(|g| g.is_zero() || g.is_full())) {
                    bad.push(format!("({m},{r}) has {} invariant subspaces", inv.len()));
                }
            }
            let scans: &[(usize, usize)] = if full(p) {
                &[(3, 2), (4, 1)]
            } else {
                &[(3, 2)]
            };
            let mut scanned = 0;
            for &(m, r) in scans {
                let scan = orbit_scan(m, r, DEFAULT_ORBIT_BUDGET)?;
                scanned += scan.subspaces;
                if !scan.misses.is_empty() {
                    bad.push(format!(
                        "({m},{r}): {} subspaces below the bound",
                        scan.misses.len()
                    ));
                }
            }
            let worst = (0..50u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = chunk_rng(8, i);
                    let m = 2 + (i as usize % 2);
                    let r = 1 + (i as usize / 2) % (m - 1);
                    let g = Subspace::random(layer_size(m, r), &mut rng);
                    let f = AffineMap::random(m, &mut rng);
                    perm_invariance_check(m, r, 0.1, &g, &f).map(|x| x.residual)
                })
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            if worst >= 1e-9 {
                bad.push(format!("perm-invariance residual {worst:e}"));
            }
            Ok((
                bad.is_empty(),
                if bad.is_empty() {
                    format!("{} layers trivial, {scanned} orbits reach the bound, perm residual {worst:.2e}", layers.len())
                } else {
                    bad.join("; ")
                },
            ))
        },
    )
}

pub fn criterion_9(_p: VerifyProfile) -> CriterionResult {
    run_check(9, "analysis", "FR gap", || {
        let mut min_slack = f64::INFINITY;
        let mut bad = Vec::new();
        for m in [2, 3] {
            for r in 0..=m {
                for d in [0.05, 0.1, 0.2, 0.3] {
                    let rep = fr_gap_check(m, r, d)?;
                    min_slack = min_slack.min(140.0 * rep.doubling - rep.gap);
                    if !rep.holds {
                        bad.push(format!("m={m} r={r} delta={d}"));
                    }
                }
            }
        }
        Ok((
            bad.is_empty(),
            if bad.is_empty() {
                format!("holds on the grid, min slack {min_slack:.3e}")
            } else {
                bad.join("; ")
            },
        ))
    })
}

pub fn criterion_10(_p: VerifyProfile) -> CriterionResult {
    run_check(10, "decoder", "error-split identities", || {
        let mut worst: f64 = 0.0;
        for n in [4, 6] {
            for (d, g) in [(0.1, 0.125), (0.2, 0.2)] {
                worst = worst.max(error_split_check(n, d, g)?.max_residual());
            }
        }
        Ok((worst <= 1e-12, format!("max residual {worst:.2e}")))
    })
}

pub fn criterion_11(p: VerifyProfile) -> CriterionResult {
    run_check(
        11,
        "decoder",
        "bit-MAP symmetry, punctured decoding, P_bit trend",
        || {
            let trials = if full(p) { 10_000 } else { 2_000 };
            let mut parts = Vec::new();
            let mut ok = true;

            let mut spread: f64 = 0.0;
            for r in [1, 2] {
                let prof = exact_bit_error_profile(&Codebook::new(RmCode::new(3, r)?)?, 0.1)?;
                let lo = prof.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = prof.iter().copied().fold(0.0, f64::max);
                spread = spread.max(hi - lo);
            }
            ok &= spread <= 1e-12;
            parts.push(format!("per-bit spread {spread:.1e}"));

            let cb = Codebook::new(RmCode::new(4, 1)?)?;
            let exact = exact_bit_error_profile(&cb, 0.1)?[0];
            let mut punct = PunctureParams::new(0.1, 0.2, 32);
            punct.bypass_rate_check = true;
            let est = bit_error_experiment(
                &cb,
                &ExperimentSpec {
                    delta: 0.1,
                    decoder: DecoderKind::PuncturedList,
                    puncture: Some(punct),
                    trials,
                    seed: 1,
                },
            )?;
            let within = est.p_bit <= 2.0 * exact + 3.0 * est.stderr;
            ok &= within;
            parts.push(format!(
                "RM(4,1) punctured p_bit {:.5} +- {:.5} vs 2 x bit-MAP {:.5} (rate check bypassed)",
                est.p_bit,
                est.stderr,
                2.0 * exact
            ));

            let m_max = if full(p) { 6 } else { 5 };
            let mut series = Vec::new();
            for m in 3..=m_max {
                let cb = Codebook::new(RmCode::new(m, 1)?)?;
                let e = bit_error_experiment(
                    &cb,
                    &ExperimentSpec {
                        delta: 0.05,
                        decoder: DecoderKind::BitMap,
                        puncture: None,
                        trials,
                        seed: 11,
                    },
                )?;
                series.push((m, e.p_bit, e.stderr));
            }
            let trend_ok = series
                .windows(2)
                .all(|w| w[1].1 <= w[0].1 + 3.0 * (w[0].2.powi(2) + w[1].2.powi(2)).sqrt());
            ok &= trend_ok;
            parts.push(format!(
                "RM(m,1) P_bit {}",
                series
                    .iter()
                    .map(|(m, pb, _)| format!("m={m}:{pb:.2e}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            ));
            Ok((ok, parts.join("; ")))
        },
    )
}

pub fn criterion_12(_p: VerifyProfile) -> CriterionResult {
    run_check(12, "analysis", "recurrence propagation trend", || {
        let t = recurrence_propagate(0.05, 0.1, 60)?;
        let trend = t.trend(RateProfile::Capacity, 10);
        let slope = trend.slope.unwrap_or(f64::NAN);
        let first = trend.points.first().map_or(f64::NAN, |p| p.normalized);
        let last = trend.points.last().map_or(f64::NAN, |p| p.normalized);
        Ok((
            trend.nonincreasing() && slope < 0.0,
            format!(
                "normalized bound {first:.4} at m=10 -> {last:.4} at m=60, {} increases, slope {slope:.4}",
                trend.increases.len()
            ),
        ))
    })
}

/// Stochastic command lines exercised by the determinism check.
pub fn stochastic_commands(p: VerifyProfile) -> Vec<Vec<String>> {
    let trials = if full(p) { "5000" } else { "1000" };
    let lines: Vec<Vec<&str>> = vec![
        vec![
            "entropies",
            "--m",
            "6",
            "--delta",
            "0.1",
            "--mc-samples",
            "20000",
            "--seed",
            "3",
        ],
        vec![
            "perm-invariance",
            "--m",
            "3",
            "--r",
            "1",
            "--delta",
            "0.1",
            "--instances",
            "20",
            "--seed",
            "4",
        ],
        vec!["pfr", "--k", "3", "--pairs", "40", "--seed", "7"],
        vec!["cefr", "--k", "3", "--pairs", "20", "--seed", "8"],
        vec!["conjecture", "--k", "3", "--instances", "20", "--seed", "9"],
        vec![
            "decode-bench",
            "--m",
            "4",
            "--r",
            "1",
            "--delta",
            "0.05",
            "--trials",
            trials,
            "--seed",
            "1",
        ],
        vec![
            "decode-bench",
            "--m",
            "3",
            "--r",
            "1",
            "--delta",
            "0.05",
            "--delta-prime",
            "0.1",
            "--L",
            "8",
            "--trials",
            trials,
            "--seed",
            "2",
        ],
        vec![
            "list-containment",
            "--m",
            "4",
            "--r",
            "2",
            "--delta",
            "0.1",
            "--trials",
            trials,
            "--seed",
            "5",
        ],
    ];
    lines
        .into_iter()
        .map(|l| l.into_iter().map(String::from).collect())
        .collect()
}

fn render_with_threads(args: &[String], threads: usize) -> CliResult<String> {
    let mut argv = vec!["rmlab".to_string()];
    argv.extend(args.iter().cloned());
    argv.push("--threads".into());
    argv.push(threads.to_string());
    let cli = <Cli as clap::Parser>::try_parse_from(&argv)
        .map_err(|e| crate::error::CliError::config(e.to_string()))?;
    Ok(execute(&cli)?.text)
}

pub fn criterion_13(p: VerifyProfile) -> CriterionResult {
    run_check(
        13,
        "cli",
        "determinism across reruns and worker counts",
        || {
            let mut bad = Vec::new();
            let cmds = stochastic_commands(p);
            for args in &cmds {
                let a = render_with_threads(args, 1)?;
                let b = render_with_threads(args, 1)?;
                let c = render_with_threads(args, 4)?;
                if a != b || a != c {
                    bad.push(args[0].clone());
                }
            }
            Ok((
                bad.is_empty(),
                if bad.is_empty() {
                    format!(
                        "{} stochastic commands byte-identical at 1 and 4 workers",
                        cmds.len()
                    )
                } else {
                    format!("differing output: {}", bad.join(", "))
                },
            ))
        },
    )
}

/// A check that pushes an out-of-range noise level past the guard; it
/// always fails and exercises the failure report.
pub fn injected_fault() -> CriterionResult {
    run_check(
        0,
        "analysis/layer_entropies",
        "injected fault: delta guard bypass",
        || {
            layer_entropies(2, 0.6)?;
            Ok((false, "guard did not trigger".into()))
        },
    )
}

pub type Criterion = fn(VerifyProfile) -> CriterionResult;

pub const CRITERIA: [Criterion; 13] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
    criterion_12,
    criterion_13,
];

pub fn verify_all(profile: VerifyProfile, only: &[u8], inject_fault: bool) -> VerifyReport {
    let mut criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .enumerate()
        .filter(|(i, _)| only.is_empty() || only.contains(&(*i as u8 + 1)))
        .map(|(_, c)| c(profile))
        .collect();
    if inject_fault {
        criteria.push(injected_fault());
    }
    let passed = criteria.iter().filter(|c| c.passed).count();
    VerifyReport {
        profile,
        passed,
        failed: criteria.len() - passed,
        criteria,
    }
}
