use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use rmlab::analysis::{
    self, balance_check, entropy_doubling_via_cond_ruzsa, entropy_doubling_with, fr_gap_check_with,
    layer_entropies, mc_layer_entropy, per_set_profile, perm_invariance_check,
    recurrence_propagate,
};
use rmlab::decoder::{
    bit_error_experiment, error_split_check, exact_bit_error_profile, list_containment, Codebook,
    DecoderKind, ExperimentSpec, PunctureParams, MAX_EXACT_PROFILE_N,
};
use rmlab::f2::{enumerate_subspaces, Subspace};
use rmlab::info::{binary_entropy, DenseDistribution};
use rmlab::pfr::{
    cefr_check, conjecture_search, pfr_check, random_conditional_pair, random_pair, FrReport,
};
use rmlab::rm::{layer_size, monomial_name, succeeds};
use rmlab::seeding::chunk_rng;
use rmlab::symmetry::{invariant_subspaces, layer_monomial_names, max_orbit_distance, AffineMap};
use rmlab::{Error, RmCode};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::output::{csv_rows, destination, render, Failure, Header, Report};
use crate::verify;

/// Tolerance of exact identities.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Slack allowed in exact inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// Largest layer dimension for a full orbit scan.
pub const MAX_ORBIT_SCAN_C: usize = 5;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    pub destination: Option<PathBuf>,
    pub failures: Vec<Failure>,
}

fn require_seed(seed: Option<u64>, command: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::config(format!("`{command}` is stochastic and needs --seed")))
}

pub fn seed_of(command: &Command) -> Option<u64> {
    match command {
        Command::Entropies(a) => a.seed,
        Command::PermInvariance(a) => a.seed,
        Command::Pfr(a) | Command::Cefr(a) => a.seed,
        Command::Conjecture(a) => a.seed,
        Command::DecodeBench(a) => a.seed,
        Command::ListContainment(a) => a.seed,
        _ => None,
    }
}

fn layers(m: usize, r: Option<usize>) -> CliResult<Vec<usize>> {
    match r {
        Some(r) if r > m => Err(CliError::config(format!("--r {r} exceeds --m {m}"))),
        Some(r) => Ok(vec![r]),
        None => Ok((0..=m).collect()),
    }
}

#[derive(Serialize)]
struct EntropyRow {
    m: usize,
    r: String,
    delta: f64,
    method: &'static str,
    layer_size: Option<usize>,
    f: f64,
    a: Option<f64>,
    favg: Option<f64>,
    stderr: Option<f64>,
    expected: Option<f64>,
    residual: Option<f64>,
}

fn entropies(a: &EntropiesArgs) -> CliResult<Report> {
    if let Some(samples) = a.mc_samples {
        let seed = require_seed(a.seed, "entropies --mc-samples")?;
        let mut rows = Vec::new();
        let mut total = 0.0;
        for r in 0..=a.m {
            let e = mc_layer_entropy(a.m, r, a.delta, samples, seed)?;
            total += e.estimate;
            rows.push(EntropyRow {
                m: a.m,
                r: r.to_string(),
                delta: a.delta,
                method: "monte-carlo",
                layer_size: Some(layer_size(a.m, r)),
                f: e.estimate,
                a: Some(total),
                favg: Some(e.estimate / layer_size(a.m, r) as f64),
                stderr: Some(e.stderr),
                expected: None,
                residual: None,
            });
        }
        let expected = (1u64 << a.m) as f64 * binary_entropy(a.delta);
        rows.push(sum_row(a.m, a.delta, "monte-carlo", total, expected));
        return Ok(Report::table(csv_rows(&rows)?).note("samples", samples));
    }
    let p = layer_entropies(a.m, a.delta)?;
    let mut rows: Vec<EntropyRow> = (0..=a.m)
        .map(|r| EntropyRow {
            m: a.m,
            r: r.to_string(),
            delta: a.delta,
            method: "exact",
            layer_size: Some(layer_size(a.m, r)),
            f: p.f[r],
            a: Some(p.a[r]),
            favg: Some(p.favg[r]),
            stderr: None,
            expected: None,
            residual: None,
        })
        .collect();
    rows.push(sum_row(
        a.m,
        a.delta,
        "exact",
        p.total(),
        p.expected_total(),
    ));
    let residual = p.conservation_residual();
    let bad_r = (0..a.m).find(|&r| p.favg[r] > p.favg[r + 1] + INEQUALITY_SLACK);
    Ok(Report::table(csv_rows(&rows)?)
        .fail_if(residual > IDENTITY_TOL, "entropy-conservation", || {
            format!("|sum f - 2^m h(delta)| = {residual:e}")
        })
        .fail_if(bad_r.is_some(), "favg-monotone-in-r", || {
            let r = bad_r.unwrap_or(0);
            format!(
                "favg[{r}] = {} > favg[{}] = {}",
                p.favg[r],
                r + 1,
                p.favg[r + 1]
            )
        }))
}

fn sum_row(m: usize, delta: f64, method: &'static str, total: f64, expected: f64) -> EntropyRow {
    EntropyRow {
        m,
        r: "sum".into(),
        delta,
        method,
        layer_size: None,
        f: total,
        a: None,
        favg: None,
        stderr: None,
        expected: Some(expected),
        residual: Some((total - expected).abs()),
    }
}

#[derive(Serialize)]
struct PerSetRow {
    set: u32,
    monomial: String,
    degree: u32,
    f: f64,
    z: f64,
}

fn per_set(a: &NoiseArgs) -> CliResult<Report> {
    let p = per_set_profile(a.m, a.delta)?;
    let rows: Vec<PerSetRow> = (0..1u32 << a.m)
        .map(|s| PerSetRow {
            set: s,
            monomial: monomial_name(s),
            degree: s.count_ones(),
            f: p.f[s as usize],
            z: p.z[s as usize],
        })
        .collect();
    let mut order_bad = Vec::new();
    for x in 0..1u32 << a.m {
        for y in 0..1u32 << a.m {
            if succeeds(x, y) && p.f[x as usize] > p.f[y as usize] + INEQUALITY_SLACK {
                order_bad.push(format!("{} > {}", monomial_name(x), monomial_name(y)));
            }
        }
    }
    let bhat_bad: Vec<String> = (0..1usize << a.m)
        .filter(|&s| {
            let (z, h) = (p.z[s], p.f[s]);
            z + INEQUALITY_SLACK < h || 1.0 - z * z + INEQUALITY_SLACK < (1.0 - h) * (1.0 - h)
        })
        .map(|s| monomial_name(s as u32))
        .collect();
    let expected = (1u64 << a.m) as f64 * binary_entropy(a.delta);
    let residual = (p.total() - expected).abs();
    Ok(Report::table(csv_rows(&rows)?)
        .note("sum_f", p.total())
        .note("expected", expected)
        .fail_if(!order_bad.is_empty(), "per-set-partial-order", || {
            order_bad.join("; ")
        })
        .fail_if(!bhat_bad.is_empty(), "bhattacharyya-entropy-bounds", || {
            bhat_bad.join("; ")
        })
        .fail_if(residual > IDENTITY_TOL, "per-set-conservation", || {
            format!("residual {residual:e}")
        }))
}

fn balance(a: &LayerArgs) -> CliResult<Report> {
    let reps = layers(a.m, a.r)?
        .into_iter()
        .map(|r| balance_check(a.m, r, a.delta))
        .collect::<Result<Vec<_>, Error>>()?;
    let worst = reps.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(Report::table(csv_rows(&reps)?)
        .note("max_residual", worst)
        .fail_if(worst >= IDENTITY_TOL, "balance-identity", || {
            format!("max residual {worst:e}")
        }))
}

#[derive(Serialize)]
struct DoublingRow {
    m: usize,
    r: usize,
    delta: f64,
    layer_size: usize,
    doubling: f64,
    doubling_cond_ruzsa: Option<f64>,
}

fn doubling(a: &PairArgs) -> CliResult<Report> {
    let mut rows = Vec::new();
    for r in layers(a.m, a.r)? {
        let d = entropy_doubling_with(a.m, r, a.delta, a.allow_m4)?;
        let alt = if a.m <= analysis::MAX_PAIR_M {
            Some(entropy_doubling_via_cond_ruzsa(a.m, r, a.delta)?)
        } else {
            None
        };
        rows.push(DoublingRow {
            m: a.m,
            r,
            delta: a.delta,
            layer_size: layer_size(a.m, r),
            doubling: d,
            doubling_cond_ruzsa: alt,
        });
    }
    let negative = rows.iter().any(|r| r.doubling < -INEQUALITY_SLACK);
    let disagree = rows
        .iter()
        .filter_map(|r| r.doubling_cond_ruzsa.map(|b| (r.doubling - b).abs()))
        .fold(0.0, f64::max);
    Ok(Report::table(csv_rows(&rows)?)
        .fail_if(negative, "doubling-nonnegative", || {
            "negative doubling".into()
        })
        .fail_if(disagree > IDENTITY_TOL, "doubling-two-paths", || {
            format!("paths differ by {disagree:e}")
        }))
}

fn fr_gap(a: &PairArgs) -> CliResult<Report> {
    let reps = layers(a.m, a.r)?
        .into_iter()
        .map(|r| fr_gap_check_with(a.m, r, a.delta, a.allow_m4))
        .collect::<Result<Vec<_>, Error>>()?;
    let bad: Vec<String> = reps
        .iter()
        .filter(|r| !r.holds)
        .map(|r| format!("r = {}: gap {} > 140 * {}", r.r, r.gap, r.doubling))
        .collect();
    Ok(Report::table(csv_rows(&reps)?).fail_if(!bad.is_empty(), "fr-gap", || bad.join("; ")))
}

#[derive(Serialize)]
struct PermRow {
    instance: usize,
    dim: usize,
    before: f64,
    after: f64,
    residual: f64,
}

fn perm_invariance(a: &PermArgs) -> CliResult<Report> {
    let seed = require_seed(a.seed, "perm-invariance")?;
    let c = layer_size(a.m, a.r);
    let rows = (0..a.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = chunk_rng(seed, i as u64);
            let g = Subspace::random(c, &mut rng);
            let f = AffineMap::random(a.m, &mut rng);
            let rep = perm_invariance_check(a.m, a.r, a.delta, &g, &f)?;
            Ok(PermRow {
                instance: i,
                dim: g.dim(),
                before: rep.before,
                after: rep.after,
                residual: rep.residual,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(Report::table(csv_rows(&rows)?)
        .note("max_residual", worst)
        .fail_if(worst >= IDENTITY_TOL, "perm-invariance", || {
            format!("max residual {worst:e}")
        }))
}

fn basis_strings(g: &Subspace) -> Vec<String> {
    g.basis().iter().map(|v| v.to_string()).collect()
}

/// Orbit scan over every subspace of the layer.
pub struct OrbitScan {
    pub subspaces: usize,
    pub reached: usize,
    pub incomplete: usize,
    pub misses: Vec<(Vec<String>, usize, usize)>,
    pub states: usize,
}

pub fn orbit_scan(m: usize, r: usize, budget: usize) -> CliResult<OrbitScan> {
    let c = layer_size(m, r);
    if c > MAX_ORBIT_SCAN_C {
        return Err(Error::GuardExceeded {
            what: "layer dimension C(m,r) for a full orbit scan",
            limit: MAX_ORBIT_SCAN_C,
            got: c,
        }
        .into());
    }
    let subs = enumerate_subspaces(c)?;
    let results = subs
        .par_iter()
        .map(|g| max_orbit_distance(g, m, r, budget).map(|o| (g, o)))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(OrbitScan {
        subspaces: subs.len(),
        reached: results.iter().filter(|(_, o)| o.reached_bound()).count(),
        incomplete: results.iter().filter(|(_, o)| !o.complete).count(),
        misses: results
            .iter()
            .filter(|(_, o)| !o.reached_bound())
            .map(|(g, o)| (basis_strings(g), o.distance, o.bound))
            .collect(),
        states: results.iter().map(|(_, o)| o.states_explored).sum(),
    })
}

fn symmetry(a: &SymmetryArgs) -> CliResult<Report> {
    if a.m < 2 {
        return Err(CliError::config("symmetry needs --m >= 2"));
    }
    let c = layer_size(a.m, a.r);
    let inv = invariant_subspaces(a.m, a.r)?;
    let only_trivial = inv.len() == 2 && inv.iter().all(|g| g.is_zero() || g.is_full()) || c == 0;
    let mut result = json!({
        "m": a.m,
        "r": a.r,
        "layer_size": c,
        "monomials": layer_monomial_names(a.m, a.r),
        "invariant_subspaces": inv.iter().map(basis_strings).collect::<Vec<_>>(),
        "only_trivial_invariant": only_trivial,
    });
    let mut report_failures = Vec::new();
    if !only_trivial {
        report_failures.push(Failure::new(
            "invariant-subspaces",
            format!("{} invariant subspaces", inv.len()),
        ));
    }
    if c <= MAX_ORBIT_SCAN_C {
        let scan = orbit_scan(a.m, a.r, a.budget)?;
        result["orbit"] = json!({
            "subspaces": scan.subspaces,
            "reached_bound": scan.reached,
            "incomplete": scan.incomplete,
            "states_explored": scan.states,
            "misses": scan.misses.iter().map(|(b, d, bd)| json!({"basis": b, "distance": d, "bound": bd})).collect::<Vec<_>>(),
        });
        if !scan.misses.is_empty() {
            report_failures.push(Failure::new(
                "orbit-distance",
                format!("{} subspaces below the bound", scan.misses.len()),
            ));
        }
    }
    let mut rep = Report::json(result);
    rep.failures = report_failures;
    Ok(rep)
}

#[derive(Serialize)]
struct RecurrenceRow {
    m: usize,
    r: usize,
    bound: f64,
    normalized: f64,
    per_bit: f64,
    strong_step: bool,
}

fn recurrence(a: &RecurrenceArgs) -> CliResult<Report> {
    let t = recurrence_propagate(a.epsilon, a.delta, a.m_max)?;
    let profile: analysis::RateProfile = a.profile.into();
    let rows: Vec<RecurrenceRow> = (t.base_m..=t.m_max)
        .filter_map(|m| {
            profile
                .degree(m, a.delta, a.epsilon)
                .map(|r| RecurrenceRow {
                    m,
                    r,
                    bound: t.bound(m, r),
                    normalized: t.normalized(m, r),
                    per_bit: t.per_bit(m, r),
                    strong_step: t.strong[m - t.base_m][r],
                })
        })
        .collect();
    let trend = t.trend(profile, a.trend_from);
    let increases: Vec<String> = trend.increases.iter().map(|m| m.to_string()).collect();
    Ok(Report::table(csv_rows(&rows)?)
        .note("trend_from", a.trend_from)
        .note("nonincreasing", trend.nonincreasing())
        .note(
            "increases_at",
            if increases.is_empty() {
                "none".into()
            } else {
                increases.join(" ")
            },
        )
        .note(
            "slope_log2_vs_sqrt_m",
            trend.slope.map_or("undefined".into(), |s| s.to_string()),
        ))
}

#[derive(Serialize)]
struct FrInstance {
    instance: usize,
    k: usize,
    reference_distance: f64,
    best_distance: f64,
    factor: f64,
    best_basis: Vec<String>,
}

fn fr_sweep(a: &FrArgs, conditional: bool) -> CliResult<Report> {
    let name = if conditional { "cefr" } else { "pfr" };
    let seed = require_seed(a.seed, name)?;
    let results: Vec<(usize, Result<FrReport, Error>)> = (0..a.pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = chunk_rng(seed, i as u64);
            let rep = if conditional {
                let (x, y) = random_conditional_pair(a.k, &mut rng);
                cefr_check(&x, &y)
            } else {
                let (p, q) = random_pair(a.k, &mut rng);
                pfr_check(&p, &q)
            };
            (i, rep)
        })
        .collect();
    let mut failures = Vec::new();
    let mut instances = Vec::new();
    for (i, r) in results {
        match r {
            Ok(rep) => instances.push(FrInstance {
                instance: i,
                k: rep.best_subspace.ambient_dim(),
                reference_distance: rep.reference_distance,
                best_distance: rep.best_distance,
                factor: rep.factor,
                best_basis: basis_strings(&rep.best_subspace),
            }),
            Err(Error::TheoremViolation { check, detail }) => {
                failures.push(Failure::new(check, format!("instance {i}: {detail}")))
            }
            Err(e) => return Err(e.into()),
        }
    }
    let max = instances.iter().map(|r| r.factor).fold(0.0, f64::max);
    let mean = instances.iter().map(|r| r.factor).sum::<f64>() / instances.len().max(1) as f64;
    let budget = if conditional { 7.0 } else { 6.0 };
    let mut rep = Report::json(json!({
        "k_max": a.k,
        "pairs": a.pairs,
        "budget": budget,
        "max_factor": max,
        "mean_factor": mean,
        "instances": instances,
    }));
    rep.failures = failures;
    Ok(rep)
}

fn conjecture(a: &ConjectureArgs) -> CliResult<Report> {
    let seed = require_seed(a.seed, "conjecture")?;
    let dists: Vec<DenseDistribution> = (0..a.instances)
        .map(|i| DenseDistribution::random(a.k, &mut chunk_rng(seed, i as u64)))
        .collect();
    let mut summary = Vec::new();
    let mut missing = 0usize;
    for &c1 in &a.c1 {
        let res = dists
            .par_iter()
            .map(|p| conjecture_search(p, c1))
            .collect::<Result<Vec<_>, Error>>()?;
        let none = res.iter().filter(|r| r.subspace.is_none()).count();
        missing += none;
        let ratios: Vec<f64> = res
            .iter()
            .filter(|r| r.subspace.is_some())
            .map(|r| r.dim_ratio)
            .collect();
        summary.push(json!({
            "c1": c1,
            "beyond_c1_limit": c1 >= rmlab::pfr::CONJECTURE_C1_LIMIT,
            "instances": res.len(),
            "without_subspace": none,
            "max_dim_ratio": ratios.iter().copied().fold(0.0, f64::max),
            "mean_dim_ratio": ratios.iter().sum::<f64>() / ratios.len().max(1) as f64,
            "max_dim": res.iter().filter_map(|r| r.subspace.as_ref().map(|g| g.dim())).max(),
        }));
    }
    let mut rep = Report::json(json!({ "k": a.k, "summary": summary }));
    if missing > 0 {
        rep = rep.note(
            "counterexamples",
            format!("{missing} instances had no qualifying subspace"),
        );
    }
    Ok(rep)
}

fn error_split(a: &ErrorSplitArgs) -> CliResult<Report> {
    let rep = error_split_check(a.n, a.delta, a.gamma)?;
    let worst = rep.max_residual();
    Ok(
        Report::json(serde_json::to_value(&rep)?).fail_if(worst > 1e-12, "error-split", || {
            format!("max residual {worst:e}")
        }),
    )
}

#[derive(Serialize)]
struct DecodeRow {
    m: usize,
    r: usize,
    delta: f64,
    delta_prime: Option<f64>,
    decoder: &'static str,
    trials: usize,
    p_bit: f64,
    ci_lo: f64,
    ci_hi: f64,
    seed: u64,
    stderr: f64,
    worst_position: f64,
    list_size: Option<usize>,
    list_containment: Option<f64>,
    exact_bitmap_p_bit: Option<f64>,
}

fn parse_list_size(s: &str, k: usize) -> CliResult<usize> {
    if s == "full" {
        return Ok(1 << k);
    }
    match s.parse::<usize>() {
        Ok(l) if l > 0 => Ok(l),
        _ => Err(CliError::config(format!(
            "--L must be a positive number or `full`, got `{s}`"
        ))),
    }
}

fn decode_bench(a: &DecodeArgs) -> CliResult<Report> {
    let seed = require_seed(a.seed, "decode-bench")?;
    let cb = Codebook::new(RmCode::new(a.m, a.r)?)?;
    let decoder = a.decoder.unwrap_or(if a.delta_prime.is_some() {
        DecoderArg::Punctured
    } else {
        DecoderArg::Bitmap
    });
    let (kind, puncture) = match decoder {
        DecoderArg::Bitmap => (DecoderKind::BitMap, None),
        DecoderArg::Ml => (DecoderKind::Ml, None),
        DecoderArg::Punctured => {
            let dp = a
                .delta_prime
                .ok_or_else(|| CliError::config("the punctured decoder needs --delta-prime"))?;
            let mut p = PunctureParams::new(a.delta, dp, parse_list_size(&a.list, cb.k())?);
            p.bypass_rate_check = a.force_rate;
            p.validate(cb.code()).map_err(|e| match e {
                Error::Config(msg) => {
                    CliError::config(format!("{msg}; pass --force-rate to run anyway"))
                }
                other => other.into(),
            })?;
            (DecoderKind::PuncturedList, Some(p))
        }
    };
    let spec = ExperimentSpec {
        delta: a.delta,
        decoder: kind,
        puncture: puncture.clone(),
        trials: a.trials,
        seed,
    };
    let est = bit_error_experiment(&cb, &spec)?;
    let exact = if cb.n() <= MAX_EXACT_PROFILE_N {
        Some(
            exact_bit_error_profile(&cb, a.delta)?
                .iter()
                .copied()
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    let row = DecodeRow {
        m: a.m,
        r: a.r,
        delta: a.delta,
        delta_prime: puncture.as_ref().map(|p| p.delta_prime),
        decoder: kind.name(),
        trials: a.trials,
        p_bit: est.p_bit,
        ci_lo: est.ci.0,
        ci_hi: est.ci.1,
        seed,
        stderr: est.stderr,
        worst_position: est.worst_position(),
        list_size: puncture.as_ref().map(|p| p.list_size.min(1 << cb.k())),
        list_containment: est.list_containment,
        exact_bitmap_p_bit: exact,
    };
    let mut rep = Report::table(csv_rows(&[row])?).note("rate", cb.code().rate());
    if let Some(h) = &est.list_distance_histogram {
        let s: Vec<String> = h.iter().map(|c| c.to_string()).collect();
        rep = rep.note("list_distance_histogram", s.join(" "));
    }
    Ok(rep)
}

#[derive(Serialize)]
struct ContainmentRow {
    m: usize,
    r: usize,
    delta: f64,
    list_size: usize,
    trials: usize,
    containment: f64,
    seed: u64,
}

fn containment(a: &ContainmentArgs) -> CliResult<Report> {
    let seed = require_seed(a.seed, "list-containment")?;
    let cb = Codebook::new(RmCode::new(a.m, a.r)?)?;
    if a.lists.contains(&0) {
        return Err(CliError::config("list sizes must be positive"));
    }
    let rows: Vec<ContainmentRow> = list_containment(&cb, a.delta, &a.lists, a.trials, seed)?
        .into_iter()
        .map(|(l, c)| ContainmentRow {
            m: a.m,
            r: a.r,
            delta: a.delta,
            list_size: l,
            trials: a.trials,
            containment: c,
            seed,
        })
        .collect();
    Ok(Report::table(csv_rows(&rows)?))
}

fn verify_command(a: &VerifyArgs) -> CliResult<Report> {
    let report = verify::verify_all(a.profile, &a.only, a.inject_fault);
    let failures = report
        .criteria
        .iter()
        .filter(|c| !c.passed)
        .map(|c| {
            Failure::new(
                format!("criterion {} ({})", c.id, c.module),
                c.detail.clone(),
            )
        })
        .collect();
    let mut rep = Report::json(serde_json::to_value(&report)?);
    rep.failures = failures;
    Ok(rep)
}

fn dispatch(command: &Command) -> CliResult<Report> {
    match command {
        Command::Entropies(a) => entropies(a),
        Command::PerSet(a) => per_set(a),
        Command::Balance(a) => balance(a),
        Command::Doubling(a) => doubling(a),
        Command::FrGap(a) => fr_gap(a),
        Command::PermInvariance(a) => perm_invariance(a),
        Command::Symmetry(a) => symmetry(a),
        Command::Recurrence(a) => recurrence(a),
        Command::Pfr(a) => fr_sweep(a, false),
        Command::Cefr(a) => fr_sweep(a, true),
        Command::Conjecture(a) => conjecture(a),
        Command::ErrorSplit(a) => error_split(a),
        Command::DecodeBench(a) => decode_bench(a),
        Command::ListContainment(a) => containment(a),
        Command::Verify(a) => verify_command(a),
    }
}

/// Runs a command and renders its artifact without writing it.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let start = Instant::now();
    let format = cli
        .output
        .format
        .unwrap_or_else(|| cli.command.default_format());
    let report = if cli.output.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.output.threads)
            .build()?
            .install(|| dispatch(&cli.command))?
    } else {
        dispatch(&cli.command)?
    };
    let header = Header {
        version: crate::output::VERSION,
        command: cli.command.name().to_string(),
        config: serde_json::to_value(&cli.command)?,
        seed: seed_of(&cli.command),
        wall_clock_ms: cli.output.stamp.then(|| start.elapsed().as_millis()),
    };
    let text = render(&header, &report, format)?;
    Ok(Outcome {
        text,
        destination: destination(cli.output.out.as_ref(), cli.command.name(), format),
        failures: report.failures,
    })
}

/// Runs a command and writes its artifact to the destination, or returns it
/// for stdout.
pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let outcome = execute(cli)?;
    if let Some(path) = &outcome.destination {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, &outcome.text)?;
    }
    Ok(outcome)
}
