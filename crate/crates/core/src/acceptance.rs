//! The acceptance suite: ten pass/fail criteria with their numerical evidence.
//!
//! Each criterion returns a [`CriterionResult`] whose `details` hold only
//! seeded, deterministic values; wall-clock times are kept separately.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::calc::identities::{annihilator_identity_residual, divergence_identity_residual, weighted_commutator_residual};
use crate::calc::random::{random_field, random_form, random_polynomial};
use crate::calc::{rat, CheckStatus, Point, PolyForm, PolyVectorField, Polynomial};
use crate::flows::{ballbox_exponent_fit, geometric_scales, ExpChart};
use crate::involutivity::{bracket_form, h_noninvolutive_at, stiefel_search, SearchOptions, Verdict};
use crate::metrics::oracle::heisenberg_lattice_distance;
use crate::metrics::{
    cc_distance, eta_continuity_audit, eta_distance, squeeze_audit, CcEstimator, CcOptions, EtaContext, EtaEstimator,
    EtaOptions, EuclideanEstimator, SqueezeOptions,
};
use crate::structures::{build_catalog_model, flat_structure, resolve_structure, ComplementedStructure, Region};
use crate::tangency::{
    box_counting_dimension, contact_set, dyadic_scales, metric_jacobian, SeminormSample, SurfaceGraph,
};

pub const CRITERIA: usize = 10;
/// Wall-clock budget of the whole suite, seconds.
pub const SUITE_BUDGET: f64 = 600.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub total_seconds: f64,
}

impl AcceptanceReport {
    pub fn passed(&self) -> usize {
        self.criteria.iter().filter(|c| c.passed).count()
    }

    /// One `PASS`/`FAIL` line per criterion.
    pub fn lines(&self) -> Vec<String> {
        self.criteria.iter().map(CriterionResult::line).collect()
    }
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.summary,
            self.seconds
        )
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "exact identity suite",
        2 => "F(3,3) regression",
        3 => "ball-box exponents",
        4 => "CC distance",
        5 => "eta-box metric",
        6 => "squeezedness",
        7 => "eta-continuity",
        8 => "tangency desk echoes",
        9 => "metric Jacobian",
        10 => "full suite runtime and determinism",
        _ => "unknown",
    }
}

/// Runs criterion `id` (1..=9). Criterion 10 needs the others; see [`run_all`].
pub fn run_criterion(id: usize, seed: u64) -> CriterionResult {
    let t0 = Instant::now();
    let (passed, summary, details) = match id {
        1 => criterion1(seed),
        2 => criterion2(seed),
        3 => criterion3(seed),
        4 => criterion4(seed),
        5 => criterion5(seed),
        6 => criterion6(seed),
        7 => criterion7(seed),
        8 => criterion8(),
        9 => criterion9(),
        _ => (false, format!("no criterion {id}"), Value::Null),
    };
    CriterionResult { id, title: title(id), passed, summary, details, seconds: t0.elapsed().as_secs_f64() }
}

/// Runs every criterion; criterion 10 checks the total time of 1..=9 and
/// reruns the randomized criteria 4 and 7 to compare their serialized output.
pub fn run_all(seed: u64, mut progress: impl FnMut(&CriterionResult)) -> AcceptanceReport {
    let t0 = Instant::now();
    let mut criteria = Vec::with_capacity(CRITERIA);
    for id in 1..CRITERIA {
        let r = run_criterion(id, seed);
        progress(&r);
        criteria.push(r);
    }
    let t10 = Instant::now();
    let first = t0.elapsed().as_secs_f64();
    let rerun: Vec<CriterionResult> = [4, 7].iter().map(|&id| run_criterion(id, seed)).collect();
    let identical = rerun.iter().all(|r| {
        let before = &criteria[r.id - 1];
        serde_json::to_string(&before.details).ok() == serde_json::to_string(&r.details).ok()
    });
    let passed = first < SUITE_BUDGET && identical;
    let c10 = CriterionResult {
        id: 10,
        title: title(10),
        passed,
        summary: format!(
            "criteria 1-9 in {first:.1} s (budget {SUITE_BUDGET} s), rerun of 4 and 7 {}",
            if identical { "byte-identical" } else { "DIFFERS" }
        ),
        details: json!({
            "seconds_1_to_9": first,
            "budget_seconds": SUITE_BUDGET,
            "rerun_identical": identical,
            "threads": rayon::current_num_threads(),
        }),
        seconds: t10.elapsed().as_secs_f64(),
    };
    progress(&c10);
    criteria.push(c10);
    AcceptanceReport { seed, criteria, total_seconds: t0.elapsed().as_secs_f64() }
}

fn heisenberg() -> ComplementedStructure {
    resolve_structure("heisenberg1").expect("catalog model")
}

/// `(ω × u)` in `R^3`: a field annihilated by the 1-form `ω`.
fn cross(omega: &PolyForm, u: &PolyVectorField) -> PolyVectorField {
    let w: Vec<Polynomial> = (0..3).map(|i| omega.coefficient(&[i])).collect();
    let c = u.components();
    PolyVectorField::new(vec![
        &(&w[1] * &c[2]) - &(&w[2] * &c[1]),
        &(&w[2] * &c[0]) - &(&w[0] * &c[2]),
        &(&w[0] * &c[1]) - &(&w[1] * &c[0]),
    ])
    .expect("three components")
}

fn criterion1(seed: u64) -> (bool, String, Value) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let instances = 200;
    let n = 3;
    let names = ["antisymmetry", "jacobi", "d_squared", "weighted_commutator", "divergence", "annihilator"];
    let mut failures = [0usize; 6];
    let mut errors = 0usize;
    for i in 0..instances {
        let x = random_field(&mut rng, n, 3, 2);
        let y = random_field(&mut rng, n, 3, 2);
        let z = random_field(&mut rng, n, 3, 2);
        let f = random_polynomial(&mut rng, n, 3, 2);
        let g = random_polynomial(&mut rng, n, 3, 2);
        let omega = random_form(&mut rng, n, 1, 3, 2);
        // d∘d on 1- and 2-forms in R^4, so both degrees have a nonzero d
        let higher = random_form(&mut rng, 4, 1 + i % 2, 3, 3);
        let checks: Result<[bool; 6], crate::calc::CalcError> = (|| {
            let xy = x.bracket(&y)?;
            let anti = (&xy + &y.bracket(&x)?).is_zero();
            let jac = (&(&x.bracket(&y.bracket(&z)?)? + &y.bracket(&z.bracket(&x)?)?) + &z.bracket(&xy)?).is_zero();
            let dd = higher.exterior_derivative()?.exterior_derivative()?.is_zero();
            let wc = weighted_commutator_residual(&x, &y, &f, &g)?.is_zero();
            let div = divergence_identity_residual(&x, &y, &omega)?.is_zero();
            let (ax, ay) = (cross(&omega, &z), cross(&omega, &x));
            let ann = matches!(annihilator_identity_residual(&ax, &ay, &omega)?, Some(r) if r.is_zero());
            Ok([anti, jac, dd, wc, div, ann])
        })();
        match checks {
            Ok(c) => {
                for (k, ok) in c.iter().enumerate() {
                    failures[k] += usize::from(!ok);
                }
            }
            Err(_) => errors += 1,
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let passed = failures.iter().all(|&f| f == 0) && errors == 0 && secs < 30.0;
    let per: serde_json::Map<String, Value> =
        names.iter().zip(failures).map(|(n, f)| (n.to_string(), json!(instances - f))).collect();
    (
        passed,
        format!(
            "{} identities x {instances} random instances, {} nonzero residuals, {secs:.1} s (limit 30 s)",
            names.len(),
            failures.iter().sum::<usize>() + errors
        ),
        json!({ "instances": instances, "exact_zero_counts": per, "errors": errors }),
    )
}

/// The twelve printed commutation relations, 0-based: `(i, j, [(l, c)])`.
const PRINTED_TABLE: [(usize, usize, &[(usize, i64)]); 12] = [
    (0, 1, &[(3, 1)]),
    (0, 2, &[(4, 1)]),
    (1, 2, &[(5, 1)]),
    (0, 3, &[(6, 1)]),
    (0, 4, &[(7, 1)]),
    (0, 5, &[(8, 1)]),
    (1, 3, &[(9, 1)]),
    (1, 4, &[(10, 1)]),
    (1, 5, &[(11, 1)]),
    (2, 3, &[(7, -1), (10, 1)]),
    (2, 4, &[(12, 1)]),
    (2, 5, &[(13, 1)]),
];

fn criterion2(seed: u64) -> (bool, String, Value) {
    let full = build_catalog_model("free33").expect("catalog model");
    let mut failed_relations = Vec::new();
    for (i, j, rhs) in PRINTED_TABLE {
        let expected: Vec<_> = rhs.iter().map(|&(l, c)| (l, rat(c, 1))).collect();
        match full.check_relation(i, j, &expected) {
            Ok(c) if c.status == CheckStatus::ExactPass => {}
            _ => failed_relations.push(format!("[X{},X{}]", i + 1, j + 1)),
        }
    }
    let jacobi_consistent = full.relation_checks().map(|c| c.iter().all(|c| c.status == CheckStatus::ExactPass));
    let table_ok = failed_relations.is_empty();

    let v6 = build_catalog_model("free33_v6").expect("catalog model");
    let s = v6.structure();
    let origin = Point::origin_exact(s.n());
    let opts = SearchOptions { restarts: 64, seed, ..Default::default() };
    let form = bracket_form(s, &origin).expect("bracket form at the origin");
    let two = stiefel_search(&form, 2, &opts);
    let min2 = two.diagnostics.restart_residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let two_ok = two.diagnostics.restart_residuals.iter().all(|&r| r >= 1e-4);
    let three = h_noninvolutive_at(s, &origin, 3, &opts);
    let (three_ok, three_verdict, three_res) = match &three {
        Ok(r) => (r.verdict == Verdict::InvolutiveAtX && r.residual <= 1e-10, r.verdict.as_str(), r.residual),
        Err(_) => (false, "error", f64::NAN),
    };
    let strong_ok = form.matrices.len() == s.n() - s.k()
        && form.matrices.iter().all(|m| (0..3).all(|a| (0..3).all(|b| m[(a, b)] == rat(0, 1))));
    let passed = table_ok && two_ok && three_ok && strong_ok;
    (
        passed,
        format!(
            "printed table {}/12 exact{}; V6 2-planes min residual {min2:.2e} (need all >= 1e-4): {}; h=3 {three_verdict} residual {three_res:.1e}: {}; strong form: {}",
            12 - failed_relations.len(),
            if table_ok { String::new() } else { format!(" (fails {})", failed_relations.join(", ")) },
            if two_ok { "ok" } else { "fails" },
            if three_ok { "ok" } else { "fails" },
            if strong_ok { "ok" } else { "fails" },
        ),
        json!({
            "printed_table_failures": failed_relations,
            "jacobi_consistent_table_exact": jacobi_consistent.unwrap_or(false),
            "v6_two_plane_restart_min": min2,
            "v6_two_plane_verdict": two.verdict.as_str(),
            "v6_three_plane_verdict": three_verdict,
            "v6_three_plane_residual": three_res,
            "strong_form_exact": strong_ok,
        }),
    )
}

fn slope_row(s: &ComplementedStructure, direction: usize, expected: f64, tol: f64) -> (bool, Value) {
    let n = s.n();
    let chart = match ExpChart::new(s, &vec![0.0; n], 1e-3, 1.0) {
        Ok(c) => c,
        Err(e) => return (false, json!({ "error": e.to_string() })),
    };
    let oracle = |x: &[f64], y: &[f64]| -> Result<(f64, f64), String> {
        let e = cc_distance(s, x, y, &CcOptions::default()).map_err(|e| e.to_string())?;
        if e.converged() {
            Ok((e.lower, e.upper))
        } else {
            Err("unconverged".into())
        }
    };
    match ballbox_exponent_fit(&chart, direction, &oracle, &geometric_scales(1e-3, 1e-1, 5)) {
        Ok(fit) => {
            let slope = fit.slope().unwrap_or(f64::NAN);
            let ok = (slope - expected).abs() <= tol && fit.dropped.is_empty();
            (ok, json!({ "direction": direction, "slope": slope, "expected": expected, "tolerance": tol, "rows": fit.rows }))
        }
        Err(e) => (false, json!({ "error": e.to_string() })),
    }
}

fn criterion3(_seed: u64) -> (bool, String, Value) {
    let t0 = Instant::now();
    let h = heisenberg();
    let engel = resolve_structure("engel").expect("catalog model");
    let rows = [
        ("heisenberg1 horizontal", slope_row(&h, 0, 1.0, 0.02)),
        ("heisenberg1 vertical", slope_row(&h, 2, 0.5, 0.05)),
        ("engel degree 3", slope_row(&engel, 3, 1.0 / 3.0, 0.05)),
    ];
    let secs = t0.elapsed().as_secs_f64();
    let passed = rows.iter().all(|r| r.1 .0) && secs < 120.0;
    let summary = rows
        .iter()
        .map(|(name, (_, v))| format!("{name} {:.4}", v["slope"].as_f64().unwrap_or(f64::NAN)))
        .collect::<Vec<_>>()
        .join(", ");
    let details: serde_json::Map<String, Value> = rows.iter().map(|(n, (_, v))| (n.to_string(), v.clone())).collect();
    (passed, format!("slopes {summary}; {secs:.1} s (limit 120 s)"), Value::Object(details))
}

fn criterion4(seed: u64) -> (bool, String, Value) {
    let h = heisenberg();
    let opts = CcOptions { seed, ..Default::default() };
    let horiz = cc_distance(&h, &[0.0; 3], &[1.0, 0.0, 0.0], &opts);
    let (h_ok, hl, hu) = match &horiz {
        Ok(e) => (e.converged() && e.lower >= 1.0 - 1e-12 && e.upper <= 1.001, e.lower, e.upper),
        Err(_) => (false, f64::NAN, f64::NAN),
    };
    let mut rows = Vec::new();
    let mut v_ok = true;
    for s in [0.05, 0.1] {
        let est = cc_distance(&h, &[0.0; 3], &[0.0, 0.0, s], &opts).ok().filter(|e| e.converged());
        let lattice = heisenberg_lattice_distance([0.0, 0.0, s], 256);
        let (upper, reference) = (est.as_ref().map_or(f64::NAN, |e| e.upper), lattice.as_ref().map_or(f64::NAN, |l| l.length));
        let rel = (upper - reference).abs() / reference;
        v_ok &= rel <= 0.1;
        rows.push(json!({ "s": s, "upper": upper, "lattice": reference, "relative_difference": rel }));
    }
    let passed = h_ok && v_ok;
    (
        passed,
        format!(
            "horizontal bracket [{hl:.6}, {hu:.6}] in [1, 1.001]: {}; vertical vs lattice: {}",
            if h_ok { "ok" } else { "fails" },
            rows.iter()
                .map(|r| format!("s={} rel {:.3}", r["s"], r["relative_difference"].as_f64().unwrap_or(f64::NAN)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        json!({ "horizontal": { "lower": hl, "upper": hu }, "vertical": rows }),
    )
}

fn random_in(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-half..half)).collect()
}

fn criterion5(seed: u64) -> (bool, String, Value) {
    let flat = flat_structure(3, 2).expect("flat model");
    let region = Region { center: vec![0.0; 3], radius: 4.0 };
    let mut flat_rows = Vec::new();
    let mut flat_ok = true;
    for eta in [1.25, 1.5, 1.75, 2.0] {
        let ctx = EtaContext::new(&flat, eta, 0.0, region.clone()).expect("valid context");
        for w in [0.01, 0.2] {
            let e = eta_distance(&ctx, &[0.0; 3], &[0.0, 0.0, w], &EtaOptions { seed, ..Default::default() });
            let exact = w.powf(1.0 / eta);
            let rel = e.as_ref().map_or(f64::INFINITY, |e| (e.upper - exact).abs() / exact);
            flat_ok &= rel <= 0.01;
            flat_rows.push(json!({ "eta": eta, "w": w, "exact": exact, "relative_error": rel }));
        }
    }

    let h = heisenberg();
    let ctx = match EtaContext::with_sampled_modulus(&h, 2.0, 256, seed) {
        Ok((c, _)) => c,
        Err(e) => return (false, format!("modulus: {e}"), Value::Null),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(5);
    let fast = EtaOptions { budget: 3, restarts: 2, seed, ..Default::default() };
    let triples: Vec<[Vec<f64>; 3]> =
        (0..500).map(|_| [random_in(&mut rng, 3, 0.2), random_in(&mut rng, 3, 0.2), random_in(&mut rng, 3, 0.2)]).collect();
    use rayon::prelude::*;
    let tri: Vec<Option<f64>> = triples
        .par_iter()
        .map(|[x, y, z]| {
            let a = eta_distance(&ctx, x, y, &fast).ok()?;
            let b = eta_distance(&ctx, y, z, &fast).ok()?;
            let c = eta_distance(&ctx, x, z, &fast).ok()?;
            // slack: positive when the inequality holds up to the widths
            Some(a.upper + b.upper + a.width() + b.width() + c.width() - c.upper)
        })
        .collect();
    let tri_failed = tri.iter().filter(|s| !matches!(s, Some(v) if *v >= -1e-12)).count();
    let tri_min = tri.iter().flatten().copied().fold(f64::INFINITY, f64::min);

    let radius = 4f64.powf(-2.0);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..200)
        .map(|_| {
            let x = random_in(&mut rng, 3, 0.2);
            let u = random_in(&mut rng, 3, 1.0);
            let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
            let r = radius * rng.random_range(0.05..1.0);
            let y = x.iter().zip(&u).map(|(a, b)| a + r * b / norm).collect();
            (x, y)
        })
        .collect();
    let sandwich_opts = EtaOptions { restarts: 2, seed, ..Default::default() };
    let sw: Vec<Option<(f64, f64)>> = pairs
        .par_iter()
        .map(|(x, y)| {
            let e = eta_distance(&ctx, x, y, &sandwich_opts).ok()?;
            let d = crate::metrics::euclid(x, y);
            // margins of upper ≥ (2/3)|x−y| and upper ≤ 2|x−y|^{1/η} + width
            Some((e.upper - 2.0 / 3.0 * d, 2.0 * d.sqrt() + e.width() - e.upper))
        })
        .collect();
    let sw_failed = sw.iter().filter(|s| !matches!(s, Some((a, b)) if *a >= -1e-12 && *b >= -1e-12)).count();
    let sw_lower = sw.iter().flatten().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let sw_upper = sw.iter().flatten().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let passed = flat_ok && tri_failed == 0 && sw_failed == 0;
    (
        passed,
        format!(
            "flat vertical within 1%: {}; triangle {}/500 (min slack {tri_min:.2e}); sandwich {}/200 (min margins {sw_lower:.2e}, {sw_upper:.2e})",
            if flat_ok { "ok" } else { "fails" },
            500 - tri_failed,
            200 - sw_failed
        ),
        json!({
            "flat_vertical": flat_rows,
            "modulus": ctx.modulus(),
            "triangle": { "triples": 500, "failed": tri_failed, "min_slack": tri_min, "budget": fast.budget, "restarts": fast.restarts },
            "sandwich": { "pairs": 200, "radius": radius, "failed": sw_failed, "min_lower_margin": sw_lower, "min_upper_margin": sw_upper },
        }),
    )
}

fn criterion6(seed: u64) -> (bool, String, Value) {
    let region = Region { center: vec![0.0; 3], radius: 0.5 };
    let base = SqueezeOptions { eta: 2.0, region: region.clone(), bands: 4, pairs_per_band: 5, seed };

    let flat = flat_structure(3, 2).expect("flat model");
    let flat_ctx = EtaContext::new(&flat, 2.0, 0.0, Region { center: vec![0.0; 3], radius: 4.0 }).expect("context");
    let flat_est = EtaEstimator { context: flat_ctx, options: EtaOptions { seed, ..Default::default() } };
    let flat_rep = squeeze_audit(&flat, &flat_est, &base);
    let flat_c = flat_rep.as_ref().map_or(f64::NAN, |r| r.overall_c);
    let flat_ok = (flat_c - 1.0).abs() <= 1e-6;

    let h = heisenberg();
    let cc = CcEstimator { structure: &h, options: CcOptions { seed, ..Default::default() } };
    let cc_rep = squeeze_audit(&h, &cc, &SqueezeOptions { pairs_per_band: 6, ..base.clone() });
    let ratio = cc_rep.as_ref().map_or(f64::NAN, |r| r.band_ratio);
    let cc_ok = ratio <= 3.0 && cc_rep.as_ref().is_ok_and(|r| r.bands.iter().all(|b| b.pairs_used > 0));

    let eu_rep = squeeze_audit(&h, &EuclideanEstimator, &base);
    let growth = eu_rep.as_ref().map_or(f64::NAN, |r| {
        let first = r.bands.first().map_or(f64::NAN, |b| b.fitted_c);
        let last = r.bands.last().map_or(f64::NAN, |b| b.fitted_c);
        last / first
    });
    let eu_ok = growth >= 4.0;
    let passed = flat_ok && cc_ok && eu_ok;
    let ser = |r: &Result<crate::metrics::SqueezeReport, crate::metrics::MetricsError>| match r {
        Ok(r) => serde_json::to_value(r).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    };
    (
        passed,
        format!(
            "flat C = {flat_c:.6} (need 1 +- 1e-6): {}; heisenberg1 cc band ratio {ratio:.3} (need <= 3): {}; euclidean band growth {growth:.2} (need >= 4): {}",
            if flat_ok { "ok" } else { "fails" },
            if cc_ok { "ok" } else { "fails" },
            if eu_ok { "ok" } else { "fails" }
        ),
        json!({ "flat": ser(&flat_rep), "cc": ser(&cc_rep), "euclidean": ser(&eu_rep) }),
    )
}

fn criterion7(seed: u64) -> (bool, String, Value) {
    let h = heisenberg();
    let ctx = match EtaContext::with_sampled_modulus(&h, 2.0, 256, seed) {
        Ok((c, _)) => c,
        Err(e) => return (false, format!("modulus: {e}"), Value::Null),
    };
    let pairs = [
        ([0.0, 0.0, 0.0], [0.1, 0.1, 0.05]),
        ([0.1, -0.2, 0.0], [0.0, 0.0, 0.1]),
        ([-0.1, 0.05, 0.02], [0.15, 0.1, -0.03]),
    ];
    let grid = [1.6, 1.8, 1.9, 1.95];
    let opts = EtaOptions { seed, ..Default::default() };
    let mut reports = Vec::new();
    let mut rows_within = 0;
    let mut rows_total = 0;
    for (x, y) in &pairs {
        match eta_continuity_audit(&ctx, x, y, 2.0, &grid, &opts) {
            Ok(r) => {
                rows_total += grid.len();
                rows_within += r.rows.iter().filter(|r| r.within).count();
                reports.push(serde_json::to_value(&r).unwrap_or(Value::Null));
            }
            Err(e) => {
                rows_total += grid.len();
                reports.push(json!({ "error": e.to_string() }));
            }
        }
    }
    let passed = rows_within == rows_total;
    (
        passed,
        format!("{rows_within}/{rows_total} (pair, eta) rows within the envelope"),
        json!({ "pairs": reports, "grid": grid }),
    )
}

fn criterion8() -> (bool, String, Value) {
    let h = heisenberg();
    let scales = dyadic_scales(2.0, 5);
    let saddle = contact_set(&h, &SurfaceGraph::saddle(), 401, 1e-6);
    let plane = contact_set(&h, &SurfaceGraph::plane(), 401, 1e-6);
    let (saddle_ok, saddle_dim, saddle_count) = match &saddle {
        Ok(c) => {
            let pts = c.contact_points();
            let line = pts.len() == 401 && pts.iter().all(|p| p[1] == 0.0);
            let dim = box_counting_dimension(&pts, &scales).map_or(f64::NAN, |d| d.dimension);
            (line && (dim - 1.0).abs() <= 0.15, dim, pts.len())
        }
        Err(_) => (false, f64::NAN, 0),
    };
    let (plane_ok, plane_dim, plane_count) = match &plane {
        Ok(c) => {
            let pts = c.contact_points();
            let single = pts == vec![vec![0.0, 0.0]];
            let dim = box_counting_dimension(&pts, &scales).map_or(f64::NAN, |d| d.dimension);
            (single && dim <= 0.15, dim, pts.len())
        }
        Err(_) => (false, f64::NAN, 0),
    };
    let hist = |c: &Result<crate::tangency::ContactCloud, _>| {
        c.as_ref().map_or(Value::Null, |c| serde_json::to_value(&c.histogram).unwrap_or(Value::Null))
    };
    (
        saddle_ok && plane_ok,
        format!(
            "saddle cloud {saddle_count} points on y=0, dimension {saddle_dim:.3}: {}; plane cloud {plane_count} point(s), dimension {plane_dim:.3}: {}",
            if saddle_ok { "ok" } else { "fails" },
            if plane_ok { "ok" } else { "fails" }
        ),
        json!({
            "grid": 401,
            "tau": 1e-6,
            "saddle": { "contact_points": saddle_count, "dimension": saddle_dim, "histogram": hist(&saddle) },
            "plane": { "contact_points": plane_count, "dimension": plane_dim, "histogram": hist(&plane) },
        }),
    )
}

fn criterion9() -> (bool, String, Value) {
    let euclid = |u: &[f64]| u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut rows = Vec::new();
    let mut ok = true;
    for (m, count) in [(1usize, 2usize), (2, 256), (3, 1000)] {
        let s = SeminormSample::from_fn(m, count, euclid).expect("valid sample");
        let j = metric_jacobian(&s, m).unwrap_or(f64::NAN);
        let skew = SeminormSample::from_fn(m, count, |u| {
            u.iter().enumerate().map(|(i, a)| ((i + 1) as f64 * a).powi(2)).sum::<f64>().sqrt()
        })
        .expect("valid sample");
        let j0 = metric_jacobian(&skew, m).unwrap_or(f64::NAN);
        let c = 1.7f64;
        let jc = metric_jacobian(&skew.scaled(c), m).unwrap_or(f64::NAN);
        let homog = (jc - c.powi(m as i32) * j0).abs() / (c.powi(m as i32) * j0);
        // |u − ⟨u,d₀⟩d₀| vanishes on the grid direction d₀
        let d0 = s.directions[0].clone();
        let degenerate = SeminormSample::from_fn(m, count, |u| {
            let c: f64 = u.iter().zip(&d0).map(|(a, b)| a * b).sum();
            u.iter().zip(&d0).map(|(a, b)| (a - c * b).powi(2)).sum::<f64>().sqrt()
        })
        .expect("valid sample");
        let jd = metric_jacobian(&degenerate, m).unwrap_or(f64::NAN);
        ok &= (j - 1.0).abs() <= 1e-3 && homog <= 1e-12 && jd == 0.0;
        rows.push(json!({ "m": m, "euclidean": j, "homogeneity_error": homog, "degenerate": jd }));
    }
    (
        ok,
        rows.iter()
            .map(|r| {
                format!(
                    "m={} euclidean {:.6}, homogeneity err {:.1e}, degenerate {}",
                    r["m"],
                    r["euclidean"].as_f64().unwrap_or(f64::NAN),
                    r["homogeneity_error"].as_f64().unwrap_or(f64::NAN),
                    r["degenerate"]
                )
            })
            .collect::<Vec<_>>()
            .join("; "),
        json!({ "rows": rows }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_table_matches_catalog_except_one_entry() {
        let (_, _, details) = criterion2(0);
        assert_eq!(details["printed_table_failures"], json!(["[X3,X4]"]));
        assert_eq!(details["jacobi_consistent_table_exact"], json!(true));
        assert_eq!(details["strong_form_exact"], json!(true));
    }

    #[test]
    fn jacobian_and_tangency_criteria_hold() {
        assert!(criterion9().0);
        assert!(criterion8().0);
    }
}
