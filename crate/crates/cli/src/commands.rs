//! One function per subcommand. Each returns the JSON result, the tolerances
//! it ran with and a CSV table.

use std::path::Path;

use ccgeo::acceptance::{self, CriterionResult};
use ccgeo::calc::json::{field_to_json, parse_rational};
use ccgeo::calc::{rational_to_f64, Point, Rational};
use ccgeo::flows::{ballbox_exponent_fit, ExpChart};
use ccgeo::involutivity::{h_noninvolutive_at, noninvolutive_at, SearchOptions};
use ccgeo::metrics::{
    cc_distance, eta_distance, squeeze_audit, CcEstimator, CcOptions, DistanceEstimate, EtaContext, EtaEstimator,
    EtaOptions, EuclideanEstimator, MetricEstimator, SqueezeOptions,
};
use ccgeo::structures::{build_catalog_model, hormander_step, ComplementedStructure, Region, CATALOG_NAMES};
use ccgeo::tangency::{box_counting_dimension, contact_set, dyadic_scales, metric_jacobian, SeminormSample, SurfaceGraph};
use serde_json::{json, Value};

use crate::output::{Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricKind {
    Cc,
    Eta,
    Euclidean,
}

pub struct Outcome {
    pub result: Value,
    pub tolerances: Value,
    pub table: Table,
    /// Set when an estimate the command exists to produce did not converge.
    pub unconverged: Option<String>,
}

impl Outcome {
    fn new(result: Value, tolerances: Value, table: Table) -> Self {
        Outcome { result, tolerances, table, unconverged: None }
    }
}

pub type CmdResult = Result<Outcome, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn rats(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|r| Value::String(r.to_string())).collect())
}

/// `origin`, or comma-separated coordinates (`p/q` accepted in exact mode).
pub fn parse_point(text: Option<&str>, n: usize, mode: Mode) -> Result<Point, String> {
    let text = match text.map(str::trim) {
        None | Some("origin") => {
            return Ok(match mode {
                Mode::Exact => Point::origin_exact(n),
                Mode::Float => Point::Float(vec![0.0; n]),
            })
        }
        Some(t) => t,
    };
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("point {text:?} has {} coordinates, expected {n}", parts.len()));
    }
    match mode {
        Mode::Exact => parts
            .iter()
            .map(|p| parse_rational(p).map_err(err))
            .collect::<Result<Vec<_>, _>>()
            .map(Point::Exact),
        Mode::Float => parts
            .iter()
            .map(|p| parse_float(p))
            .collect::<Result<Vec<_>, _>>()
            .map(Point::Float),
    }
}

fn parse_float(p: &str) -> Result<f64, String> {
    let x = match parse_rational(p) {
        Ok(r) => rational_to_f64(&r),
        Err(_) => p.parse::<f64>().map_err(|_| format!("invalid number {p:?}"))?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("non-finite coordinate {p:?}"))
    }
}

fn float_point(text: Option<&str>, n: usize) -> Result<Vec<f64>, String> {
    Ok(parse_point(text, n, Mode::Float)?.to_f64())
}

/// `lo:hi:count`, geometric.
pub fn parse_scales(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || format!("scales {text:?} must read lo:hi:count with 0 < lo < hi");
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(bad());
    }
    Ok(ccgeo::flows::geometric_scales(lo, hi, count))
}

fn structure_summary(s: &ComplementedStructure) -> Value {
    json!({
        "name": s.name(),
        "n": s.n(),
        "k": s.k(),
        "degrees": s.degrees(),
        "box": s.working_box(),
        "warnings": s.warnings(),
    })
}

pub fn catalog(name: &str) -> CmdResult {
    let mut table = Table::new(["i", "j", "expected", "status"]);
    let model = match build_catalog_model(name) {
        Ok(m) => m,
        Err(_) => {
            let s = ccgeo::structures::resolve_structure(name).map_err(err)?;
            let result = json!({ "structure": structure_summary(&s), "available": CATALOG_NAMES });
            return Ok(Outcome::new(result, json!({}), table));
        }
    };
    let checks = model.relation_checks().map_err(err)?;
    let mut rows = Vec::with_capacity(checks.len());
    for c in &checks {
        let expected: Vec<Value> = c.expected.iter().map(|(l, v)| json!([l + 1, v.to_string()])).collect();
        let status = to_value(&c.status);
        let text = c
            .expected
            .iter()
            .map(|(l, v)| format!("{v}*X{}", l + 1))
            .collect::<Vec<_>>()
            .join(" + ");
        table.push(vec![(c.i + 1).into(), (c.j + 1).into(), text.into(), status.as_str().unwrap_or("").into()]);
        rows.push(json!({ "bracket": [c.i + 1, c.j + 1], "expected": expected, "status": status }));
    }
    let all_pass = checks.iter().all(|c| c.status == ccgeo::calc::CheckStatus::ExactPass);
    let result = json!({
        "model": model.name,
        "dimension": model.n(),
        "generators": model.generators(),
        "step": model.step(),
        "structure": structure_summary(model.structure()),
        "relation_checks": rows,
        "all_exact_pass": all_pass,
    });
    Ok(Outcome::new(result, json!({ "arithmetic": "exact" }), table))
}

pub fn bracket(s: &ComplementedStructure, i: usize, j: usize, point: &Point) -> CmdResult {
    let n = s.n();
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
        return Err(format!("field indices must lie in 1..={n}"));
    }
    let full = s.full_frame();
    let field = full[i - 1].bracket(&full[j - 1]).map_err(err)?;
    let x = point.to_exact().map_err(err)?;
    let value = field.eval_exact(&x).map_err(err)?;
    let coords = s
        .frame_matrix_exact(&x)
        .map_err(err)?
        .solve(&value)
        .ok_or_else(|| "frame is singular at the point".to_string())?;
    let k = s.k();
    let in_v = coords[k..].iter().all(|c| *c == Rational::from_integer(0.into()));
    let mut table = Table::new(["component", "value", "frame_coordinate"]);
    for c in 0..n {
        table.push(vec![(c + 1).into(), rational_to_f64(&value[c]).into(), rational_to_f64(&coords[c]).into()]);
    }
    let result = json!({
        "pair": [i, j],
        "field": field_to_json(&field),
        "point": rats(&x),
        "value": rats(&value),
        "frame_coordinates": rats(&coords),
        "in_distribution": in_v,
    });
    Ok(Outcome::new(result, json!({ "arithmetic": "exact" }), table))
}

pub fn involutivity(
    s: &ComplementedStructure,
    point: &Point,
    h: Option<usize>,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> CmdResult {
    let opts = SearchOptions { restarts, seed, max_iters, ..Default::default() };
    let report = match h {
        None => noninvolutive_at(s, point),
        Some(h) => h_noninvolutive_at(s, point, h, &opts),
    }
    .map_err(err)?;
    let mut table = Table::new(["restart", "residual", "verdict", "method"]);
    for (r, res) in report.diagnostics.restart_residuals.iter().enumerate() {
        table.push(vec![r.into(), (*res).into(), report.verdict.as_str().into(), report.method.into()]);
    }
    if table.rows.is_empty() {
        table.push(vec![0usize.into(), report.residual.into(), report.verdict.as_str().into(), report.method.into()]);
    }
    let tol = json!({ "restarts": restarts, "max_iters": max_iters, "search_seed": seed });
    Ok(Outcome::new(report.to_json(), tol, table))
}

pub fn step(s: &ComplementedStructure, point: &Point, max_step: usize) -> CmdResult {
    let r = hormander_step(s.distribution(), point, max_step).map_err(err)?;
    let v = to_value(&r);
    let mut table = Table::new(["kind", "step", "rank"]);
    table.push(vec![
        v["kind"].as_str().unwrap_or("").into(),
        Cell::Int(v["step"].as_i64().unwrap_or(-1)),
        Cell::Int(v["rank"].as_i64().unwrap_or(s.n() as i64)),
    ]);
    let result = json!({ "hormander": v, "degrees": s.degrees() });
    Ok(Outcome::new(result, json!({ "max_step": max_step }), table))
}

pub struct BallboxArgs<'a> {
    pub base: Option<&'a str>,
    pub direction: usize,
    pub scales: &'a str,
    pub h_int: f64,
    pub cc: CcOptions,
}

pub fn ballbox(s: &ComplementedStructure, a: &BallboxArgs<'_>) -> CmdResult {
    let n = s.n();
    if !(1..=n).contains(&a.direction) {
        return Err(format!("direction must lie in 1..={n}"));
    }
    let base = float_point(a.base, n)?;
    let scales = parse_scales(a.scales)?;
    let chart = ExpChart::new(s, &base, a.h_int, 1.0).map_err(err)?;
    let oracle = |x: &[f64], y: &[f64]| -> Result<(f64, f64), String> {
        let e = cc_distance(s, x, y, &a.cc).map_err(err)?;
        if e.converged() {
            Ok((e.lower, e.upper))
        } else {
            Err("unconverged".into())
        }
    };
    let fit = ballbox_exponent_fit(&chart, a.direction - 1, &oracle, &scales).map_err(err)?;
    let mut table = Table::new(["tau", "dist_upper", "dist_lower", "width", "method", "budget"]);
    for r in &fit.rows {
        table.push(vec![
            r.tau.into(),
            r.dist_upper.into(),
            r.dist_lower.into(),
            (r.dist_upper - r.dist_lower).into(),
            "cc".into(),
            a.cc.budget.into(),
        ]);
    }
    let mut out = Outcome::new(
        json!({
            "direction": a.direction,
            "degree": fit.degree,
            "expected_slope": fit.expected_slope,
            "slope": fit.slope(),
            "fit": to_value(&fit.fit),
            "rows": to_value(&fit.rows),
            "dropped": to_value(&fit.dropped),
            "method": "cc",
        }),
        json!({ "h_int": a.h_int, "cc": to_value(&a.cc) }),
        table,
    );
    if fit.fit.is_none() || !fit.dropped.is_empty() {
        out.unconverged = Some(format!("{} scale(s) without a converged distance", fit.dropped.len()));
    }
    Ok(out)
}

fn estimate_outcome(e: DistanceEstimate, tolerances: Value, extra: Value) -> Outcome {
    let mut table = Table::new(["lower", "upper", "width", "status", "method", "lower_source", "budget", "restarts"]);
    let status = to_value(&e.status);
    table.push(vec![
        e.lower.into(),
        e.upper.into(),
        e.width().into(),
        status.as_str().unwrap_or("").into(),
        e.method.clone().into(),
        e.lower_source.clone().into(),
        e.budget.into(),
        e.restarts.into(),
    ]);
    let mut result = json!({ "estimate": to_value(&e), "width": e.width(), "converged": e.converged() });
    if let (Value::Object(r), Value::Object(x)) = (&mut result, extra) {
        r.extend(x);
    }
    let unconverged = (!e.converged()).then(|| format!("{} estimate did not converge", e.method));
    Outcome { result, tolerances, table, unconverged }
}

pub fn ccdist(s: &ComplementedStructure, from: Option<&str>, to: Option<&str>, opts: &CcOptions) -> CmdResult {
    let x = float_point(from, s.n())?;
    let y = float_point(to, s.n())?;
    let e = cc_distance(s, &x, &y, opts).map_err(err)?;
    Ok(estimate_outcome(e, to_value(opts), json!({ "from": x, "to": y })))
}

pub fn etadist(
    s: &ComplementedStructure,
    from: Option<&str>,
    to: Option<&str>,
    eta: f64,
    modulus_samples: usize,
    opts: &EtaOptions,
) -> CmdResult {
    let x = float_point(from, s.n())?;
    let y = float_point(to, s.n())?;
    let (ctx, modulus) = EtaContext::with_sampled_modulus(s, eta, modulus_samples, opts.seed).map_err(err)?;
    let e = eta_distance(&ctx, &x, &y, opts).map_err(err)?;
    let tol = json!({ "eta": to_value(opts), "modulus_samples": modulus_samples });
    Ok(estimate_outcome(e, tol, json!({ "from": x, "to": y, "eta": eta, "modulus": to_value(&modulus) })))
}

pub struct SqueezeArgs {
    pub metric: MetricKind,
    pub eta: f64,
    pub radius: f64,
    pub pairs: usize,
    pub bands: usize,
    pub modulus_samples: usize,
    pub cc: CcOptions,
    pub eta_opts: EtaOptions,
}

pub fn squeeze(s: &ComplementedStructure, a: &SqueezeArgs) -> CmdResult {
    if a.bands == 0 {
        return Err("need at least one band".into());
    }
    let [lo, hi] = s.working_box();
    let region = Region { center: vec![0.5 * (lo + hi); s.n()], radius: a.radius };
    let opts = SqueezeOptions {
        eta: a.eta,
        region,
        bands: a.bands,
        pairs_per_band: (a.pairs / a.bands).max(1),
        seed: a.cc.seed,
    };
    let report = match a.metric {
        MetricKind::Cc => {
            let m = CcEstimator { structure: s, options: a.cc.clone() };
            squeeze_audit(s, &m as &dyn MetricEstimator, &opts)
        }
        MetricKind::Eta => {
            let (ctx, _) =
                EtaContext::with_sampled_modulus(s, a.eta, a.modulus_samples, a.eta_opts.seed).map_err(err)?;
            let m = EtaEstimator { context: ctx, options: a.eta_opts.clone() };
            squeeze_audit(s, &m, &opts)
        }
        MetricKind::Euclidean => squeeze_audit(s, &EuclideanEstimator, &opts),
    }
    .map_err(err)?;
    let mut table = Table::new(["band_lo", "band_hi", "fitted_C", "pairs_used", "dropped", "metric"]);
    for b in &report.bands {
        table.push(vec![
            b.band_lo.into(),
            b.band_hi.into(),
            b.fitted_c.into(),
            b.pairs_used.into(),
            b.dropped.into(),
            report.metric.clone().into(),
        ]);
    }
    let empty = report.bands.iter().filter(|b| b.pairs_used == 0).count();
    let tol = match a.metric {
        MetricKind::Cc => json!({ "squeeze": to_value(&opts), "cc": to_value(&a.cc) }),
        MetricKind::Eta => json!({ "squeeze": to_value(&opts), "eta": to_value(&a.eta_opts), "modulus_samples": a.modulus_samples }),
        MetricKind::Euclidean => json!({ "squeeze": to_value(&opts) }),
    };
    let mut out = Outcome::new(to_value(&report), tol, table);
    if empty > 0 {
        out.unconverged = Some(format!("{empty} band(s) without a converged pair"));
    }
    Ok(out)
}

pub fn tangency(s: &ComplementedStructure, surface: &str, grid: usize, tau: f64, scale_count: usize) -> CmdResult {
    let surf = SurfaceGraph::resolve(surface).map_err(err)?;
    let cloud = contact_set(s, &surf, grid, tau).map_err(err)?;
    let m = surf.parameters();
    let mut columns: Vec<String> = (1..=m).map(|i| format!("q{i}")).collect();
    columns.extend(["delta".to_string(), "contact".to_string()]);
    let mut table = Table::new(columns);
    let mut is_contact = vec![false; cloud.points.len()];
    for &i in &cloud.contact {
        is_contact[i] = true;
    }
    for (i, (p, d)) in cloud.points.iter().zip(&cloud.deficiencies).enumerate() {
        let mut row: Vec<Cell> = p.iter().map(|&x| x.into()).collect();
        row.push((*d).into());
        row.push(is_contact[i].into());
        table.push(row);
    }
    let extent = surf.domain().iter().map(|[a, b]| b - a).fold(0.0, f64::max);
    let points = cloud.contact_points();
    let dimension = box_counting_dimension(&points, &dyadic_scales(extent, scale_count)).ok();
    let result = json!({
        "surface": to_value(&surf.summary()),
        "grid": grid,
        "samples": cloud.points.len(),
        "contact_points": points,
        "contact_count": cloud.contact.len(),
        "exact_checks": cloud.exact_checks,
        "histogram": to_value(&cloud.histogram),
        "box_dimension": to_value(&dimension),
    });
    let tol = json!({ "tau": tau, "box_scales": scale_count, "extent": extent });
    Ok(Outcome::new(result, tol, table))
}

/// CSV with a header row; every row holds a unit direction followed by the
/// seminorm value in that direction.
pub fn read_seminorm(path: &Path) -> Result<SeminormSample, String> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let mut directions = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(err)?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| format!("row {}: invalid number {f:?}", line + 1)))
            .collect::<Result<_, _>>()?;
        if nums.len() < 2 {
            return Err(format!("row {}: need a direction and a value", line + 1));
        }
        values.push(nums[nums.len() - 1]);
        directions.push(nums[..nums.len() - 1].to_vec());
    }
    SeminormSample::new(directions, values).map_err(err)
}

pub fn jacobian(path: &Path, m: Option<usize>) -> CmdResult {
    let sample = read_seminorm(path)?;
    let dim = sample.dim();
    let m = m.unwrap_or(dim);
    if m != dim {
        return Err(format!("--m {m} does not match the {dim}-dimensional directions in {}", path.display()));
    }
    let j = metric_jacobian(&sample, m).map_err(err)?;
    let mut table = Table::new(["m", "directions", "jacobian"]);
    table.push(vec![m.into(), sample.values.len().into(), j.into()]);
    let result = json!({ "m": m, "directions": sample.values.len(), "jacobian": j, "method": "sphere-average" });
    Ok(Outcome::new(result, json!({ "degenerate_value": 1e-9 }), table))
}

/// Drops wall-clock fields so the JSON depends only on the configuration.
fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|k, _| !k.contains("seconds") && k != "threads");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

pub fn report(seed: u64, criteria: Option<&[usize]>) -> CmdResult {
    let progress = |r: &CriterionResult| eprintln!("{}", r.line());
    let results: Vec<CriterionResult> = match criteria {
        None => acceptance::run_all(seed, progress).criteria,
        Some(ids) => {
            if let Some(bad) = ids.iter().find(|&&i| !(1..acceptance::CRITERIA).contains(&i)) {
                return Err(format!(
                    "criterion {bad} cannot run alone; choose from 1..={} or omit --criteria",
                    acceptance::CRITERIA - 1
                ));
            }
            ids.iter()
                .map(|&id| {
                    let r = acceptance::run_criterion(id, seed);
                    progress(&r);
                    r
                })
                .collect()
        }
    };
    let mut table = Table::new(["criterion", "title", "result"]);
    let mut rows = Vec::new();
    for r in &results {
        table.push(vec![r.id.into(), r.title.into(), (if r.passed { "PASS" } else { "FAIL" }).into()]);
        let mut details = r.details.clone();
        strip_timing(&mut details);
        rows.push(json!({ "id": r.id, "title": r.title, "passed": r.passed, "details": details }));
    }
    let passed = results.iter().filter(|r| r.passed).count();
    eprintln!("{passed}/{} criteria pass", results.len());
    let result = json!({ "criteria": rows, "passed": passed, "total": results.len() });
    Ok(Outcome::new(result, json!({ "suite_budget_seconds": acceptance::SUITE_BUDGET }), table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse_in_both_modes() {
        let p = parse_point(Some("1/2, 0, -3"), 3, Mode::Exact).unwrap();
        assert_eq!(p.to_f64(), vec![0.5, 0.0, -3.0]);
        assert!(p.is_exact());
        let q = parse_point(Some("0.1,2e-3,0"), 3, Mode::Float).unwrap();
        assert_eq!(q.to_f64(), vec![0.1, 2e-3, 0.0]);
        assert!(parse_point(Some("1,2"), 3, Mode::Float).is_err());
        assert!(parse_point(Some("a,b,c"), 3, Mode::Exact).is_err());
        assert_eq!(parse_point(None, 2, Mode::Exact).unwrap(), Point::origin_exact(2));
    }

    #[test]
    fn scales_are_geometric() {
        let s = parse_scales("1e-3:1e-1:3").unwrap();
        assert_eq!(s.len(), 3);
        assert!((s[1] - 1e-2).abs() < 1e-15);
        assert!(parse_scales("1e-1:1e-3:3").is_err());
        assert!(parse_scales("1:2").is_err());
    }

    #[test]
    fn timing_fields_are_removed() {
        let mut v = json!({ "seconds_1_to_9": 3.0, "a": [{ "threads": 1, "b": 2 }] });
        strip_timing(&mut v);
        assert_eq!(v, json!({ "a": [{ "b": 2 }] }));
    }
}
