use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::curves::PolygonalCurve;
use super::{check_point, euclid, CurveWitness, DistanceEstimate, EstimateStatus, LocalSplit, MetricsError};
use crate::structures::{projection_modulus, ComplementedStructure, ModulusEstimate, Region};

/// `d_{V,η}` machinery for a fixed structure, exponent and projection modulus.
#[derive(Clone, Debug)]
pub struct EtaContext<'a> {
    structure: &'a ComplementedStructure,
    eta: f64,
    /// Lipschitz constant of `x ↦ Π^V_x` on `region`.
    modulus: f64,
    region: Region,
}

impl<'a> EtaContext<'a> {
    pub fn new(structure: &'a ComplementedStructure, eta: f64, modulus: f64, region: Region) -> Result<Self, MetricsError> {
        if !(1.0..=2.0).contains(&eta) {
            return Err(MetricsError::Invalid(format!("eta = {eta} outside [1,2]")));
        }
        if !(modulus >= 0.0) || !modulus.is_finite() {
            return Err(MetricsError::Invalid(format!("projection modulus {modulus} must be finite and non-negative")));
        }
        if region.center.len() != structure.n() {
            return Err(MetricsError::Dimension { expected: structure.n(), found: region.center.len() });
        }
        Ok(EtaContext { structure, eta, modulus, region })
    }

    /// Modulus sampled on the largest ball inside the working box.
    pub fn with_sampled_modulus(
        structure: &'a ComplementedStructure,
        eta: f64,
        samples: usize,
        seed: u64,
    ) -> Result<(Self, ModulusEstimate), MetricsError> {
        let [lo, hi] = structure.working_box();
        let region = Region {
            center: vec![0.5 * (lo + hi); structure.n()],
            radius: 0.5 * (hi - lo),
        };
        let m = projection_modulus(structure, &region, samples, seed)?;
        Ok((Self::new(structure, eta, m.c, region)?, m))
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self, MetricsError> {
        Self::new(self.structure, eta, self.modulus, self.region.clone())
    }

    pub fn structure(&self) -> &'a ComplementedStructure {
        self.structure
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// `N_p(v) = |Π^V_p v| + |Π^W_p v|^{1/η}`.
    pub fn anisotropic_norm(&self, p: &[f64], v: &[f64]) -> Result<f64, MetricsError> {
        let (a, b) = LocalSplit::at(self.structure, p)?.norms(v);
        Ok(a + b.powf(1.0 / self.eta))
    }

    fn ball_inside_region(&self, x: &[f64], r: f64) -> bool {
        euclid(x, &self.region.center) + r <= self.region.radius
    }
}

/// `g(x,y) = |Π^V_x[y−x]| + |Π^W_x[y−x]|^{1/η}`.
pub fn anisotropic_gauge(s: &ComplementedStructure, x: &[f64], y: &[f64], eta: f64) -> Result<f64, MetricsError> {
    let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let (a, b) = LocalSplit::at(s, x)?.norms(&d);
    Ok(a + b.powf(1.0 / eta))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaOptions {
    /// Samples per segment before refinement.
    pub samples: usize,
    /// Absolute and relative target widths of the `ℓ_η` bracket; refinement
    /// stops when either is met.
    pub target_width: f64,
    pub relative_width: f64,
    pub max_evaluations: usize,
    /// Largest vertex count tried by the curve search.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
}

impl Default for EtaOptions {
    fn default() -> Self {
        EtaOptions {
            samples: 64,
            target_width: 1e-6,
            relative_width: 1e-3,
            max_evaluations: 100_000,
            budget: 5,
            restarts: 4,
            seed: 0,
            max_sweeps: 80,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaLength {
    pub lower: f64,
    pub upper: f64,
    pub evaluations: usize,
    /// Curve parameter where the sampled maximum was found.
    pub argmax: f64,
}

impl EtaLength {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A segment interior (`p` varies) or a vertex (`v` varies over the derived
/// segment), parametrised by `s ∈ [0,1]`, with Lipschitz constants of both norms.
enum Piece {
    Segment { from: Vec<f64>, to: Vec<f64>, v: Vec<f64>, t0: f64, t1: f64 },
    Vertex { split: LocalSplit, vm: Vec<f64>, vp: Vec<f64>, t: f64 },
}

struct PieceBound {
    piece: Piece,
    la: f64,
    lb: f64,
}

impl PieceBound {
    fn eval(&self, s: &ComplementedStructure, u: f64) -> Result<(f64, f64), MetricsError> {
        match &self.piece {
            Piece::Segment { from, to, v, .. } => {
                let p: Vec<f64> = from.iter().zip(to).map(|(a, b)| a + u * (b - a)).collect();
                Ok(LocalSplit::at(s, &p)?.norms(v))
            }
            Piece::Vertex { split, vm, vp, .. } => {
                let v: Vec<f64> = vm.iter().zip(vp).map(|(a, b)| a + u * (b - a)).collect();
                Ok(split.norms(&v))
            }
        }
    }

    fn time(&self, u: f64) -> f64 {
        match &self.piece {
            Piece::Segment { t0, t1, .. } => t0 + u * (t1 - t0),
            Piece::Vertex { t, .. } => *t,
        }
    }
}

struct Node {
    ub: f64,
    piece: usize,
    s0: f64,
    s1: f64,
    f0: (f64, f64),
    f1: (f64, f64),
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        self.ub
            .total_cmp(&o.ub)
            .then_with(|| o.piece.cmp(&self.piece))
            .then_with(|| o.s0.total_cmp(&self.s0))
    }
}

fn node_bound(eta: f64, pb: &PieceBound, s0: f64, s1: f64, f0: (f64, f64), f1: (f64, f64)) -> f64 {
    let h = 0.5 * (s1 - s0);
    let pad = |(a, b): (f64, f64)| a + pb.la * h + (b + pb.lb * h).powf(1.0 / eta);
    pad(f0).max(pad(f1))
}

/// Bracket for `ℓ_η(γ) = sup_t max_{v ∈ 𝒟γ(t)} N_{γ(t)}(v)`.
///
/// Each segment is sampled, each vertex's derived segment is gridded, and
/// the bracket is tightened by branch and bound. On an interval of
/// half-width `h` the norms move by at most `L·h`, where `L` is
/// `C·|Δx|·|v|` along a segment (projection modulus `C`) and `|Π(v⁺−v⁻)|`
/// across a vertex, so `N ≤ a + L_a h + (b + L_b h)^{1/η}` near a sample
/// with norms `(a, b)`.
pub fn eta_length(ctx: &EtaContext<'_>, curve: &PolygonalCurve, opts: &EtaOptions) -> Result<EtaLength, MetricsError> {
    let s = ctx.structure;
    for v in curve.vertices() {
        check_point(s, v)?;
    }
    let eta = ctx.eta;
    let vel = curve.velocities();
    let times = curve.times();
    let verts = curve.vertices();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut pieces = Vec::new();
    for (i, v) in vel.iter().enumerate() {
        let span = euclid(&verts[i], &verts[i + 1]);
        let l = ctx.modulus * span * norm(v);
        pieces.push((
            PieceBound {
                piece: Piece::Segment {
                    from: verts[i].clone(),
                    to: verts[i + 1].clone(),
                    v: v.clone(),
                    t0: times[i],
                    t1: times[i + 1],
                },
                la: l,
                lb: l,
            },
            opts.samples.max(2),
        ));
    }
    for i in 1..vel.len() {
        if vel[i - 1] == vel[i] {
            continue;
        }
        let split = LocalSplit::at(s, &verts[i])?;
        let dv: Vec<f64> = vel[i].iter().zip(&vel[i - 1]).map(|(a, b)| a - b).collect();
        let (la, lb) = split.norms(&dv);
        pieces.push((
            PieceBound {
                piece: Piece::Vertex { split, vm: vel[i - 1].clone(), vp: vel[i].clone(), t: times[i] },
                la,
                lb,
            },
            9,
        ));
    }
    let value = |(a, b): (f64, f64)| a + b.powf(1.0 / eta);
    let mut heap = BinaryHeap::new();
    let mut lower = 0.0f64;
    let mut argmax = 0.0;
    let mut evaluations = 0;
    for (idx, (pb, count)) in pieces.iter().enumerate() {
        let grid: Vec<f64> = (0..*count).map(|j| j as f64 / (*count - 1) as f64).collect();
        let vals = grid.iter().map(|&u| pb.eval(s, u)).collect::<Result<Vec<_>, _>>()?;
        evaluations += vals.len();
        for (u, f) in grid.iter().zip(&vals) {
            if value(*f) > lower {
                lower = value(*f);
                argmax = pb.time(*u);
            }
        }
        for j in 0..grid.len() - 1 {
            heap.push(Node {
                ub: node_bound(eta, pb, grid[j], grid[j + 1], vals[j], vals[j + 1]),
                piece: idx,
                s0: grid[j],
                s1: grid[j + 1],
                f0: vals[j],
                f1: vals[j + 1],
            });
        }
    }
    let upper = loop {
        let Some(top) = heap.pop() else { break lower };
        if top.ub - lower <= opts.target_width.max(opts.relative_width * lower) || evaluations >= opts.max_evaluations || top.s1 - top.s0 < 1e-12 {
            break top.ub.max(lower);
        }
        let pb = &pieces[top.piece].0;
        let mid = 0.5 * (top.s0 + top.s1);
        let fm = pb.eval(s, mid)?;
        evaluations += 1;
        if value(fm) > lower {
            lower = value(fm);
            argmax = pb.time(mid);
        }
        for (a, b, fa, fb) in [(top.s0, mid, top.f0, fm), (mid, top.s1, fm, top.f1)] {
            heap.push(Node {
                ub: node_bound(eta, pb, a, b, fa, fb),
                piece: top.piece,
                s0: a,
                s1: b,
                f0: fa,
                f1: fb,
            });
        }
    };
    Ok(EtaLength { lower, upper, evaluations, argmax })
}

/// Lower bound for `d_{V,η}(x,y)` from the convex hull of the unit ball of `N`.
///
/// If `ℓ_η(γ) ≤ M` then every velocity satisfies
/// `|Π^V_{γ(t)} v|/M + |Π^W_{γ(t)} v|/M^η ≤ 1`; freezing the projections at `x`
/// costs `C|γ(t)−x||v|(1/M + 1/M^η)` with `|v| ≤ M + M^η`, and integrating gives
///
/// ```text
/// a/M + w/M^η ≤ 1 + (C/2)(M + M^η)²(1/M + 1/M^η),   a = |Π^V_x Δ|, w = |Π^W_x Δ|.
/// ```
///
/// The left side decreases and the right side increases on `(0,1]`, so the
/// smallest admissible `M` (capped at 1) is a lower bound. With `C = 0` this
/// is the exact flat distance.
pub fn hull_lower_bound(a: f64, w: f64, eta: f64, c: f64) -> f64 {
    if a == 0.0 && w == 0.0 {
        return 0.0;
    }
    let f = |m: f64| {
        let mi = m.powf(eta);
        a / m + w / mi - 1.0 - 0.5 * c * (m + mi).powi(2) * (1.0 / m + 1.0 / mi)
    };
    if f(1.0) > 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn lower_bounds(ctx: &EtaContext<'_>, x: &[f64], y: &[f64], upper: f64) -> Result<(f64, String), MetricsError> {
    let eta = ctx.eta;
    let e = euclid(x, y);
    let mut best = (0.0, "none".to_string());
    let mut offer = |v: f64, name: &str| {
        if v > best.0 {
            best = (v, name.to_string());
        }
    };
    if e < 4f64.powf(-eta) {
        offer(2.0 / 3.0 * e, "two-thirds-euclidean");
    }
    if upper <= 1.0 {
        offer(e, "euclidean");
    }
    let r = upper + upper.powf(eta);
    if ctx.ball_inside_region(x, r) {
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let (a, w) = LocalSplit::at(ctx.structure, x)?.norms(&d);
        offer(hull_lower_bound(a, w, eta, ctx.modulus), "hull");
    }
    Ok(best)
}

/// Cheap sampled value of `ℓ_η` used inside the curve search.
fn quick_length(ctx: &EtaContext<'_>, verts: &[Vec<f64>], times: &[f64]) -> f64 {
    let s = ctx.structure;
    let inv = 1.0 / ctx.eta;
    let mut best = 0.0f64;
    let mut prev: Option<Vec<f64>> = None;
    for i in 0..verts.len() - 1 {
        let dt = times[i + 1] - times[i];
        if !(dt > 0.0) {
            return f64::INFINITY;
        }
        let v: Vec<f64> = verts[i + 1].iter().zip(&verts[i]).map(|(b, a)| (b - a) / dt).collect();
        for j in 0..8 {
            let u = j as f64 / 7.0;
            let p: Vec<f64> = verts[i].iter().zip(&verts[i + 1]).map(|(a, b)| a + u * (b - a)).collect();
            if !s.in_box(&p) {
                return f64::INFINITY;
            }
            let Ok(split) = LocalSplit::at(s, &p) else { return f64::INFINITY };
            let (a, b) = split.norms(&v);
            best = best.max(a + b.powf(inv));
            if j == 0 {
                if let Some(vm) = &prev {
                    for lam in [0.25, 0.5, 0.75] {
                        let w: Vec<f64> = vm.iter().zip(&v).map(|(p, q)| p + lam * (q - p)).collect();
                        let (a, b) = split.norms(&w);
                        best = best.max(a + b.powf(inv));
                    }
                }
            }
        }
        prev = Some(v);
    }
    best
}

/// Free vertices and log-durations of a polygon with fixed endpoints.
#[derive(Clone)]
struct Candidate {
    inner: Vec<Vec<f64>>,
    logw: Vec<f64>,
}

impl Candidate {
    fn curve(&self, x: &[f64], y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut verts = vec![x.to_vec()];
        verts.extend(self.inner.iter().cloned());
        verts.push(y.to_vec());
        let w: Vec<f64> = self.logw.iter().map(|z| z.exp()).collect();
        let total: f64 = w.iter().sum();
        let mut times = vec![0.0];
        let mut acc = 0.0;
        for wi in &w[..w.len() - 1] {
            acc += wi / total;
            times.push(acc);
        }
        times.push(1.0);
        (verts, times)
    }

    fn params(&self) -> Vec<f64> {
        self.inner.iter().flatten().copied().chain(self.logw.iter().copied()).collect()
    }

    fn from_params(&self, p: &[f64]) -> Self {
        let n = self.inner.first().map_or(0, Vec::len);
        let m = self.inner.len();
        Candidate {
            inner: (0..m).map(|i| p[i * n..(i + 1) * n].to_vec()).collect(),
            logw: p[m * n..].to_vec(),
        }
    }
}

/// Compass search with per-coordinate step halving.
fn pattern_search(ctx: &EtaContext<'_>, x: &[f64], y: &[f64], start: Candidate, scale: f64, sweeps: usize) -> (Candidate, f64) {
    let eval = |c: &Candidate| {
        let (v, t) = c.curve(x, y);
        quick_length(ctx, &v, &t)
    };
    let mut p = start.params();
    let n_coords = p.len() - start.logw.len();
    let mut steps: Vec<f64> = (0..p.len()).map(|i| if i < n_coords { 0.25 * scale } else { 0.5 }).collect();
    let mut best = eval(&start);
    for _ in 0..sweeps {
        let mut improved = false;
        for i in 0..p.len() {
            for sign in [1.0, -1.0] {
                let mut q = p.clone();
                q[i] += sign * steps[i];
                let val = eval(&start.from_params(&q));
                if val < best {
                    best = val;
                    p = q;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            for (i, s) in steps.iter_mut().enumerate() {
                *s *= 0.5;
                let floor = if i < n_coords { 1e-7 * scale } else { 1e-6 };
                *s = s.max(floor * 0.5);
            }
            if steps.iter().enumerate().all(|(i, &s)| s <= if i < n_coords { 1e-7 * scale } else { 1e-6 }) {
                break;
            }
        }
    }
    (start.from_params(&p), best)
}

fn add(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + t * q).collect()
}

/// Starting polygons: split legs with a short stop at the corner in both
/// orders, and seeded perturbations of the straight segment.
fn initial_candidates(ctx: &EtaContext<'_>, x: &[f64], y: &[f64], opts: &EtaOptions) -> Result<Vec<Candidate>, MetricsError> {
    let s = ctx.structure;
    let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let split = LocalSplit::at(s, x)?;
    let (a, w) = split.norms(&d);
    let frame = s.frame_matrix(x);
    let coeffs = frame
        .clone()
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(&d))
        .ok_or_else(|| MetricsError::SingularProjection(x.to_vec()))?;
    let pv: Vec<f64> = (frame.columns(0, s.k()) * coeffs.rows(0, s.k())).iter().copied().collect();
    let pw: Vec<f64> = d.iter().zip(&pv).map(|(p, q)| p - q).collect();
    let mut out = Vec::new();
    let budget = opts.budget.max(2);
    if budget >= 4 && a > 0.0 && w > 0.0 {
        let m = hull_lower_bound(a, w, ctx.eta, 0.0).max(1e-300);
        let (ta, tw) = (a / m, w / m.powf(ctx.eta));
        let stop: f64 = 1e-3;
        for (first, t1, t3) in [(&pv, ta, tw), (&pw, tw, ta)] {
            let corner = add(x, first, 1.0);
            out.push(Candidate {
                inner: vec![corner.clone(), corner],
                logw: vec![t1.max(1e-6).ln(), stop.ln(), t3.max(1e-6).ln()],
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = euclid(x, y);
    for r in 0..opts.restarts {
        let m = 3 + r % (budget.saturating_sub(2)).max(1);
        if m > budget {
            break;
        }
        let inner = (1..m - 1)
            .map(|i| {
                let base = add(x, &d, i as f64 / (m - 1) as f64);
                base.iter().map(|b| b + 0.2 * scale * rng.random_range(-1.0..1.0)).collect()
            })
            .collect();
        out.push(Candidate { inner, logw: vec![0.0; m - 1] });
    }
    Ok(out)
}

/// Upper/lower bracket for the η-box distance.
///
/// The upper value is the certified `ℓ_η` bracket top of the best polygon
/// found (straight segment, split legs, seeded perturbations, each refined
/// by compass search on vertices and durations). The lower value is the
/// largest of `(2/3)|x−y|` for `|x−y| < 4^{−η}`, `|x−y|` when the upper
/// value is at most 1, and [`hull_lower_bound`] when the modulus region
/// covers the reachable ball.
pub fn eta_distance(ctx: &EtaContext<'_>, x: &[f64], y: &[f64], opts: &EtaOptions) -> Result<DistanceEstimate, MetricsError> {
    let s = ctx.structure;
    check_point(s, x)?;
    check_point(s, y)?;
    if x == y {
        return Ok(DistanceEstimate::zero("eta-polygon", x));
    }
    let straight = PolygonalCurve::segment(x, y)?;
    let mut best_curve = straight.clone();
    let mut best = eta_length(ctx, &straight, opts)?;
    let scale = euclid(x, y);
    let starts = initial_candidates(ctx, x, y, opts)?;
    let refined: Vec<(Candidate, f64)> = starts
        .into_par_iter()
        .map(|c| pattern_search(ctx, x, y, c, scale, opts.max_sweeps))
        .collect();
    let mut order: Vec<usize> = (0..refined.len()).collect();
    order.sort_by(|&i, &j| refined[i].1.total_cmp(&refined[j].1).then(i.cmp(&j)));
    for &i in order.iter().take(2) {
        if !(refined[i].1 < best.upper) {
            continue;
        }
        let (verts, times) = refined[i].0.curve(x, y);
        let Ok(curve) = PolygonalCurve::new(verts, times) else { continue };
        if let Ok(l) = eta_length(ctx, &curve, opts) {
            if l.upper < best.upper {
                best = l;
                best_curve = curve;
            }
        }
    }
    let (lower, source) = lower_bounds(ctx, x, y, best.upper)?;
    Ok(DistanceEstimate {
        lower: lower.min(best.upper),
        upper: best.upper,
        witness: CurveWitness::Polygon(best_curve),
        endpoint_gap: 0.0,
        status: EstimateStatus::Converged,
        method: "eta-polygon".into(),
        lower_source: source,
        budget: opts.budget,
        restarts: opts.restarts,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{build_catalog_model, flat_structure};

    fn flat_ctx(s: &ComplementedStructure, eta: f64) -> EtaContext<'_> {
        EtaContext::new(s, eta, 0.0, Region { center: vec![0.0; 3], radius: 4.0 }).unwrap()
    }

    fn flat_closed_form(a: f64, w: f64, eta: f64) -> f64 {
        hull_lower_bound(a, w, eta, 0.0)
    }

    #[test]
    fn flat_single_segment_is_exact() {
        let s = flat_structure(3, 2).unwrap();
        let ctx = flat_ctx(&s, 1.5);
        let c = PolygonalCurve::segment(&[0.0; 3], &[0.3, 0.4, 0.008]).unwrap();
        let l = eta_length(&ctx, &c, &EtaOptions::default()).unwrap();
        let expected = 0.5 + 0.008f64.powf(1.0 / 1.5);
        assert!((l.lower - expected).abs() < 1e-12 && (l.upper - expected).abs() < 1e-12);
    }

    #[test]
    fn flat_half_time_doubles_speed() {
        let s = flat_structure(3, 2).unwrap();
        let ctx = flat_ctx(&s, 2.0);
        let d = [0.1, 0.0, 0.01];
        let c = PolygonalCurve::new(vec![vec![0.0; 3], d.to_vec(), d.to_vec()], vec![0.0, 0.5, 1.0]).unwrap();
        let opts = EtaOptions { target_width: 1e-12, relative_width: 0.0, ..Default::default() };
        let l = eta_length(&ctx, &c, &opts).unwrap();
        let expected = 2.0 * 0.1 + (2.0f64 * 0.01).sqrt();
        assert!((l.lower - expected).abs() < 1e-12, "{l:?}");
        assert!(l.upper - expected < 1e-9);
    }

    #[test]
    fn heisenberg_unit_horizontal_segment() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let ctx = EtaContext::new(h.structure(), 2.0, 0.55, Region { center: vec![0.0; 3], radius: 4.0 }).unwrap();
        let c = PolygonalCurve::segment(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap();
        let opts = EtaOptions { target_width: 0.01, relative_width: 0.0, ..Default::default() };
        let l = eta_length(&ctx, &c, &opts).unwrap();
        assert!(l.lower <= 1.0 + 1e-12 && l.upper >= 1.0);
        assert!(l.width() <= 0.01, "{l:?}");
    }

    #[test]
    fn kink_costs_more_than_endpoints() {
        let s = flat_structure(3, 2).unwrap();
        let ctx = flat_ctx(&s, 2.0);
        let c = PolygonalCurve::new(
            vec![vec![0.0; 3], vec![0.5, 0.0, 0.0], vec![0.5, 0.0, 0.25]],
            vec![0.0, 0.5, 1.0],
        )
        .unwrap();
        let l = eta_length(&ctx, &c, &EtaOptions { target_width: 1e-6, relative_width: 0.0, ..Default::default() }).unwrap();
        // velocities (1,0,0) and (0,0,1/2): max_λ λ + ((1−λ)/2)^{1/2} = 1 + 1/8 at λ = 7/8
        assert!((l.lower - 1.125).abs() < 1e-6 && l.upper >= 1.125 && l.width() <= 1e-6, "{l:?}");
    }

    #[test]
    fn hull_bound_matches_flat_formula() {
        let m = flat_closed_form(0.01, 0.01, 2.0);
        assert!((m - (0.01 + (0.0001f64 + 0.04).sqrt()) / 2.0).abs() < 1e-12);
        assert!((flat_closed_form(0.0, 0.04, 2.0) - 0.2).abs() < 1e-12);
        assert!((flat_closed_form(0.3, 0.0, 1.7) - 0.3).abs() < 1e-12);
        assert!(hull_lower_bound(0.01, 0.01, 2.0, 0.5) < m);
    }

    #[test]
    fn flat_vertical_distance() {
        let s = flat_structure(3, 2).unwrap();
        for eta in [1.25, 1.5, 1.75, 2.0] {
            let ctx = flat_ctx(&s, eta);
            let e = eta_distance(&ctx, &[0.0; 3], &[0.0, 0.0, 0.05], &EtaOptions::default()).unwrap();
            let exact = 0.05f64.powf(1.0 / eta);
            assert!(e.lower <= exact + 1e-12 && e.upper >= exact - 1e-12);
            assert!(e.width() <= 0.02 * exact, "{e:?}");
        }
    }

    #[test]
    fn flat_mixed_pair_beats_gauge() {
        let s = flat_structure(3, 2).unwrap();
        let ctx = flat_ctx(&s, 2.0);
        let (a, w) = (0.01, 0.01);
        let e = eta_distance(&ctx, &[0.0; 3], &[a, 0.0, w], &EtaOptions::default()).unwrap();
        let exact = flat_closed_form(a, w, 2.0);
        let g = a + w.sqrt();
        assert!(e.lower <= exact + 1e-12);
        assert!(e.upper < g - 1e-3, "{e:?}");
        assert!(e.upper <= exact * 1.01, "{e:?}");
    }

    #[test]
    fn identical_points_have_zero_distance() {
        let s = flat_structure(3, 2).unwrap();
        let ctx = flat_ctx(&s, 1.5);
        let e = eta_distance(&ctx, &[0.1; 3], &[0.1; 3], &EtaOptions::default()).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 0.0));
    }
}
