use nalgebra::DMatrix;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::bracket_form::{bracket_form, residual_f64, BracketForm};
use super::grid::{grid_oracle, GRID_MAX_RANK};
use super::{
    InvolutivityError, InvolutivityReport, SearchDiagnostics, Verdict, Witness, INVOLUTIVE_THRESHOLD,
    NONINVOLUTIVE_THRESHOLD,
};
use crate::calc::{rational_to_f64, Point, PolyVectorField, Polynomial, RatMatrix, Rational};
use crate::structures::ComplementedStructure;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Run the grid oracle alongside the optimisation when `k ≤ 4`.
    pub grid_oracle: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 64,
            seed: 0,
            max_iters: 3000,
            grid_oracle: true,
        }
    }
}

pub fn noninvolutive_at(s: &ComplementedStructure, x: &Point) -> Result<InvolutivityReport, InvolutivityError> {
    let form = bracket_form(s, x)?;
    let k = form.k;
    for a in 0..k {
        for b in a + 1..k {
            if let Some(l) = (0..form.codim()).find(|&l| !form.matrices[l][(a, b)].is_zero()) {
                return Ok(InvolutivityReport {
                    verdict: Verdict::NonInvolutive,
                    h: None,
                    witness: Some(Witness::Pair {
                        a,
                        b,
                        covector: form.annihilators[l].clone(),
                        pairing: form.matrices[l][(a, b)].clone(),
                    }),
                    residual: 0.0,
                    exact: true,
                    method: "exact bracket form",
                    diagnostics: SearchDiagnostics::default(),
                });
            }
        }
    }
    Ok(InvolutivityReport {
        verdict: Verdict::InvolutiveAtX,
        h: None,
        witness: None,
        residual: 0.0,
        exact: true,
        method: "exact bracket form",
        diagnostics: SearchDiagnostics::default(),
    })
}

fn exact_report(verdict: Verdict, h: usize, witness: Option<Vec<Vec<Rational>>>, kernel_dim: Option<usize>) -> InvolutivityReport {
    InvolutivityReport {
        verdict,
        h: Some(h),
        witness: witness.map(|b| Witness::Subspace {
            basis: orthonormal_f64(&b),
            exact_basis: Some(b),
        }),
        residual: 0.0,
        exact: true,
        method: "exact decomposable-kernel analysis",
        diagnostics: SearchDiagnostics {
            kernel_dim,
            ..Default::default()
        },
    }
}

fn orthonormal_f64(b: &[Vec<Rational>]) -> Vec<Vec<f64>> {
    let mut vs: Vec<Vec<f64>> = b.iter().map(|v| v.iter().map(rational_to_f64).collect()).collect();
    for a in 0..vs.len() {
        for c in 0..a {
            let d: f64 = vs[a].iter().zip(&vs[c]).map(|(x, y)| x * y).sum();
            let vc = vs[c].clone();
            vs[a].iter_mut().zip(&vc).for_each(|(x, y)| *x -= d * y);
        }
        let n = vs[a].iter().map(|x| x * x).sum::<f64>().sqrt();
        vs[a].iter_mut().for_each(|x| *x /= n);
    }
    vs
}

fn unit_basis(k: usize, h: usize) -> Vec<Vec<Rational>> {
    (0..h)
        .map(|a| (0..k).map(|i| Rational::from_integer(((i == a) as i64).into())).collect())
        .collect()
}

/// Exact answers: `B = 0`, `h = k`, and `h = 2` with `dim ker β ≤ 1`.
fn exact_branch(form: &BracketForm, h: usize) -> Option<InvolutivityReport> {
    let k = form.k;
    if form.is_zero() {
        return Some(exact_report(Verdict::InvolutiveAtX, h, Some(unit_basis(k, h)), None));
    }
    if h == k {
        return Some(exact_report(Verdict::NonInvolutive, h, None, None));
    }
    if let Some(basis) = null_coordinate_subspace(form, h) {
        let mut r = exact_report(Verdict::InvolutiveAtX, h, Some(basis), None);
        r.method = "exact coordinate-subspace scan";
        return Some(r);
    }
    if h != 2 {
        return None;
    }
    let kernel = form.beta().kernel();
    match kernel.len() {
        0 => Some(exact_report(Verdict::NonInvolutive, h, None, Some(0))),
        1 => {
            // ω ∈ Λ²R^k is decomposable iff its antisymmetric matrix has rank 2
            let pairs = crate::calc::combinations(k, 2);
            let mut a = RatMatrix::zeros(k, k);
            for (c, p) in pairs.iter().enumerate() {
                a[(p[0], p[1])] = kernel[0][c].clone();
                a[(p[1], p[0])] = -kernel[0][c].clone();
            }
            if a.rank() == 2 {
                let (_, piv) = a.rref();
                let basis = piv.iter().map(|&c| a.column(c)).collect();
                Some(exact_report(Verdict::InvolutiveAtX, h, Some(basis), Some(1)))
            } else {
                Some(exact_report(Verdict::NonInvolutive, h, None, Some(1)))
            }
        }
        _ => None,
    }
}

const COORDINATE_SCAN_LIMIT: usize = 5000;

/// First `span(e_I)` (lexicographic in `I`) on which every bracket matrix vanishes.
fn null_coordinate_subspace(form: &BracketForm, h: usize) -> Option<Vec<Vec<Rational>>> {
    let k = form.k;
    let count = (0..h).fold(1usize, |acc, i| acc.saturating_mul(k - i) / (i + 1));
    if count > COORDINATE_SCAN_LIMIT {
        return None;
    }
    crate::calc::combinations(k, h)
        .into_iter()
        .find(|idx| {
            form.matrices
                .iter()
                .all(|m| idx.iter().all(|&a| idx.iter().all(|&b| m[(a, b)].is_zero())))
        })
        .map(|idx| {
            idx.iter()
                .map(|&a| (0..k).map(|i| Rational::from_integer(((i == a) as i64).into())).collect())
                .collect()
        })
}

fn qr_orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    let h = m.ncols();
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..h {
        if r[(j, j)] < 0.0 {
            let mut c = q.column_mut(j);
            c *= -1.0;
        }
    }
    q
}

fn objective(mats: &[DMatrix<f64>], w: &DMatrix<f64>) -> f64 {
    let h = w.ncols();
    let mut f = 0.0;
    for m in mats {
        let s = w.transpose() * m * w;
        for a in 0..h {
            for b in a + 1..h {
                f += s[(a, b)] * s[(a, b)];
            }
        }
    }
    f
}

fn euclidean_gradient(mats: &[DMatrix<f64>], w: &DMatrix<f64>) -> DMatrix<f64> {
    let (k, h) = (w.nrows(), w.ncols());
    let mut g = DMatrix::zeros(k, h);
    for m in mats {
        let mw = m * w;
        let s = w.transpose() * &mw;
        for a in 0..h {
            for b in 0..h {
                if a != b {
                    let coef = 2.0 * s[(a, b)];
                    let mut col = g.column_mut(a);
                    col += coef * mw.column(b);
                }
            }
        }
    }
    g
}

/// Riemannian gradient descent with Armijo backtracking on the Stiefel
/// manifold, QR retraction.
fn descend(mats: &[DMatrix<f64>], w0: DMatrix<f64>, max_iters: usize) -> (f64, DMatrix<f64>) {
    let mut w = w0;
    let mut f = objective(mats, &w);
    let mut step = 1.0;
    let mut stalled = 0;
    for _ in 0..max_iters {
        if f < 1e-28 {
            break;
        }
        let g = euclidean_gradient(mats, &w);
        let wtg = w.transpose() * &g;
        let sym = (&wtg + wtg.transpose()) * 0.5;
        let rg = &g - &w * sym;
        let gnorm2 = rg.norm_squared();
        if gnorm2 < 1e-30 {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let cand = qr_orthonormalize(&w - &rg * step);
            let fc = objective(mats, &cand);
            if fc <= f - 1e-4 * step * gnorm2 {
                stalled = if f - fc <= 1e-13 * f { stalled + 1 } else { 0 };
                w = cand;
                f = fc;
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || stalled >= 10 {
            break;
        }
    }
    (f, w)
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64 + 1);
    rng
}

fn columns(w: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..w.ncols()).map(|j| w.column(j).iter().copied().collect()).collect()
}

/// Tries to recognise a float subspace as a rational one with small
/// denominators on which `B` vanishes exactly.
fn snap_exact(form: &BracketForm, basis: &[Vec<f64>]) -> Option<Vec<Vec<Rational>>> {
    let k = form.k;
    let h = basis.len();
    let m = DMatrix::from_fn(h, k, |a, i| basis[a][i]);
    // reduced row echelon form in floats with partial pivoting
    let mut r = m.clone();
    let mut piv_row = 0;
    for c in 0..k {
        if piv_row == h {
            break;
        }
        let (p, val) = (piv_row..h)
            .map(|i| (i, r[(i, c)].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if val < 1e-6 {
            continue;
        }
        r.swap_rows(piv_row, p);
        let d = r[(piv_row, c)];
        for j in 0..k {
            r[(piv_row, j)] /= d;
        }
        for i in 0..h {
            if i != piv_row {
                let f = r[(i, c)];
                for j in 0..k {
                    r[(i, j)] -= f * r[(piv_row, j)];
                }
            }
        }
        piv_row += 1;
    }
    if piv_row < h {
        return None;
    }
    let mut exact = Vec::with_capacity(h);
    for a in 0..h {
        let mut row = Vec::with_capacity(k);
        for j in 0..k {
            let v = r[(a, j)];
            let q = Ratio::<i64>::approximate_float(v)?;
            if *q.denom() > 1000 || (q.to_f64()? - v).abs() > 1e-7 {
                return None;
            }
            row.push(Rational::new((*q.numer()).into(), (*q.denom()).into()));
        }
        exact.push(row);
    }
    for a in 0..h {
        for b in a + 1..h {
            if form.eval(&exact[a], &exact[b]).iter().any(|v| !v.is_zero()) {
                return None;
            }
        }
    }
    Some(exact)
}

/// Decides h-non-involutivity at `x` on subspaces of `V(x)`.
pub fn h_noninvolutive_at(
    s: &ComplementedStructure,
    x: &Point,
    h: usize,
    opts: &SearchOptions,
) -> Result<InvolutivityReport, InvolutivityError> {
    let k = s.k();
    if h < 2 || h > k {
        return Err(InvolutivityError::HOutOfRange { h, k });
    }
    let form = bracket_form(s, x)?;
    if let Some(r) = exact_branch(&form, h) {
        return Ok(r);
    }
    Ok(stiefel_search(&form, h, opts))
}

/// Multistart minimisation of `Σ_{a<b} |B(w_a, w_b)|²` over orthonormal
/// h-frames, without the exact shortcuts.
pub fn stiefel_search(form: &BracketForm, h: usize, opts: &SearchOptions) -> InvolutivityReport {
    let k = form.k;
    let mats = form.float_matrices();
    let restarts = opts.restarts.max(1);
    let results: Vec<(f64, DMatrix<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(opts.seed, r);
            let w0 = DMatrix::from_fn(k, h, |_, _| rng.random_range(-1.0..1.0));
            descend(&mats, qr_orthonormalize(w0), opts.max_iters)
        })
        .collect();
    let (best_restart, (min_residual, best_w)) = results
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
        .map(|(i, r)| (i, r.clone()))
        .expect("at least one restart");
    let restart_residuals: Vec<f64> = results.iter().map(|r| r.0).collect();
    let oracle = (opts.grid_oracle && k <= GRID_MAX_RANK).then(|| grid_oracle(form, h)).flatten();
    let verdict = if min_residual < INVOLUTIVE_THRESHOLD {
        Verdict::InvolutiveAtX
    } else if restart_residuals.iter().all(|&r| r >= NONINVOLUTIVE_THRESHOLD) {
        Verdict::NonInvolutive
    } else {
        Verdict::Undecided
    };
    let witness = (verdict != Verdict::NonInvolutive).then(|| {
        let basis = columns(&best_w);
        let exact_basis = if verdict == Verdict::InvolutiveAtX { snap_exact(form, &basis) } else { None };
        Witness::Subspace { basis, exact_basis }
    });
    InvolutivityReport {
        verdict,
        h: Some(h),
        witness,
        residual: min_residual,
        exact: false,
        method: "stiefel multistart",
        diagnostics: SearchDiagnostics {
            restarts,
            seed: opts.seed,
            restart_residuals,
            min_residual,
            best_restart: Some(best_restart),
            oracle,
            kernel_dim: Some(form.beta().kernel().len()),
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MinOrder {
    Order(usize),
    Involutive,
    Undecided(usize),
}

/// Scans `h = 2..=k` and stops at the first h-non-involutive order.
pub fn min_noninvolutive_order(
    s: &ComplementedStructure,
    x: &Point,
    opts: &SearchOptions,
) -> Result<(MinOrder, Vec<InvolutivityReport>), InvolutivityError> {
    let mut reports = Vec::new();
    for h in 2..=s.k() {
        let r = h_noninvolutive_at(s, x, h, opts)?;
        let verdict = r.verdict;
        reports.push(r);
        match verdict {
            Verdict::NonInvolutive => return Ok((MinOrder::Order(h), reports)),
            Verdict::Undecided => return Ok((MinOrder::Undecided(h), reports)),
            Verdict::InvolutiveAtX => {}
        }
    }
    Ok((MinOrder::Involutive, reports))
}

/// Builds `trials` random first-order germs `Y_a = Σ_i (w_ai + Σ_m r_aim (x_m − x0_m)) X_i`
/// through the subspace spanned by `basis` and returns the largest complement
/// component of `[Y_a, Y_b](x0)`. For an exact null subspace this is 0.
pub fn validate_null_subspace(
    s: &ComplementedStructure,
    x: &Point,
    basis: &[Vec<Rational>],
    trials: usize,
    seed: u64,
) -> Result<Rational, InvolutivityError> {
    let n = s.n();
    let k = s.k();
    let x0 = x.to_exact()?;
    let form = bracket_form(s, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Rational::zero();
    for _ in 0..trials {
        let germs: Vec<PolyVectorField> = basis
            .iter()
            .map(|w| {
                (0..k).fold(PolyVectorField::zero(n), |acc, i| {
                    let mut coef = Polynomial::constant(n, w[i].clone());
                    for m in 0..n {
                        let r: i64 = rng.random_range(-3..=3);
                        if r != 0 {
                            let shifted = &Polynomial::var(n, m) - &Polynomial::constant(n, x0[m].clone());
                            coef = &coef + &shifted.scale(&Rational::from_integer(r.into()));
                        }
                    }
                    &acc + &s.frame()[i].mul_poly(&coef)
                })
            })
            .collect();
        for a in 0..germs.len() {
            for b in a + 1..germs.len() {
                let v = germs[a].bracket(&germs[b])?.eval_exact(&x0)?;
                for cov in &form.annihilators {
                    let c = cov.iter().zip(&v).fold(Rational::zero(), |acc, (p, q)| acc + p * q);
                    let c = if c < Rational::zero() { -c } else { c };
                    if c > worst {
                        worst = c;
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[allow(dead_code)]
pub(crate) fn residual_of(form: &BracketForm, basis: &[Vec<f64>]) -> f64 {
    residual_f64(&form.float_matrices(), basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::rat;
    use crate::structures::build_catalog_model;

    #[test]
    fn heisenberg_noninvolutive_with_annihilator() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let x = Point::Exact(vec![rat(2, 1), rat(4, 1), rat(0, 1)]);
        let r = noninvolutive_at(h.structure(), &x).unwrap();
        assert_eq!(r.verdict, Verdict::NonInvolutive);
        match r.witness.unwrap() {
            Witness::Pair { a, b, covector, pairing } => {
                assert_eq!((a, b), (0, 1));
                // annihilator (y/2, −x/2, 1) at (2,4,0)
                assert_eq!(covector, vec![rat(2, 1), rat(-1, 1), rat(1, 1)]);
                assert_eq!(pairing, rat(1, 1));
            }
            w => panic!("{w:?}"),
        }
        let r2 = h_noninvolutive_at(h.structure(), &x, 2, &SearchOptions::default()).unwrap();
        assert_eq!(r2.verdict, Verdict::NonInvolutive);
        assert!(r2.exact);
    }

    #[test]
    fn h_out_of_range() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let e = h_noninvolutive_at(h.structure(), &Point::origin_exact(3), 3, &SearchOptions::default());
        assert!(matches!(e, Err(InvolutivityError::HOutOfRange { h: 3, k: 2 })));
    }

    #[test]
    fn heisenberg2_min_order_is_three() {
        let h = build_catalog_model("heisenberg_d").unwrap();
        let opts = SearchOptions { restarts: 16, seed: 3, ..Default::default() };
        let (order, reports) = min_noninvolutive_order(h.structure(), &Point::origin_exact(5), &opts).unwrap();
        assert_eq!(order, MinOrder::Order(3));
        assert_eq!(reports[0].verdict, Verdict::InvolutiveAtX);
        let oracle = reports[1].diagnostics.oracle.as_ref().unwrap();
        assert_eq!(oracle.verdict, Verdict::NonInvolutive);
    }

    #[test]
    fn v6_three_planes_and_germs() {
        let m = build_catalog_model("free33_v6").unwrap();
        let x = Point::origin_exact(14);
        let opts = SearchOptions { restarts: 8, seed: 1, ..Default::default() };
        let r = h_noninvolutive_at(m.structure(), &x, 3, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::InvolutiveAtX);
        assert!(r.residual <= 1e-10);
        let basis = unit_basis(6, 3);
        let worst = validate_null_subspace(m.structure(), &x, &basis, 5, 9).unwrap();
        assert!(worst.is_zero());
    }
}
