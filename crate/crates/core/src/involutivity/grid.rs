//! Brute-force search for null subspaces of small bracket forms, used to
//! cross-check the manifold optimisation.

use nalgebra::DMatrix;

use super::bracket_form::{residual_f64, BracketForm};
use super::{Verdict, INVOLUTIVE_THRESHOLD, NONINVOLUTIVE_THRESHOLD};
use crate::calc::combinations;

pub const GRID_MAX_RANK: usize = 4;
const GRID_POINTS: usize = 21;
const ZOOM_SEEDS: usize = 8;
const ZOOM_ITERS: usize = 120;

#[derive(Clone, Debug, PartialEq)]
pub struct GridOracleResult {
    pub verdict: Verdict,
    pub min_residual: f64,
    pub best_basis: Vec<Vec<f64>>,
    pub evaluations: usize,
}

fn orthonormal(mut vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for a in 0..vs.len() {
        for b in 0..a {
            let d: f64 = vs[a].iter().zip(&vs[b]).map(|(x, y)| x * y).sum();
            let vb = vs[b].clone();
            vs[a].iter_mut().zip(&vb).for_each(|(x, y)| *x -= d * y);
        }
        let n = vs[a].iter().map(|x| x * x).sum::<f64>().sqrt();
        vs[a].iter_mut().for_each(|x| *x /= n);
    }
    vs
}

struct Chart {
    pivots: Vec<usize>,
    free: Vec<usize>,
}

impl Chart {
    fn basis(&self, k: usize, params: &[f64]) -> Vec<Vec<f64>> {
        let h = self.pivots.len();
        let vs = (0..h)
            .map(|a| {
                let mut w = vec![0.0; k];
                w[self.pivots[a]] = 1.0;
                for (r, &row) in self.free.iter().enumerate() {
                    w[row] = params[r * h + a];
                }
                w
            })
            .collect();
        orthonormal(vs)
    }
}

/// Grid search over all coordinate charts `[I; A]` with `|A_ij| ≤ 1`
/// (every subspace has such a chart), followed by pattern-search zooms around
/// the best grid points. Returns `None` when `k` exceeds [`GRID_MAX_RANK`].
pub fn grid_oracle(form: &BracketForm, h: usize) -> Option<GridOracleResult> {
    let k = form.k;
    if k > GRID_MAX_RANK || h < 2 || h > k {
        return None;
    }
    let mats: Vec<DMatrix<f64>> = form.float_matrices();
    let p = (k - h) * h;
    let charts: Vec<Chart> = combinations(k, h)
        .into_iter()
        .map(|pivots| Chart {
            free: (0..k).filter(|i| !pivots.contains(i)).collect(),
            pivots,
        })
        .collect();
    let mut evaluations = 0usize;
    // (residual, chart, params)
    let mut best: Vec<(f64, usize, Vec<f64>)> = Vec::new();
    let axis: Vec<f64> = (0..GRID_POINTS)
        .map(|i| -1.0 + 2.0 * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let total = GRID_POINTS.pow(p as u32);
    for (ci, chart) in charts.iter().enumerate() {
        for idx in 0..total {
            let mut rem = idx;
            let params: Vec<f64> = (0..p)
                .map(|_| {
                    let v = axis[rem % GRID_POINTS];
                    rem /= GRID_POINTS;
                    v
                })
                .collect();
            let r = residual_f64(&mats, &chart.basis(k, &params));
            evaluations += 1;
            if best.len() < ZOOM_SEEDS || r < best[best.len() - 1].0 {
                best.push((r, ci, params));
                best.sort_by(|a, b| a.0.total_cmp(&b.0));
                best.truncate(ZOOM_SEEDS);
            }
        }
    }
    let spacing = 2.0 / (GRID_POINTS - 1) as f64;
    let mut refined = Vec::new();
    for (r0, ci, params) in best {
        let chart = &charts[ci];
        let (mut r, mut x, mut w) = (r0, params, spacing);
        for _ in 0..ZOOM_ITERS {
            if p == 0 || w < 1e-14 {
                break;
            }
            let mut improved = false;
            for idx in 0..5usize.pow(p as u32) {
                let mut rem = idx;
                let cand: Vec<f64> = x
                    .iter()
                    .map(|&c| {
                        let s = (rem % 5) as f64 - 2.0;
                        rem /= 5;
                        c + 0.5 * s * w
                    })
                    .collect();
                let rc = residual_f64(&mats, &chart.basis(k, &cand));
                evaluations += 1;
                if rc < r {
                    r = rc;
                    x = cand;
                    improved = true;
                }
            }
            if !improved {
                w *= 0.5;
            }
        }
        refined.push((r, chart.basis(k, &x)));
    }
    let (min_residual, best_basis) = refined
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one chart");
    let verdict = if min_residual < INVOLUTIVE_THRESHOLD {
        Verdict::InvolutiveAtX
    } else if min_residual >= NONINVOLUTIVE_THRESHOLD {
        Verdict::NonInvolutive
    } else {
        Verdict::Undecided
    };
    Some(GridOracleResult {
        verdict,
        min_residual,
        best_basis,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::Point;
    use crate::involutivity::bracket_form;
    use crate::structures::build_catalog_model;

    #[test]
    fn heisenberg_has_no_null_plane() {
        let h = build_catalog_model("heisenberg1").unwrap();
        let b = bracket_form(h.structure(), &Point::origin_exact(3)).unwrap();
        let r = grid_oracle(&b, 2).unwrap();
        assert_eq!(r.verdict, Verdict::NonInvolutive);
        assert!((r.min_residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg2_has_null_planes() {
        let h = build_catalog_model("heisenberg_d").unwrap();
        let b = bracket_form(h.structure(), &Point::origin_exact(5)).unwrap();
        let r = grid_oracle(&b, 2).unwrap();
        assert_eq!(r.verdict, Verdict::InvolutiveAtX);
        assert_eq!(grid_oracle(&b, 3).unwrap().verdict, Verdict::NonInvolutive);
    }
}
