//! Independent reference for Heisenberg distances: shortest paths on a lattice
//! of straight horizontal moves.
//!
//! In the coordinates `X1 = ∂x − (y/2)∂t`, `X2 = ∂y + (x/2)∂t` a straight
//! horizontal move by `(dx, dy)` from `(x, y)` is a straight line in `R^3`
//! that raises `t` by `(x dy − y dx)/2`. With `(x, y) ∈ hZ²` every move
//! changes `t` by a multiple of `h²/2`, so Dijkstra on `hZ² × (h²/2)Z` with
//! 16 move directions gives the length of the shortest lattice path.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

const MOVES: [(i64, i64); 16] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
    (2, 1),
    (1, 2),
    (-1, 2),
    (-2, 1),
    (-2, -1),
    (-1, -2),
    (1, -2),
    (2, -1),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeResult {
    pub length: f64,
    pub h: f64,
    /// Target height in units of `h²/2`.
    pub levels: i64,
    pub states_settled: usize,
}

/// Shortest lattice path from the origin to `target`. The mesh is chosen so
/// that the target height is `levels · h²/2` (or, for `t = 0`, so that the
/// planar part spans `levels` cells); the planar target is rounded to the mesh.
pub fn heisenberg_lattice_distance(target: [f64; 3], levels: usize) -> Option<LatticeResult> {
    let [tx, ty, tt] = target;
    let planar = (tx * tx + ty * ty).sqrt();
    let levels = levels.max(4) as i64;
    let h = if tt != 0.0 {
        (2.0 * tt.abs() / levels as f64).sqrt()
    } else if planar > 0.0 {
        planar / levels as f64
    } else {
        return Some(LatticeResult { length: 0.0, h: 0.0, levels: 0, states_settled: 0 });
    };
    let gi = (tx / h).round() as i64;
    let gj = (ty / h).round() as i64;
    let gt = (tt / (0.5 * h * h)).round() as i64;
    // enclosing loop radius for the vertical part plus the planar reach
    let reach = (tt.abs() / std::f64::consts::PI).sqrt() * 1.3 + planar;
    let w = (reach / h).ceil() as i64 + 3;
    let side = 2 * w + 1;
    let margin = gt.abs() / 4 + 2 * w * w;
    let (tmin, tmax) = (gt.min(0) - margin, gt.max(0) + margin);
    let nt = tmax - tmin + 1;
    let total = (side * side * nt) as usize;
    if total > 200_000_000 {
        return None;
    }
    let index = |i: i64, j: i64, t: i64| (((i + w) * side + (j + w)) * nt + (t - tmin)) as usize;
    let mut dist = vec![f64::INFINITY; total];
    let mut heap = BinaryHeap::new();
    let start = index(0, 0, 0);
    dist[start] = 0.0;
    heap.push(Reverse((Ordered(0.0), 0i64, 0i64, 0i64)));
    let goal = (gi, gj, gt);
    let mut settled = 0;
    while let Some(Reverse((Ordered(d), i, j, t))) = heap.pop() {
        if d > dist[index(i, j, t)] {
            continue;
        }
        settled += 1;
        if (i, j, t) == goal {
            return Some(LatticeResult { length: d, h, levels: gt, states_settled: settled });
        }
        for &(a, b) in &MOVES {
            let (ni, nj) = (i + a, j + b);
            let nt2 = t + i * b - j * a;
            if ni.abs() > w || nj.abs() > w || nt2 < tmin || nt2 > tmax {
                continue;
            }
            let dt = 0.5 * h * h * (i * b - j * a) as f64;
            let step = (h * h * (a * a + b * b) as f64 + dt * dt).sqrt();
            let nd = d + step;
            let idx = index(ni, nj, nt2);
            if nd < dist[idx] {
                dist[idx] = nd;
                heap.push(Reverse((Ordered(nd), ni, nj, nt2)));
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Ordered(f64);

impl Eq for Ordered {}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Ordered {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_target_is_straight() {
        let r = heisenberg_lattice_distance([1.0, 0.0, 0.0], 16).unwrap();
        assert!((r.length - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vertical_target_near_isoperimetric_value() {
        let s = 0.1;
        let r = heisenberg_lattice_distance([0.0, 0.0, s], 256).unwrap();
        let circle = (4.0 * std::f64::consts::PI * s).sqrt();
        assert!(r.length >= circle * 0.999 && r.length <= circle * 1.06, "{} vs {circle}", r.length);
    }
}
