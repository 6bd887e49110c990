use serde::Serialize;

use super::FlowError;
use crate::calc::CompiledFrame;
use crate::structures::ComplementedStructure;

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowResult {
    pub point: Vec<f64>,
    /// Richardson estimate `|x_h − x_{h/2}| / 15` of the global error.
    pub error_estimate: f64,
    pub steps: usize,
}

/// Fixed-step classical RK4 for `x' = Σ t_j X_j(x)` over `[0, time]`,
/// checking every stage point against the box `[lo, hi]^n`.
pub fn integrate(
    frame: &CompiledFrame,
    t: &[f64],
    x: &[f64],
    time: f64,
    steps: usize,
    working_box: [f64; 2],
) -> Result<Vec<f64>, FlowError> {
    let n = frame.dim();
    let mut y = x.to_vec();
    if steps == 0 || time == 0.0 || t.iter().all(|&v| v == 0.0) {
        return Ok(y);
    }
    let h = time / steps as f64;
    let [lo, hi] = working_box;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let outside = |p: &[f64]| p.iter().any(|&v| !(v >= lo && v <= hi));
    for s in 0..steps {
        frame.combo(t, &y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        frame.combo(t, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        frame.combo(t, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        frame.combo(t, &tmp, &mut k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if outside(&y) {
            return Err(FlowError::ExitedBox {
                time: h * (s + 1) as f64,
                point: y,
            });
        }
    }
    Ok(y)
}

/// Flow of `Σ t_j X_j` from `x` for `time`. `t` has one entry per frame field
/// (`k` entries) or per full-frame field (`n` entries).
pub fn flow_point(
    s: &ComplementedStructure,
    x: &[f64],
    t: &[f64],
    time: f64,
    h_int: f64,
) -> Result<FlowResult, FlowError> {
    let n = s.n();
    if x.len() != n {
        return Err(FlowError::Dimension { expected: n, found: x.len() });
    }
    if t.len() != n && t.len() != s.k() {
        return Err(FlowError::Dimension { expected: n, found: t.len() });
    }
    if !(h_int > 0.0) {
        return Err(FlowError::InvalidChart("integration step must be positive".into()));
    }
    if !s.in_box(x) {
        return Err(FlowError::ExitedBox { time: 0.0, point: x.to_vec() });
    }
    let mut coeffs = t.to_vec();
    coeffs.resize(n, 0.0);
    let steps = ((time.abs() / h_int).ceil() as usize).max(1);
    let coarse = integrate(s.compiled(), &coeffs, x, time, steps, s.working_box())?;
    let fine = integrate(s.compiled(), &coeffs, x, time, 2 * steps, s.working_box())?;
    let diff = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FlowResult {
        point: fine,
        error_estimate: diff / 15.0,
        steps: 2 * steps,
    })
}
