use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "parameter")]
pub enum GaugeKind {
    /// `Q(ρ) = {|t_j| ≤ ρ^{deg X_j}}`
    Box(f64),
    /// `X(Λ) = {|t_l| ≤ (Λ|t|)^{deg X_l}}`
    Cone(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeSpec {
    pub kind: GaugeKind,
    pub degrees: Vec<u32>,
}

impl GaugeSpec {
    pub fn new(kind: GaugeKind, degrees: Vec<u32>) -> Result<Self, String> {
        let p = match kind {
            GaugeKind::Box(p) | GaugeKind::Cone(p) => p,
        };
        if !(p > 0.0) || !p.is_finite() {
            return Err(format!("gauge parameter must be positive, found {p}"));
        }
        if degrees.iter().any(|&d| d == 0) {
            return Err("degrees must be positive".into());
        }
        Ok(GaugeSpec { kind, degrees })
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        assert_eq!(t.len(), self.degrees.len(), "gauge dimension mismatch");
        let scale = match self.kind {
            GaugeKind::Box(rho) => rho,
            GaugeKind::Cone(lambda) => lambda * t.iter().map(|v| v * v).sum::<f64>().sqrt(),
        };
        t.iter()
            .zip(&self.degrees)
            .all(|(v, &d)| v.abs() <= scale.powi(d as i32))
    }
}

pub fn gauge_membership(g: &GaugeSpec, t: &[f64]) -> bool {
    g.contains(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_and_cone_examples() {
        let q = GaugeSpec::new(GaugeKind::Box(0.1), vec![1, 1, 2]).unwrap();
        assert!(q.contains(&[0.1, 0.1, 0.1 * 0.1]));
        assert!(!q.contains(&[0.0, 0.0, 0.02]));
        let c = GaugeSpec::new(GaugeKind::Cone(2.0), vec![1, 1, 2]).unwrap();
        assert!(c.contains(&[0.1, 0.0, 0.04]));
        assert!(!c.contains(&[0.1, 0.0, 0.06]));
        assert!(GaugeSpec::new(GaugeKind::Box(0.0), vec![1]).is_err());
    }
}
