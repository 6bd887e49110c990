//! Polynomial graphs `Φ(u) = (u, φ(u))` over a parameter box.
//!
//! ```toml
//! domain = [[-1.0, 1.0], [-1.0, 1.0]]
//! components = [[["1/2", [1, 1]]]]
//! ```
//!
//! `domain` fixes the parameter dimension `k'`; each entry of `components`
//! is one coordinate of `φ` in the term format of structure files.

use serde::Serialize;
use toml::Value;

use super::TangencyError;
use crate::calc::{rat, CompiledPoly, Polynomial, Rational};
use crate::structures::load::polynomial;

#[derive(Clone, Debug)]
pub struct SurfaceGraph {
    name: String,
    domain: Vec<[f64; 2]>,
    phi: Vec<Polynomial>,
    /// `dphi[i][j] = ∂_j φ_i`.
    dphi: Vec<Vec<Polynomial>>,
    compiled: Vec<CompiledPoly>,
    compiled_d: Vec<Vec<CompiledPoly>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceSummary {
    pub name: String,
    pub parameters: usize,
    pub ambient: usize,
    pub domain: Vec<[f64; 2]>,
}

impl SurfaceGraph {
    pub fn new(name: impl Into<String>, domain: Vec<[f64; 2]>, phi: Vec<Polynomial>) -> Result<Self, TangencyError> {
        let kp = domain.len();
        if kp == 0 {
            return Err(TangencyError::Invalid("empty parameter domain".into()));
        }
        if let Some(b) = domain.iter().find(|b| !(b[0].is_finite() && b[1].is_finite() && b[0] < b[1])) {
            return Err(TangencyError::Invalid(format!("bad domain interval {b:?}")));
        }
        if let Some(p) = phi.iter().find(|p| p.num_vars() != kp) {
            return Err(TangencyError::Invalid(format!(
                "component in {} variables over a {kp}-dimensional domain",
                p.num_vars()
            )));
        }
        let dphi: Vec<Vec<Polynomial>> = phi.iter().map(|p| p.gradient()).collect();
        let compiled = phi.iter().map(CompiledPoly::new).collect();
        let compiled_d = dphi.iter().map(|row| row.iter().map(CompiledPoly::new).collect()).collect();
        Ok(Self { name: name.into(), domain, phi, dphi, compiled, compiled_d })
    }

    /// The saddle `t = xy/2` in `R^3`, tangent to the Heisenberg plane field along `y = 0`.
    pub fn saddle() -> Self {
        let p = Polynomial::from_terms(2, [(rat(1, 2), vec![1, 1])]).expect("valid polynomial");
        Self::new("saddle", vec![[-1.0, 1.0]; 2], vec![p]).expect("valid surface")
    }

    /// The plane `t = 0` in `R^3`.
    pub fn plane() -> Self {
        Self::new("plane", vec![[-1.0, 1.0]; 2], vec![Polynomial::zero(2)]).expect("valid surface")
    }

    pub fn named(name: &str) -> Option<Self> {
        match name {
            "saddle" => Some(Self::saddle()),
            "plane" => Some(Self::plane()),
            _ => None,
        }
    }

    pub fn load(contents: &str) -> Result<Self, TangencyError> {
        let table: toml::Table = contents.parse().map_err(|e: toml::de::Error| TangencyError::Invalid(e.to_string()))?;
        let domain = table
            .get("domain")
            .and_then(Value::as_array)
            .ok_or_else(|| TangencyError::Invalid("missing `domain`".into()))?
            .iter()
            .map(|b| {
                let b = b.as_array().filter(|b| b.len() == 2);
                let num = |v: &Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
                b.and_then(|b| Some([num(&b[0])?, num(&b[1])?]))
                    .ok_or_else(|| TangencyError::Invalid("domain entries must be [lo, hi]".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let kp = domain.len();
        let phi = table
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| TangencyError::Invalid("missing `components`".into()))?
            .iter()
            .map(|c| polynomial(kp, c))
            .collect::<Result<Vec<_>, _>>()?;
        let name = table.get("name").and_then(Value::as_str).unwrap_or("surface");
        Self::new(name, domain, phi)
    }

    /// A catalog name (`saddle`, `plane`) or a path to a TOML file.
    pub fn resolve(spec: &str) -> Result<Self, TangencyError> {
        if let Some(s) = Self::named(spec) {
            return Ok(s);
        }
        let text = std::fs::read_to_string(spec)
            .map_err(|e| TangencyError::Invalid(format!("cannot read surface {spec:?}: {e}")))?;
        Self::load(&text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `k'`.
    pub fn parameters(&self) -> usize {
        self.domain.len()
    }

    pub fn ambient(&self) -> usize {
        self.domain.len() + self.phi.len()
    }

    pub fn domain(&self) -> &[[f64; 2]] {
        &self.domain
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.phi
    }

    pub fn summary(&self) -> SurfaceSummary {
        SurfaceSummary {
            name: self.name.clone(),
            parameters: self.parameters(),
            ambient: self.ambient(),
            domain: self.domain.clone(),
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.parameters() && u.iter().zip(&self.domain).all(|(v, b)| *v >= b[0] && *v <= b[1])
    }

    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        let mut x = u.to_vec();
        x.extend(self.compiled.iter().map(|p| p.eval(u)));
        x
    }

    /// Columns `∂_j Φ(u)`, `j < k'`.
    pub fn tangent(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let kp = self.parameters();
        (0..kp)
            .map(|j| {
                let mut c = vec![0.0; kp];
                c[j] = 1.0;
                c.extend(self.compiled_d.iter().map(|row| row[j].eval(u)));
                c
            })
            .collect()
    }

    pub fn point_exact(&self, u: &[Rational]) -> Result<Vec<Rational>, TangencyError> {
        let mut x = u.to_vec();
        for p in &self.phi {
            x.push(p.eval_exact(u)?);
        }
        Ok(x)
    }

    pub fn tangent_exact(&self, u: &[Rational]) -> Result<Vec<Vec<Rational>>, TangencyError> {
        let kp = self.parameters();
        (0..kp)
            .map(|j| {
                let mut c = vec![Rational::from_integer(0.into()); kp];
                c[j] = Rational::from_integer(1.into());
                for row in &self.dphi {
                    c.push(row[j].eval_exact(u)?);
                }
                Ok(c)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_graph_and_tangent() {
        let s = SurfaceGraph::saddle();
        assert_eq!(s.point(&[0.5, 0.4]), vec![0.5, 0.4, 0.1]);
        let t = s.tangent(&[0.5, 0.4]);
        assert_eq!(t[0], vec![1.0, 0.0, 0.2]);
        assert_eq!(t[1], vec![0.0, 1.0, 0.25]);
    }

    #[test]
    fn load_matches_saddle() {
        let s = SurfaceGraph::load("domain = [[-1.0, 1.0], [-1, 1]]\ncomponents = [[[\"1/2\", [1, 1]]]]\n").unwrap();
        assert_eq!(s.components(), SurfaceGraph::saddle().components());
        assert_eq!(s.ambient(), 3);
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(SurfaceGraph::new("x", vec![[1.0, -1.0]], vec![]).is_err());
        assert!(SurfaceGraph::load("domain = [[0, 1]]\ncomponents = [[[\"1\", [1, 0]]]]").is_err());
    }
}
