//! TOML structure files.
//!
//! ```toml
//! name = "heisenberg1"
//! n = 3
//! k = 2
//! box = [-1.0, 1.0]
//!
//! [[field]]
//! components = [[["1", [0, 0, 0]]], [], [["-1/2", [0, 1, 0]]]]
//!
//! [[field]]
//! components = [[], [["1", [0, 0, 0]]], [["1/2", [1, 0, 0]]]]
//!
//! [[complement]]
//! recipe = [1, 2]
//! ```
//!
//! Each component is a list of `[coefficient, exponents]` terms; coefficients
//! are strings such as `"-1/2"` or numbers. Recipes use 1-based frame indices
//! and nest for higher commutators, e.g. `[1, [1, 2]]`.

use std::path::Path;

use toml::Value;

use super::catalog::{build_catalog_model, flat_structure, parse_flat_name, CATALOG_NAMES};
use super::complemented::{ComplementedStructure, Distribution, Recipe};
use super::StructureError;
use crate::calc::json::parse_rational;
use crate::calc::{f64_to_rational, PolyVectorField, Polynomial, Rational};

fn perr(msg: impl Into<String>) -> StructureError {
    StructureError::Parse(msg.into())
}

fn coefficient(v: &Value) -> Result<Rational, StructureError> {
    match v {
        Value::String(s) => Ok(parse_rational(s)?),
        Value::Integer(i) => Ok(Rational::from_integer((*i).into())),
        Value::Float(f) => Ok(f64_to_rational(*f)?),
        other => Err(perr(format!("coefficient must be a string or number, found {other}"))),
    }
}

pub(crate) fn polynomial(n: usize, v: &Value) -> Result<Polynomial, StructureError> {
    let terms = v.as_array().ok_or_else(|| perr("component must be a list of terms"))?;
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let pair = t
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| perr("term must be [coefficient, exponents]"))?;
        let exps = pair[1]
            .as_array()
            .ok_or_else(|| perr("exponents must be a list"))?
            .iter()
            .map(|e| {
                e.as_integer()
                    .and_then(|e| u32::try_from(e).ok())
                    .ok_or_else(|| perr("exponents must be non-negative integers"))
            })
            .collect::<Result<Vec<u32>, _>>()?;
        if exps.len() != n {
            return Err(perr(format!("exponent vector of length {} in R^{n}", exps.len())));
        }
        out.push((coefficient(&pair[0])?, exps));
    }
    Ok(Polynomial::from_terms(n, out)?)
}

fn recipe(v: &Value, k: usize) -> Result<Recipe, StructureError> {
    match v {
        Value::Integer(i) if *i >= 1 && (*i as usize) <= k => Ok(Recipe::Leaf(*i as usize - 1)),
        Value::Integer(i) => Err(StructureError::InvalidRecipe(format!("index {i} outside 1..={k}"))),
        Value::Array(a) if a.len() == 2 => Ok(Recipe::bracket(recipe(&a[0], k)?, recipe(&a[1], k)?)),
        other => Err(StructureError::InvalidRecipe(format!("expected an index or a pair, found {other}"))),
    }
}

fn usize_key(table: &toml::Table, key: &str) -> Result<usize, StructureError> {
    table
        .get(key)
        .and_then(Value::as_integer)
        .and_then(|v| usize::try_from(v).ok())
        .filter(|&v| v > 0)
        .ok_or_else(|| perr(format!("missing or invalid positive integer `{key}`")))
}

/// Parses and validates a structure file.
pub fn load_structure(contents: &str) -> Result<ComplementedStructure, StructureError> {
    let table: toml::Table = contents.parse().map_err(|e: toml::de::Error| perr(e.to_string()))?;
    let n = usize_key(&table, "n")?;
    let k = usize_key(&table, "k")?;
    let name = table.get("name").and_then(Value::as_str).unwrap_or("unnamed").to_string();
    let working_box = match table.get("box") {
        None => [-1.0, 1.0],
        Some(v) => {
            let a = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| perr("`box` must be [lo, hi]"))?;
            let num = |x: &Value| {
                x.as_float()
                    .or_else(|| x.as_integer().map(|i| i as f64))
                    .ok_or_else(|| perr("`box` entries must be numbers"))
            };
            [num(&a[0])?, num(&a[1])?]
        }
    };
    let fields = table
        .get("field")
        .and_then(Value::as_array)
        .ok_or_else(|| perr("missing [[field]] entries"))?;
    if fields.len() != k {
        return Err(perr(format!("k = {k} but {} [[field]] entries", fields.len())));
    }
    let mut frame = Vec::with_capacity(k);
    for f in fields {
        let comps = f
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| perr("[[field]] needs `components`"))?;
        if comps.len() != n {
            return Err(perr(format!("field with {} components in R^{n}", comps.len())));
        }
        let polys = comps.iter().map(|c| polynomial(n, c)).collect::<Result<Vec<_>, _>>()?;
        frame.push(PolyVectorField::new(polys)?);
    }
    let recipes = match table.get("complement") {
        None => Vec::new(),
        Some(v) => v
            .as_array()
            .ok_or_else(|| perr("`complement` must be an array of tables"))?
            .iter()
            .map(|c| recipe(c.get("recipe").ok_or_else(|| perr("[[complement]] needs `recipe`"))?, k))
            .collect::<Result<Vec<_>, _>>()?,
    };
    ComplementedStructure::from_recipes(Distribution::new(name, frame)?, recipes, working_box)
}

/// A catalog name or a path to a structure file.
pub fn resolve_structure(spec: &str) -> Result<ComplementedStructure, StructureError> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| perr(format!("{spec}: {e}")))?;
        return load_structure(&text);
    }
    if CATALOG_NAMES.contains(&spec) || spec.starts_with("heisenberg") {
        return Ok(build_catalog_model(spec)?.into_structure());
    }
    if let Some((n, k)) = parse_flat_name(spec) {
        return flat_structure(n, k);
    }
    Err(perr(format!("{spec:?} is neither a file nor a catalog model")))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const HEISENBERG: &str = r#"
name = "heisenberg1"
n = 3
k = 2
box = [-1.0, 1.0]

[[field]]
components = [[["1", [0, 0, 0]]], [], [["-1/2", [0, 1, 0]]]]

[[field]]
components = [[], [["1", [0, 0, 0]]], [["1/2", [1, 0, 0]]]]

[[complement]]
recipe = [1, 2]
"#;

    const ENGEL: &str = r#"
name = "engel"
n = 4
k = 2
box = [-2, 2]

[[field]]
components = [[[1, [0, 0, 0, 0]]], [], [], []]

[[field]]
components = [[], [[1, [0, 0, 0, 0]]], [[1, [1, 0, 0, 0]]], [["1/2", [2, 0, 0, 0]]]]

[[complement]]
recipe = [1, 2]

[[complement]]
recipe = [1, [1, 2]]
"#;

    #[test]
    fn heisenberg_round_trip() {
        let s = load_structure(HEISENBERG).unwrap();
        assert_eq!((s.n(), s.k()), (3, 2));
        assert_eq!(s.degrees(), &[1, 1, 2]);
        assert_eq!(s.complement()[0], PolyVectorField::coordinate(3, 2));
        let cat = build_catalog_model("heisenberg1").unwrap();
        assert_eq!(s.frame(), cat.structure().frame());
    }

    #[test]
    fn engel_accepted() {
        let s = load_structure(ENGEL).unwrap();
        assert_eq!(s.degrees(), &[1, 1, 2, 3]);
        assert!(!s.warnings().is_empty());
    }

    #[test]
    fn duplicate_field_is_dependent() {
        let text = HEISENBERG.replace(
            r#"components = [[], [["1", [0, 0, 0]]], [["1/2", [1, 0, 0]]]]"#,
            r#"components = [[["1", [0, 0, 0]]], [], [["-1/2", [0, 1, 0]]]]"#,
        );
        let err = load_structure(&text).unwrap_err();
        assert!(matches!(err, StructureError::DependentFrame { .. }), "{err}");
        assert!(err.to_string().contains("dependent frame"));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(load_structure("n = ["), Err(StructureError::Parse(_))));
        let bad_recipe = HEISENBERG.replace("recipe = [1, 2]", "recipe = [1, 3]");
        assert!(matches!(load_structure(&bad_recipe), Err(StructureError::InvalidRecipe(_))));
        let leaf = HEISENBERG.replace("recipe = [1, 2]", "recipe = 1");
        assert!(load_structure(&leaf).is_err());
    }
}
