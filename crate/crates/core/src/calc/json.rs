//! JSON encoding: a polynomial is an array of `{"c": "p/q", "e": [..]}` terms,
//! a vector field an array of polynomials, a form an array of
//! `{"idx": [..], "poly": [..]}` entries with 1-based indices.

use serde_json::{json, Value};

use super::{CalcError, PolyForm, PolyVectorField, Polynomial, Rational};

/// Parses `"p/q"`, `"p"` or a decimal such as `"-0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, CalcError> {
    let s = s.trim();
    let bad = || CalcError::Parse(format!("invalid rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: num_bigint::BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: num_bigint::BigInt = d.trim().parse().map_err(|_| bad())?;
        if d == 0.into() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Ok(n) = s.parse::<num_bigint::BigInt>() {
        return Ok(Rational::from_integer(n));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').ok_or_else(bad)?;
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || int.len() + frac.len() == 0 {
        return Err(bad());
    }
    let digits: num_bigint::BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let scale = num_traits::pow(num_bigint::BigInt::from(10), frac.len());
    let r = Rational::new(digits, scale);
    Ok(if neg { -r } else { r })
}

pub fn polynomial_to_json(p: &Polynomial) -> Value {
    Value::Array(
        p.terms()
            .map(|(m, c)| json!({"c": c.to_string(), "e": m.exponents()}))
            .collect(),
    )
}

pub fn polynomial_from_json(num_vars: usize, v: &Value) -> Result<Polynomial, CalcError> {
    let terms = v
        .as_array()
        .ok_or_else(|| CalcError::Parse("polynomial must be an array of terms".into()))?;
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let c = t
            .get("c")
            .and_then(Value::as_str)
            .ok_or_else(|| CalcError::Parse("term without string field \"c\"".into()))?;
        let e = t
            .get("e")
            .and_then(Value::as_array)
            .ok_or_else(|| CalcError::Parse("term without array field \"e\"".into()))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .and_then(|x| u32::try_from(x).ok())
                    .ok_or_else(|| CalcError::Parse("exponent must be a non-negative integer".into()))
            })
            .collect::<Result<Vec<u32>, _>>()?;
        out.push((parse_rational(c)?, e));
    }
    Polynomial::from_terms(num_vars, out)
}

pub fn field_to_json(x: &PolyVectorField) -> Value {
    Value::Array(x.components().iter().map(polynomial_to_json).collect())
}

pub fn field_from_json(v: &Value) -> Result<PolyVectorField, CalcError> {
    let comps = v
        .as_array()
        .ok_or_else(|| CalcError::Parse("vector field must be an array".into()))?;
    let n = comps.len();
    PolyVectorField::new(
        comps
            .iter()
            .map(|c| polynomial_from_json(n, c))
            .collect::<Result<_, _>>()?,
    )
}

pub fn form_to_json(w: &PolyForm) -> Value {
    Value::Array(
        w.coefficients()
            .map(|(idx, p)| {
                let one_based: Vec<usize> = idx.iter().map(|i| i + 1).collect();
                json!({"idx": one_based, "poly": polynomial_to_json(p)})
            })
            .collect(),
    )
}

pub fn form_from_json(num_vars: usize, degree: usize, v: &Value) -> Result<PolyForm, CalcError> {
    let entries = v
        .as_array()
        .ok_or_else(|| CalcError::Parse("form must be an array".into()))?;
    let mut coeffs = Vec::new();
    for e in entries {
        let idx = e
            .get("idx")
            .and_then(Value::as_array)
            .ok_or_else(|| CalcError::Parse("form entry without \"idx\"".into()))?
            .iter()
            .map(|i| match i.as_u64() {
                Some(i) if i >= 1 => Ok(i as usize - 1),
                _ => Err(CalcError::Parse("indices are 1-based positive integers".into())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let p = polynomial_from_json(num_vars, e.get("poly").unwrap_or(&Value::Null))?;
        coeffs.push((idx, p));
    }
    PolyForm::from_coefficients(num_vars, degree, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::testing::{heisenberg_annihilator, heisenberg_frame, q};

    #[test]
    fn rationals_parse() {
        assert_eq!(parse_rational("-1/2").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert_eq!(parse_rational("-0.25").unwrap(), q(-1, 4));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn field_roundtrip() {
        let [x1, _] = heisenberg_frame();
        let v = field_to_json(&x1);
        assert_eq!(v[2][0]["c"], "-1/2");
        assert_eq!(field_from_json(&v).unwrap(), x1);
    }

    #[test]
    fn form_roundtrip() {
        let w = heisenberg_annihilator();
        let v = form_to_json(&w);
        assert_eq!(form_from_json(3, 1, &v).unwrap(), w);
        let dw = w.exterior_derivative().unwrap();
        assert_eq!(form_to_json(&dw)[0]["idx"], json!([1, 2]));
    }
}
