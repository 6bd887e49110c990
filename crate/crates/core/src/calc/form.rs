use std::collections::BTreeMap;

use super::field::PolyVectorField;
use super::polynomial::Polynomial;
use super::CalcError;

/// Strictly increasing multi-index (0-based) naming `dx_I` or `e_I`.
pub type MultiIndex = Vec<usize>;

/// Sign of the permutation that sorts the concatenation `a ++ b`, or `None`
/// if the two index sets intersect.
pub(crate) fn merge_sign(a: &[usize], b: &[usize]) -> Option<(i32, MultiIndex)> {
    let mut inversions = 0usize;
    for &x in a {
        for &y in b {
            if x == y {
                return None;
            }
            if x > y {
                inversions += 1;
            }
        }
    }
    let mut merged: MultiIndex = a.iter().chain(b).copied().collect();
    merged.sort_unstable();
    Some((if inversions % 2 == 0 { 1 } else { -1 }, merged))
}

fn is_increasing(idx: &[usize]) -> bool {
    idx.windows(2).all(|w| w[0] < w[1])
}

fn insert_coeff(map: &mut BTreeMap<MultiIndex, Polynomial>, idx: MultiIndex, p: Polynomial) {
    if p.is_zero() {
        return;
    }
    match map.remove(&idx) {
        Some(existing) => {
            let sum = &existing + &p;
            if !sum.is_zero() {
                map.insert(idx, sum);
            }
        }
        None => {
            map.insert(idx, p);
        }
    }
}

/// Differential `p`-form `Σ ω_I dx_I` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyForm {
    num_vars: usize,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, Polynomial>,
}

impl PolyForm {
    pub fn zero(num_vars: usize, degree: usize) -> Result<Self, CalcError> {
        if degree > num_vars {
            return Err(CalcError::DegreeMismatch(format!(
                "form degree {degree} exceeds dimension {num_vars}"
            )));
        }
        Ok(PolyForm {
            num_vars,
            degree,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn from_coefficients<I>(num_vars: usize, degree: usize, coeffs: I) -> Result<Self, CalcError>
    where
        I: IntoIterator<Item = (MultiIndex, Polynomial)>,
    {
        let mut form = Self::zero(num_vars, degree)?;
        for (idx, p) in coeffs {
            if idx.len() != degree || !is_increasing(&idx) || idx.iter().any(|&i| i >= num_vars) {
                return Err(CalcError::BadMultiIndex(idx));
            }
            if p.num_vars() != num_vars {
                return Err(CalcError::DimensionMismatch {
                    expected: num_vars,
                    found: p.num_vars(),
                });
            }
            insert_coeff(&mut form.coeffs, idx, p);
        }
        Ok(form)
    }

    /// The 1-form `Σ c_i dx_i`.
    pub fn one_form(coeffs: Vec<Polynomial>) -> Result<Self, CalcError> {
        let n = coeffs.len();
        Self::from_coefficients(n, 1, coeffs.into_iter().enumerate().map(|(i, p)| (vec![i], p)))
    }

    /// `dx_I` with unit coefficient.
    pub fn basis(num_vars: usize, idx: MultiIndex) -> Result<Self, CalcError> {
        let d = idx.len();
        Self::from_coefficients(num_vars, d, [(idx, Polynomial::one(num_vars))])
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&MultiIndex, &Polynomial)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, idx: &[usize]) -> Polynomial {
        self.coeffs
            .get(idx)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.num_vars))
    }

    /// `d(Σ ω_I dx_I) = Σ_I Σ_j ∂_j ω_I dx_j ∧ dx_I`.
    pub fn exterior_derivative(&self) -> Result<PolyForm, CalcError> {
        if self.degree >= self.num_vars {
            return Err(CalcError::TopDegree(self.degree));
        }
        let mut out = PolyForm::zero(self.num_vars, self.degree + 1)?;
        for (idx, w) in &self.coeffs {
            for j in 0..self.num_vars {
                let d = w.derivative(j);
                if d.is_zero() {
                    continue;
                }
                if let Some((sign, merged)) = merge_sign(&[j], idx) {
                    let term = if sign > 0 { d } else { -d };
                    insert_coeff(&mut out.coeffs, merged, term);
                }
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &PolyForm) -> Result<PolyForm, CalcError> {
        if self.num_vars != other.num_vars {
            return Err(CalcError::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            });
        }
        let mut out = PolyForm::zero(self.num_vars, self.degree + other.degree)?;
        for (a, pa) in &self.coeffs {
            for (b, pb) in &other.coeffs {
                if let Some((sign, merged)) = merge_sign(a, b) {
                    let prod = pa * pb;
                    insert_coeff(&mut out.coeffs, merged, if sign > 0 { prod } else { -prod });
                }
            }
        }
        Ok(out)
    }

    /// `ω(X)` for a 1-form.
    pub fn apply_field(&self, x: &PolyVectorField) -> Result<Polynomial, CalcError> {
        if self.degree != 1 {
            return Err(CalcError::DegreeMismatch(format!(
                "expected a 1-form, found degree {}",
                self.degree
            )));
        }
        self.evaluate_on(&Multivector::from_field(x))
    }

    /// Pairing `⟨v, ω⟩ = Σ_I v_I ω_I` with a multivector of the same degree.
    pub fn evaluate_on(&self, v: &Multivector) -> Result<Polynomial, CalcError> {
        if v.grade() != self.degree || v.num_vars() != self.num_vars {
            return Err(CalcError::DegreeMismatch(format!(
                "cannot pair a {}-form with a {}-vector",
                self.degree,
                v.grade()
            )));
        }
        let mut acc = Polynomial::zero(self.num_vars);
        for (idx, w) in &self.coeffs {
            if let Some(c) = v.coeffs.get(idx) {
                acc = &acc + &(w * c);
            }
        }
        Ok(acc)
    }
}

/// `p`-vector `Σ v_I e_I` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multivector {
    num_vars: usize,
    grade: usize,
    coeffs: BTreeMap<MultiIndex, Polynomial>,
}

impl Multivector {
    pub fn zero(num_vars: usize, grade: usize) -> Self {
        Multivector {
            num_vars,
            grade,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(num_vars: usize, idx: MultiIndex) -> Result<Self, CalcError> {
        if !is_increasing(&idx) || idx.iter().any(|&i| i >= num_vars) {
            return Err(CalcError::BadMultiIndex(idx));
        }
        let mut v = Self::zero(num_vars, idx.len());
        v.coeffs.insert(idx, Polynomial::one(num_vars));
        Ok(v)
    }

    pub fn from_field(x: &PolyVectorField) -> Self {
        let n = x.num_vars();
        let mut v = Self::zero(n, 1);
        for (i, c) in x.components().iter().enumerate() {
            insert_coeff(&mut v.coeffs, vec![i], c.clone());
        }
        v
    }

    /// `X_1 ∧ … ∧ X_p`; the `e_I` coefficient is the minor of rows `I`.
    pub fn wedge_fields(fields: &[PolyVectorField]) -> Result<Self, CalcError> {
        let n = fields.first().ok_or(CalcError::Empty)?.num_vars();
        if let Some(bad) = fields.iter().find(|f| f.num_vars() != n) {
            return Err(CalcError::DimensionMismatch {
                expected: n,
                found: bad.num_vars(),
            });
        }
        let p = fields.len();
        let mut v = Self::zero(n, p);
        for idx in combinations(n, p) {
            let det = minor_det(fields, &idx);
            insert_coeff(&mut v.coeffs, idx, det);
        }
        Ok(v)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, idx: &[usize]) -> Polynomial {
        self.coeffs
            .get(idx)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.num_vars))
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&MultiIndex, &Polynomial)> {
        self.coeffs.iter()
    }

    /// Interprets a 1-vector as a vector field.
    pub fn to_field(&self) -> Result<PolyVectorField, CalcError> {
        if self.grade != 1 {
            return Err(CalcError::DegreeMismatch(format!(
                "expected a 1-vector, found grade {}",
                self.grade
            )));
        }
        PolyVectorField::new((0..self.num_vars).map(|i| self.coefficient(&[i])).collect())
    }

    pub fn scale_poly(&self, f: &Polynomial) -> Self {
        let mut out = Self::zero(self.num_vars, self.grade);
        for (idx, c) in &self.coeffs {
            insert_coeff(&mut out.coeffs, idx.clone(), f * c);
        }
        out
    }

    pub fn sub(&self, other: &Multivector) -> Self {
        let mut out = self.clone();
        for (idx, c) in &other.coeffs {
            insert_coeff(&mut out.coeffs, idx.clone(), -c);
        }
        out
    }
}

/// Interior product `v ⌟ α`, defined by `⟨v ⌟ α, β⟩ = ⟨v, α ∧ β⟩`.
///
/// On basis elements `e_I ⌟ dx_J = sgn(J, I∖J) e_{I∖J}` when `J ⊆ I`, else 0.
pub fn interior_product(v: &Multivector, alpha: &PolyForm) -> Result<Multivector, CalcError> {
    if v.num_vars != alpha.num_vars() {
        return Err(CalcError::DimensionMismatch {
            expected: v.num_vars,
            found: alpha.num_vars(),
        });
    }
    if alpha.degree() > v.grade {
        return Err(CalcError::DegreeMismatch(format!(
            "cannot contract a {}-vector with a {}-form",
            v.grade,
            alpha.degree()
        )));
    }
    let mut out = Multivector::zero(v.num_vars, v.grade - alpha.degree());
    for (i_idx, vc) in &v.coeffs {
        for (j_idx, ac) in alpha.coefficients() {
            if !j_idx.iter().all(|j| i_idx.contains(j)) {
                continue;
            }
            let rest: MultiIndex = i_idx.iter().copied().filter(|i| !j_idx.contains(i)).collect();
            let (sign, _) = merge_sign(j_idx, &rest).expect("disjoint by construction");
            let prod = vc * ac;
            insert_coeff(&mut out.coeffs, rest, if sign > 0 { prod } else { -prod });
        }
    }
    Ok(out)
}

pub fn exterior_derivative(omega: &PolyForm) -> Result<PolyForm, CalcError> {
    omega.exterior_derivative()
}

/// All increasing `p`-subsets of `0..n`.
pub fn combinations(n: usize, p: usize) -> Vec<MultiIndex> {
    fn rec(start: usize, n: usize, p: usize, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < p - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, p, &mut Vec::with_capacity(p), &mut out);
    out
}

fn minor_det(fields: &[PolyVectorField], rows: &[usize]) -> Polynomial {
    let n = fields[0].num_vars();
    let p = fields.len();
    if p == 0 {
        return Polynomial::one(n);
    }
    if p == 1 {
        return fields[0].component(rows[0]).clone();
    }
    // Laplace expansion along the last column
    let last = &fields[p - 1];
    let mut acc = Polynomial::zero(n);
    for (r, &row) in rows.iter().enumerate() {
        let entry = last.component(row);
        if entry.is_zero() {
            continue;
        }
        let sub_rows: Vec<usize> = rows.iter().enumerate().filter(|&(i, _)| i != r).map(|(_, &x)| x).collect();
        let sub = minor_det(&fields[..p - 1], &sub_rows);
        let term = entry * &sub;
        // cofactor sign for entry (r, p-1)
        if (r + p - 1) % 2 == 0 {
            acc = &acc + &term;
        } else {
            acc = &acc - &term;
        }
    }
    acc
}

/// Divergence of a 1-vector.
pub fn divergence_multivector(v: &Multivector) -> Result<Polynomial, CalcError> {
    Ok(v.to_field()?.divergence())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::testing::{heisenberg_annihilator, heisenberg_frame, q};

    #[test]
    fn d_of_y_dx() {
        let y = Polynomial::var(2, 1);
        let w = PolyForm::from_coefficients(2, 1, [(vec![0], y)]).unwrap();
        let dw = w.exterior_derivative().unwrap();
        assert_eq!(dw.coefficient(&[0, 1]), Polynomial::from_int(2, -1));
    }

    #[test]
    fn d_of_x_dy() {
        let x = Polynomial::var(2, 0);
        let w = PolyForm::from_coefficients(2, 1, [(vec![1], x)]).unwrap();
        let dw = w.exterior_derivative().unwrap();
        assert_eq!(dw.coefficient(&[0, 1]), Polynomial::one(2));
    }

    #[test]
    fn heisenberg_annihilator_differential() {
        let w = heisenberg_annihilator();
        let dw = w.exterior_derivative().unwrap();
        let expected = PolyForm::from_coefficients(3, 2, [(vec![0, 1], Polynomial::from_int(3, -1))]).unwrap();
        assert_eq!(dw, expected);
    }

    #[test]
    fn top_degree_is_rejected() {
        let w = PolyForm::basis(2, vec![0, 1]).unwrap();
        assert!(matches!(w.exterior_derivative(), Err(CalcError::TopDegree(2))));
    }

    #[test]
    fn contraction_of_basis_bivectors() {
        let e12 = Multivector::basis(3, vec![0, 1]).unwrap();
        let dx1 = PolyForm::basis(3, vec![0]).unwrap();
        let dx3 = PolyForm::basis(3, vec![2]).unwrap();
        assert_eq!(interior_product(&e12, &dx1).unwrap(), Multivector::basis(3, vec![1]).unwrap());
        assert!(interior_product(&e12, &dx3).unwrap().is_zero());
    }

    #[test]
    fn contraction_degree_mismatch() {
        let e1 = Multivector::basis(3, vec![0]).unwrap();
        let dx12 = PolyForm::basis(3, vec![0, 1]).unwrap();
        assert!(matches!(
            interior_product(&e1, &dx12),
            Err(CalcError::DegreeMismatch(_))
        ));
    }

    #[test]
    fn heisenberg_frame_contracts_annihilator_to_zero() {
        let [x1, x2] = heisenberg_frame();
        let w = heisenberg_annihilator();
        let v = Multivector::wedge_fields(&[x1.clone(), x2.clone()]).unwrap();
        assert!(interior_product(&v, &w).unwrap().is_zero());
        // and the closed formula ω(X)Y − ω(Y)X agrees
        assert!(w.apply_field(&x1).unwrap().is_zero());
        assert!(w.apply_field(&x2).unwrap().is_zero());
    }

    #[test]
    fn contraction_matches_duality_on_basis() {
        // ⟨v⌟α, β⟩ = ⟨v, α∧β⟩ for every basis 3-vector, 1-form and 2-covector in R^4
        let n = 4;
        for i in combinations(n, 3) {
            let v = Multivector::basis(n, i).unwrap();
            for a in combinations(n, 1) {
                let alpha = PolyForm::basis(n, a).unwrap();
                for b in combinations(n, 2) {
                    let beta = PolyForm::basis(n, b).unwrap();
                    let lhs = beta.evaluate_on(&interior_product(&v, &alpha).unwrap()).unwrap();
                    let rhs = alpha.wedge(&beta).unwrap().evaluate_on(&v).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn wedge_of_fields_is_determinant() {
        let [x1, x2] = heisenberg_frame();
        let v = Multivector::wedge_fields(&[x1, x2]).unwrap();
        assert_eq!(v.coefficient(&[0, 1]), Polynomial::one(3));
        // e1∧e3 coefficient: X1_x X2_t − X1_t X2_x = x/2
        assert_eq!(v.coefficient(&[0, 2]), Polynomial::var(3, 0).scale(&q(1, 2)));
    }
}
