use super::{rat, PolyForm, PolyVectorField, Polynomial, Rational};

pub fn q(n: i64, d: i64) -> Rational {
    rat(n, d)
}

/// `X1 = ∂x − (y/2)∂t`, `X2 = ∂y + (x/2)∂t`.
pub fn heisenberg_frame() -> [PolyVectorField; 2] {
    let x = Polynomial::var(3, 0);
    let y = Polynomial::var(3, 1);
    let one = Polynomial::one(3);
    let zero = Polynomial::zero(3);
    [
        PolyVectorField::new(vec![one.clone(), zero.clone(), y.scale(&q(-1, 2))]).unwrap(),
        PolyVectorField::new(vec![zero, one, x.scale(&q(1, 2))]).unwrap(),
    ]
}

/// `(y/2)dx − (x/2)dy + dt`.
pub fn heisenberg_annihilator() -> PolyForm {
    let x = Polynomial::var(3, 0);
    let y = Polynomial::var(3, 1);
    PolyForm::one_form(vec![y.scale(&q(1, 2)), x.scale(&q(-1, 2)), Polynomial::one(3)]).unwrap()
}
