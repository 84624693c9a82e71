use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pole-proximity threshold for scalar evaluation.
pub const EVAL_POLE_EPS: f64 = 1e-14;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Horner evaluation of ascending coefficients.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(zero(), |acc, &c| acc * z + c)
}

/// Horner evaluation at a square matrix.
pub fn horner_matrix(coeffs: &[Complex64], m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for &c in coeffs.iter().rev() {
        acc = &acc * m;
        for i in 0..n {
            acc[(i, i)] += c;
        }
    }
    acc
}

pub fn poly_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default())
        .collect()
}

pub fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(a: &[Complex64], k: usize) -> Vec<Complex64> {
    (0..k).fold(vec![one()], |acc, _| poly_mul(&acc, a))
}

fn trim(mut v: Vec<Complex64>) -> Vec<Complex64> {
    while v.len() > 1 && *v.last().unwrap() == zero() {
        v.pop();
    }
    v
}

/// `p/q` with ascending complex coefficients. No common factors are
/// cancelled; callers supply reduced forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RationalRepr", into = "RationalRepr")]
pub struct RationalFunction {
    numerator: Vec<Complex64>,
    denominator: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    numerator: Vec<Complex64>,
    denominator: Vec<Complex64>,
}

impl TryFrom<RationalRepr> for RationalFunction {
    type Error = Error;
    fn try_from(r: RationalRepr) -> Result<Self> {
        RationalFunction::new(r.numerator, r.denominator)
    }
}

impl From<RationalFunction> for RationalRepr {
    fn from(f: RationalFunction) -> Self {
        RationalRepr { numerator: f.numerator, denominator: f.denominator }
    }
}

impl RationalFunction {
    pub fn new(numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Result<Self> {
        if numerator.is_empty() || denominator.is_empty() {
            return Err(Error::InvalidParameter("empty coefficient list".into()));
        }
        if numerator.iter().chain(&denominator).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("rational coefficients"));
        }
        let denominator = trim(denominator);
        if denominator.iter().all(|&z| z == zero()) {
            return Err(Error::InvalidParameter("denominator is identically zero".into()));
        }
        Ok(Self { numerator: trim(numerator), denominator })
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(coeffs, vec![one()])
    }

    pub fn constant(c: Complex64) -> Self {
        Self { numerator: vec![c], denominator: vec![one()] }
    }

    /// `f(z) = z`.
    pub fn identity() -> Self {
        Self { numerator: vec![zero(), one()], denominator: vec![one()] }
    }

    /// Disk automorphism `φ_a(z) = (z − a) / (1 − ā z)`.
    pub fn mobius(a: Complex64) -> Self {
        Self { numerator: vec![-a, one()], denominator: vec![one(), -a.conj()] }
    }

    /// `(z − α)^{−m}`.
    pub fn inverse_power(alpha: Complex64, m: usize) -> Self {
        Self { numerator: vec![one()], denominator: poly_pow(&[-alpha, one()], m) }
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.denominator
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.len() == 1
    }

    /// `p(z) / q(z)`; errors when `|q(z)|` falls below [`EVAL_POLE_EPS`].
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let q = horner(&self.denominator, z);
        if q.norm() <= EVAL_POLE_EPS {
            return Err(Error::PoleProximity { z, magnitude: q.norm() });
        }
        Ok(horner(&self.numerator, z) / q)
    }

    pub fn add(&self, other: &Self) -> Self {
        let numerator = poly_add(
            &poly_mul(&self.numerator, &other.denominator),
            &poly_mul(&other.numerator, &self.denominator),
        );
        Self { numerator: trim(numerator), denominator: trim(poly_mul(&self.denominator, &other.denominator)) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            numerator: trim(poly_mul(&self.numerator, &other.numerator)),
            denominator: trim(poly_mul(&self.denominator, &other.denominator)),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { numerator: self.numerator.iter().map(|x| x * c).collect(), denominator: self.denominator.clone() }
    }

    /// `1/f`; fails when the numerator is identically zero.
    pub fn reciprocal(&self) -> Result<Self> {
        Self::new(self.denominator.clone(), self.numerator.clone())
    }

    /// `f ∘ φ_a`, i.e. `z ← (z − a)/(1 − ā z)`, cleared to polynomial form.
    ///
    /// With `D = max(deg p, deg q)`, both `p(φ_a)` and `q(φ_a)` carry the factor
    /// `(1 − ā z)^{−D}`, which cancels.
    pub fn compose_mobius(&self, a: Complex64) -> Result<Self> {
        if a.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!("Möbius parameter must satisfy |a| < 1, got {a}")));
        }
        let d = self.numerator.len().max(self.denominator.len()) - 1;
        let lin = [-a, one()];
        let den_factor = [one(), -a.conj()];
        let substitute = |coeffs: &[Complex64]| {
            coeffs.iter().enumerate().fold(vec![zero()], |acc, (k, &c)| {
                let term = poly_mul(&poly_pow(&lin, k), &poly_pow(&den_factor, d - k));
                poly_add(&acc, &term.iter().map(|t| t * c).collect::<Vec<_>>())
            })
        };
        Self::new(substitute(&self.numerator), substitute(&self.denominator))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluation() {
        assert_eq!(RationalFunction::identity().eval(c(3.0, 4.0)).unwrap(), c(3.0, 4.0));
        assert_eq!(RationalFunction::mobius(c(0.5, 0.0)).eval(c(0.5, 0.0)).unwrap(), c(0.0, 0.0));
        let g = RationalFunction::inverse_power(c(2.0, 0.0), 1);
        assert_abs_diff_eq!(g.eval(c(2.5, 0.0)).unwrap().re, 2.0, epsilon = 1e-15);
        assert!(matches!(g.eval(c(2.0, 0.0)), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn arithmetic() {
        let f = RationalFunction::identity().add(&RationalFunction::constant(c(1.0, 0.0)));
        assert_eq!(f.eval(c(2.0, 0.0)).unwrap(), c(3.0, 0.0));
        let phi = RationalFunction::mobius(c(0.3, -0.2));
        let prod = phi.mul(&phi.reciprocal().unwrap());
        for z in [c(0.1, 0.7), c(-0.9, 0.2), c(2.0, 1.0)] {
            assert!((prod.eval(z).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn compose_with_mobius_matches_pointwise() {
        let f = RationalFunction::new(vec![c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 1.0)], vec![c(3.0, 0.0), c(0.5, 0.0)]).unwrap();
        let a = c(0.4, 0.3);
        let g = f.compose_mobius(a).unwrap();
        let phi = RationalFunction::mobius(a);
        for k in 0..50 {
            let z = Complex64::from_polar(0.9 * (k as f64 / 50.0), 0.37 * k as f64);
            let direct = f.eval(phi.eval(z).unwrap()).unwrap();
            assert!((g.eval(z).unwrap() - direct).norm() < 1e-10);
        }
        assert!(f.compose_mobius(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn matrix_horner_on_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 1.0)]));
        let p = [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let pm = horner_matrix(&p, &m);
        assert_eq!(pm[(0, 0)], horner(&p, c(2.0, 0.0)));
        assert_eq!(pm[(1, 1)], horner(&p, c(0.0, 1.0)));
    }

    #[test]
    fn well_formedness() {
        assert!(RationalFunction::new(vec![], vec![c(1.0, 0.0)]).is_err());
        assert!(RationalFunction::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        let f = RationalFunction::new(vec![c(1.0, 0.0)], vec![c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(f.denominator().len(), 1);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"numerator":[[1.0,0.0]],"denominator":[[2.0,0.0]]}"#);
        assert!(serde_json::from_str::<RationalFunction>(r#"{"numerator":[[1.0,0.0]],"denominator":[[0.0,0.0]]}"#).is_err());
    }
}
