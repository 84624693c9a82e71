//! Matrices acting between norm trees.
//!
//! Induced norms are exact when a closed form applies (column sums out of an
//! `ℓ₁` domain, row sums for `ℓ∞ → ℓ∞`, the largest singular value for
//! `ℓ₂ → ℓ₂`); everything else goes through multi-start ascent on the domain
//! unit sphere and is reported as a lower bound.

mod ascent;
mod brute;
mod shift;
mod spectrum;

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{CVector, NormTree};

pub use ascent::{maximize_ratio, AscentConfig, AscentResult};
pub use brute::{brute_force_norm, BRUTE_FORCE_MAX_DIM};
pub use shift::{backward_shift, forward_shift};
pub use spectrum::{polynomial_roots, spectral_radius, spectrum};

/// How a [`NormEstimate`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ExactL1Columns,
    ExactLinfRows,
    ExactL2Svd,
    Ascent,
    BruteForce,
}

/// Certified lower bound of an induced operator norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub lower_bound: f64,
    pub method: NormMethod,
    pub is_exact: bool,
    pub starts_used: usize,
}

/// Complex square matrix bound to a domain and codomain norm tree.
#[derive(Clone, Debug)]
pub struct OperatorOnSpace {
    matrix: DMatrix<Complex64>,
    domain: NormTree,
    codomain: NormTree,
    cached_norm: OnceLock<NormEstimate>,
}

impl OperatorOnSpace {
    pub fn new(matrix: DMatrix<Complex64>, domain: NormTree, codomain: NormTree) -> Result<Self> {
        if matrix.ncols() != domain.total_dimension() {
            return Err(Error::DimensionMismatch {
                expected: domain.total_dimension(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() != codomain.total_dimension() {
            return Err(Error::DimensionMismatch {
                expected: codomain.total_dimension(),
                found: matrix.nrows(),
            });
        }
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.ncols(), found: matrix.nrows() });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { matrix, domain, codomain, cached_norm: OnceLock::new() })
    }

    /// Operator from `space` to itself.
    pub fn on(matrix: DMatrix<Complex64>, space: NormTree) -> Result<Self> {
        Self::new(matrix, space.clone(), space)
    }

    pub fn identity(space: &NormTree) -> Self {
        let n = space.total_dimension();
        Self::on(DMatrix::identity(n, n), space.clone()).expect("identity is well formed")
    }

    pub fn zero(space: &NormTree) -> Self {
        let n = space.total_dimension();
        Self::on(DMatrix::zeros(n, n), space.clone()).expect("zero is well formed")
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn domain(&self) -> &NormTree {
        &self.domain
    }

    pub fn codomain(&self) -> &NormTree {
        &self.codomain
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// True when domain and codomain are the same tree, so powers make sense.
    pub fn is_endomorphism(&self) -> bool {
        self.domain == self.codomain
    }

    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(&self.matrix * x)
    }

    /// `s·T` on the same spaces.
    pub fn scaled(&self, s: Complex64) -> Self {
        Self::new(self.matrix.scale_complex(s), self.domain.clone(), self.codomain.clone())
            .expect("scaling preserves shape")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &OperatorOnSpace) -> Result<Self> {
        if other.codomain != self.domain {
            return Err(Error::InvalidParameter(format!(
                "cannot compose: {} vs {}",
                other.codomain, self.domain
            )));
        }
        Self::new(&self.matrix * &other.matrix, other.domain.clone(), self.codomain.clone())
    }

    /// Ratio `‖Tx‖ / ‖x‖`; zero for `x = 0`.
    pub fn ratio_at(&self, x: &[Complex64]) -> f64 {
        let nx = self.domain.norm_unchecked(x);
        if nx == 0.0 {
            return 0.0;
        }
        let y = &self.matrix * nalgebra::DVectorView::from_slice(x, x.len());
        self.codomain.norm_unchecked(y.as_slice()) / nx
    }

    /// Exact norm when a closed form applies to this pair of spaces.
    pub fn exact_norm(&self) -> Option<NormEstimate> {
        exact_norm(self)
    }

    /// Cached estimate, if [`operator_norm`] has produced an exact one.
    pub fn cached_norm(&self) -> Option<&NormEstimate> {
        self.cached_norm.get()
    }
}

trait ScaleComplex {
    fn scale_complex(&self, s: Complex64) -> Self;
}

impl ScaleComplex for DMatrix<Complex64> {
    fn scale_complex(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }
}

fn exact_norm(t: &OperatorOnSpace) -> Option<NormEstimate> {
    let estimate = |value, method| NormEstimate {
        lower_bound: value,
        method,
        is_exact: true,
        starts_used: 0,
    };
    if t.domain.is_uniform(1.0) {
        // extreme points of the ℓ₁ ball are phased basis vectors
        let value = (0..t.dim())
            .map(|j| t.codomain.norm_unchecked(t.matrix.column(j).clone_owned().as_slice()))
            .fold(0.0, f64::max);
        return Some(estimate(value, NormMethod::ExactL1Columns));
    }
    if t.domain.is_uniform(f64::INFINITY) && t.codomain.is_uniform(f64::INFINITY) {
        let value = t
            .matrix
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        return Some(estimate(value, NormMethod::ExactLinfRows));
    }
    if t.domain.is_euclidean() && t.codomain.is_euclidean() {
        let value = t.matrix.clone().singular_values().iter().cloned().fold(0.0, f64::max);
        return Some(estimate(value, NormMethod::ExactL2Svd));
    }
    None
}

/// Induced norm `sup ‖Tx‖ / ‖x‖`, exact when a closed form applies and a
/// multi-start ascent lower bound otherwise.
pub fn operator_norm(t: &OperatorOnSpace, config: &AscentConfig) -> NormEstimate {
    if let Some(cached) = t.cached_norm.get() {
        return *cached;
    }
    if let Some(exact) = exact_norm(t) {
        return *t.cached_norm.get_or_init(|| exact);
    }
    let result = maximize_ratio(t, config, &[]);
    NormEstimate {
        lower_bound: result.value,
        method: NormMethod::Ascent,
        is_exact: false,
        starts_used: result.starts_used,
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    domain: NormTree,
    codomain: NormTree,
    matrix: Vec<Vec<Complex64>>,
}

impl Serialize for OperatorOnSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.matrix.row_iter().map(|r| r.iter().cloned().collect()).collect();
        OperatorRepr { domain: self.domain.clone(), codomain: self.codomain.clone(), matrix: rows }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorOnSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(d)?;
        let n = repr.matrix.len();
        if repr.matrix.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("matrix is not square"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| repr.matrix[i][j]);
        OperatorOnSpace::new(m, repr.domain, repr.codomain).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn identity_has_unit_norm_everywhere() {
        for s in ["l1(3)", "l2(2)", "linf(4)", "sum2(l1(2),l1(2))", "sum1(l2(2),l2(2))"] {
            let t = OperatorOnSpace::identity(&s.parse().unwrap());
            let est = operator_norm(&t, &AscentConfig::default());
            assert_abs_diff_eq!(est.lower_bound, 1.0, epsilon = 1e-9);
        }
        let t = OperatorOnSpace::identity(&"l1(3)".parse().unwrap());
        assert!(operator_norm(&t, &AscentConfig::default()).is_exact);
        assert!(t.cached_norm().is_some());
    }

    #[test]
    fn exact_methods_are_selected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_matrix(3, &mut rng);
        let cases = [
            ("l1(3)", "l1(3)", NormMethod::ExactL1Columns),
            ("l1(3)", "l2(3)", NormMethod::ExactL1Columns),
            ("linf(3)", "linf(3)", NormMethod::ExactLinfRows),
            ("l2(3)", "sum2(l2(1),l2(2))", NormMethod::ExactL2Svd),
            ("l2(3)", "l1(3)", NormMethod::Ascent),
        ];
        for (d, c, method) in cases {
            let t = OperatorOnSpace::new(m.clone(), d.parse().unwrap(), c.parse().unwrap()).unwrap();
            assert_eq!(operator_norm(&t, &AscentConfig::default()).method, method);
        }
    }

    #[test]
    fn column_sum_rule_on_example() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(-3.0, 0.0), Complex64::new(0.5, 0.0)],
        );
        let t = OperatorOnSpace::on(m.clone(), "l1(2)".parse().unwrap()).unwrap();
        assert_abs_diff_eq!(operator_norm(&t, &AscentConfig::default()).lower_bound, 4.0);
        let t = OperatorOnSpace::on(m, "linf(2)".parse().unwrap()).unwrap();
        assert_abs_diff_eq!(operator_norm(&t, &AscentConfig::default()).lower_bound, 3.5);
    }

    #[test]
    fn shape_errors() {
        let m = DMatrix::<Complex64>::zeros(2, 2);
        assert!(OperatorOnSpace::on(m.clone(), "l1(3)".parse().unwrap()).is_err());
        let mut bad = m;
        bad[(0, 0)] = Complex64::new(f64::INFINITY, 0.0);
        assert!(OperatorOnSpace::on(bad, "l1(2)".parse().unwrap()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = OperatorOnSpace::on(random_matrix(2, &mut rng), "sum2(l1(1),l1(1))".parse().unwrap())
            .unwrap();
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.contains("\"domain\":\"sum2(l1(1),l1(1))\""));
        let back: OperatorOnSpace = serde_json::from_str(&text).unwrap();
        assert_eq!(back.matrix(), t.matrix());
        assert_eq!(back.domain(), t.domain());
    }

    #[test]
    fn submultiplicative_on_exact_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = AscentConfig::default();
        for space in ["l1(4)", "l2(4)", "linf(4)"] {
            let space: NormTree = space.parse().unwrap();
            for _ in 0..20 {
                let s = OperatorOnSpace::on(random_matrix(4, &mut rng), space.clone()).unwrap();
                let t = OperatorOnSpace::on(random_matrix(4, &mut rng), space.clone()).unwrap();
                let st = s.compose(&t).unwrap();
                let lhs = operator_norm(&st, &cfg).lower_bound;
                let rhs = operator_norm(&s, &cfg).lower_bound * operator_norm(&t, &cfg).lower_bound;
                assert!(lhs <= rhs + 1e-9);
            }
        }
    }

    #[test]
    fn spectral_radius_below_exact_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for space in ["l1(5)", "l2(5)", "linf(5)"] {
            let space: NormTree = space.parse().unwrap();
            for _ in 0..20 {
                let t = OperatorOnSpace::on(random_matrix(5, &mut rng), space.clone()).unwrap();
                let est = operator_norm(&t, &AscentConfig::default());
                assert!(est.is_exact);
                assert!(spectral_radius(&t) <= est.lower_bound + 1e-6);
            }
        }
        let _ = rng.random::<u8>();
    }
}
