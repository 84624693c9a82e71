use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rational::{horner, horner_matrix, RationalFunction};
use super::region::CompactRegion;
use crate::error::{Error, Result};
use crate::operators::{polynomial_roots, spectrum, OperatorOnSpace};
use crate::spaces::NormTree;

/// Minimum admissible `|q|` over the region grid.
pub const POLE_EPS: f64 = 1e-8;
/// Eigenvalues within this distance of the region count as inside.
pub const SPECTRAL_TOL: f64 = 1e-8;
/// Points per circle (and interior sample count) used by the pole check.
pub const POLE_GRID: usize = 2048;
const SOLVE_RESIDUAL: f64 = 1e-10;

/// Rejects denominators with a zero on (or within [`POLE_EPS`] of) `region`.
///
/// Roots of `q` are located through its companion matrix; the grid minimum of
/// `|q|` over the boundary circles and interior rings is checked as well.
pub fn check_no_poles(f: &RationalFunction, region: &CompactRegion) -> Result<()> {
    let q = f.denominator();
    if q.len() == 1 {
        return Ok(());
    }
    for root in polynomial_roots(q) {
        if region.contains(root, SPECTRAL_TOL) {
            return Err(Error::PoleProximity { z: root, magnitude: horner(q, root).norm() });
        }
    }
    let grid = region.boundary_samples(POLE_GRID).into_iter().chain(region.interior_samples(POLE_GRID));
    for z in grid {
        let m = horner(q, z).norm();
        if m <= POLE_EPS {
            return Err(Error::PoleProximity { z, magnitude: m });
        }
    }
    Ok(())
}

fn check_spectral_inclusion(t: &OperatorOnSpace, region: &CompactRegion) -> Result<()> {
    if !t.is_endomorphism() {
        return Err(Error::InvalidParameter(format!(
            "functional calculus needs domain == codomain, got {} -> {}",
            t.domain(),
            t.codomain()
        )));
    }
    let offending: Vec<Complex64> =
        spectrum(t).into_iter().filter(|&z| !region.contains(z, SPECTRAL_TOL)).collect();
    if offending.is_empty() {
        Ok(())
    } else {
        Err(Error::SpectralInclusion(offending))
    }
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `p(T) q(T)^{-1}` for a matrix whose spectrum was already validated.
fn apply_matrix(f: &RationalFunction, m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let p = horner_matrix(f.numerator(), m);
    if f.is_polynomial() {
        let q0 = f.denominator()[0];
        return Ok(p.map(|z| z / q0));
    }
    let q = horner_matrix(f.denominator(), m);
    // p(T) and q(T) commute, so q(T)^{-1} p(T) = p(T) q(T)^{-1}
    let x = q
        .clone()
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::SingularSolve("q(T) is singular".into()))?;
    let residual = frobenius(&(&q * &x - &p));
    let scale = frobenius(&q) * frobenius(&x) + frobenius(&p);
    if !(residual <= SOLVE_RESIDUAL * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::SingularSolve(format!("residual {residual:e} relative to {scale:e}")));
    }
    Ok(x)
}

/// `f(T) = p(T) q(T)^{-1}` after checking `σ(T) ⊆ K` and that `q` has no zeros on `K`.
pub fn rat_apply_operator(
    f: &RationalFunction,
    t: &OperatorOnSpace,
    region: &CompactRegion,
) -> Result<OperatorOnSpace> {
    check_spectral_inclusion(t, region)?;
    check_no_poles(f, region)?;
    OperatorOnSpace::on(apply_matrix(f, t.matrix())?, t.domain().clone())
}

/// Square grid `[f_ij]` of rational functions, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatricialRational {
    order: usize,
    entries: Vec<RationalFunction>,
}

impl MatricialRational {
    pub fn new(order: usize, entries: Vec<RationalFunction>) -> Result<Self> {
        if order == 0 || entries.len() != order * order {
            return Err(Error::InvalidParameter(format!(
                "matricial function of order {order} needs {} entries, got {}",
                order * order,
                entries.len()
            )));
        }
        Ok(Self { order, entries })
    }

    pub fn from_rows(rows: Vec<Vec<RationalFunction>>) -> Result<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return Err(Error::InvalidParameter("rows must form a square grid".into()));
        }
        Self::new(order, rows.into_iter().flatten().collect())
    }

    /// `diag(f₁, …, f_n)`.
    pub fn diagonal(fs: Vec<RationalFunction>) -> Result<Self> {
        let n = fs.len();
        let mut entries = vec![RationalFunction::constant(Complex64::new(0.0, 0.0)); n * n];
        for (i, f) in fs.into_iter().enumerate() {
            entries[i * n + i] = f;
        }
        Self::new(n, entries)
    }

    /// `[[z/√2, −z/√2], [z/√2, z/√2]]`: `z` times the rotation by π/4.
    pub fn rotation() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = RationalFunction::identity();
        let e = |c: f64| z.scale(Complex64::new(c, 0.0));
        Self { order: 2, entries: vec![e(s), e(-s), e(s), e(s)] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.order + j]
    }

    pub fn entries(&self) -> &[RationalFunction] {
        &self.entries
    }

    /// Scalar matrix `[f_ij(z)]`.
    pub fn eval(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        let n = self.order;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.entry(i, j).eval(z)?;
            }
        }
        Ok(m)
    }
}

/// Block operator `[f_ij(T)]` on `X ⊕₂ ⋯ ⊕₂ X` (`n` copies of `T`'s domain).
pub fn matricial_apply(
    f: &MatricialRational,
    t: &OperatorOnSpace,
    region: &CompactRegion,
) -> Result<OperatorOnSpace> {
    check_spectral_inclusion(t, region)?;
    for e in f.entries() {
        check_no_poles(e, region)?;
    }
    let n = f.order();
    let d = t.dim();
    let mut big = DMatrix::<Complex64>::zeros(n * d, n * d);
    for i in 0..n {
        for j in 0..n {
            let block = apply_matrix(f.entry(i, j), t.matrix())?;
            big.view_mut((i * d, j * d), (d, d)).copy_from(&block);
        }
    }
    let space = NormTree::power(t.domain(), n, 2.0)?;
    OperatorOnSpace::on(big, space)
}
