//! The `A_T` functional and the norm-defect search.
//!
//! A strict contraction `T` dilates to an isometry exactly when
//! `A_T(x) = (‖x‖² − ‖Tx‖²)^{1/2}` is a norm. Homogeneity and positivity are
//! automatic, so everything hinges on the triangle inequality; the defect
//! `A_T(x) + A_T(y) − A_T(x + y)` going negative is a certificate that no
//! isometric dilation exists.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{backward_shift, brute_force_norm, OperatorOnSpace, BRUTE_FORCE_MAX_DIM};
use crate::spaces::{basis_pairs, random_unit_vector, CVector, NormTree};

const ROUNDOFF_CLAMP: f64 = 1e-12;
const BRUTE_RESOLUTION: usize = 40;
const REFINE_FROM: usize = 8;
const MAX_SWEEPS: usize = 2000;
// smaller gains count as stalling and halve the step
const IMPROVEMENT: f64 = 1e-13;

/// How the bound `‖T‖ < 1` was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionBasis {
    ExactNorm,
    BruteForce,
    Asserted,
}

/// An operator known (or asserted) to satisfy `‖T‖ < 1`.
#[derive(Clone, Copy, Debug)]
pub struct StrictContraction<'a> {
    op: &'a OperatorOnSpace,
    basis: ContractionBasis,
}

impl<'a> StrictContraction<'a> {
    /// Uses the exact norm when a closed form applies, else brute force for
    /// small domains. Larger mixed spaces need [`StrictContraction::assume`].
    pub fn certify(op: &'a OperatorOnSpace) -> Result<Self> {
        let (norm, basis) = if let Some(est) = op.exact_norm() {
            (est.lower_bound, ContractionBasis::ExactNorm)
        } else if op.dim() <= BRUTE_FORCE_MAX_DIM {
            (brute_force_norm(op, BRUTE_RESOLUTION)?, ContractionBasis::BruteForce)
        } else {
            return Err(Error::DimensionTooLarge { dim: op.dim(), max: BRUTE_FORCE_MAX_DIM });
        };
        if norm >= 1.0 {
            return Err(Error::NotStrictContraction(norm));
        }
        Ok(Self { op, basis })
    }

    /// Caller vouches for `‖T‖ < 1`; `a_functional` still rejects any vector
    /// with `‖Tx‖ > ‖x‖`.
    pub fn assume(op: &'a OperatorOnSpace) -> Self {
        Self { op, basis: ContractionBasis::Asserted }
    }

    pub fn operator(&self) -> &OperatorOnSpace {
        self.op
    }

    pub fn basis(&self) -> ContractionBasis {
        self.basis
    }
}

fn a_value(t: &OperatorOnSpace, x: &[Complex64]) -> Result<f64> {
    let nx = t.domain().norm_unchecked(x);
    let tx = t.matrix() * nalgebra::DVectorView::from_slice(x, x.len());
    let ntx = t.codomain().norm_unchecked(tx.as_slice());
    let gap = nx * nx - ntx * ntx;
    if gap >= 0.0 {
        Ok(gap.sqrt())
    } else if gap >= -ROUNDOFF_CLAMP * (nx * nx).max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::ContractionViolation { input: nx, image: ntx })
    }
}

/// `A_T(x) = (‖x‖² − ‖Tx‖²)^{1/2}`.
pub fn a_functional(t: &StrictContraction<'_>, x: &CVector) -> Result<f64> {
    if x.len() != t.op.dim() {
        return Err(Error::DimensionMismatch { expected: t.op.dim(), found: x.len() });
    }
    a_value(t.op, x.as_slice())
}

fn defect(t: &OperatorOnSpace, x: &[Complex64], y: &[Complex64]) -> Result<f64> {
    let sum: Vec<Complex64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    Ok(a_value(t, x)? + a_value(t, y)? - a_value(t, &sum)?)
}

/// Triangle-inequality defect `A_T(x) + A_T(y) − A_T(x + y)`.
pub fn triangle_defect(t: &StrictContraction<'_>, x: &CVector, y: &CVector) -> Result<f64> {
    let n = t.op.dim();
    for v in [x, y] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    defect(t.op, x.as_slice(), y.as_slice())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectConfig {
    pub samples: usize,
    pub seed: u64,
    pub refine: bool,
}

impl Default for DefectConfig {
    fn default() -> Self {
        Self { samples: 10_000, seed: 0, refine: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub min_defect: f64,
    pub witness_pair: (Vec<Complex64>, Vec<Complex64>),
    pub samples_used: usize,
    pub optimizer_refined: bool,
}

impl DefectReport {
    /// `min_defect < −1e−8` proves that no isometric dilation exists.
    pub fn certifies_no_dilation(&self) -> bool {
        self.min_defect < -1e-8
    }
}

// x on the unit sphere, y in the unit ball.
fn retract(space: &NormTree, x: &mut [Complex64], y: &mut [Complex64]) -> bool {
    let nx = space.norm_unchecked(x);
    if nx == 0.0 {
        return false;
    }
    x.iter_mut().for_each(|z| *z /= nx);
    let ny = space.norm_unchecked(y);
    if ny > 1.0 {
        y.iter_mut().for_each(|z| *z /= ny);
    }
    true
}

fn coordinate_descent(t: &OperatorOnSpace, x0: &[Complex64], y0: &[Complex64]) -> (f64, Vec<Complex64>, Vec<Complex64>) {
    let n = x0.len();
    let (mut x, mut y) = (x0.to_vec(), y0.to_vec());
    let mut best = defect(t, &x, &y).unwrap_or(f64::INFINITY);
    let mut step = 0.1;
    let unit = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
    let mut sweeps = 0;
    while step > 1e-10 && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        for k in 0..4 * n {
            let (which, idx, dir) = (k / (2 * n), (k / 2) % n, unit[k % 2]);
            for s in [step, -step] {
                let (mut cx, mut cy) = (x.clone(), y.clone());
                if which == 0 {
                    cx[idx] += dir * s;
                } else {
                    cy[idx] += dir * s;
                }
                if !retract(t.domain(), &mut cx, &mut cy) {
                    continue;
                }
                if let Ok(v) = defect(t, &cx, &cy) {
                    if v < best - IMPROVEMENT * (1.0 + best.abs()) {
                        best = v;
                        x = cx;
                        y = cy;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, x, y)
}

/// Minimum of the triangle defect over signed/phased basis pairs, `samples`
/// random pairs (`‖x‖ = 1`, `‖y‖ ≤ 1`) and, optionally, coordinate-descent
/// refinement from the best few. Ties resolve to the lowest pair index.
pub fn norm_defect(t: &StrictContraction<'_>, cfg: &DefectConfig) -> Result<DefectReport> {
    let op = t.op;
    let space = op.domain();
    let n = op.dim();
    let mut pairs: Vec<(Vec<Complex64>, Vec<Complex64>)> = basis_pairs(n)
        .into_iter()
        .map(|(x, y)| (x.as_slice().to_vec(), y.as_slice().to_vec()))
        .map(|(mut x, mut y)| {
            retract(space, &mut x, &mut y);
            // basis vectors of non-unit norm are rescaled, y lands back on the sphere
            let ny = space.norm_unchecked(&y);
            y.iter_mut().for_each(|z| *z /= ny);
            (x, y)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let x = random_unit_vector(space, &mut rng);
        let scale: f64 = rng.random_range(0.05..=1.0);
        let y = random_unit_vector(space, &mut rng) * Complex64::new(scale, 0.0);
        pairs.push((x.as_slice().to_vec(), y.as_slice().to_vec()));
    }

    let scored: Vec<(f64, usize)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| defect(op, x, y).map(|d| (d, i)))
        .collect::<Result<_>>()?;
    let mut order = scored.clone();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let (mut best, mut bx, mut by) = {
        let (d, i) = order[0];
        (d, pairs[i].0.clone(), pairs[i].1.clone())
    };
    if cfg.refine {
        let refined: Vec<(f64, usize, Vec<Complex64>, Vec<Complex64>)> = order
            .par_iter()
            .take(REFINE_FROM)
            .map(|&(_, i)| {
                let (d, x, y) = coordinate_descent(op, &pairs[i].0, &pairs[i].1);
                (d, i, x, y)
            })
            .collect();
        for (d, _, x, y) in refined {
            if d < best {
                best = d;
                bx = x;
                by = y;
            }
        }
    }
    // recompute at the witness so the report is self-consistent
    let min_defect = defect(op, &bx, &by)?;
    Ok(DefectReport {
        min_defect,
        witness_pair: (bx, by),
        samples_used: pairs.len(),
        optimizer_refined: cfg.refine,
    })
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")));
    }
    Ok(())
}

/// `T_λ(x, y) = λ(x + y, 0)` on `(ℂ², ‖·‖₁)`, `0 ≤ λ < 1`.
pub fn make_t_lambda(lambda: f64) -> Result<OperatorOnSpace> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    let l = Complex64::new(lambda, 0.0);
    let z = Complex64::new(0.0, 0.0);
    OperatorOnSpace::on(DMatrix::from_row_slice(2, 2, &[l, l, z, z]), NormTree::leaf(2, 1.0)?)
}

/// `T_r(h₁, h₂) = (r h₁, 0)` on `H ⊕₁ H` with `H = ℓ₂^hilbert_dim`.
pub fn make_t_r_block(r: f64, hilbert_dim: usize) -> Result<OperatorOnSpace> {
    check_open_unit("r", r)?;
    let h = NormTree::leaf(hilbert_dim, 2.0)?;
    let space = NormTree::sum(vec![h.clone(), h], 1.0)?;
    let n = 2 * hilbert_dim;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..hilbert_dim {
        m[(i, i)] = Complex64::new(r, 0.0);
    }
    OperatorOnSpace::on(m, space)
}

/// `S_λ = λ M̂_z` on `X ⊕₂ ⋯ ⊕₂ X` (`blocks` copies).
pub fn make_s_lambda(inner: &NormTree, blocks: usize, lambda: f64) -> Result<OperatorOnSpace> {
    check_open_unit("lambda", lambda)?;
    backward_shift(inner, blocks, lambda, 2.0)
}

/// `S_μ{xₙ} = {μₙ xₙ}` with `μ₁ = 1` and `μₙ = √(1 − λ²)` afterwards.
pub fn make_s_mu(inner: &NormTree, blocks: usize, lambda: f64) -> Result<OperatorOnSpace> {
    check_open_unit("lambda", lambda)?;
    let space = NormTree::power(inner, blocks, 2.0)?;
    let d = inner.total_dimension();
    let mu = (1.0 - lambda * lambda).sqrt();
    let diag: Vec<Complex64> =
        (0..blocks * d).map(|i| Complex64::new(if i < d { 1.0 } else { mu }, 0.0)).collect();
    OperatorOnSpace::on(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)), space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{operator_norm, spectrum, AscentConfig};
    use crate::spaces::{basis, sample_unit_sphere};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn v(entries: &[f64]) -> CVector {
        CVector::from_vec(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    #[test]
    fn zero_operator_gives_the_norm() {
        let space: NormTree = "sum2(l1(2),linf(2))".parse().unwrap();
        let z = OperatorOnSpace::zero(&space);
        let c = StrictContraction::certify(&z).unwrap();
        for x in sample_unit_sphere(&space, 10, 1).unwrap() {
            let x = x * Complex64::new(3.0, 0.0);
            assert_abs_diff_eq!(a_functional(&c, &x).unwrap(), 3.0, epsilon = 1e-12);
        }
        let rep = norm_defect(&c, &DefectConfig { samples: 2000, ..Default::default() }).unwrap();
        assert!(rep.min_defect >= -1e-12);
    }

    #[test]
    fn t_lambda_values() {
        let t = make_t_lambda(0.6).unwrap();
        assert_abs_diff_eq!(operator_norm(&t, &AscentConfig::default()).lower_bound, 0.6, epsilon = 1e-15);
        let c = StrictContraction::certify(&t).unwrap();
        assert_eq!(c.basis(), ContractionBasis::ExactNorm);
        assert_abs_diff_eq!(a_functional(&c, &v(&[1.0, 0.0])).unwrap(), 0.8, epsilon = 1e-15);
        let d = triangle_defect(&c, &v(&[1.0, 0.0]), &v(&[0.0, -1.0])).unwrap();
        assert_abs_diff_eq!(d, -0.4, epsilon = 1e-12);
        let y = t.apply(&v(&[1.0, 0.0])).unwrap();
        assert_eq!((y[0].re, y[1].re), (0.6, 0.0));
        // T_λ² = λ T_λ, so σ(T_λ) = {λ, 0}; oracle via trace and determinant of the 2×2
        let (tr, det) = (0.6, 0.0);
        let disc: f64 = tr * tr - 4.0 * det;
        let mut oracle = [(tr - disc.sqrt()) / 2.0, (tr + disc.sqrt()) / 2.0];
        oracle.sort_by(f64::total_cmp);
        let mut ev: Vec<f64> = spectrum(&t).iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ev[0], oracle[0], epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], oracle[1], epsilon = 1e-12);
        let sq = t.compose(&t).unwrap();
        assert!((sq.matrix() - t.matrix() * Complex64::new(0.6, 0.0)).norm() < 1e-15);
        assert!(make_t_lambda(1.0).is_err());
        let zero = make_t_lambda(0.0).unwrap();
        let rep = norm_defect(&StrictContraction::certify(&zero).unwrap(), &DefectConfig { samples: 100, ..Default::default() }).unwrap();
        assert!(rep.min_defect >= 0.0 - 1e-12);
    }

    #[test]
    fn t_lambda_defect_certifies() {
        for lambda in [0.2, 1.0 / 3.0, 0.6] {
            let t = make_t_lambda(lambda).unwrap();
            let rep = norm_defect(&StrictContraction::certify(&t).unwrap(), &DefectConfig::default()).unwrap();
            assert!(rep.min_defect <= 2.0 * (1.0 - lambda * lambda).sqrt() - 2.0 + 1e-10);
            assert!(rep.certifies_no_dilation());
            let c = StrictContraction::certify(&t).unwrap();
            let (x, y) = (CVector::from_vec(rep.witness_pair.0.clone()), CVector::from_vec(rep.witness_pair.1.clone()));
            assert_abs_diff_eq!(triangle_defect(&c, &x, &y).unwrap(), rep.min_defect, epsilon = 1e-10);
        }
    }

    #[test]
    fn t_r_block_values() {
        let r = 0.99;
        let t = make_t_r_block(r, 2).unwrap();
        assert_eq!(t.domain().to_string(), "sum1(l2(2),l2(2))");
        let c = StrictContraction::certify(&t).unwrap();
        let e1 = CVector::from_vec(basis(4, 0));
        let e2 = CVector::from_vec(basis(4, 2));
        assert_abs_diff_eq!(a_functional(&c, &e1).unwrap(), (1.0 - r * r).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(a_functional(&c, &e2).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a_functional(&c, &(&e1 + &e2)).unwrap(), (4.0 - r * r).sqrt(), epsilon = 1e-12);
        let expected = 1.0 + (1.0 - r * r).sqrt() - (4.0 - r * r).sqrt();
        assert_abs_diff_eq!(expected, -0.5968, epsilon = 1e-4);
        let rep = norm_defect(&c, &DefectConfig::default()).unwrap();
        assert!(rep.min_defect <= expected + 1e-10);
    }

    #[test]
    fn s_lambda_matches_weighted_norm() {
        let inner: NormTree = "l1(2)".parse().unwrap();
        let s = make_s_lambda(&inner, 4, 0.5).unwrap();
        let mu = make_s_mu(&inner, 4, 0.5).unwrap();
        let c = StrictContraction::assume(&s);
        for x in sample_unit_sphere(s.domain(), 50, 3).unwrap() {
            let lhs = a_functional(&c, &x).unwrap();
            let rhs = s.domain().norm(mu.apply(&x).unwrap().as_slice()).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn s_lambda_defect_nonnegative() {
        let inner: NormTree = "l1(2)".parse().unwrap();
        for lambda in [0.3, 0.9] {
            let s = make_s_lambda(&inner, 3, lambda).unwrap();
            let rep = norm_defect(&StrictContraction::assume(&s), &DefectConfig::default()).unwrap();
            assert!(rep.min_defect >= -1e-10, "{lambda}: {}", rep.min_defect);
        }
    }

    #[test]
    fn violation_is_an_error_not_a_clamp() {
        let big = OperatorOnSpace::identity(&"l2(2)".parse().unwrap()).scaled(Complex64::new(2.0, 0.0));
        assert!(matches!(StrictContraction::certify(&big), Err(Error::NotStrictContraction(_))));
        let c = StrictContraction::assume(&big);
        assert!(matches!(a_functional(&c, &v(&[1.0, 0.0])), Err(Error::ContractionViolation { .. })));
    }

    #[test]
    fn report_is_deterministic() {
        let t = make_t_r_block(0.7, 1).unwrap();
        let c = StrictContraction::certify(&t).unwrap();
        let cfg = DefectConfig { samples: 500, seed: 4, refine: true };
        assert_eq!(norm_defect(&c, &cfg).unwrap(), norm_defect(&c, &cfg).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn homogeneous_and_dominated(seed in 0u64..10_000, cre in -3.0f64..3.0, cim in -3.0f64..3.0, lambda in 0.05f64..0.95) {
            let t = make_t_r_block(lambda, 2).unwrap();
            let c = StrictContraction::assume(&t);
            let x = &sample_unit_sphere(t.domain(), 1, seed).unwrap()[0];
            let s = Complex64::new(cre, cim);
            let ax = a_functional(&c, x).unwrap();
            prop_assert!((a_functional(&c, &(x * s)).unwrap() - s.norm() * ax).abs() <= 1e-10);
            prop_assert!(ax <= 1.0 + 1e-12);
        }

        #[test]
        fn equality_iff_kernel(seed in 0u64..10_000) {
            let t = make_t_r_block(0.5, 2).unwrap();
            let c = StrictContraction::assume(&t);
            let mut x = sample_unit_sphere(t.domain(), 1, seed).unwrap()[0].clone();
            x[0] = Complex64::new(0.0, 0.0);
            x[1] = Complex64::new(0.0, 0.0);
            let nx = t.domain().norm(x.as_slice()).unwrap();
            prop_assert!((a_functional(&c, &x).unwrap() - nx).abs() <= 1e-10);
        }

        #[test]
        fn hilbert_contractions_have_no_defect(seed in 0u64..1000, target in 0.05f64..0.95) {
            let space: NormTree = "l2(3)".parse().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = DMatrix::from_fn(3, 3, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let t = OperatorOnSpace::on(m, space).unwrap();
            let norm = t.exact_norm().unwrap().lower_bound;
            let t = t.scaled(Complex64::new(target / norm, 0.0));
            let rep = norm_defect(&StrictContraction::certify(&t).unwrap(), &DefectConfig { samples: 2000, seed, refine: false }).unwrap();
            prop_assert!(rep.min_defect >= -1e-8);
        }

        #[test]
        fn t_lambda_witness_admissible(lambda in 0.05f64..0.95) {
            let t = make_t_lambda(lambda).unwrap();
            let rep = norm_defect(&StrictContraction::certify(&t).unwrap(), &DefectConfig { samples: 200, seed: 1, refine: false }).unwrap();
            prop_assert!(rep.min_defect <= 2.0 * (1.0 - lambda * lambda).sqrt() - 2.0 + 1e-10);
        }

        #[test]
        fn t_r_witness_admissible(r in 0.05f64..0.95) {
            let t = make_t_r_block(r, 1).unwrap();
            let rep = norm_defect(&StrictContraction::certify(&t).unwrap(), &DefectConfig { samples: 200, seed: 1, refine: false }).unwrap();
            let bound = 1.0 + (1.0 - r * r).sqrt() - (4.0 - r * r).sqrt();
            prop_assert!(rep.min_defect <= bound + 1e-10);
            prop_assert!(rep.min_defect < 0.0);
        }
    }
}
