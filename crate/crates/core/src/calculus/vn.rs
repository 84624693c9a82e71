use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::apply::{check_no_poles, matricial_apply, rat_apply_operator, MatricialRational};
use super::rational::RationalFunction;
use super::region::CompactRegion;
use crate::error::Result;
use crate::operators::{operator_norm, AscentConfig, NormMethod, OperatorOnSpace};

/// Default points per boundary circle.
pub const DEFAULT_BOUNDARY_POINTS: usize = 2048;
/// Interior spot samples added to every sup estimate.
pub const INTERIOR_SPOT_SAMPLES: usize = 64;

/// Functions whose sup over a [`CompactRegion`] can be sampled.
pub trait RegionFunction: Sync {
    fn check_poles(&self, region: &CompactRegion) -> Result<()>;
    /// `|f(z)|`, or the largest singular value of `[f_ij(z)]`.
    fn magnitude(&self, z: Complex64) -> Result<f64>;
}

impl RegionFunction for RationalFunction {
    fn check_poles(&self, region: &CompactRegion) -> Result<()> {
        check_no_poles(self, region)
    }

    fn magnitude(&self, z: Complex64) -> Result<f64> {
        Ok(self.eval(z)?.norm())
    }
}

fn spectral_norm(m: DMatrix<Complex64>) -> f64 {
    if m.len() == 1 {
        return m[(0, 0)].norm();
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

impl RegionFunction for MatricialRational {
    fn check_poles(&self, region: &CompactRegion) -> Result<()> {
        self.entries().iter().try_for_each(|e| check_no_poles(e, region))
    }

    fn magnitude(&self, z: Complex64) -> Result<f64> {
        Ok(spectral_norm(self.eval(z)?))
    }
}

/// `‖f‖_{∞,K}` estimated from `boundary_points` equispaced samples on every
/// boundary circle plus a few interior spot samples. A lower bound of the
/// true sup that is nondecreasing under doubling of `boundary_points`.
pub fn sup_norm_region<F: RegionFunction>(f: &F, region: &CompactRegion, boundary_points: usize) -> Result<f64> {
    f.check_poles(region)?;
    let points: Vec<Complex64> = region
        .boundary_samples(boundary_points)
        .into_iter()
        .chain(region.interior_samples(INTERIOR_SPOT_SAMPLES))
        .collect();
    points
        .par_iter()
        .map(|&z| f.magnitude(z))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnConfig {
    pub boundary_points: usize,
    pub ascent: AscentConfig,
}

impl Default for VnConfig {
    fn default() -> Self {
        Self { boundary_points: DEFAULT_BOUNDARY_POINTS, ascent: AscentConfig::default() }
    }
}

/// Whether a report certifies anything.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// `lhs` is a lower bound of `‖f(T)‖` and `rhs` a lower bound of the sup,
    /// so `lhs > rhs` proves the inequality fails (up to the grid).
    ViolationCertified,
    /// No violation found; this is evidence, not proof.
    EvidenceOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodFlags {
    pub norm_method: NormMethod,
    pub norm_exact: bool,
    pub starts_used: usize,
    pub certificate: Certificate,
}

/// Outcome of a von Neumann check `‖f(T)‖ ≤ ‖f‖_{∞,K}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub violated: bool,
    pub grid_points: usize,
    pub method_flags: MethodFlags,
}

/// The violation rule shared by every lhs/rhs comparison in the crate.
pub fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs * (1.0 + 1e-9) + 1e-9
}

fn report(ft: &OperatorOnSpace, rhs: f64, cfg: &VnConfig, region: &CompactRegion) -> VnReport {
    let est = operator_norm(ft, &cfg.ascent);
    let lhs = est.lower_bound;
    let violated = exceeds(lhs, rhs);
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    VnReport {
        lhs,
        rhs,
        ratio,
        violated,
        grid_points: cfg.boundary_points * (1 + region.holes().len()),
        method_flags: MethodFlags {
            norm_method: est.method,
            norm_exact: est.is_exact,
            starts_used: est.starts_used,
            certificate: if violated { Certificate::ViolationCertified } else { Certificate::EvidenceOnly },
        },
    }
}

/// Scalar von Neumann check.
pub fn vn_check(t: &OperatorOnSpace, f: &RationalFunction, region: &CompactRegion, cfg: &VnConfig) -> Result<VnReport> {
    let ft = rat_apply_operator(f, t, region)?;
    let rhs = sup_norm_region(f, region, cfg.boundary_points)?;
    Ok(report(&ft, rhs, cfg, region))
}

/// Matricial von Neumann check, `‖F(T)‖` on `X ⊕₂ ⋯ ⊕₂ X` against `sup_K ‖F(z)‖`.
pub fn matricial_vn_check(
    t: &OperatorOnSpace,
    f: &MatricialRational,
    region: &CompactRegion,
    cfg: &VnConfig,
) -> Result<VnReport> {
    let ft = matricial_apply(f, t, region)?;
    let rhs = sup_norm_region(f, region, cfg.boundary_points)?;
    Ok(report(&ft, rhs, cfg, region))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::region::Disk;
    use crate::operators::forward_shift;
    use crate::spaces::NormTree;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> RationalFunction {
        let deg = rng.random_range(0..=max_deg);
        RationalFunction::polynomial(
            (0..=deg).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
        )
        .unwrap()
    }

    fn random_operator_with_norm(space: &NormTree, target: f64, rng: &mut ChaCha8Rng) -> OperatorOnSpace {
        let n = space.total_dimension();
        let m = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let t = OperatorOnSpace::on(m, space.clone()).unwrap();
        let norm = t.exact_norm().expect("exact class").lower_bound;
        t.scaled(c(target / norm, 0.0))
    }

    #[test]
    fn sup_of_constant_and_blaschke() {
        let k = CompactRegion::unit_disk();
        let f = RationalFunction::constant(c(0.0, -2.5));
        assert_abs_diff_eq!(sup_norm_region(&f, &k, 256).unwrap(), 2.5);
        let phi = RationalFunction::mobius(c(0.6, 0.2));
        assert_abs_diff_eq!(sup_norm_region(&phi, &k, 2048).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn pole_on_boundary_rejected() {
        let f = RationalFunction::inverse_power(c(1.0, 0.0), 1);
        assert!(sup_norm_region(&f, &CompactRegion::unit_disk(), 64).is_err());
    }

    #[test]
    fn grid_refinement_is_monotone() {
        let k = CompactRegion::new(Disk::new(c(0.0, 0.0), 3.0), vec![Disk::new(c(2.0, 0.0), 0.5)]).unwrap();
        let f = RationalFunction::inverse_power(c(2.0, 0.0), 2).add(&RationalFunction::polynomial(vec![c(0.0, 0.0), c(0.3, 0.1), c(0.0, 0.05)]).unwrap());
        let mut last = 0.0;
        for pts in [64, 128, 256, 512, 1024, 2048] {
            let s = sup_norm_region(&f, &k, pts).unwrap();
            assert!(s >= last - 1e-12);
            last = s;
        }
    }

    #[test]
    fn interior_never_beats_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = CompactRegion::disk(c(0.3, -0.2), 1.5).unwrap();
        for _ in 0..20 {
            let f = random_poly(&mut rng, 6);
            let sup = sup_norm_region(&f, &k, 2048).unwrap();
            for _ in 0..200 {
                let z = c(0.3, -0.2) + Complex64::from_polar(1.5 * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
                assert!(f.eval(z).unwrap().norm() <= sup + 1e-6);
            }
        }
    }

    #[test]
    fn small_operators_satisfy_vn_on_unit_disk() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let space: NormTree = "l1(3)".parse().unwrap();
        for _ in 0..30 {
            let t = random_operator_with_norm(&space, 1.0 / 3.0, &mut rng);
            let f = random_poly(&mut rng, 8);
            let r = vn_check(&t, &f, &CompactRegion::unit_disk(), &VnConfig::default()).unwrap();
            assert!(!r.violated, "{r:?}");
        }
    }

    #[test]
    fn extremal_function_on_weighted_shift_violates() {
        let a = 0.9;
        let r = 0.5;
        let t = forward_shift(&NormTree::leaf(1, 1.0).unwrap(), 16, r, 1.0).unwrap();
        let f = RationalFunction::new(vec![c(a, 0.0), c(-1.0, 0.0)], vec![c(1.0, 0.0), c(-a, 0.0)]).unwrap();
        let rep = vn_check(&t, &f, &CompactRegion::unit_disk(), &VnConfig::default()).unwrap();
        // closed form of the infinite Bohr sum; truncation at 16 terms drops (a r)^15-sized terms
        let closed = a + (1.0 - a * a) * r / (1.0 - a * r);
        assert_abs_diff_eq!(rep.lhs, closed, epsilon = 1e-5);
        assert_abs_diff_eq!(rep.rhs, 1.0, epsilon = 1e-12);
        assert!(rep.violated);
        assert_eq!(rep.method_flags.certificate, Certificate::ViolationCertified);
        assert!(rep.method_flags.norm_exact);
    }

    #[test]
    fn identity_point_evaluation() {
        let t = OperatorOnSpace::identity(&"l2(1)".parse().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let f = random_poly(&mut rng, 5);
            let rep = vn_check(&t, &f, &CompactRegion::unit_disk(), &VnConfig::default()).unwrap();
            assert_abs_diff_eq!(rep.lhs, f.eval(c(1.0, 0.0)).unwrap().norm(), epsilon = 1e-12);
            assert!(!rep.violated);
        }
    }

    #[test]
    fn rotation_violates_on_l1_but_not_l2() {
        let k = CompactRegion::unit_disk();
        let cfg = VnConfig::default();
        let rot = MatricialRational::rotation();
        let l1 = OperatorOnSpace::identity(&"l1(2)".parse().unwrap());
        let rep = matricial_vn_check(&l1, &rot, &k, &cfg).unwrap();
        assert!(rep.lhs >= 2f64.sqrt() - 1e-9);
        assert_abs_diff_eq!(rep.rhs, 1.0, epsilon = 1e-12);
        assert!(rep.violated);
        let l2 = OperatorOnSpace::identity(&"l2(2)".parse().unwrap());
        let rep = matricial_vn_check(&l2, &rot, &k, &cfg).unwrap();
        assert_abs_diff_eq!(rep.lhs, 1.0, epsilon = 1e-12);
        assert!(!rep.violated);
    }

    #[test]
    fn order_one_matricial_matches_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let space: NormTree = "l1(2)".parse().unwrap();
        let t = random_operator_with_norm(&space, 0.5, &mut rng);
        let f = random_poly(&mut rng, 4);
        let cfg = VnConfig::default();
        let a = vn_check(&t, &f, &CompactRegion::unit_disk(), &cfg).unwrap();
        let b = matricial_vn_check(&t, &MatricialRational::new(1, vec![f]).unwrap(), &CompactRegion::unit_disk(), &cfg).unwrap();
        assert_abs_diff_eq!(a.lhs, b.lhs, epsilon = 1e-12);
        assert_abs_diff_eq!(a.rhs, b.rhs, epsilon = 1e-12);
    }

    #[test]
    fn report_json_fields() {
        let t = OperatorOnSpace::identity(&"l2(1)".parse().unwrap());
        let rep = vn_check(&t, &RationalFunction::identity(), &CompactRegion::unit_disk(), &VnConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        for key in ["lhs", "rhs", "ratio", "violated", "grid_points", "method_flags"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["method_flags"]["certificate"], "evidence_only");
    }

    #[test]
    fn calculus_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let space: NormTree = "l2(4)".parse().unwrap();
        let k = CompactRegion::unit_disk();
        let cfg = AscentConfig::default();
        for _ in 0..20 {
            let t = random_operator_with_norm(&space, 0.9, &mut rng);
            let f = random_poly(&mut rng, 6);
            let g = random_poly(&mut rng, 6);
            let fg = rat_apply_operator(&f.mul(&g), &t, &k).unwrap();
            let ft = rat_apply_operator(&f, &t, &k).unwrap();
            let gt = rat_apply_operator(&g, &t, &k).unwrap();
            let diff = OperatorOnSpace::on(fg.matrix() - ft.matrix() * gt.matrix(), space.clone()).unwrap();
            let bound = 1e-8 * (1.0 + operator_norm(&ft, &cfg).lower_bound * operator_norm(&gt, &cfg).lower_bound);
            assert!(operator_norm(&diff, &cfg).lower_bound <= bound);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // Resolvent powers (z − α)^{−m} satisfy the inequality over K̂ whenever ‖T‖ ≤ R/3.
        #[test]
        fn resolvent_powers_never_violate(
            radius in 0.5f64..5.0,
            mag_frac in 0.05f64..0.95,
            phase in 0.0f64..std::f64::consts::TAU,
            delta_frac in 0.05f64..1.0,
            norm_frac in 0.1f64..1.0,
            m in 1usize..4,
            seed in 0u64..1000,
        ) {
            let lo = radius / 3.0;
            let mag = lo + mag_frac * (radius - lo);
            let alpha = Complex64::from_polar(mag, phase);
            let delta = delta_frac * (mag - lo).min(radius - mag) * 0.999;
            let k = CompactRegion::new(Disk::new(c(0.0, 0.0), radius), vec![Disk::new(alpha, delta)]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_operator_with_norm(&"l1(3)".parse().unwrap(), norm_frac * lo, &mut rng);
            let g = RationalFunction::inverse_power(alpha, m);
            let rep = vn_check(&t, &g, &k, &VnConfig::default()).unwrap();
            prop_assert!(!rep.violated, "{:?}", rep);
            prop_assert!(rep.lhs <= (mag - lo).powi(-(m as i32)) * (1.0 + 1e-9));
        }
    }
}
