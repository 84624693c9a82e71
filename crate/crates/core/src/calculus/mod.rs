//! Rational and matricial rational functional calculus, compact regions,
//! sup norms on regions, and the von Neumann checkers.

mod apply;
mod rational;
mod region;
mod vn;

use num_complex::Complex64;

pub use apply::{
    check_no_poles, matricial_apply, rat_apply_operator, MatricialRational, POLE_EPS, POLE_GRID, SPECTRAL_TOL,
};
pub use rational::{horner, horner_matrix, poly_add, poly_mul, RationalFunction, EVAL_POLE_EPS};
pub use region::{CompactRegion, Disk};
pub use vn::{
    exceeds, matricial_vn_check, sup_norm_region, vn_check, Certificate, MethodFlags, RegionFunction, VnConfig,
    VnReport, DEFAULT_BOUNDARY_POINTS, INTERIOR_SPOT_SAMPLES,
};

use crate::error::Result;

/// The two-term test function on `D̄_R \ D_δ(α)`:
///
/// `g_c(z) = (z/R − c)/(1 − cz/R) + (δ/(z−α) − c)/(1 − cδ/(z−α))`.
///
/// The first term is unimodular on `|z| = R`, the second on `|z − α| = δ`.
pub fn gc_function(radius: f64, alpha: Complex64, delta: f64, c: f64) -> Result<RationalFunction> {
    let cc = Complex64::new(c, 0.0);
    let outer = RationalFunction::new(vec![-cc, Complex64::new(1.0 / radius, 0.0)], vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(-c / radius, 0.0),
    ])?;
    // multiply through by (z − α): (δ + cα − c z) / (z − α − cδ)
    let inner = RationalFunction::new(vec![delta + cc * alpha, -cc], vec![-alpha - cc * delta, Complex64::new(1.0, 0.0)])?;
    Ok(outer.add(&inner))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gc_matches_direct_formula() {
        let (radius, alpha, delta) = (3.0, Complex64::new(2.0, 0.0), 0.5);
        let region = CompactRegion::new(Disk::new(Complex64::new(0.0, 0.0), radius), vec![Disk::new(alpha, delta)]).unwrap();
        for c in [0.5, 0.9, 0.999] {
            let g = gc_function(radius, alpha, delta, c).unwrap();
            let direct = |z: Complex64| {
                let w = delta / (z - alpha);
                (z / radius - c) / (1.0 - c * z / radius) + (w - c) / (1.0 - c * w)
            };
            let mut pts = region.boundary_samples(25);
            pts.extend(region.interior_samples(64));
            assert!(pts.len() >= 100);
            for z in pts {
                let (a, b) = (g.eval(z).unwrap(), direct(z));
                assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn inverse_power_peaks_on_hole() {
        let (alpha, delta) = (Complex64::new(2.0, 0.0), 0.5);
        let g = RationalFunction::inverse_power(alpha, 1);
        let v = g.eval(alpha + delta).unwrap();
        assert!((v - Complex64::new(1.0 / delta, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn gc_sup_stays_below_two() {
        let region = CompactRegion::new(
            Disk::new(Complex64::new(0.0, 0.0), 3.0),
            vec![Disk::new(Complex64::new(2.0, 0.0), 0.5)],
        )
        .unwrap();
        let g = gc_function(3.0, Complex64::new(2.0, 0.0), 0.5, 0.9).unwrap();
        let sup = sup_norm_region(&g, &region, 4096).unwrap();
        assert!(sup < 2.0, "{sup}");
    }
}
