//! Bohr sums, Bohr-radius bisection over finite families, and the spectral
//! threshold experiment for weighted shifts.
//!
//! The Möbius family `f_a(z) = (a − z/R)/(1 − az/R)` has sup norm one on
//! `D̄_R` and Bohr sum `a + (1 − a²)(r/R)/(1 − a r/R)`, which reaches one at
//! `r = R/(1 + 2a)`; letting `a → 1` pushes the radius down to `R/3`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{horner, vn_check, CompactRegion, RationalFunction, VnConfig};
use crate::error::{Error, Result};
use crate::operators::forward_shift;
use crate::spaces::NormTree;

/// Default truncation degree for Möbius series. At `r ≤ 0.4 R` the dropped
/// tail is geometric with ratio at most 0.4, far below 1e-9.
pub const DEFAULT_TRUNCATION: usize = 200;
/// Boundary samples used when a series carries no sup-norm hint.
pub const SUP_GRID: usize = 4096;
/// Extremal parameters swept toward one by the threshold experiment.
pub const A_SWEEP: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];

/// Coefficients `a₀..a_N` of a power series on `D_R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    coefficients: Vec<Complex64>,
    disk_radius: f64,
    sup_norm_hint: Option<f64>,
}

impl TruncatedSeries {
    pub fn new(coefficients: Vec<Complex64>, disk_radius: f64, sup_norm_hint: Option<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter("series needs at least one coefficient".into()));
        }
        if coefficients.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("series coefficients"));
        }
        if !(disk_radius > 0.0) || !disk_radius.is_finite() {
            return Err(Error::InvalidParameter(format!("disk radius must be positive, got {disk_radius}")));
        }
        if let Some(h) = sup_norm_hint {
            if !(h >= 0.0) {
                return Err(Error::InvalidParameter(format!("sup-norm hint must be >= 0, got {h}")));
            }
        }
        Ok(Self { coefficients, disk_radius, sup_norm_hint })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn disk_radius(&self) -> f64 {
        self.disk_radius
    }

    pub fn sup_norm_hint(&self) -> Option<f64> {
        self.sup_norm_hint
    }

    /// `max |f|` over `points` equispaced samples of `|z| = R`.
    pub fn boundary_sup(&self, points: usize) -> f64 {
        let circle = crate::calculus::Disk::new(Complex64::new(0.0, 0.0), self.disk_radius);
        circle.circle(points).map(|z| horner(&self.coefficients, z).norm()).fold(0.0, f64::max)
    }

    /// The hint when present, otherwise the boundary sup on [`SUP_GRID`] points.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_hint.unwrap_or_else(|| self.boundary_sup(SUP_GRID))
    }

    /// `aₙ → aₙ/kⁿ`, `R → kR`: the series of `z ↦ f(z/k)`.
    pub fn dilate(&self, k: f64) -> Result<Self> {
        let mut scale = 1.0;
        let coefficients = self
            .coefficients
            .iter()
            .map(|&a| {
                let out = a * scale;
                scale /= k;
                out
            })
            .collect();
        Self::new(coefficients, self.disk_radius * k, self.sup_norm_hint)
    }
}

/// `Σ |aₙ| rⁿ`.
pub fn bohr_sum(s: &TruncatedSeries, r: f64) -> Result<f64> {
    if !(r >= 0.0) || r > s.disk_radius * (1.0 + 1e-12) {
        return Err(Error::OutsideDisk { r, radius: s.disk_radius });
    }
    Ok(s.coefficients.iter().rev().fold(0.0, |acc, a| acc * r + a.norm()))
}

fn check_a(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("extremal parameter must lie in (0, 1), got {a}")));
    }
    Ok(())
}

/// Coefficients of `(a − z/R)/(1 − az/R)` through degree `n`:
/// `a₀ = a`, `aₖ = −(1 − a²) a^{k−1} / Rᵏ`. Carries a sup-norm hint of one.
pub fn extremal_mobius_series(a: f64, radius: f64, n: usize) -> Result<TruncatedSeries> {
    check_a(a)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("truncation degree must be >= 2, got {n}")));
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(Complex64::new(a, 0.0));
    let mut tail = (1.0 - a * a) / radius;
    for _ in 1..=n {
        coeffs.push(Complex64::new(-tail, 0.0));
        tail *= a / radius;
    }
    TruncatedSeries::new(coeffs, radius, Some(1.0))
}

/// `(a − z/R)/(1 − az/R)` as a rational function.
pub fn extremal_mobius_function(a: f64, radius: f64) -> Result<RationalFunction> {
    check_a(a)?;
    RationalFunction::new(
        vec![Complex64::new(a, 0.0), Complex64::new(-1.0 / radius, 0.0)],
        vec![Complex64::new(1.0, 0.0), Complex64::new(-a / radius, 0.0)],
    )
}

/// A bisection result: `radius` is the last admissible point, `upper` the
/// first rejected one (or `radius` itself when the whole interval passes).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub radius: f64,
    pub upper: f64,
}

fn bisect(hi: f64, tol: f64, mut ok: impl FnMut(f64) -> Result<bool>) -> Result<Bracket> {
    if ok(hi)? {
        return Ok(Bracket { radius: hi, upper: hi });
    }
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket { radius: lo, upper: hi })
}

/// Largest `r ∈ [0, R]` with `bohr_sum(s, r) ≤ ‖s‖_∞` for every member, to within `tol`.
pub fn bohr_radius_estimate(family: &[TruncatedSeries], radius: f64, tol: f64) -> Result<Bracket> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(s) = family.iter().find(|s| (s.disk_radius - radius).abs() > 1e-12 * radius) {
        return Err(Error::InvalidParameter(format!(
            "series on D_{} does not match requested radius {radius}",
            s.disk_radius
        )));
    }
    let sups: Vec<f64> = family.iter().map(|s| s.sup_norm()).collect();
    bisect(radius, tol, |r| {
        for (s, &sup) in family.iter().zip(&sups) {
            if bohr_sum(s, r)? > sup * (1.0 + 1e-12) {
                return Ok(false);
            }
        }
        Ok(true)
    })
}

/// Result of the weighted-shift threshold experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub bracket: Bracket,
    /// `R/(1 + 2 a_max) − R/3`: how far the last swept member sits above `R/3`.
    pub residual_gap: f64,
    /// Bisection width plus `residual_gap`.
    pub tolerance: f64,
    pub a_sweep: Vec<f64>,
}

/// Bisection for the largest `r` such that no swept Möbius function violates
/// `‖f(rM_z)‖ ≤ ‖f‖_{∞,D̄_R}` for the weighted shift on `ℓ₁^degree`.
pub fn spectral_threshold_estimate(radius: f64, degree: usize, tol: f64) -> Result<ThresholdEstimate> {
    if degree < 8 {
        return Err(Error::InvalidParameter(format!("degree must be >= 8, got {degree}")));
    }
    if !(radius > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter("radius and tolerance must be positive".into()));
    }
    let region = CompactRegion::disk(Complex64::new(0.0, 0.0), radius)?;
    let family: Vec<RationalFunction> =
        A_SWEEP.iter().map(|&a| extremal_mobius_function(a, radius)).collect::<Result<_>>()?;
    let scalar = NormTree::leaf(1, 1.0)?;
    let cfg = VnConfig::default();
    let bracket = bisect(radius, tol, |r| {
        let t = forward_shift(&scalar, degree, r, 1.0)?;
        for f in &family {
            if vn_check(&t, f, &region, &cfg)?.violated {
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    let a_max = A_SWEEP[A_SWEEP.len() - 1];
    let residual_gap = radius / (1.0 + 2.0 * a_max) - radius / 3.0;
    Ok(ThresholdEstimate {
        bracket,
        residual_gap,
        tolerance: (bracket.upper - bracket.radius) + residual_gap,
        a_sweep: A_SWEEP.to_vec(),
    })
}
