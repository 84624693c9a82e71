//! Numeric probes for whether a norm comes from an inner product.
//!
//! Each probe can only certify that a space is *not* Hilbert. Passing every
//! probe is evidence, never proof.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{exceeds, matricial_apply, rat_apply_operator, CompactRegion, MatricialRational, RationalFunction};
use crate::error::{Error, Result};
use crate::operators::{maximize_ratio, operator_norm, spectral_radius, spectrum, AscentConfig, OperatorOnSpace};
use crate::spaces::{basis, basis_pairs, random_unit_vector, CVector, NormTree};

/// Tolerance for `rotation_test` to count as passing.
pub const ROTATION_TOL: f64 = 1e-8;
/// Size of the `α` grid used by [`mobius_sweep`].
pub const ALPHA_GRID: usize = 64;

fn sq(v: f64) -> f64 {
    v * v
}

fn add(x: &[Complex64], y: &[Complex64], s: Complex64) -> Vec<Complex64> {
    x.iter().zip(y).map(|(a, b)| a + s * b).collect()
}

fn pair_parallelogram(space: &NormTree, x: &[Complex64], y: &[Complex64]) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let (nx, ny) = (space.norm_unchecked(x), space.norm_unchecked(y));
    let denom = sq(nx) + sq(ny);
    if denom == 0.0 {
        return 0.0;
    }
    let plus = space.norm_unchecked(&add(x, y, one));
    let minus = space.norm_unchecked(&add(x, y, -one));
    (sq(plus) + sq(minus) - 2.0 * denom).abs() / denom
}

/// Largest relative parallelogram-law defect
/// `|‖x+y‖² + ‖x−y‖² − 2(‖x‖² + ‖y‖²)| / (‖x‖² + ‖y‖²)` over the signed and
/// phased basis pairs plus `samples` random pairs.
pub fn parallelogram_defect(space: &NormTree, samples: usize, seed: u64) -> f64 {
    let n = space.total_dimension();
    let fixed = basis_pairs(n)
        .par_iter()
        .map(|(x, y)| pair_parallelogram(space, x.as_slice(), y.as_slice()))
        .reduce(|| 0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: Vec<(CVector, CVector)> = (0..samples)
        .map(|_| {
            let x = random_unit_vector(space, &mut rng);
            let s: f64 = rng.random_range(0.1..=1.0);
            (x, random_unit_vector(space, &mut rng) * Complex64::new(s, 0.0))
        })
        .collect();
    random
        .par_iter()
        .map(|(x, y)| pair_parallelogram(space, x.as_slice(), y.as_slice()))
        .reduce(|| fixed, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationResult {
    pub norm_lb: f64,
    pub passes: bool,
}

/// Norm of `(1/√2)[[I, −I], [I, I]]` on `X ⊕₂ X`, the rotation polynomial
/// evaluated at the identity. Its sup over the closed disk is 1, so a norm
/// above 1 shows the disk is not a complete spectral set for `I_X`.
pub fn rotation_test(space: &NormTree) -> Result<RotationResult> {
    let id = OperatorOnSpace::identity(space);
    let f = matricial_apply(&MatricialRational::rotation(), &id, &CompactRegion::unit_disk())?;
    let norm_lb = operator_norm(&f, &AscentConfig::default()).lower_bound;
    Ok(RotationResult { norm_lb, passes: norm_lb <= 1.0 + ROTATION_TOL })
}

/// `|‖ax + by‖ − ‖bx + ay‖|` with `x` and `y` first rescaled to unit norm.
/// Returns `None` if either vector is zero.
pub fn symmetry_gap(space: &NormTree, x: &[Complex64], y: &[Complex64], a: f64, b: f64) -> Option<f64> {
    let x = space.normalize(x)?;
    let y = space.normalize(y)?;
    let comb = |s: f64, t: f64| -> f64 {
        let v: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| p * s + q * t).collect();
        space.norm_unchecked(&v)
    };
    Some((comb(a, b) - comb(b, a)).abs())
}

const SKEW_COEFFS: [(f64, f64); 4] = [(1.0, -0.5), (1.0, 0.5), (1.0, -0.25), (0.75, -1.0)];

/// Largest symmetry gap over deterministic skew pairs `(e_i, 0.6e_i + 0.8e_j)`
/// with a few fixed `(a, b)`, plus `samples` random unit pairs with
/// `(a, b) ∈ [−1, 1]²`.
pub fn symmetry_test(space: &NormTree, samples: usize, seed: u64) -> f64 {
    let n = space.total_dimension();
    let mut fixed = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let x = basis(n, i);
            let mut y = vec![Complex64::new(0.0, 0.0); n];
            y[i] = Complex64::new(0.6, 0.0);
            y[j] = Complex64::new(0.8, 0.0);
            for (a, b) in SKEW_COEFFS {
                fixed = fixed.max(symmetry_gap(space, &x, &y, a, b).unwrap_or(0.0));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: Vec<(CVector, CVector, f64, f64)> = (0..samples)
        .map(|_| {
            let x = random_unit_vector(space, &mut rng);
            let y = random_unit_vector(space, &mut rng);
            (x, y, rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
        })
        .collect();
    random
        .par_iter()
        .map(|(x, y, a, b)| symmetry_gap(space, x.as_slice(), y.as_slice(), *a, *b).unwrap_or(0.0))
        .reduce(|| fixed, f64::max)
}

/// Outcome of one Möbius contraction probe at a fixed `α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusProbe {
    pub alpha: Complex64,
    /// Lower bound of `‖φ_α(T)‖`.
    pub phi_norm_lb: f64,
    /// `‖(T − αI)x‖` at the witness.
    pub lhs: f64,
    /// `‖(I − ᾱT)x‖` at the witness.
    pub rhs: f64,
    pub violated: bool,
    pub witness: Vec<Complex64>,
}

impl MobiusProbe {
    pub fn excess(&self) -> f64 {
        self.lhs - self.rhs
    }
}

// (0, u, ω v, 0, …) over the blocks of a power space, u and v basis vectors of one block.
fn pattern_seeds(space: &NormTree) -> Vec<Vec<Complex64>> {
    let children = space.children();
    if children.len() < 3 || children.iter().any(|c| c.total_dimension() != children[0].total_dimension()) {
        return Vec::new();
    }
    let d = children[0].total_dimension();
    let n = space.total_dimension();
    let phases = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for w in phases {
                for s in [0.5, 1.0] {
                    let mut v = vec![Complex64::new(0.0, 0.0); n];
                    v[d + i] = Complex64::new(1.0, 0.0);
                    v[2 * d + j] += w * s;
                    out.push(v);
                }
            }
        }
    }
    out
}

fn top_singular_input(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .fold(0, |best, (i, s)| if *s > svd.singular_values[best] { i } else { best });
    v_t.row(k).iter().map(|z| z.conj()).collect()
}

/// Searches for `x` with `‖(T − αI)x‖ > ‖(I − ᾱT)x‖`, i.e. a vector on which
/// `φ_α(T)` expands. A violation shows the closed disk is not a spectral set
/// for `T`. The maximizer of `φ_α(T)` is found first (exactly on Euclidean
/// domains, otherwise by ascent seeded with the `(0, x, y, 0, …)` pattern) and
/// mapped back through `(I − ᾱT)^{-1}`.
pub fn mobius_contraction_probe(t: &OperatorOnSpace, alpha: Complex64, cfg: &AscentConfig) -> Result<MobiusProbe> {
    if !(alpha.norm() < 1.0) {
        return Err(Error::InvalidParameter(format!("|alpha| must be < 1, got {}", alpha.norm())));
    }
    if !t.is_endomorphism() {
        return Err(Error::InvalidParameter("probe needs an operator on a single space".into()));
    }
    if spectral_radius(t) >= 1.0 {
        return Err(Error::SpectralInclusion(spectrum(t)));
    }
    let phi = rat_apply_operator(&RationalFunction::mobius(alpha), t, &CompactRegion::unit_disk())?;
    let n = t.dim();
    let id = DMatrix::<Complex64>::identity(n, n);
    let resolvent = &id - t.matrix() * alpha.conj();

    let (phi_norm_lb, y) = if t.domain().is_euclidean() {
        let est = operator_norm(&phi, cfg);
        (est.lower_bound, top_singular_input(phi.matrix()))
    } else {
        let seeds: Vec<Vec<Complex64>> = pattern_seeds(t.domain())
            .into_iter()
            .map(|x0| (&resolvent * CVector::from_vec(x0)).as_slice().to_vec())
            .collect();
        let res = maximize_ratio(&phi, cfg, &seeds);
        (res.value, res.argmax.as_slice().to_vec())
    };

    let x = resolvent
        .clone()
        .lu()
        .solve(&CVector::from_vec(y))
        .ok_or_else(|| Error::SingularSolve("I - conj(alpha) T".into()))?;
    let lhs = t.domain().norm_unchecked((t.matrix() * &x - &x * alpha).as_slice());
    let rhs = t.domain().norm_unchecked((&resolvent * &x).as_slice());
    Ok(MobiusProbe {
        alpha,
        phi_norm_lb,
        lhs,
        rhs,
        violated: exceeds(lhs, rhs),
        witness: x.as_slice().to_vec(),
    })
}

/// The 64-point grid: radii 0.2, 0.4, 0.6, 0.8 times 16 equally spaced angles.
pub fn alpha_grid() -> Vec<Complex64> {
    let per_ring = ALPHA_GRID / 4;
    [0.2, 0.4, 0.6, 0.8]
        .iter()
        .flat_map(|&r| {
            (0..per_ring).map(move |k| Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / per_ring as f64))
        })
        .collect()
}

/// Runs the probe over [`alpha_grid`] and keeps the largest `lhs − rhs`;
/// ties go to the earlier grid point.
pub fn mobius_sweep(t: &OperatorOnSpace, cfg: &AscentConfig) -> Result<MobiusProbe> {
    let probes: Vec<MobiusProbe> = alpha_grid()
        .par_iter()
        .map(|&a| mobius_contraction_probe(t, a, cfg))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, p) in probes.iter().enumerate() {
        if p.excess() > probes[best].excess() {
            best = i;
        }
    }
    Ok(probes.into_iter().nth(best).expect("grid is non-empty"))
}
