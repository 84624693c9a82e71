use nalgebra::DMatrix;
use num_complex::Complex64;

use super::OperatorOnSpace;

fn is_triangular(m: &DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let upper = (0..n).all(|i| (0..i).all(|j| m[(i, j)] == zero));
    let lower = (0..n).all(|i| (i + 1..n).all(|j| m[(i, j)] == zero));
    upper || lower
}

/// Eigenvalues of a 2×2 block `[[a, b], [c, d]]`.
fn block_eigenvalues(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 2] {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powu(2) + b * c;
    let root = disc.sqrt();
    [half_tr + root, half_tr - root]
}

/// Eigenvalues of a square complex matrix, with algebraic multiplicity.
///
/// Triangular inputs return their diagonal exactly; nilpotent shifts would
/// otherwise pick up `eps^{1/n}` perturbations from the Schur iteration.
pub fn matrix_eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if is_triangular(m) {
        return m.diagonal().iter().cloned().collect();
    }
    let (_, t) = m.clone().schur().unpack();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > 1e-14 * scale {
            out.extend(block_eigenvalues(t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]));
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

/// σ(T).
pub fn spectrum(t: &OperatorOnSpace) -> Vec<Complex64> {
    matrix_eigenvalues(t.matrix())
}

pub fn spectral_radius(t: &OperatorOnSpace) -> f64 {
    spectrum(t).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Roots of `Σ cₖ zᵏ` (ascending coefficients) via the companion matrix.
/// Trailing zero coefficients are dropped; constants have no roots.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1] == Complex64::new(0.0, 0.0) {
        deg -= 1;
    }
    if deg <= 1 {
        return Vec::new();
    }
    let d = deg - 1;
    let lead = coeffs[d];
    let mut c = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        c[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        c[(i, d - 1)] = -coeffs[i] / lead;
    }
    matrix_eigenvalues(&c)
}
