use nalgebra::DMatrix;
use num_complex::Complex64;

use super::OperatorOnSpace;
use crate::error::{Error, Result};
use crate::spaces::NormTree;

fn check(blocks: usize, scale: f64) -> Result<()> {
    if blocks < 2 {
        return Err(Error::InvalidParameter(format!("shift needs at least 2 blocks, got {blocks}")));
    }
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("shift scale must be finite and >= 0, got {scale}")));
    }
    Ok(())
}

fn block_shift(inner: &NormTree, blocks: usize, scale: f64, outer_p: f64, forward: bool) -> Result<OperatorOnSpace> {
    check(blocks, scale)?;
    let space = NormTree::power(inner, blocks, outer_p)?;
    let d = inner.total_dimension();
    let n = space.total_dimension();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..blocks - 1 {
        for i in 0..d {
            let (row, col) = if forward { ((k + 1) * d + i, k * d + i) } else { (k * d + i, (k + 1) * d + i) };
            m[(row, col)] = Complex64::new(scale, 0.0);
        }
    }
    OperatorOnSpace::on(m, space)
}

/// `scale · M_z` on `inner ⊕_p … ⊕_p inner` (`blocks` copies):
/// `(a₀, …, a_{N−1}) ↦ scale · (0, a₀, …, a_{N−2})`.
pub fn forward_shift(inner: &NormTree, blocks: usize, scale: f64, outer_p: f64) -> Result<OperatorOnSpace> {
    block_shift(inner, blocks, scale, outer_p, true)
}

/// `scale · M̂_z`: `(a₀, a₁, …, a_{N−1}) ↦ scale · (a₁, …, a_{N−1}, 0)`.
pub fn backward_shift(inner: &NormTree, blocks: usize, scale: f64, outer_p: f64) -> Result<OperatorOnSpace> {
    block_shift(inner, blocks, scale, outer_p, false)
}
