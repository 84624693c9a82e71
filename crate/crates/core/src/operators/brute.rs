use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::OperatorOnSpace;
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_DIM: usize = 4;

// Upper bound on grid points; the phase grid is coarsened past it.
const GRID_BUDGET: f64 = 4.0e6;
const REFINE_FROM: usize = 8;

/// Compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for k in 0..=total {
        for mut rest in compositions(total - k, parts - 1) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn point(amps: &[f64], phases: &[f64]) -> Vec<Complex64> {
    amps.iter()
        .enumerate()
        .map(|(i, &a)| {
            let theta = if i == 0 { 0.0 } else { phases[i - 1] };
            Complex64::from_polar(a, theta)
        })
        .collect()
}

/// Derivative-free compass search in amplitude/phase coordinates.
fn refine(t: &OperatorOnSpace, amps: &[f64], phases: &[f64], a_step: f64, p_step: f64) -> f64 {
    let mut a = amps.to_vec();
    let mut th = phases.to_vec();
    let mut best = t.ratio_at(&point(&a, &th));
    let (mut da, mut dp) = (a_step, p_step);
    let mut evals = 0;
    while (da > 1e-11 || dp > 1e-11) && evals < 20_000 {
        let mut improved = false;
        for i in 0..a.len() {
            for s in [1.0, -1.0] {
                let old = a[i];
                a[i] = (old + s * da).max(0.0);
                let v = t.ratio_at(&point(&a, &th));
                evals += 1;
                if v > best {
                    best = v;
                    improved = true;
                } else {
                    a[i] = old;
                }
            }
        }
        for i in 0..th.len() {
            for s in [1.0, -1.0] {
                let old = th[i];
                th[i] = old + s * dp;
                let v = t.ratio_at(&point(&a, &th));
                evals += 1;
                if v > best {
                    best = v;
                    improved = true;
                } else {
                    th[i] = old;
                }
            }
        }
        if !improved {
            da *= 0.5;
            dp *= 0.5;
        }
    }
    best
}

/// Deterministic sweep of the domain unit sphere: amplitudes on a simplex
/// grid of the given resolution, phases on a uniform grid (the first
/// coordinate's phase is fixed), followed by a compass-search polish from the
/// best grid points. Returns a lower bound of `‖T‖`.
pub fn brute_force_norm(t: &OperatorOnSpace, resolution: usize) -> Result<f64> {
    let n = t.dim();
    if n > BRUTE_FORCE_MAX_DIM {
        return Err(Error::DimensionTooLarge { dim: n, max: BRUTE_FORCE_MAX_DIM });
    }
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let amplitudes = compositions(resolution, n);
    let phase_steps = if n == 1 {
        1
    } else {
        let per_axis = (GRID_BUDGET / binomial(resolution + n - 1, n - 1)).powf(1.0 / (n - 1) as f64);
        (per_axis.floor() as usize).clamp(4, resolution.max(4))
    };
    let phase_grid: Vec<Vec<f64>> = if n == 1 {
        vec![vec![]]
    } else {
        let total = phase_steps.pow((n - 1) as u32);
        (0..total)
            .map(|mut idx| {
                (0..n - 1)
                    .map(|_| {
                        let k = idx % phase_steps;
                        idx /= phase_steps;
                        TAU * k as f64 / phase_steps as f64
                    })
                    .collect()
            })
            .collect()
    };

    let mut scored: Vec<(f64, usize, usize)> = amplitudes
        .par_iter()
        .enumerate()
        .map(|(ai, comp)| {
            let amps: Vec<f64> = comp.iter().map(|&k| k as f64 / resolution as f64).collect();
            let mut best = (f64::NEG_INFINITY, ai, 0);
            for (pi, ph) in phase_grid.iter().enumerate() {
                let v = t.ratio_at(&point(&amps, ph));
                if v > best.0 {
                    best = (v, ai, pi);
                }
            }
            best
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let a_step = 1.0 / resolution as f64;
    let p_step = TAU / phase_steps as f64;
    let refined = scored
        .par_iter()
        .take(REFINE_FROM)
        .map(|&(_, ai, pi)| {
            let amps: Vec<f64> = amplitudes[ai].iter().map(|&k| k as f64 / resolution as f64).collect();
            refine(t, &amps, &phase_grid[pi], a_step, p_step)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(refined.max(scored.first().map_or(0.0, |s| s.0)).max(0.0))
}
