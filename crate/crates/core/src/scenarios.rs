//! End-to-end reproductions of the constructions the library is built
//! around, each producing a machine-readable [`ScenarioReport`].
//!
//! Default parameters live in `config/scenarios.toml`, embedded at compile
//! time, so a report is reproducible from its `scenario_id`, the config
//! version and the seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bohr::{bohr_sum, extremal_mobius_function, spectral_threshold_estimate, TruncatedSeries, A_SWEEP};
use crate::calculus::{
    gc_function, matricial_vn_check, rat_apply_operator, sup_norm_region, vn_check, CompactRegion, Disk,
    MatricialRational, RationalFunction, VnConfig, VnReport,
};
use crate::dilation::{make_s_lambda, make_t_lambda, make_t_r_block, norm_defect, DefectConfig, StrictContraction};
use crate::error::{Error, Result};
use crate::hilbertness::{mobius_sweep, parallelogram_defect, rotation_test};
use crate::operators::{forward_shift, operator_norm, AscentConfig, OperatorOnSpace};
use crate::spaces::NormTree;

/// Config schema version this build understands.
pub const CONFIG_VERSION: u32 = 1;
/// Separation required before a scenario reports a violation of a bound.
pub const SEPARATION: f64 = 1e-6;
const DEFECT_CERTIFICATE: f64 = -1e-8;
const HILBERT_TOL: f64 = 1e-10;

const FROZEN_CONFIG: &str = include_str!("../config/scenarios.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Confirmed,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Confirmed => 0,
            Verdict::Inconclusive => 2,
            Verdict::Violated => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Real(f64),
    Complex(Complex64),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub resolutions: BTreeMap<String, usize>,
    pub seeds: BTreeMap<String, u64>,
}

/// Per-item numeric rows, written out as CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario_id: String,
    pub config_version: u32,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub quantities: BTreeMap<String, Quantity>,
    pub verdict: Verdict,
    pub verdict_rule: String,
    pub grid_metadata: GridMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

impl ScenarioReport {
    fn new<P: Serialize>(id: &str, params: &P, rule: &str) -> Self {
        let parameters = match serde_json::to_value(params) {
            Ok(serde_json::Value::Object(m)) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Self {
            scenario_id: id.to_string(),
            config_version: CONFIG_VERSION,
            parameters,
            quantities: BTreeMap::new(),
            verdict: Verdict::Inconclusive,
            verdict_rule: rule.to_string(),
            grid_metadata: GridMetadata::default(),
            table: None,
        }
    }

    fn real(&mut self, name: impl Into<String>, v: f64) {
        self.quantities.insert(name.into(), Quantity::Real(v));
    }

    fn complex(&mut self, name: impl Into<String>, v: Complex64) {
        self.quantities.insert(name.into(), Quantity::Complex(v));
    }

    fn resolution(&mut self, name: &str, v: usize) {
        self.grid_metadata.resolutions.insert(name.to_string(), v);
    }

    fn seed(&mut self, name: &str, v: u64) {
        self.grid_metadata.seeds.insert(name.to_string(), v);
    }

    pub fn quantity(&self, name: &str) -> Option<Quantity> {
        self.quantities.get(name).copied()
    }

    /// Real part of a named quantity.
    pub fn real_quantity(&self, name: &str) -> Option<f64> {
        self.quantity(name).map(|q| match q {
            Quantity::Real(v) => v,
            Quantity::Complex(z) => z.re,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// The table if there is one, otherwise `quantity,re,im` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.table {
            Some(t) => {
                let _ = writeln!(out, "{}", t.columns.join(","));
                for row in &t.rows {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                    let _ = writeln!(out, "{}", cells.join(","));
                }
            }
            None => {
                out.push_str("quantity,re,im\n");
                for (k, q) in &self.quantities {
                    let z = match q {
                        Quantity::Real(v) => Complex64::new(*v, 0.0),
                        Quantity::Complex(z) => *z,
                    };
                    let _ = writeln!(out, "{k},{:e},{:e}", z.re, z.im);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcParams {
    pub radius: f64,
    pub alpha: Complex64,
    pub delta: f64,
    pub c_list: Vec<f64>,
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToeplitzParams {
    pub degree: usize,
    pub r: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalDiskParams {
    pub radius: f64,
    pub degree: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralVsDilationParams {
    pub lambda: f64,
    pub family_size: usize,
    pub max_degree: usize,
    pub grid: usize,
    pub defect_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationVsSpectralParams {
    pub inner: NormTree,
    pub blocks: usize,
    pub defect_lambdas: Vec<f64>,
    pub probe_lambdas: Vec<f64>,
    pub defect_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompleteVsDilationParams {
    pub r: f64,
    pub hilbert_dim: usize,
    pub trials: usize,
    pub max_order: usize,
    pub max_degree: usize,
    pub grid: usize,
    pub defect_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityParams {
    pub space: NormTree,
    pub family_size: usize,
    pub max_degree: usize,
    pub grid: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub gc_minimality: GcParams,
    pub toeplitz_identity: ToeplitzParams,
    pub minimal_disk: MinimalDiskParams,
    pub spectral_vs_dilation: SpectralVsDilationParams,
    pub dilation_vs_spectral: DilationVsSpectralParams,
    pub complete_vs_dilation: CompleteVsDilationParams,
    pub identity_not_complete: IdentityParams,
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    /// The defaults shipped with this build.
    pub fn frozen() -> Self {
        Self::from_toml_str(FROZEN_CONFIG).expect("embedded scenario config is valid")
    }

    /// Applies command-line overrides to every scenario that uses them.
    pub fn with_overrides(mut self, seed: Option<u64>, grid: Option<usize>) -> Self {
        if let Some(s) = seed {
            self.toeplitz_identity.seed = s;
            self.spectral_vs_dilation.seed = s;
            self.dilation_vs_spectral.seed = s;
            self.complete_vs_dilation.seed = s;
            self.identity_not_complete.seed = s;
        }
        if let Some(g) = grid {
            self.gc_minimality.grid = g;
            self.spectral_vs_dilation.grid = g;
            self.complete_vs_dilation.grid = g;
            self.identity_not_complete.grid = g;
        }
        self
    }
}

pub struct ScenarioInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub anchor: &'static str,
}

pub const SCENARIOS: [ScenarioInfo; 7] = [
    ScenarioInfo {
        id: "gc-minimality",
        description: "two-term g_c on a holed disk: scalar lower bound vs boundary sup",
        anchor: "D_R minus a hole is not spectral for F_{R/3}",
    },
    ScenarioInfo {
        id: "toeplitz-identity",
        description: "l1 norm of f(rM_z) against the Bohr sum of f at r",
        anchor: "||f(rM_z)|| = sum |a_n| r^n on l1",
    },
    ScenarioInfo {
        id: "minimal-disk",
        description: "bisection for the smallest spectral disk of the weighted shift",
        anchor: "D_R is minimal spectral for F_r iff r = R/3",
    },
    ScenarioInfo {
        id: "spectral-vs-dilation",
        description: "T_lambda on l1(2): spectral set but no isometric dilation",
        anchor: "lambda <= 1/3: spectral set, A_T not a norm",
    },
    ScenarioInfo {
        id: "dilation-vs-spectral",
        description: "S_lambda dilates to an isometry but the disk is not spectral",
        anchor: "A_{S_lambda} = ||S_mu x||; Mobius contraction fails off Hilbert space",
    },
    ScenarioInfo {
        id: "complete-vs-dilation",
        description: "T_r on H (+)_1 H: complete spectral set without isometric dilation",
        anchor: "||F(T_r)|| <= ||F||, yet A_{T_r} violates the triangle inequality",
    },
    ScenarioInfo {
        id: "identity-not-complete",
        description: "identity: spectral set, but the rotation block fails off Hilbert space",
        anchor: "||f(I)|| = |f(1)|; rotation polynomial norm > 1 iff not Hilbert",
    },
];

/// Runs a scenario by id.
pub fn run_scenario(id: &str, cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    match id {
        "gc-minimality" => scenario_gc_minimality(&cfg.gc_minimality),
        "toeplitz-identity" => scenario_toeplitz_identity(&cfg.toeplitz_identity),
        "minimal-disk" => scenario_minimal_disk(&cfg.minimal_disk),
        "spectral-vs-dilation" => scenario_spectral_vs_dilation(&cfg.spectral_vs_dilation),
        "dilation-vs-spectral" => scenario_dilation_vs_spectral(&cfg.dilation_vs_spectral),
        "complete-vs-dilation" => scenario_complete_vs_dilation(&cfg.complete_vs_dilation),
        "identity-not-complete" => scenario_identity_not_complete(&cfg.identity_not_complete),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_polynomial(rng: &mut ChaCha8Rng, max_degree: usize) -> Vec<Complex64> {
    let deg = rng.random_range(0..=max_degree);
    (0..=deg).map(|_| random_coeff(rng)).collect()
}

// Random polynomials and p(z)/(1 − wz) with |w| ≤ 0.8, plus the swept Möbius maps.
fn random_family(rng: &mut ChaCha8Rng, size: usize, max_degree: usize) -> Result<Vec<RationalFunction>> {
    let mut out: Vec<RationalFunction> =
        A_SWEEP.iter().map(|&a| extremal_mobius_function(a, 1.0)).collect::<Result<_>>()?;
    for k in 0..size {
        let p = random_polynomial(rng, max_degree);
        if k % 2 == 0 {
            out.push(RationalFunction::polynomial(p)?);
        } else {
            let w = Complex64::from_polar(rng.random_range(0.0..0.8), rng.random_range(0.0..std::f64::consts::TAU));
            out.push(RationalFunction::new(p, vec![Complex64::new(1.0, 0.0), -w])?);
        }
    }
    Ok(out)
}

fn max_ratio(reports: &[VnReport]) -> f64 {
    reports.iter().map(|r| r.ratio).fold(0.0, f64::max)
}

fn gc_lower_bound(alpha: Complex64, delta: f64, c: f64) -> f64 {
    (2.0 * c + (1.0 - c * c) * delta / (alpha + delta * c)).norm()
}

/// Two-term function `g_c` on `K̂ = D̄_R \ D_δ(α)`: compares the scalar lower
/// bound `|2c + (1 − c²)δ/(α + δc)|` of `‖g_c(T)‖` against the boundary sup.
pub fn scenario_gc_minimality(p: &GcParams) -> Result<ScenarioReport> {
    let (r, a, d) = (p.radius, p.alpha.norm(), p.delta);
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("need R > 0, got {r}")));
    }
    if !(r / 3.0 < a && a < r) {
        return Err(Error::InvalidParameter(format!("need R/3 < |alpha| < R, got R = {r}, |alpha| = {a}")));
    }
    if !(d > 0.0 && d <= a - r / 3.0) {
        return Err(Error::InvalidParameter(format!("need 0 < delta <= |alpha| - R/3, got delta = {d}")));
    }
    if !(a + d < r) {
        return Err(Error::InvalidParameter(format!("need |alpha| + delta < R, got {}", a + d)));
    }
    if p.c_list.is_empty() || p.c_list.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
        return Err(Error::InvalidParameter("every c must lie in (0, 1)".into()));
    }
    let region = CompactRegion::new(Disk::new(Complex64::new(0.0, 0.0), r), vec![Disk::new(p.alpha, d)])?;

    let rows: Vec<Vec<f64>> = p
        .c_list
        .par_iter()
        .map(|&c| {
            let g = gc_function(r, p.alpha, d, c)?;
            let rhs = sup_norm_region(&g, &region, p.grid)?;
            let lhs = gc_lower_bound(p.alpha, d, c);
            Ok(vec![c, lhs, rhs, lhs - rhs])
        })
        .collect::<Result<_>>()?;

    let mut rep = ScenarioReport::new(
        "gc-minimality",
        p,
        "confirmed if some c has lhs_c > rhs_c + 1e-6, violated otherwise",
    );
    rep.resolution("boundary_points_per_circle", p.grid);
    let mut best_gap = f64::NEG_INFINITY;
    for row in &rows {
        let c = row[0];
        rep.real(format!("lhs[c={c}]"), row[1]);
        rep.real(format!("rhs[c={c}]"), row[2]);
        rep.real(format!("gap[c={c}]"), row[3]);
        best_gap = best_gap.max(row[3]);
    }
    rep.real("max_gap", best_gap);
    rep.verdict = if best_gap > SEPARATION { Verdict::Confirmed } else { Verdict::Violated };
    rep.table = Some(Table { columns: vec!["c".into(), "lhs".into(), "rhs".into(), "gap".into()], rows });
    Ok(rep)
}

/// `‖f(rM_z)‖` on `ℓ₁` (exact column sum) against `Σ|aₙ|rⁿ` for random `f`.
pub fn scenario_toeplitz_identity(p: &ToeplitzParams) -> Result<ScenarioReport> {
    if !(p.r > 0.0 && p.r <= 1.0) {
        return Err(Error::InvalidParameter(format!("r must lie in (0, 1], got {}", p.r)));
    }
    if p.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let scalar = NormTree::leaf(1, 1.0)?;
    let shift = forward_shift(&scalar, p.degree + 1, p.r, 1.0)?;
    let region = CompactRegion::unit_disk();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let polys: Vec<Vec<Complex64>> = (0..p.trials).map(|_| (0..=p.degree).map(|_| random_coeff(&mut rng)).collect()).collect();

    let rows: Vec<Vec<f64>> = polys
        .par_iter()
        .enumerate()
        .map(|(i, coeffs)| {
            let f = RationalFunction::polynomial(coeffs.clone())?;
            let ft = rat_apply_operator(&f, &shift, &region)?;
            let est = operator_norm(&ft, &AscentConfig::default());
            if !est.is_exact {
                return Err(Error::InvalidParameter("expected an exact l1 norm".into()));
            }
            let sum = bohr_sum(&TruncatedSeries::new(coeffs.clone(), 1.0, None)?, p.r)?;
            Ok(vec![i as f64, est.lower_bound, sum, (est.lower_bound - sum).abs()])
        })
        .collect::<Result<_>>()?;

    let max_dev = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let mut rep = ScenarioReport::new("toeplitz-identity", p, "confirmed if every |norm - bohr_sum| <= 1e-10");
    rep.seed("polynomials", p.seed);
    rep.resolution("shift_blocks", p.degree + 1);
    rep.real("max_abs_deviation", max_dev);
    rep.verdict = if max_dev <= 1e-10 { Verdict::Confirmed } else { Verdict::Violated };
    rep.table = Some(Table {
        columns: vec!["trial".into(), "operator_norm".into(), "bohr_sum".into(), "abs_deviation".into()],
        rows,
    });
    Ok(rep)
}

/// Bisection for the largest `r` such that `D̄_R` stays spectral for the
/// weighted shift `rM_z`; the expected value is `R/3`.
pub fn scenario_minimal_disk(p: &MinimalDiskParams) -> Result<ScenarioReport> {
    let est = spectral_threshold_estimate(p.radius, p.degree, p.tol)?;
    let expected = p.radius / 3.0;
    let err = (est.bracket.radius - expected).abs();
    let mut rep = ScenarioReport::new(
        "minimal-disk",
        p,
        "confirmed if |estimate - R/3| <= tol + residual_gap, violated otherwise",
    );
    rep.resolution("shift_blocks", p.degree);
    rep.resolution("boundary_points", crate::calculus::DEFAULT_BOUNDARY_POINTS);
    rep.real("estimate", est.bracket.radius);
    rep.real("upper", est.bracket.upper);
    rep.real("expected", expected);
    rep.real("abs_error", err);
    rep.real("relative_error", err / expected);
    rep.real("residual_gap", est.residual_gap);
    rep.verdict = if err <= p.tol + est.residual_gap { Verdict::Confirmed } else { Verdict::Violated };
    Ok(rep)
}

/// `T_λ` on `ℓ₁²`: the closed disk is spectral (no von Neumann violation in a
/// random rational family) while `A_T` fails the triangle inequality.
pub fn scenario_spectral_vs_dilation(p: &SpectralVsDilationParams) -> Result<ScenarioReport> {
    let t = make_t_lambda(p.lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let family = random_family(&mut rng, p.family_size, p.max_degree)?;
    let vcfg = VnConfig { boundary_points: p.grid, ascent: AscentConfig { seed: p.seed, ..Default::default() } };
    let region = CompactRegion::unit_disk();
    let reports: Vec<VnReport> = family.par_iter().map(|f| vn_check(&t, f, &region, &vcfg)).collect::<Result<_>>()?;
    let violations = reports.iter().filter(|r| r.violated).count();
    let guard = StrictContraction::certify(&t)?;
    let defect = norm_defect(&guard, &DefectConfig { samples: p.defect_samples, seed: p.seed, refine: true })?;

    let mut rep = ScenarioReport::new(
        "spectral-vs-dilation",
        p,
        "violated if any vn check fails; confirmed if none fails and min_defect < -1e-8; inconclusive otherwise",
    );
    rep.resolution("boundary_points", p.grid);
    rep.resolution("defect_samples", defect.samples_used);
    rep.seed("family", p.seed);
    rep.seed("defect", p.seed);
    rep.real("family_size", family.len() as f64);
    rep.real("vn_violations", violations as f64);
    rep.real("max_vn_ratio", max_ratio(&reports));
    rep.real("min_defect", defect.min_defect);
    rep.real("defect_bound", 2.0 * (1.0 - p.lambda * p.lambda).sqrt() - 2.0);
    rep.verdict = if violations > 0 {
        Verdict::Violated
    } else if defect.min_defect < DEFECT_CERTIFICATE {
        Verdict::Confirmed
    } else {
        Verdict::Inconclusive
    };
    Ok(rep)
}

/// `S_λ = λM̂_z` on `X ⊕₂ ⋯ ⊕₂ X`: `A_{S_λ}` is a norm for every `λ`, yet a
/// Möbius contraction probe breaks for some `λ > 1/3` when `X` is not Hilbert.
pub fn scenario_dilation_vs_spectral(p: &DilationVsSpectralParams) -> Result<ScenarioReport> {
    let hilbert = parallelogram_defect(&p.inner, 1000, p.seed) <= HILBERT_TOL;
    let mut rep = ScenarioReport::new(
        "dilation-vs-spectral",
        p,
        "violated if some S_lambda defect < -1e-10, or a probe violation on a Hilbert inner space; \
         confirmed if defects hold and probe violations occur exactly when the inner space is not Hilbert; \
         inconclusive if no violation is found on a non-Hilbert inner space",
    );
    rep.seed("defect", p.seed);
    rep.seed("probe_ascent", p.seed);
    rep.resolution("defect_samples", p.defect_samples);
    rep.resolution("alpha_grid", crate::hilbertness::ALPHA_GRID);
    rep.real("inner_is_hilbert", if hilbert { 1.0 } else { 0.0 });

    let mut min_defect = f64::INFINITY;
    for &l in &p.defect_lambdas {
        let s = make_s_lambda(&p.inner, p.blocks, l)?;
        let d = norm_defect(&StrictContraction::assume(&s), &DefectConfig {
            samples: p.defect_samples,
            seed: p.seed,
            refine: true,
        })?;
        rep.real(format!("min_defect[lambda={l}]"), d.min_defect);
        min_defect = min_defect.min(d.min_defect);
    }

    let ascent = AscentConfig { seed: p.seed, ..Default::default() };
    let mut found = None;
    let mut probed = 0;
    for &l in &p.probe_lambdas {
        let s = make_s_lambda(&p.inner, p.blocks, l)?;
        let probe = mobius_sweep(&s, &ascent)?;
        probed += 1;
        rep.real(format!("probe_excess[lambda={l}]"), probe.excess());
        if probe.violated {
            found = Some((l, probe));
            break;
        }
    }
    rep.real("lambdas_probed", probed as f64);
    if let Some((l, probe)) = &found {
        rep.real("violating_lambda", *l);
        rep.complex("violating_alpha", probe.alpha);
        rep.real("violating_lhs", probe.lhs);
        rep.real("violating_rhs", probe.rhs);
        for (i, z) in probe.witness.iter().enumerate() {
            rep.complex(format!("witness[{i:02}]"), *z);
        }
    }
    rep.verdict = if min_defect < -1e-10 {
        Verdict::Violated
    } else {
        match (hilbert, found.is_some()) {
            (false, true) | (true, false) => Verdict::Confirmed,
            (true, true) => Verdict::Violated,
            (false, false) => Verdict::Inconclusive,
        }
    };
    Ok(rep)
}

fn random_matricial(rng: &mut ChaCha8Rng, order: usize, max_degree: usize) -> Result<MatricialRational> {
    let entries = (0..order * order)
        .map(|_| RationalFunction::polynomial(random_polynomial(rng, max_degree)))
        .collect::<Result<_>>()?;
    MatricialRational::new(order, entries)
}

fn constant_rotation() -> Result<MatricialRational> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let k = |v: f64| RationalFunction::constant(Complex64::new(v, 0.0));
    MatricialRational::from_rows(vec![vec![k(s), k(-s)], vec![k(s), k(s)]])
}

/// `T_r(h₁, h₂) = (rh₁, 0)` on `H ⊕₁ H`: expected to pass every matricial
/// von Neumann check while `A_{T_r}` violates the triangle inequality.
///
/// The matricial half does not hold. `f(T_r)(h₁, h₂) = (f(r)h₁, f(0)h₂)`,
/// so `F(T_r)` keeps the `F(0)` action on the second summand, and a constant
/// `F` gives `F ⊗ I_X`, which expands on the non-Hilbert `X`. The report
/// carries that constant-rotation witness.
pub fn scenario_complete_vs_dilation(p: &CompleteVsDilationParams) -> Result<ScenarioReport> {
    if p.max_order == 0 {
        return Err(Error::InvalidParameter("max_order must be >= 1".into()));
    }
    let t = make_t_r_block(p.r, p.hilbert_dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let family: Vec<MatricialRational> =
        (0..p.trials).map(|k| random_matricial(&mut rng, 1 + k % p.max_order, p.max_degree)).collect::<Result<_>>()?;
    let vcfg = VnConfig { boundary_points: p.grid, ascent: AscentConfig { seed: p.seed, ..Default::default() } };
    let region = CompactRegion::unit_disk();
    let reports: Vec<VnReport> =
        family.par_iter().map(|f| matricial_vn_check(&t, f, &region, &vcfg)).collect::<Result<_>>()?;
    let violations = reports.iter().filter(|r| r.violated).count();
    // F ≡ the constant rotation has sup 1 and F(T) = F ⊗ I_X for every T
    let rotation = constant_rotation()?;
    let rot = matricial_vn_check(&t, &rotation, &region, &vcfg)?;

    let guard = match StrictContraction::certify(&t) {
        Ok(g) => g,
        Err(Error::DimensionTooLarge { .. }) => StrictContraction::assume(&t),
        Err(e) => return Err(e),
    };
    let defect = norm_defect(&guard, &DefectConfig { samples: p.defect_samples, seed: p.seed, refine: true })?;

    let mut rep = ScenarioReport::new(
        "complete-vs-dilation",
        p,
        "violated if any matricial vn check (random family or constant rotation) fails; confirmed if none fails and min_defect < -1e-8; inconclusive otherwise",
    );
    rep.resolution("boundary_points", p.grid);
    rep.resolution("defect_samples", defect.samples_used);
    rep.seed("family", p.seed);
    rep.seed("defect", p.seed);
    rep.real("family_size", family.len() as f64);
    rep.real("vn_violations", violations as f64);
    rep.real("max_vn_ratio", max_ratio(&reports));
    rep.real("constant_rotation_lhs", rot.lhs);
    rep.real("constant_rotation_rhs", rot.rhs);
    rep.real("min_defect", defect.min_defect);
    rep.real("defect_bound", 1.0 + (1.0 - p.r * p.r).sqrt() - (4.0 - p.r * p.r).sqrt());
    rep.verdict = if violations > 0 || rot.violated {
        Verdict::Violated
    } else if defect.min_defect < DEFECT_CERTIFICATE {
        Verdict::Confirmed
    } else {
        Verdict::Inconclusive
    };
    Ok(rep)
}

/// The identity: every scalar check gives `‖f(I)‖ = |f(1)| ≤ sup`, while the
/// rotation block exceeds norm 1 exactly when the space is not Hilbert.
pub fn scenario_identity_not_complete(p: &IdentityParams) -> Result<ScenarioReport> {
    let id = OperatorOnSpace::identity(&p.space);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let family = random_family(&mut rng, p.family_size, p.max_degree)?;
    let vcfg = VnConfig { boundary_points: p.grid, ascent: AscentConfig { seed: p.seed, ..Default::default() } };
    let region = CompactRegion::unit_disk();
    let reports: Vec<VnReport> = family.par_iter().map(|f| vn_check(&id, f, &region, &vcfg)).collect::<Result<_>>()?;
    let violations = reports.iter().filter(|r| r.violated).count();
    let max_point_error = family
        .iter()
        .zip(&reports)
        .map(|(f, r)| Ok((r.lhs - f.eval(Complex64::new(1.0, 0.0))?.norm()).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let rotation = rotation_test(&p.space)?;
    let hilbert = parallelogram_defect(&p.space, 1000, p.seed) <= HILBERT_TOL;

    let mut rep = ScenarioReport::new(
        "identity-not-complete",
        p,
        "confirmed if no vn check fails and the rotation test fails exactly when the space is not Hilbert; violated otherwise",
    );
    rep.resolution("boundary_points", p.grid);
    rep.seed("family", p.seed);
    rep.real("family_size", family.len() as f64);
    rep.real("vn_violations", violations as f64);
    rep.real("max_abs_lhs_minus_f1", max_point_error);
    rep.real("rotation_norm_lb", rotation.norm_lb);
    rep.real("space_is_hilbert", if hilbert { 1.0 } else { 0.0 });
    rep.verdict = if violations == 0 && rotation.passes == hilbert { Verdict::Confirmed } else { Verdict::Violated };
    Ok(rep)
}
