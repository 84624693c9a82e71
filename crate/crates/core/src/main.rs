use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use specset::bohr::{bohr_radius_estimate, extremal_mobius_series, DEFAULT_TRUNCATION};
use specset::dilation::{
    make_s_lambda, make_t_lambda, make_t_r_block, norm_defect, DefectConfig, DefectReport, StrictContraction,
};
use specset::hilbertness::{
    mobius_sweep, parallelogram_defect, rotation_test, symmetry_test, MobiusProbe, RotationResult,
};
use specset::operators::{backward_shift, AscentConfig};
use specset::scenarios::{run_scenario, ScenarioConfig, SCENARIOS};
use specset::spaces::NormTree;
use specset::{Error, Result};

#[derive(Parser)]
#[command(name = "specset", version, about = "Spectral sets, Bohr radii and dilation defects on finite-dimensional Banach spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario by id, or `list` to enumerate them.
    Scenario {
        id: String,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Boundary points per circle.
        #[arg(long)]
        grid: Option<usize>,
        /// Alternative scenario config (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Bohr radius of a test family on D_R.
    Bohr {
        #[arg(long, value_enum, default_value_t = Family::Mobius)]
        family: Family,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.9, 0.99, 0.999])]
        a_list: Vec<f64>,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncation: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Triangle-inequality defect of A_T for a named operator.
    Dilation {
        #[arg(long, value_enum)]
        op: OpName,
        #[arg(long, default_value_t = 0.6)]
        lambda: f64,
        #[arg(long, default_value_t = 0.99)]
        r: f64,
        #[arg(long, default_value_t = 2)]
        hilbert_dim: usize,
        #[arg(long, default_value = "l1(2)")]
        inner: NormTree,
        #[arg(long, default_value_t = 4)]
        blocks: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_refine: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Hilbert-space probes on a norm tree.
    Hilbertness {
        #[arg(long)]
        space: NormTree,
        #[arg(long, value_enum, default_value_t = Probe::All)]
        probe: Probe,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Weight of the backward shift used by the Möbius probe.
        #[arg(long, default_value_t = 0.95)]
        lambda: f64,
        #[arg(long, default_value_t = 3)]
        blocks: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Mobius,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpName {
    #[value(name = "Tlambda")]
    TLambda,
    #[value(name = "Tr")]
    TR,
    #[value(name = "Slambda")]
    SLambda,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Probe {
    All,
    Parallelogram,
    Rotation,
    Symmetry,
    Mobius,
}

#[derive(Serialize)]
struct MobiusOutput {
    lambda: f64,
    blocks: usize,
    #[serde(flatten)]
    probe: MobiusProbe,
}

#[derive(Serialize)]
struct HilbertnessOutput {
    space: NormTree,
    #[serde(skip_serializing_if = "Option::is_none")]
    parallelogram_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rotation: Option<RotationResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry_violation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mobius: Option<MobiusOutput>,
}

#[derive(Serialize)]
struct DilationOutput {
    operator: String,
    #[serde(flatten)]
    report: DefectReport,
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Scenario { id, json, csv, seed, grid, config } => {
            if id == "list" {
                for s in &SCENARIOS {
                    println!("{:<24}{}  [{}]", s.id, s.description, s.anchor);
                }
                return Ok(0);
            }
            let base = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                    ScenarioConfig::from_toml_str(&text)?
                }
                None => ScenarioConfig::frozen(),
            };
            let report = run_scenario(&id, &base.with_overrides(seed, grid))?;
            if let Some(p) = &csv {
                emit(&report.to_csv(), Some(p))?;
            }
            if json.is_some() || csv.is_none() {
                emit(&(report.to_json()? + "\n"), json.as_deref())?;
            }
            eprintln!("{}: {:?}", report.scenario_id, report.verdict);
            Ok(report.verdict.exit_code() as u8)
        }
        Command::Bohr { family: Family::Mobius, a_list, radius, tol, truncation, csv } => {
            let mut out = String::from("a,r_star,closed_form,error\n");
            for a in a_list {
                let s = extremal_mobius_series(a, radius, truncation)?;
                let r_star = bohr_radius_estimate(&[s], radius, tol)?.radius;
                let closed = radius / (1.0 + 2.0 * a);
                out.push_str(&format!("{a},{r_star:.12},{closed:.12},{:e}\n", (r_star - closed).abs()));
            }
            emit(&out, csv.as_deref())?;
            Ok(0)
        }
        Command::Dilation { op, lambda, r, hilbert_dim, inner, blocks, samples, seed, no_refine, json } => {
            let (t, name) = match op {
                OpName::TLambda => (make_t_lambda(lambda)?, format!("T_lambda(lambda={lambda})")),
                OpName::TR => (make_t_r_block(r, hilbert_dim)?, format!("T_r(r={r}, hilbert_dim={hilbert_dim})")),
                OpName::SLambda => {
                    (make_s_lambda(&inner, blocks, lambda)?, format!("S_lambda(lambda={lambda}, inner={inner}, blocks={blocks})"))
                }
            };
            let guard = match StrictContraction::certify(&t) {
                Ok(g) => g,
                Err(Error::DimensionTooLarge { .. }) => StrictContraction::assume(&t),
                Err(e) => return Err(e),
            };
            let report = norm_defect(&guard, &DefectConfig { samples, seed, refine: !no_refine })?;
            emit(&to_json(&DilationOutput { operator: name, report })?, json.as_deref())?;
            Ok(0)
        }
        Command::Hilbertness { space, probe, samples, seed, lambda, blocks, json } => {
            let want = |p: Probe| probe == Probe::All || probe == p;
            let mut out = HilbertnessOutput {
                space: space.clone(),
                parallelogram_defect: None,
                rotation: None,
                symmetry_violation: None,
                mobius: None,
            };
            if want(Probe::Parallelogram) {
                out.parallelogram_defect = Some(parallelogram_defect(&space, samples, seed));
            }
            if want(Probe::Rotation) {
                out.rotation = Some(rotation_test(&space)?);
            }
            if want(Probe::Symmetry) {
                out.symmetry_violation = Some(symmetry_test(&space, samples, seed));
            }
            if want(Probe::Mobius) {
                let t = backward_shift(&space, blocks, lambda, 2.0)?;
                let probe = mobius_sweep(&t, &AscentConfig { seed, ..Default::default() })?;
                out.mobius = Some(MobiusOutput { lambda, blocks, probe });
            }
            emit(&to_json(&out)?, json.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
