//! Command-line experiment runner.
//!
//! `run` executes one JSON spec, `suite` executes built-in specs and
//! `describe` prints the spec schema. Each run writes `<name>.json`,
//! `<name>.csv` and a `<name>.timings.json` sidecar. Exit codes: 0 when
//! every case passes, 1 when some case fails, 2 on parse, validation or
//! I/O errors.

pub mod report;
pub mod run;
pub mod spec;
pub mod suite;

pub use report::{emit_report, CaseResult, Format, Metrics, Report, Summary, Timings};
pub use run::run_experiment;
pub use spec::{EnsembleSpec, ExperimentKind, ExperimentSpec, Parameters, WeightSpec};
pub use suite::builtin_specs;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Environment variable holding the default output directory.
pub const OUT_ENV: &str = "FINRANK_OUT";

#[derive(Parser, Debug)]
#[command(name = "finrank", version, about = "Moment-matrix rank, support recovery and atom-mass experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = "finrank-out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a JSON spec file.
    Run {
        spec: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run built-in specs.
    Suite {
        /// Run every built-in spec.
        #[arg(long, conflicts_with = "names")]
        all: bool,
        /// List built-in spec names and exit.
        #[arg(long)]
        list: bool,
        names: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the spec schema, or the built-in specs of one kind.
    Describe { kind: Option<String> },
}

/// Parses `std::env::args` and runs.
pub fn main() -> ExitCode {
    main_with_args(std::env::args_os())
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { spec, seed, output } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let mut parsed = match ExperimentSpec::parse(&text) {
                Ok(s) => s,
                Err(e) => bail!("{}: {e}", spec.display()),
            };
            if let Some(seed) = seed {
                parsed.seed = seed;
            }
            execute(&parsed, &output)
        }
        Command::Suite {
            all,
            list,
            names,
            output,
        } => {
            let specs = builtin_specs();
            if list {
                for s in &specs {
                    println!("{}\t{:?}", s.name, s.kind);
                }
                return Ok(true);
            }
            if !all && names.is_empty() {
                bail!("pass --all or the names of built-in specs (see --list)");
            }
            let chosen: Vec<ExperimentSpec> = if all {
                specs
            } else {
                names
                    .iter()
                    .map(|n| {
                        specs
                            .iter()
                            .find(|s| &s.name == n)
                            .cloned()
                            .with_context(|| format!("no built-in spec named {n:?}"))
                    })
                    .collect::<anyhow::Result<_>>()?
            };
            let mut ok = true;
            for s in &chosen {
                ok &= execute(s, &output)?;
            }
            Ok(ok)
        }
        Command::Describe { kind } => {
            match kind {
                None => println!("{}", serde_json::to_string_pretty(&schema()).expect("schema serializes")),
                Some(k) => {
                    let kind: ExperimentKind = serde_json::from_value(serde_json::Value::String(k.clone()))
                        .map_err(|_| anyhow::anyhow!("unknown kind {k:?}"))?;
                    for s in builtin_specs().into_iter().filter(|s| s.kind == kind) {
                        println!("{}", s.to_json());
                    }
                }
            }
            Ok(true)
        }
    }
}

fn write(dir: &Path, file: String, bytes: &[u8]) -> anyhow::Result<()> {
    let path = dir.join(file);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Runs one spec, writes its artifacts and prints a one-line summary.
fn execute(spec: &ExperimentSpec, output: &OutputArgs) -> anyhow::Result<bool> {
    let (report, timings) = run_experiment(spec);
    std::fs::create_dir_all(&output.out).with_context(|| format!("creating {}", output.out.display()))?;
    if matches!(output.format, Format::Json | Format::Both) {
        write(&output.out, format!("{}.json", spec.name), &emit_report(&report, false))?;
    }
    if matches!(output.format, Format::Csv | Format::Both) {
        write(&output.out, format!("{}.csv", spec.name), &emit_report(&report, true))?;
    }
    let mut t = serde_json::to_vec_pretty(&timings).expect("timings serialize");
    t.push(b'\n');
    write(&output.out, format!("{}.timings.json", spec.name), &t)?;
    let s = &report.summary;
    println!(
        "{} {}: {}/{} cases passed ({:.2} s)",
        if s.pass { "PASS" } else { "FAIL" },
        spec.name,
        s.passed,
        s.cases,
        timings.total_seconds
    );
    for case in report.cases.iter().filter(|c| !c.pass) {
        eprintln!("  {} failed{}", case.label, case.error.as_deref().map(|e| format!(": {e}")).unwrap_or_default());
    }
    Ok(s.pass)
}

/// Machine-readable description of the spec format.
pub fn schema() -> serde_json::Value {
    use serde_json::json;
    let kinds: serde_json::Map<String, serde_json::Value> = ExperimentKind::ALL
        .iter()
        .map(|k| {
            let name = serde_json::to_value(k).expect("kinds serialize");
            (name.as_str().expect("string").to_string(), json!({ "metrics": k.metrics() }))
        })
        .collect();
    json!({
        "spec": {
            "name": "string of [A-Za-z0-9._-]; names the output files",
            "kind": kinds.keys().collect::<Vec<_>>(),
            "seed": "u64, default 0",
            "ensemble": "optional EnsembleSpec",
            "weights": "optional list of WeightSpec; explicit weights run before ensemble cases",
            "parameters": "Parameters (all optional)"
        },
        "ensemble": {
            "family": ["complex_atoms", "real_atoms", "point_distribution"],
            "dim": "ambient dimension (complex dimension for complex families)",
            "cases": "number of draws",
            "atoms": "[min, max] points per draw",
            "max_order": "operator order bound for point_distribution",
            "bounds": { "separation": 0.1, "radius": 1.0, "mass_min": 0.1, "mass_max": 1.0 }
        },
        "weight": {
            "ambient": { "kind": ["complex", "real"], "dim": "usize" },
            "complex numbers": "[re, im]",
            "points": "real: [x, ...]; complex: [[re, im], ...]",
            "types": {
                "atomic": ["ambient", "points", "masses"],
                "point_distribution": ["ambient", "points", "operators: per point a list of [gamma, [re, im]] in real coordinates"],
                "density": ["ambient", "bounds: [[lo, hi], ...] per real coordinate", "density: {name: uniform_box, value} | {name: gaussian, center, width, amplitude}", "quadrature_order (optional)"],
                "fourier_radial": ["ambient (real)", "series + validity_radius | preset: cos + truncation"],
                "circle_minus_delta": ["center", "radius", "nodes"]
            }
        },
        "parameters": {
            "n": "moment truncation (RankTable, TwistMonotonicity)",
            "eps_rel": "relative rank threshold, default 1e-8",
            "expected_rank": "RankTable/HarmonicGrowth expected rank; defaults to the point count",
            "m_bound": "Recovery annihilator degree bound; default points * (order_bound + 1)",
            "order_bound": "Recovery order bound; default ensemble max_order or 0",
            "support_tol": "default 1e-6",
            "mass_tol": "default 1e-6",
            "residual_tol": "default 1e-8",
            "expect_failure": "Recovery passes only on reported failure",
            "r_schedule": "Wiener radii",
            "expected": "Wiener expected limit",
            "tolerance": "Wiener (1e-6 on expected, 1e-12 on projections), SphereAverage (0.01 relative), VandermondeCheck (1e-10 * scale), CauchyDecay (1e-10)",
            "upper_bound": "Wiener limit bound",
            "projection_samples": "Wiener projection-Fourier samples",
            "n_directions": "Wiener discreteness classification directions",
            "expected_verdict": ["discrete", "continuous", "mixed", "inconclusive"],
            "sphere_nodes": "SphereAverage nodes, default 500",
            "k_values": "HarmonicGrowth degrees, default [6]",
            "check": ["equals_atoms", "at_least_analytic", "strictly_increasing"],
            "n_vars": "VandermondeCheck variables, 2..=4",
            "degree": "VandermondeCheck sample degree, default 3",
            "cases": "VandermondeCheck pairs, default 50",
            "radii": "CauchyDecay radii, default [1.5, 2, 3]",
            "angles": "CauchyDecay angles per radius, default 8",
            "max_g_degree": "TwistMonotonicity degree bound of g, default 3"
        },
        "kinds": kinds,
        "exit_codes": { "0": "all cases pass", "1": "some case failed", "2": "parse, validation or I/O error" },
        "environment": { OUT_ENV: "default output directory" }
    })
}
