//! `nvortex` — vortex soliton solves, sweeps, bounds reports, and
//! oracle cross-checks from the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver did not
//! converge, 4 bounds violation (with `--strict`).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nvortex::basis::BasisKind;
use nvortex::bounds;
use nvortex::cli::{self, CliError, OutputFormat, ResultRecord, SolveSpec, SweepAxis, Target};
use nvortex::optimizer::{SolveError, SolverSettings};

const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_BOUNDS: u8 = 4;

#[derive(Parser)]
#[command(
    name = "nvortex",
    version,
    about = "Ring-profile vortex soliton solver for saturable media"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at prescribed flux (--Q0) or fixed propagation constant (--kappa).
    Solve(SolveArgs),
    /// Sweep over a grid of Q0, n, or kappa values.
    Sweep(SweepArgs),
    /// Evaluate the closed-form bounds for one parameter set.
    Bounds(BoundsArgs),
    /// Solve, then cross-validate against the shooting oracle.
    Crosscheck(CrosscheckArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Saturation constant (> 0)
    #[arg(long)]
    alpha: Option<f64>,
    /// Distance from the vortex core (> 0)
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Basis size
    #[arg(long = "N")]
    n_funcs: Option<usize>,
    /// Basis family
    #[arg(long, value_parser = parse_basis)]
    basis: Option<BasisKind>,
    /// Mesh cells
    #[arg(long)]
    cells: Option<usize>,
    /// RNG seed for solver restarts
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats (comma-separated: csv,json)
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
    /// Flat key=value config file (flags take precedence)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Treat hard bounds violations as a failure (exit 4)
    #[arg(long)]
    strict: bool,
    /// Maximum solver iterations
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Projected-gradient tolerance
    #[arg(long = "grad-tol")]
    grad_tol: Option<f64>,
    /// Solve attempts (restarts)
    #[arg(long)]
    restarts: Option<u32>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Vortex winding number (|n| >= 1)
    #[arg(long)]
    n: Option<i32>,
    /// Prescribed energy flux
    #[arg(long = "Q0")]
    q0: Option<f64>,
    /// Fixed propagation constant (Nehari solve)
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Flux grid (comma-separated); a single value fixes Q0 for an n sweep
    #[arg(long = "Q0", value_delimiter = ',')]
    q0: Option<Vec<f64>>,
    /// Winding grid (comma-separated); a single value fixes n for a Q0 sweep
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<i32>>,
    /// Propagation-constant grid (oracle mode)
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    /// Worker threads
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Vortex winding number (|n| >= 1)
    #[arg(long)]
    n: Option<i32>,
    /// Prescribed energy flux
    #[arg(long = "Q0")]
    q0: Option<f64>,
    /// Propagation constant for the kappa-dependent entries
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args)]
struct CrosscheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Vortex winding number (|n| >= 1)
    #[arg(long)]
    n: Option<i32>,
    /// Prescribed energy flux
    #[arg(long = "Q0")]
    q0: Option<f64>,
}

fn parse_basis(s: &str) -> Result<BasisKind, String> {
    match s {
        "sine" => Ok(BasisKind::SpectralSine),
        "hat" => Ok(BasisKind::HatP1),
        other => Err(format!("unknown basis {other:?} (expected sine or hat)")),
    }
}

/// Resolved configuration after merging flags > config file > defaults.
struct Resolved {
    spec: SolveSpec,
    out: PathBuf,
    formats: Vec<OutputFormat>,
    strict: bool,
    file: BTreeMap<String, String>,
}

fn file_get<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            CliError::Config(format!("config key {key} has unparseable value {raw:?}"))
        }),
    }
}

fn resolve(common: &CommonArgs, n_flag: Option<i32>) -> Result<Resolved, CliError> {
    let file = match &common.config {
        Some(path) => cli::parse_config_file(&std::fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    let alpha = common.alpha.or(file_get(&file, "alpha")?).unwrap_or(0.1);
    let winding = n_flag.or(file_get(&file, "n")?).unwrap_or(1);
    let radius = common.radius.or(file_get(&file, "R")?).unwrap_or(8.0);
    let n_funcs = common.n_funcs.or(file_get(&file, "N")?).unwrap_or(40);
    let basis = match &common.basis {
        Some(b) => *b,
        None => match file.get("basis").map(String::as_str) {
            Some(s) => parse_basis(s).map_err(CliError::Config)?,
            None => BasisKind::SpectralSine,
        },
    };
    let cells = common
        .cells
        .or(file_get(&file, "cells")?)
        .unwrap_or_else(|| {
            if basis == BasisKind::HatP1 {
                n_funcs + 1
            } else {
                nvortex::basis::DEFAULT_CELLS
            }
        });
    let mut settings = SolverSettings {
        seed: common.seed.or(file_get(&file, "seed")?).unwrap_or(0),
        ..SolverSettings::default()
    };
    if let Some(v) = common.max_iters.or(file_get(&file, "max-iters")?) {
        settings.max_iters = v;
    }
    if let Some(v) = common.grad_tol.or(file_get(&file, "grad-tol")?) {
        settings.grad_tol = v;
    }
    if let Some(v) = common.restarts.or(file_get(&file, "restarts")?) {
        settings.restarts = v;
    }
    let out = common
        .out
        .clone()
        .or(file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let format_names: Vec<String> = match &common.format {
        Some(v) => v.clone(),
        None => match file.get("format") {
            Some(s) => s.split(',').map(|t| t.trim().to_string()).collect(),
            None => vec!["csv".into(), "json".into()],
        },
    };
    let mut formats = Vec::new();
    for name in &format_names {
        match name.as_str() {
            "csv" => formats.push(OutputFormat::Csv),
            "json" => formats.push(OutputFormat::Json),
            other => {
                return Err(CliError::Config(format!(
                    "unknown format {other:?} (expected csv or json)"
                )))
            }
        }
    }
    Ok(Resolved {
        spec: SolveSpec {
            alpha,
            winding,
            radius,
            basis,
            n_funcs,
            cells,
            settings,
        },
        out,
        formats,
        strict: common.strict,
        file,
    })
}

fn exit_for(err: &CliError) -> u8 {
    match err {
        CliError::Solve(SolveError::NotConverged { .. }) => EXIT_NOT_CONVERGED,
        _ => EXIT_CONFIG,
    }
}

fn finish_record(record: &ResultRecord, strict: bool) -> u8 {
    println!(
        "kappa = {:.6}  flux = {:.6}  action = {:.6}  residual = {:.3e}  ({} iterations, {})",
        record.kappa,
        record.flux,
        record.action,
        record.residual,
        record.iterations,
        if record.converged {
            "converged"
        } else {
            "NOT CONVERGED"
        },
    );
    for v in &record.bounds.violations {
        let tag = if v.advisory { "advisory" } else { "VIOLATION" };
        println!("  [{tag}] {}", v.message);
    }
    if strict && record.bounds.hard_violations() > 0 {
        return EXIT_BOUNDS;
    }
    if record.converged {
        0
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<u8, CliError> {
    let r = resolve(&args.common, args.n)?;
    let q0 = args.q0.or(file_get(&r.file, "Q0")?);
    let kappa = args.kappa.or(file_get(&r.file, "kappa")?);
    let target = match (q0, kappa) {
        (Some(q), None) => Target::Flux(q),
        (None, Some(k)) => Target::Kappa(k),
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "supply exactly one of --Q0 and --kappa, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Config(
                "supply exactly one of --Q0 and --kappa".into(),
            ))
        }
    };
    let (record, res) = cli::run_solve(&r.spec, target)?;
    cli::write_solve_outputs(&r.out, "solve", &record, &res, &r.formats)?;
    Ok(finish_record(&record, r.strict))
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8, CliError> {
    let first_n = args.n.as_ref().and_then(|v| v.first().copied());
    let r = resolve(&args.common, first_n)?;
    let jobs = args.jobs.or(file_get(&r.file, "jobs")?).unwrap_or(1);
    let q0s = args.q0.clone().unwrap_or_default();
    let ns = args.n.clone().unwrap_or_default();
    let kappas = args.kappa.clone().unwrap_or_default();
    let axis = match (q0s.len(), ns.len(), kappas.len()) {
        (0, 0, 0) => return Err(CliError::Config("sweep grid is empty".into())),
        // κ grid drives the shooting oracle
        (0, 0 | 1, k) if k >= 1 => SweepAxis::Kappa(kappas),
        // n grid at one fixed flux
        (1, n, 0) if n > 1 => SweepAxis::Winding {
            values: ns,
            q0: q0s[0],
        },
        (0, n, 0) if n > 1 => {
            return Err(CliError::Config(
                "an --n sweep needs a fixed --Q0 value".into(),
            ))
        }
        // flux grid (winding fixed by --n or the default)
        (q, 0 | 1, 0) if q >= 1 => SweepAxis::Flux(q0s),
        _ => {
            return Err(CliError::Config(
                "sweep over exactly one axis: a --Q0 list, an --n list (with fixed --Q0), or a --kappa list"
                    .into(),
            ))
        }
    };
    let rows = cli::run_sweep(&r.spec, &axis, jobs)?;
    std::fs::create_dir_all(&r.out)?;
    if r.formats.contains(&OutputFormat::Csv) {
        cli::write_sweep_csv(&r.out.join("sweep.csv"), &rows)?;
        let curve: Vec<(f64, f64)> = rows.iter().map(|row| (row.param, row.kappa)).collect();
        cli::write_xy(&r.out.join("sweep_kappa.xy"), &curve)?;
    }
    if r.formats.contains(&OutputFormat::Json) {
        cli::write_json(&r.out.join("sweep.json"), &rows)?;
    }
    let mut failures = 0;
    for row in &rows {
        println!(
            "param = {:>10.4}  kappa = {:>10.6}  flux = {:>10.4}  {}",
            row.param,
            row.kappa,
            row.flux,
            if row.converged { "ok" } else { "FAILED" }
        );
        if !row.converged {
            failures += 1;
        }
    }
    Ok(if failures > 0 { EXIT_NOT_CONVERGED } else { 0 })
}

fn cmd_bounds(args: &BoundsArgs) -> Result<u8, CliError> {
    let r = resolve(&args.common, args.n)?;
    let q0 = args
        .q0
        .or(file_get(&r.file, "Q0")?)
        .ok_or_else(|| CliError::Config("bounds needs --Q0".into()))?;
    let kappa = args.kappa.or(file_get(&r.file, "kappa")?);
    let p = r.spec.params()?;
    let report = bounds::bounds_report(&p, q0, kappa)?;
    std::fs::create_dir_all(&r.out)?;
    cli::write_json(&r.out.join("bounds.json"), &report)?;
    println!(
        "kappa window: ({:.6}, {:.6})   r0 = {:.9}",
        report.kappa_lower, report.kappa_upper, report.r0
    );
    println!(
        "winding forces kappa < 0: {}   small-flux excluded: {}",
        report.winding_negative, report.small_flux_excluded
    );
    println!(
        "R thresholds: indefinite {:.4}, Nehari {:.4} (kappa {} = {:.6})",
        report.r_indefinite,
        report.r_nehari,
        if report.kappa_supplied {
            "supplied"
        } else {
            "midpoint"
        },
        report.kappa_used
    );
    Ok(0)
}

fn cmd_crosscheck(args: &CrosscheckArgs) -> Result<u8, CliError> {
    let r = resolve(&args.common, args.n)?;
    let q0 = args
        .q0
        .or(file_get(&r.file, "Q0")?)
        .ok_or_else(|| CliError::Config("crosscheck needs --Q0".into()))?;
    let (record, res) = cli::run_crosscheck(&r.spec, q0)?;
    std::fs::create_dir_all(&r.out)?;
    cli::write_json(&r.out.join("crosscheck.json"), &record)?;
    if r.formats.contains(&OutputFormat::Csv) {
        cli::write_profile_csv(&r.out.join("crosscheck_profile.csv"), res.field())?;
    }
    println!(
        "variational kappa = {:.6}; oracle flux = {:.4} (target {:.4}, rel diff {:.3e})",
        record.solve.kappa, record.oracle_flux, q0, record.flux_rel_diff
    );
    println!(
        "amplitude max: variational {:.6} vs oracle {:.6} (rel diff {:.3e}); projected residual {:.3e}",
        record.variational_max_amplitude,
        record.oracle_max_amplitude,
        record.max_amplitude_rel_diff,
        record.projected_oracle_residual
    );
    let code = finish_record(&record.solve, r.strict);
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Crosscheck(args) => cmd_crosscheck(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}
