//! Run configurations, result records, and flat-file output.
//!
//! Everything the `nvortex` binary does funnels through here so the same
//! runners are callable as a library. Records serialize to JSON with a
//! versioned `schema` field; profile and sweep tables are plain CSV with
//! full double precision (17 significant digits). Identical configuration
//! and seed produce bit-identical records modulo the timestamp fields.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisKind, BasisSet, Mesh, RadialField};
use crate::bounds::{self, Violation};
use crate::model::{self, Params};
use crate::optimizer::{self, SolveError, SolveResult, SolverSettings};
use crate::oracle;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Basis(#[from] crate::basis::BasisError),
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

/// Discretization and solver choices for one run.
#[derive(Debug, Clone)]
pub struct SolveSpec {
    pub alpha: f64,
    pub winding: i32,
    pub radius: f64,
    pub basis: BasisKind,
    pub n_funcs: usize,
    pub cells: usize,
    pub settings: SolverSettings,
}

impl SolveSpec {
    pub fn params(&self) -> Result<Params, CliError> {
        Ok(Params::new(self.alpha, self.winding, self.radius)?)
    }

    pub fn build_basis(&self) -> Result<Arc<BasisSet>, CliError> {
        let mesh = Mesh::uniform(self.radius, self.cells)?;
        Ok(BasisSet::build(self.basis, self.n_funcs, mesh)?)
    }
}

/// Either prescribe the flux (sphere solve, κ recovered) or the
/// propagation constant (Nehari solve, flux recovered).
#[derive(Debug, Clone, Copy)]
pub enum Target {
    Flux(f64),
    Kappa(f64),
}

/// Bounds verdict attached to every emitted record; no record omits the
/// necessary-condition check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsVerdict {
    pub kappa_lower: f64,
    pub kappa_upper: f64,
    pub sigma: f64,
    pub winding_negative: bool,
    pub violations: Vec<Violation>,
}

impl BoundsVerdict {
    pub fn hard_violations(&self) -> usize {
        self.violations.iter().filter(|v| !v.advisory).count()
    }
}

/// Full input echo plus solver output for one solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema: u32,
    pub command: String,
    pub alpha: f64,
    pub winding: i32,
    pub radius: f64,
    pub basis: String,
    pub n_funcs: usize,
    pub cells: usize,
    pub q0: Option<f64>,
    pub kappa_target: Option<f64>,
    pub seed: u64,
    pub kappa: f64,
    pub flux: f64,
    pub action: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: u32,
    pub bounds: BoundsVerdict,
    pub version: String,
    pub wall_time_ms: f64,
    pub timestamp_ms: u64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn make_record(
    spec: &SolveSpec,
    target: Target,
    res: &SolveResult,
    wall: f64,
) -> Result<ResultRecord, CliError> {
    let p = spec.params()?;
    let q0_for_bounds = match target {
        Target::Flux(q0) => q0,
        Target::Kappa(_) => res.flux,
    };
    let rep = bounds::bounds_report(&p, q0_for_bounds, Some(res.kappa))?;
    let violations = bounds::check_solution_against_bounds(res, &rep);
    Ok(ResultRecord {
        schema: SCHEMA_VERSION,
        command: match target {
            Target::Flux(_) => "solve".into(),
            Target::Kappa(_) => "solve-kappa".into(),
        },
        alpha: spec.alpha,
        winding: spec.winding,
        radius: spec.radius,
        basis: spec.basis.label().into(),
        n_funcs: spec.n_funcs,
        cells: spec.cells,
        q0: match target {
            Target::Flux(q0) => Some(q0),
            Target::Kappa(_) => None,
        },
        kappa_target: match target {
            Target::Kappa(k) => Some(k),
            Target::Flux(_) => None,
        },
        seed: spec.settings.seed,
        kappa: res.kappa,
        flux: res.flux,
        action: res.action,
        residual: res.residual,
        iterations: res.iterations,
        converged: res.converged,
        restart_index: res.restart_index,
        bounds: BoundsVerdict {
            kappa_lower: rep.kappa_lower,
            kappa_upper: rep.kappa_upper,
            sigma: rep.kappa_upper - res.kappa,
            winding_negative: rep.winding_negative,
            violations,
        },
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_ms: wall,
        timestamp_ms: now_ms(),
    })
}

/// Run one solve and return both the record and the solution itself.
pub fn run_solve(
    spec: &SolveSpec,
    target: Target,
) -> Result<(ResultRecord, SolveResult), CliError> {
    let p = spec.params()?;
    let basis = spec.build_basis()?;
    let started = Instant::now();
    let res = match target {
        Target::Flux(q0) => {
            if q0.is_nan() || q0 <= 0.0 {
                return Err(CliError::Config(format!(
                    "prescribed flux must be positive, got {q0}"
                )));
            }
            optimizer::minimize_sphere(q0, &p, &basis, &spec.settings)?
        }
        Target::Kappa(k) => optimizer::minimize_nehari(k, &p, &basis, &spec.settings)?,
    };
    let wall = started.elapsed().as_secs_f64() * 1e3;
    let record = make_record(spec, target, &res, wall)?;
    Ok((record, res))
}

/// One row of a sweep table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub kappa: f64,
    pub flux: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Sweep axis: vary the prescribed flux, the winding number (at fixed
/// flux), or — through the shooting oracle — the propagation constant.
#[derive(Debug, Clone)]
pub enum SweepAxis {
    Flux(Vec<f64>),
    Winding { values: Vec<i32>, q0: f64 },
    Kappa(Vec<f64>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Flux(v) => v.len(),
            SweepAxis::Winding { values, .. } => values.len(),
            SweepAxis::Kappa(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn sweep_point(spec: &SolveSpec, axis: &SweepAxis, idx: usize) -> SweepRow {
    let failed = |param: f64| SweepRow {
        param,
        kappa: f64::NAN,
        flux: f64::NAN,
        residual: f64::NAN,
        converged: false,
    };
    match axis {
        SweepAxis::Flux(q0s) => {
            let q0 = q0s[idx];
            match run_solve(spec, Target::Flux(q0)) {
                Ok((rec, _)) => SweepRow {
                    param: q0,
                    kappa: rec.kappa,
                    flux: rec.flux,
                    residual: rec.residual,
                    converged: rec.converged,
                },
                Err(_) => failed(q0),
            }
        }
        SweepAxis::Winding { values, q0 } => {
            let mut s = spec.clone();
            s.winding = values[idx];
            match run_solve(&s, Target::Flux(*q0)) {
                Ok((rec, _)) => SweepRow {
                    param: values[idx] as f64,
                    kappa: rec.kappa,
                    flux: rec.flux,
                    residual: rec.residual,
                    converged: rec.converged,
                },
                Err(_) => failed(values[idx] as f64),
            }
        }
        SweepAxis::Kappa(kappas) => {
            let kappa = kappas[idx];
            match spec
                .params()
                .map_err(|e| e.to_string())
                .and_then(|p| oracle::profile_for_kappa(kappa, &p).map_err(|e| e.to_string()))
            {
                Ok(profile) => SweepRow {
                    param: kappa,
                    kappa,
                    flux: profile.flux(),
                    residual: f64::NAN, // not computed on the oracle path
                    converged: true,
                },
                Err(_) => failed(kappa),
            }
        }
    }
}

/// Run a sweep with a worker pool of `jobs` threads; rows keep the grid
/// order regardless of completion order, and per-point failures are
/// recorded as NaN rows with `converged = false`.
pub fn run_sweep(
    spec: &SolveSpec,
    axis: &SweepAxis,
    jobs: usize,
) -> Result<Vec<SweepRow>, CliError> {
    if axis.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let jobs = jobs.max(1).min(axis.len());
    let n = axis.len();
    let slots: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; n]);
    let next: Mutex<usize> = Mutex::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    if *guard >= n {
                        break;
                    }
                    let i = *guard;
                    *guard += 1;
                    i
                };
                let row = sweep_point(spec, axis, idx);
                slots.lock().unwrap()[idx] = Some(row);
            });
        }
    });
    Ok(slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("all sweep points computed"))
        .collect())
}

/// Cross-validation of a variational solve against the shooting oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrosscheckRecord {
    pub schema: u32,
    pub solve: ResultRecord,
    pub oracle_flux: f64,
    pub oracle_max_amplitude: f64,
    pub variational_max_amplitude: f64,
    pub flux_rel_diff: f64,
    pub max_amplitude_rel_diff: f64,
    /// Strong residual of the oracle profile projected into the basis.
    pub projected_oracle_residual: f64,
}

/// Solve at prescribed flux, then shoot at the recovered κ and compare.
pub fn run_crosscheck(
    spec: &SolveSpec,
    q0: f64,
) -> Result<(CrosscheckRecord, SolveResult), CliError> {
    let (record, res) = run_solve(spec, Target::Flux(q0))?;
    let p = spec.params()?;
    let profile = oracle::profile_for_kappa(res.kappa, &p)?;
    let basis = spec.build_basis()?;
    let projected = basis.project_fn(|r| profile.eval(r, &p))?;
    let projected_residual = model::strong_residual(&projected, &p, res.kappa)?;
    let oracle_flux = profile.flux();
    let oracle_max = profile.max_value();
    let varia_max = res.field().max_value();
    let rec = CrosscheckRecord {
        schema: SCHEMA_VERSION,
        solve: record,
        oracle_flux,
        oracle_max_amplitude: oracle_max,
        variational_max_amplitude: varia_max,
        flux_rel_diff: (oracle_flux - q0).abs() / q0,
        max_amplitude_rel_diff: (oracle_max - varia_max).abs() / varia_max.max(1e-300),
        projected_oracle_residual: projected_residual,
    };
    Ok((rec, res))
}

// ──────────────────────── file output ────────────────────────

/// 17 significant digits: round-trips f64 exactly.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Profile CSV with header `r,u,du_dr` on a uniform 801-point grid.
pub fn write_profile_csv(path: &Path, field: &RadialField) -> Result<(), CliError> {
    let radius = field.mesh().radius();
    let mut out = String::from("r,u,du_dr\n");
    let m = 800;
    for i in 0..=m {
        let r = radius * i as f64 / m as f64;
        out.push_str(&format!(
            "{},{},{}\n",
            full(r),
            full(field.eval(r)),
            full(field.eval_deriv(r))
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Sweep CSV with header `param,kappa,flux,residual,converged`.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut out = String::from("param,kappa,flux,residual,converged\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            full(row.param),
            full(row.kappa),
            full(row.flux),
            full(row.residual),
            row.converged
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Plot-ready two-column file (x, y), no header.
pub fn write_xy(path: &Path, points: &[(f64, f64)]) -> Result<(), CliError> {
    let mut out = String::new();
    for (x, y) in points {
        out.push_str(&format!("{},{}\n", full(*x), full(*y)));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

// ──────────────────────── config files ────────────────────────

/// Flat `key = value` configuration file; `#` starts a comment. Keys match
/// the long CLI flags (`alpha`, `n`, `R`, `Q0`, `kappa`, `N`, `basis`,
/// `cells`, `seed`, `jobs`, `out`, `format`, `max-iters`, `grad-tol`,
/// `restarts`). Precedence is flags > file > defaults.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "config line {} is not `key = value`: {raw:?}",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Write solver outputs for one record: JSON record, profile CSV, bounds
/// JSON. Returns the JSON path.
pub fn write_solve_outputs(
    dir: &Path,
    stem: &str,
    record: &ResultRecord,
    res: &SolveResult,
    formats: &[OutputFormat],
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    if formats.contains(&OutputFormat::Json) {
        write_json(&dir.join(format!("{stem}.json")), record)?;
    }
    if formats.contains(&OutputFormat::Csv) {
        write_profile_csv(&dir.join(format!("{stem}_profile.csv")), res.field())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SolveSpec {
        SolveSpec {
            alpha: 0.1,
            winding: 1,
            radius: 8.0,
            basis: BasisKind::SpectralSine,
            n_funcs: 16,
            cells: 256,
            settings: SolverSettings {
                restarts: 1,
                ..SolverSettings::default()
            },
        }
    }

    #[test]
    fn config_file_parses_and_rejects() {
        let map = parse_config_file("alpha = 0.1\n# comment\nn=2\nQ0 = 40 # inline\n").unwrap();
        assert_eq!(map["alpha"], "0.1");
        assert_eq!(map["n"], "2");
        assert_eq!(map["Q0"], "40");
        assert!(parse_config_file("this is not an assignment").is_err());
    }

    #[test]
    fn record_roundtrips_through_json() {
        let (rec, _) = run_solve(&spec(), Target::Flux(10.0)).unwrap();
        let text = serde_json::to_string(&rec).unwrap();
        let back: ResultRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.schema, SCHEMA_VERSION);
        assert_eq!(back.kappa.to_bits(), rec.kappa.to_bits());
        assert_eq!(back.bounds.violations.len(), rec.bounds.violations.len());
    }

    #[test]
    fn solve_record_carries_bounds_verdict() {
        let (rec, _) = run_solve(&spec(), Target::Flux(10.0)).unwrap();
        // κ(10) ≈ -0.033: inside the window but not exponentially confined
        assert!(
            rec.bounds.hard_violations() == 0,
            "{:?}",
            rec.bounds.violations
        );
        assert!(
            rec.bounds.violations.iter().any(|v| v.advisory),
            "expected the decay advisory"
        );
        assert!(rec.bounds.sigma > 0.0);
    }

    #[test]
    fn sweep_rows_keep_grid_order() {
        let axis = SweepAxis::Flux(vec![10.0, 20.0]);
        let rows = run_sweep(&spec(), &axis, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].param, 10.0);
        assert_eq!(rows[1].param, 20.0);
        assert!(rows[0].kappa < rows[1].kappa, "κ should grow with Q0");
        assert!(rows.iter().all(|r| r.converged));
    }

    #[test]
    fn empty_sweep_is_config_error() {
        let axis = SweepAxis::Flux(vec![]);
        assert!(matches!(
            run_sweep(&spec(), &axis, 1),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn csv_writers_emit_headers() {
        let dir = std::env::temp_dir().join("nvortex-cli-test");
        fs::create_dir_all(&dir).unwrap();
        let basis = spec().build_basis().unwrap();
        let field = basis.synthesize(&[0.5; 16]).unwrap();
        let ppath = dir.join("profile.csv");
        write_profile_csv(&ppath, &field).unwrap();
        let text = fs::read_to_string(&ppath).unwrap();
        assert!(text.starts_with("r,u,du_dr\n"));
        assert_eq!(text.lines().count(), 802);

        let spath = dir.join("sweep.csv");
        write_sweep_csv(
            &spath,
            &[SweepRow {
                param: 40.0,
                kappa: 1.5,
                flux: 40.0,
                residual: 1e-8,
                converged: true,
            }],
        )
        .unwrap();
        let text = fs::read_to_string(&spath).unwrap();
        assert!(text.starts_with("param,kappa,flux,residual,converged\n"));
        assert!(text.contains("true"));
    }
}
