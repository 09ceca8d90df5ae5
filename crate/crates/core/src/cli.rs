//! Batch front end: run configurations, orchestration and report emission.
//!
//! Reports are canonical JSON (sorted keys, floats with 17 significant
//! digits) or CSV with `#` comment headers. Every report carries the crate
//! version and the tolerances in force.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::angles::{
    coaxial_check, conic_euler_char, mp_distance, subcritical_check, troyanov_check, AngleVector,
};
use crate::error::{Error, Result};
use crate::factorization::{expansion_coeffs, inverse_map, WeightVector};
use crate::liouville::eigen::{spectrum_near_two, DEFAULT_WINDOW};
use crate::liouville::{solve_liouville, ConicProblem, MeshParams, NEWTON_TOL};
use crate::pairing::{
    classify_case, direction_coeffs, extract_all, pairing_b, pairing_matrix, solution_space,
    total_k, total_k0, DirectionCoeffs, EigenCoeffs, FIT_TOL, RANK_TOL,
};
use crate::spectrum::{football_eigenvalues, SPECTRAL_TOL};
use crate::verify::{run_criterion, CriterionResult, CRITERIA, DEFAULT_SEED};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "CONEMETRIC_THREADS";

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID_INPUT: i32 = 2;
    pub const SOLVER_FAILURE: i32 = 3;
    pub const VERIFY_MISMATCH: i32 = 4;
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_solver_failure() {
        exit::SOLVER_FAILURE
    } else {
        exit::INVALID_INPUT
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Tolerance overrides; all must be positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Half-width of the eigenvalue window around 2.
    pub window: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { window: DEFAULT_WINDOW }
    }
}

/// A problem for the `solve` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemInput {
    Football {
        beta: f64,
    },
    Sphere {
        points: Vec<[f64; 3]>,
        beta: Vec<f64>,
        #[serde(default = "one")]
        curvature: i32,
    },
    Disk {
        points: Vec<[f64; 2]>,
        beta: Vec<f64>,
        #[serde(default = "one")]
        curvature: i32,
        #[serde(default)]
        boundary_value: f64,
    },
}

fn one() -> i32 {
    1
}

impl ProblemInput {
    pub fn build(&self) -> Result<ConicProblem> {
        match self {
            Self::Football { beta } => ConicProblem::football(*beta),
            Self::Sphere {
                points,
                beta,
                curvature,
            } => ConicProblem::sphere(points.clone(), beta.clone(), *curvature),
            Self::Disk {
                points,
                beta,
                curvature,
                boundary_value,
            } => {
                let mut p = ConicProblem::disk(points.clone(), beta.clone(), *curvature)?;
                p.boundary_value = *boundary_value;
                Ok(p)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    /// Angle-region membership for `(genus, β)`.
    Angles {
        #[serde(default)]
        genus: u32,
        beta: Vec<f64>,
    },
    /// All branches of a cone-point splitting at coefficients `A`.
    Split {
        beta0: f64,
        targets: Vec<f64>,
        /// `A_1..A_J` as `[re, im]` pairs.
        a: Vec<[f64; 2]>,
    },
    /// Football eigenvalues up to `lambda_max`, one row per eigenfunction.
    Spectrum { beta: f64, lambda_max: f64 },
    /// Liouville solve, eigenspace near 2 and expansion coefficients.
    Solve {
        problem: ProblemInput,
        #[serde(default)]
        mesh: MeshParams,
    },
    /// Pairing matrix, kernel and classification from a `solve` report.
    Pair {
        diagnostics: PathBuf,
        /// Splitting coefficients `A` per cone point.
        #[serde(default)]
        split: Option<Vec<Vec<[f64; 2]>>>,
        /// A direction in `ℝ^{2K}` given directly.
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    /// The acceptance suite, or the listed criteria.
    Verify {
        #[serde(default)]
        criteria: Option<Vec<usize>>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Angles { .. } => "angles",
            Self::Split { .. } => "split",
            Self::Spectrum { .. } => "spectrum",
            Self::Solve { .. } => "solve",
            Self::Pair { .. } => "pair",
            Self::Verify { .. } => "verify",
        }
    }
}

/// A complete run. Serialized flat: the subcommand's fields sit next to the
/// shared keys below.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default)]
    pub format: Format,
    /// Directory for the report file; standard output when absent.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    pub tolerances: Tolerances,
}

/// The shared keys of a [`RunConfig`].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Shared {
    #[serde(default)]
    format: Format,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    tolerances: Tolerances,
}

const SHARED_KEYS: [&str; 4] = ["format", "output_dir", "seed", "tolerances"];

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            format: Format::Json,
            output_dir: None,
            seed: DEFAULT_SEED,
            tolerances: Tolerances::default(),
        }
    }

    /// Parses a flat JSON configuration; unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::InvalidInput(format!("config: {e}"));
        let Value::Object(mut all) = serde_json::from_str(text).map_err(bad)? else {
            return Err(Error::InvalidInput("config must be a JSON object".into()));
        };
        let mut shared = serde_json::Map::new();
        for k in SHARED_KEYS {
            if let Some(v) = all.remove(k) {
                shared.insert(k.to_string(), v);
            }
        }
        let shared: Shared = serde_json::from_value(Value::Object(shared)).map_err(bad)?;
        let command: Command = serde_json::from_value(Value::Object(all)).map_err(bad)?;
        let cfg = Self {
            command,
            format: shared.format,
            output_dir: shared.output_dir,
            seed: shared.seed.unwrap_or(DEFAULT_SEED),
            tolerances: shared.tolerances,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.tolerances.window;
        if !(w > 0.0 && w < 2.0) {
            return Err(Error::InvalidInput(format!("window must lie in (0, 2), got {w}")));
        }
        Ok(())
    }
}

/// A finished run: the rendered report and the exit status.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Value,
    pub rendered: String,
    pub exit_code: i32,
    /// Where the report was written, if anywhere.
    pub path: Option<PathBuf>,
}

/// Caps the global worker pool from [`THREADS_ENV`]; ignored if already set up.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::InvalidInput(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn tolerance_block(cfg: &RunConfig) -> Value {
    json!({
        "eigen_window": cfg.tolerances.window,
        "fit": FIT_TOL,
        "newton": NEWTON_TOL,
        "rank": RANK_TOL,
        "spectral": SPECTRAL_TOL,
    })
}

fn complex_pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn to_complex(a: &[[f64; 2]]) -> Vec<Complex64> {
    a.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Runs a configuration and writes the report.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let (body, table, code) = match &cfg.command {
        Command::Angles { genus, beta } => (angles_report(*genus, beta)?, None, exit::OK),
        Command::Split { beta0, targets, a } => (split_report(*beta0, targets, a)?, None, exit::OK),
        Command::Spectrum { beta, lambda_max } => {
            let (v, t) = spectrum_report(*beta, *lambda_max)?;
            (v, Some(t), exit::OK)
        }
        Command::Solve { problem, mesh } => (solve_report(problem, mesh, cfg.tolerances.window)?, None, exit::OK),
        Command::Pair {
            diagnostics,
            split,
            direction,
        } => (pair_report(diagnostics, split.as_deref(), direction.as_deref())?, None, exit::OK),
        Command::Verify { criteria } => {
            let ids: Vec<usize> = criteria.clone().unwrap_or_else(|| (1..=CRITERIA).collect());
            let results: Vec<CriterionResult> = ids
                .iter()
                .map(|id| run_criterion(*id, cfg.seed))
                .collect::<Result<_>>()?;
            let all = results.iter().all(|r| r.passed);
            let table = Table {
                columns: vec!["id", "name", "passed", "seconds", "detail"],
                rows: results
                    .iter()
                    .map(|r| {
                        vec![
                            json!(r.id),
                            json!(r.name),
                            json!(r.passed),
                            json!(r.seconds),
                            json!(r.detail),
                        ]
                    })
                    .collect(),
            };
            let code = if all { exit::OK } else { exit::VERIFY_MISMATCH };
            (json!({ "all_passed": all, "criteria": to_value(&results) }), Some(table), code)
        }
    };
    let mut report = json!({
        "subcommand": cfg.command.name(),
        "version": VERSION,
        "seed": cfg.seed,
        "tolerances": tolerance_block(cfg),
    });
    report["result"] = body;
    let rendered = match (cfg.format, &table) {
        (Format::Csv, Some(t)) => render_csv(&report, t),
        (Format::Csv, None) => {
            return Err(Error::InvalidInput(format!(
                "`{}` has no tabular output; use JSON",
                cfg.command.name()
            )))
        }
        (Format::Json, _) => render_json(&report),
    };
    let path = match &cfg.output_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", dir.display())))?;
            let ext = if cfg.format == Format::Csv { "csv" } else { "json" };
            let p = dir.join(format!("{}.{ext}", cfg.command.name()));
            std::fs::write(&p, &rendered)
                .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display())))?;
            Some(p)
        }
        None => None,
    };
    Ok(RunOutput {
        report,
        rendered,
        exit_code: code,
        path,
    })
}

fn angles_report(genus: u32, beta: &[f64]) -> Result<Value> {
    let av = AngleVector::new(genus, beta.to_vec())?;
    let mut v = json!({
        "genus": genus,
        "beta": beta,
        "chi": conic_euler_char(&av),
        "troyanov": troyanov_check(&av)?,
        "subcritical": subcritical_check(&av),
    });
    if genus == 0 {
        v["mp_distance"] = to_value(&mp_distance(&av)?);
        v["coaxial"] = to_value(&coaxial_check(&av)?);
    }
    Ok(v)
}

fn split_report(beta0: f64, targets: &[f64], a: &[[f64; 2]]) -> Result<Value> {
    let av = AngleVector::sphere(vec![beta0])?;
    let spec = crate::angles::splitting_spec(&av, targets)?;
    let b = WeightVector::from_targets(beta0, targets)?;
    let coeffs = to_complex(a);
    let res = inverse_map(&coeffs, &b)?;
    let branches: Vec<Value> = res
        .branches
        .iter()
        .map(|br| {
            json!({
                "branch_id": br.branch_id,
                "z": br.z.iter().map(|z| complex_pair(*z)).collect::<Vec<_>>(),
                "min_separation": br.min_separation,
                "condition": br.condition,
                "near_discriminant": br.near_discriminant,
            })
        })
        .collect();
    let mut v = json!({
        "beta0": beta0,
        "targets": targets,
        "weights": b.as_slice(),
        "k0": spec.k0,
        "branches": branches,
        "collapsed": res.collapsed,
        "path": to_value(&res.path),
    });
    // Leading expansion along the ray through `A`, when `A_J ≠ 0`.
    let j = coeffs.len();
    if j >= 1 && coeffs[j - 1].norm() > 0.0 {
        let rho = coeffs[j - 1].norm().powf(1.0 / j as f64);
        let theta = coeffs[j - 1].arg();
        let atilde: Vec<Complex64> = coeffs[..j - 1].iter().map(|x| x / rho.powi(j as i32)).collect();
        let e = expansion_coeffs(theta, &atilde, &b, 0)?;
        v["expansion"] = json!({
            "rho": rho,
            "theta": theta,
            "branch_id": e.branch_id,
            "c": e.c.iter().map(|row| row.iter().map(|x| complex_pair(*x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
    }
    Ok(v)
}

/// A table for CSV output.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

fn spectrum_report(beta: f64, lambda_max: f64) -> Result<(Value, Table)> {
    let modes = football_eigenvalues(beta, lambda_max)?;
    let mut rows = Vec::new();
    for m in &modes {
        let parities: &[&str] = if m.j == 0 { &["cos"] } else { &["cos", "sin"] };
        for p in parities {
            rows.push(vec![json!(m.j), json!(m.ell), json!(p), json!(m.lambda)]);
        }
    }
    let table = Table {
        columns: vec!["j", "ell", "parity", "lambda"],
        rows,
    };
    let v = json!({
        "beta": beta,
        "lambda_max": lambda_max,
        "rows": table.rows.iter().map(|r| {
            json!({"j": r[0], "ell": r[1], "parity": r[2], "lambda": r[3]})
        }).collect::<Vec<_>>(),
    });
    Ok((v, table))
}

fn solve_report(problem: &ProblemInput, mesh: &MeshParams, window: f64) -> Result<Value> {
    let p = problem.build()?;
    let metric = solve_liouville(&p, mesh)?;
    let mut v = json!({
        "problem": to_value(&p),
        "mesh": to_value(mesh),
        "diagnostics": to_value(&metric.diagnostics),
    });
    if metric.problem.curvature == 1 {
        let fiber = spectrum_near_two(&metric, window)?;
        let coeffs = extract_all(&metric, &fiber)?;
        v["eigen"] = json!({
            "ell": fiber.ell,
            "window": fiber.window,
            "eigenvalues": fiber.eigenvalues_near_2,
            "residuals": fiber.residuals,
        });
        v["coefficients"] = to_value(&coeffs);
    }
    Ok(v)
}

/// Reads the `result` block of a `solve` report.
fn read_solve_report(path: &Path) -> Result<(Vec<f64>, usize, EigenCoeffs)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let result = v.get("result").unwrap_or(&v);
    let missing = |what: &str| Error::InvalidInput(format!("{} lacks {what}", path.display()));
    let beta: Vec<f64> = serde_json::from_value(result["problem"]["beta"].clone()).map_err(|_| missing("problem.beta"))?;
    let ell: usize = serde_json::from_value(result["eigen"]["ell"].clone()).map_err(|_| missing("eigen.ell"))?;
    let coeffs: EigenCoeffs =
        serde_json::from_value(result["coefficients"].clone()).map_err(|_| missing("coefficients"))?;
    Ok((beta, ell, coeffs))
}

fn pair_report(diagnostics: &Path, split: Option<&[Vec<[f64; 2]>]>, direction: Option<&[f64]>) -> Result<Value> {
    let (beta, ell, coeffs) = read_solve_report(diagnostics)?;
    if coeffs.rows.len() != ell {
        return Err(Error::ShapeMismatch(format!("ℓ = {ell} but {} coefficient rows", coeffs.rows.len())));
    }
    let k = total_k(&beta);
    let b = if ell == 0 {
        nalgebra::DMatrix::zeros(0, 2 * k)
    } else {
        pairing_matrix(&coeffs)?
    };
    let space = solution_space(&b);
    let class = classify_case(ell, k, total_k0(&beta), space.rank)?;
    let rows: Vec<Vec<f64>> = (0..b.nrows()).map(|i| b.row(i).iter().cloned().collect()).collect();
    let mut v = json!({
        "beta": beta,
        "ell": ell,
        "k": k,
        "k0": total_k0(&beta),
        "b_matrix": rows,
        "rank": space.rank,
        "kernel_dim": space.dim,
        "kernel": space.kernel,
        "singular_values": space.singular_values,
        "classification": to_value(&class),
        "reliable": coeffs.rows.iter().flatten().all(|c| c.reliable),
    });
    let dir = match (split, direction) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput("give either `split` or `direction`, not both".into()))
        }
        (Some(s), None) => {
            if s.len() != beta.len() {
                return Err(Error::ShapeMismatch(format!("{} split vectors for {} cone points", s.len(), beta.len())));
            }
            let per_point = s
                .iter()
                .zip(&beta)
                .map(|(a, b)| direction_coeffs(&to_complex(a), *b))
                .collect::<Result<Vec<_>>>()?;
            Some(DirectionCoeffs { per_point })
        }
        (None, Some(d)) => Some(DirectionCoeffs::from_vec(&beta, d)?),
        (None, None) => None,
    };
    if let Some(d) = dir {
        v["direction"] = json!(d.to_vec());
        v["b_values"] = if ell == 0 { json!([]) } else { json!(pairing_b(&coeffs, &d)?) };
        // Branch convention: `A_m = β^{m/β}(e′_m + i e″_m)` with the principal root.
        v["branch_convention"] = json!("principal");
    }
    Ok(v)
}

/// Formats a float with 17 significant digits.
fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn write_json(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().expect("f64")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(o) => {
            if o.is_empty() {
                out.push_str("{}");
                return;
            }
            let sorted: BTreeMap<&String, &Value> = o.iter().collect();
            out.push_str("{\n");
            for (i, (k, x)) in sorted.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), Value::String((*k).clone()));
                write_json(x, indent + 1, out);
                out.push_str(if i + 1 < sorted.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Canonical JSON: sorted keys, two-space indent, floats as `{:.16e}`.
pub fn render_json(v: &Value) -> String {
    let mut s = String::new();
    write_json(v, 0, &mut s);
    s.push('\n');
    s
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => fmt_f64(n.as_f64().expect("f64")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV with `# key: value` comment lines for the version and tolerances.
pub fn render_csv(report: &Value, table: &Table) -> String {
    let mut head = String::new();
    let _ = writeln!(head, "# subcommand: {}", report["subcommand"].as_str().unwrap_or(""));
    let _ = writeln!(head, "# version: {VERSION}");
    let _ = writeln!(head, "# seed: {}", report["seed"]);
    if let Some(t) = report["tolerances"].as_object() {
        let sorted: BTreeMap<_, _> = t.iter().collect();
        for (k, v) in sorted {
            let _ = writeln!(head, "# tolerance {k}: {}", csv_cell(v));
        }
    }
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(csv_cell)).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 input");
    head + &body
}
