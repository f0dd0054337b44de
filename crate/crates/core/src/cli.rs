//! Command-line surface. Exit codes: 0 success, 1 hypothesis violated,
//! 2 oracle mismatch or failed self-check, 3 bad input or parameters.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::explore::{explore, ExploreConfig};
use crate::formulas::{compare_with_oracle, RouteId, RouteOptions};
use crate::generator::{generate_instance, GenConfig};
use crate::hypotheses::{check_hypothesis, Arity, HypothesisId, Instance};
use crate::io::{instance_json, parse_matrix_json, InstanceManifest, MatrixJson};
use crate::matrix::Matrix;
use crate::oracle::{check_axioms, drazin};
use crate::scalar::{Backend, Scalar, Tolerance};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_BAD_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gdrazin",
    version,
    about = "Drazin inverses of block matrices, checked against an oracle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
struct BackendArgs {
    /// Use floating-point complex arithmetic instead of exact rationals.
    #[arg(long, global = true)]
    float: bool,
    /// Absolute zero threshold (floating backend).
    #[arg(long, global = true, default_value_t = Tolerance::DEFAULT_ZERO)]
    zero_tol: f64,
    /// Relative agreement threshold (floating backend).
    #[arg(long, global = true, default_value_t = Tolerance::DEFAULT_RELATIVE)]
    rel_tol: f64,
}

impl BackendArgs {
    fn backend(&self) -> Backend {
        if self.float {
            Backend::Float
        } else {
            Backend::Exact
        }
    }

    fn tolerance(&self) -> Result<Tolerance> {
        Tolerance::new(self.zero_tol, self.rel_tol)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Drazin inverse, index and spectral idempotent of one matrix.
    Compute {
        matrix: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Run a representation route and compare it with the oracle.
    Route {
        /// Route name, e.g. T2.2 or t22.
        route: String,
        /// Two matrix files (a, b), four (A, B, C, D), or one instance manifest.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Run the route even if its hypotheses fail.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Evaluate a hypothesis set on an instance.
    Check {
        /// Hypothesis id, e.g. H22.
        id: String,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Seeded campaign over generated instances.
    Explore {
        id: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Break this (1-based) condition in every trial and force the route.
        #[arg(long)]
        violate: Option<usize>,
        /// Worker threads; the report does not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Print a generated instance as a manifest.
    Generate {
        id: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep the adapted coordinates instead of scrambling by similarity.
        #[arg(long)]
        no_scramble: bool,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_BAD_INPUT
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let echo = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match dispatch(cli.command, echo) {
        Ok((code, body)) => {
            if let Some(body) = body {
                let _ = writeln!(out, "{body}");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// The exit code an error maps to.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::HypothesisViolated(_) => EXIT_VIOLATED,
        Error::Parse(_)
        | Error::InvalidArgument(_)
        | Error::DimensionMismatch { .. }
        | Error::NotSquare { .. }
        | Error::Infeasible(_)
        | Error::CannotIsolate { .. } => EXIT_BAD_INPUT,
        _ => EXIT_MISMATCH,
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn dispatch(cmd: Command, echo: Vec<String>) -> Result<(i32, Option<String>)> {
    match cmd {
        Command::Compute { matrix, backend } => {
            let m = read_matrix(&matrix)?;
            let tol = backend.tolerance()?;
            match backend.backend() {
                Backend::Exact => compute(&m.to_exact()?, &tol, false),
                Backend::Float => compute(&m.to_float()?, &tol, true),
            }
        }
        Command::Route {
            route,
            inputs,
            force,
            backend,
        } => {
            let route: RouteId = route.parse()?;
            let mats = read_inputs(&inputs)?;
            let opts = RouteOptions {
                force,
                tol: backend.tolerance()?,
            };
            let arity = route.hypothesis().arity();
            match backend.backend() {
                Backend::Exact => route_cmd(
                    route,
                    &to_instance(arity, &mats, MatrixJson::to_exact)?,
                    &opts,
                    false,
                ),
                Backend::Float => route_cmd(
                    route,
                    &to_instance(arity, &mats, MatrixJson::to_float)?,
                    &opts,
                    true,
                ),
            }
        }
        Command::Check {
            id,
            inputs,
            backend,
        } => {
            let id: HypothesisId = id.parse()?;
            let mats = read_inputs(&inputs)?;
            let tol = backend.tolerance()?;
            let report = match backend.backend() {
                Backend::Exact => check_hypothesis(
                    id,
                    &to_instance(id.arity(), &mats, MatrixJson::to_exact)?,
                    &tol,
                )?,
                Backend::Float => check_hypothesis(
                    id,
                    &to_instance(id.arity(), &mats, MatrixJson::to_float)?,
                    &tol,
                )?,
            };
            let code = if report.satisfied {
                EXIT_OK
            } else {
                EXIT_VIOLATED
            };
            let mut v = json!({ "hypothesis": report, "violated": report.violated() });
            if backend.float {
                v["tolerance"] = json!(tol);
            }
            Ok((code, Some(pretty(&v))))
        }
        Command::Explore {
            id,
            trials,
            dim,
            seed,
            violate,
            threads,
            out,
            backend,
        } => {
            let id: HypothesisId = id.parse()?;
            if threads == Some(0) {
                return Err(Error::InvalidArgument(
                    "--threads must be at least 1".into(),
                ));
            }
            let mut cfg = ExploreConfig::new(id, trials, dim, seed);
            cfg.violate = violate;
            cfg.backend = backend.backend();
            let report = explore(&cfg, echo, threads)?;
            let code = if report.all_clean_trials_match() {
                EXIT_OK
            } else {
                EXIT_MISMATCH
            };
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            match out {
                Some(path) => {
                    fs::write(&path, text + "\n").map_err(|e| {
                        Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))
                    })?;
                    Ok((code, None))
                }
                None => Ok((code, Some(text))),
            }
        }
        Command::Generate {
            id,
            dim,
            seed,
            no_scramble,
        } => {
            let id: HypothesisId = id.parse()?;
            let mut cfg = GenConfig::new(id, dim, seed);
            cfg.scramble = !no_scramble;
            let g = generate_instance(&cfg)?;
            let manifest = InstanceManifest {
                id: id.to_string(),
                n: dim,
                seed,
                recipe: g.recipe.to_string(),
                matrices: instance_json(&g.instance),
            };
            Ok((EXIT_OK, Some(pretty(&json!(manifest)))))
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<MatrixJson> {
    parse_matrix_json(&read_text(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Matrix files in order, or the matrices of a single manifest file.
fn read_inputs(paths: &[PathBuf]) -> Result<Vec<MatrixJson>> {
    if let [single] = paths {
        let text = read_text(single)?;
        if let Ok(m) = serde_json::from_str::<InstanceManifest>(&text) {
            return Ok(m.matrices);
        }
        return Ok(vec![parse_matrix_json(&text)?]);
    }
    paths.iter().map(|p| read_matrix(p)).collect()
}

fn to_instance<S: Scalar>(
    arity: Arity,
    mats: &[MatrixJson],
    convert: impl Fn(&MatrixJson) -> Result<Matrix<S>>,
) -> Result<Instance<S>> {
    let mats = mats.iter().map(convert).collect::<Result<Vec<_>>>()?;
    Instance::from_matrices(arity, mats)
}

fn compute<S: Scalar>(
    a: &Matrix<S>,
    tol: &Tolerance,
    float: bool,
) -> Result<(i32, Option<String>)> {
    let d = drazin(a, tol)?;
    let ax = check_axioms(a, &d.inverse, Some(d.index.max(1)), tol)?;
    let mut v = json!({
        "inverse": MatrixJson::from(&d.inverse),
        "index": d.index,
        "projector": MatrixJson::from(&d.projector),
        "axioms": ax,
    });
    if float {
        v["tolerance"] = json!(tol);
    }
    let code = if ax.satisfied { EXIT_OK } else { EXIT_MISMATCH };
    Ok((code, Some(pretty(&v))))
}

fn route_cmd<S: Scalar>(
    route: RouteId,
    inst: &Instance<S>,
    opts: &RouteOptions,
    float: bool,
) -> Result<(i32, Option<String>)> {
    let cmp = match compare_with_oracle(route, inst, opts) {
        Ok(c) => c,
        Err(Error::HypothesisViolated(report)) => {
            let v = json!({
                "route": route,
                "hypothesis": report,
                "violated": report.violated(),
            });
            return Ok((EXIT_VIOLATED, Some(pretty(&v))));
        }
        Err(e) => return Err(e),
    };
    let out = &cmp.output;
    let mut v = json!({
        "route": route,
        "forced": opts.force,
        "hypothesis": out.hypothesis,
        "inverse": MatrixJson::from(&out.inverse),
        "oracle": {
            "inverse": MatrixJson::from(&cmp.oracle.inverse),
            "index": cmp.oracle.index,
        },
        "discrepancy": cmp.discrepancy,
        "matches": cmp.matches,
        "uses_oracle": out.uses_oracle(),
        "steps": out.steps,
        "identities": out.identities,
    });
    if float {
        v["tolerance"] = json!(opts.tol);
    }
    let code = if cmp.matches { EXIT_OK } else { EXIT_MISMATCH };
    Ok((code, Some(pretty(&v))))
}
