//! Command-line front end.
//!
//! Every subcommand prints one JSON document on stdout, with all floats
//! rounded to 12 significant digits. Matrices go to `--out` files in full
//! precision so they re-parse bit-exactly.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 the solver did not
//! converge, 3 unreadable input or bad arguments.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bhclone::bh_report;
use crate::channel::{read_matrix_file, validate, write_matrix_file, ChannelError, DynamicalMatrix, MatrixJson};
use crate::classical::enumerate_deterministic_extrema;
use crate::family::{shared_basis, survey, FamilyError, MAX_EPSILON};
use crate::fidelity::{average_fidelities, universality_spread};
use crate::interference::{interference_of_dynamical, max_block_offdiagonal};
use crate::sdpopt::{
    extreme_a_problem, solve_with, sweep_boundary, sweep_grid, symmetric_optimum_with, write_sweep_csv, Method,
    SdpError, SdpSolution, Sense, SolverOptions, DEFAULT_SWEEP_STEP,
};
use crate::util::round_json;

/// Grid size of the universality check in `fidelity`.
const SPREAD_GRID: usize = 20;
const BH_SAMPLES: usize = 50;
/// Bounds checked by `bh --check`.
const BH_ISOMETRY_TOL: f64 = 1e-12;
const BH_IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "qclone", version, about = "Interference-free 1->2 qubit cloning machines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check hermiticity, trace preservation and positivity of a dynamical matrix.
    Validate { input: PathBuf },
    /// Interference value of a dynamical matrix.
    Interference { input: PathBuf },
    /// Average fidelities and universality spread of a channel.
    Fidelity { input: PathBuf },
    /// Optimize fidelities over interference-free channels.
    Optimize {
        #[arg(long, value_enum, default_value_t = Mode::Symmetric)]
        mode: Mode,
        /// Where to write the optimal dynamical matrix.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Boundary of the interference-free fidelity region as CSV.
    Sweep {
        #[arg(long, default_value_t = DEFAULT_SWEEP_STEP)]
        step: f64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive fidelity bounds of classical cloners.
    Classical,
    /// Sample and verify members of the optimal interference-free family.
    Family {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = crate::family::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the sampled matrices as a JSON array.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report on the Bužek–Hillery cloner.
    Bh {
        /// Exit with status 1 if any identity fails.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Symmetric,
    MaxA,
    MinA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverMethod {
    Auto,
    Admm,
    Ipm,
}

#[derive(Clone, Debug, clap::Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverMethod::Auto)]
    pub method: SolverMethod,
    /// Override the ADMM primal residual tolerance.
    #[arg(long)]
    pub primal_tol: Option<f64>,
    /// Override the ADMM dual residual tolerance.
    #[arg(long)]
    pub dual_tol: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Validate,
    Interference,
    Fidelity,
    Optimize(Mode),
    Sweep,
    Classical,
    Family,
    Bh { check: bool },
}

/// Checked settings for one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub task: Task,
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub grid_step: f64,
    pub samples: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub method: SolverMethod,
    pub primal_tol: Option<f64>,
    pub dual_tol: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: Task::Classical,
            input_path: None,
            output_path: None,
            grid_step: DEFAULT_SWEEP_STEP,
            samples: 100,
            epsilon: crate::family::DEFAULT_EPSILON,
            seed: 0,
            method: SolverMethod::Auto,
            primal_tol: None,
            dual_tol: None,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid argument: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::NoConvergence(_) => 2,
            CliError::Config(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<SdpError> for CliError {
    fn from(e: SdpError) -> Self {
        match e {
            SdpError::Verification(msg) => CliError::Validation(msg),
            other => CliError::NoConvergence(other.to_string()),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::InvalidEpsilon(_) => CliError::Config(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        match cli.command {
            Command::Validate { input } => (c.task, c.input_path) = (Task::Validate, Some(input)),
            Command::Interference { input } => (c.task, c.input_path) = (Task::Interference, Some(input)),
            Command::Fidelity { input } => (c.task, c.input_path) = (Task::Fidelity, Some(input)),
            Command::Optimize { mode, out, solver } => {
                c.task = Task::Optimize(mode);
                c.output_path = out;
                c.method = solver.method;
                c.primal_tol = solver.primal_tol;
                c.dual_tol = solver.dual_tol;
                c.max_iterations = solver.max_iterations;
            }
            Command::Sweep { step, out } => (c.task, c.grid_step, c.output_path) = (Task::Sweep, step, out),
            Command::Classical => c.task = Task::Classical,
            Command::Family {
                samples,
                epsilon,
                seed,
                out,
            } => {
                c.task = Task::Family;
                (c.samples, c.epsilon, c.seed, c.output_path) = (samples, epsilon, seed, out);
            }
            Command::Bh { check, seed } => (c.task, c.seed) = (Task::Bh { check }, seed),
        }
        c.check()?;
        Ok(c)
    }

    /// `grid_step ∈ (0, 0.5]`, `epsilon ∈ [0, 0.2]`, `samples ≥ 1`, positive
    /// finite tolerances.
    pub fn check(&self) -> Result<(), CliError> {
        if !(self.grid_step > 0.0 && self.grid_step <= 0.5) {
            return Err(CliError::Config(format!(
                "grid_step = {} not in (0, 0.5]",
                self.grid_step
            )));
        }
        if !(0.0..=MAX_EPSILON).contains(&self.epsilon) {
            return Err(CliError::Config(format!(
                "epsilon = {} not in [0, {MAX_EPSILON}]",
                self.epsilon
            )));
        }
        if self.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        for (name, tol) in [("primal_tol", self.primal_tol), ("dual_tol", self.dual_tol)] {
            if let Some(t) = tol {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(CliError::Config(format!("{name} = {t} must be positive")));
                }
            }
        }
        if self.max_iterations == Some(0) {
            return Err(CliError::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    fn solver_options(&self) -> SolverOptions {
        let mut opts = SolverOptions {
            method: match self.method {
                SolverMethod::Auto => Method::Auto,
                SolverMethod::Admm => Method::Admm,
                SolverMethod::Ipm => Method::InteriorPoint,
            },
            ..Default::default()
        };
        if let Some(t) = self.primal_tol {
            opts.primal_tol = t;
        }
        if let Some(t) = self.dual_tol {
            opts.dual_tol = t;
        }
        if let Some(n) = self.max_iterations {
            opts.max_iterations = n;
        }
        opts
    }

    fn input(&self) -> Result<DynamicalMatrix, CliError> {
        let path = self
            .input_path
            .as_deref()
            .ok_or_else(|| CliError::Config("missing input file".into()))?;
        let m = read_matrix_file(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(DynamicalMatrix::new(m)?)
    }
}

fn emit(out: &mut dyn Write, value: impl Serialize) -> Result<(), CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    round_json(&mut v);
    let text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Executes one command, printing its report to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    config.check()?;
    match &config.task {
        Task::Validate => {
            let report = validate(&config.input()?);
            emit(out, &report)?;
            if !report.is_valid_channel {
                return Err(CliError::Validation(report.failure_summary()));
            }
        }
        Task::Interference => {
            let d = config.input()?;
            let value = interference_of_dynamical(&d);
            emit(
                out,
                json!({
                    "interference": value.value,
                    "is_zero": value.is_zero(),
                    "max_block_offdiagonal": max_block_offdiagonal(&d),
                }),
            )?;
        }
        Task::Fidelity => {
            let d = config.input()?;
            let report = validate(&d);
            if !report.is_valid_channel {
                return Err(CliError::Validation(report.failure_summary()));
            }
            let (fa, fb) = average_fidelities(&d);
            let spread = universality_spread(&d, SPREAD_GRID).map_err(|e| CliError::Config(e.to_string()))?;
            emit(
                out,
                json!({
                    "fidelity_a": fa,
                    "fidelity_b": fb,
                    "spread_a": spread.spread_a,
                    "spread_b": spread.spread_b,
                    "grid": SPREAD_GRID,
                }),
            )?;
        }
        Task::Optimize(mode) => optimize(config, *mode, out)?,
        Task::Sweep => {
            let points = sweep_boundary(&sweep_grid(config.grid_step));
            match &config.output_path {
                Some(path) => {
                    let mut w = create(path)?;
                    write_sweep_csv(&points, &mut w)?;
                    w.flush()?;
                }
                None => write_sweep_csv(&points, &mut *out)?,
            }
            let bad: Vec<String> = points
                .iter()
                .filter(|p| !p.converged())
                .map(|p| p.fa.to_string())
                .collect();
            if !bad.is_empty() {
                return Err(CliError::NoConvergence(format!("f_a = {}", bad.join(", "))));
            }
        }
        Task::Classical => emit(out, enumerate_deterministic_extrema())?,
        Task::Family => {
            let basis = shared_basis()?;
            let (summary, members) = survey(basis, config.samples, config.epsilon, config.seed)?;
            if let Some(path) = &config.output_path {
                let matrices: Vec<MatrixJson> = members.iter().map(|d| MatrixJson::from(d.matrix())).collect();
                let mut w = create(path)?;
                serde_json::to_writer(&mut w, &matrices).map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(w)?;
                w.flush()?;
            }
            emit(out, &summary)?;
            if summary.failed > 0 {
                return Err(CliError::Validation(format!(
                    "{} of {} members failed",
                    summary.failed, summary.samples
                )));
            }
        }
        Task::Bh { check } => {
            let r = bh_report(BH_SAMPLES, config.seed);
            emit(out, &r)?;
            if *check {
                let checks = [
                    ("isometry_residual", r.isometry_residual <= BH_ISOMETRY_TOL),
                    ("max_reduced_deviation", r.max_reduced_deviation <= BH_IDENTITY_TOL),
                    (
                        "max_closed_form_deviation",
                        r.max_closed_form_deviation <= BH_IDENTITY_TOL,
                    ),
                    ("max_symmetry_deviation", r.max_symmetry_deviation <= BH_IDENTITY_TOL),
                    (
                        "point_fidelity",
                        (r.min_point_fidelity - 5.0 / 6.0).abs() <= BH_IDENTITY_TOL
                            && (r.max_point_fidelity - 5.0 / 6.0).abs() <= BH_IDENTITY_TOL,
                    ),
                    ("extended_valid_channel", r.extended_valid_channel),
                ];
                let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
                if !failed.is_empty() {
                    return Err(CliError::Validation(failed.join(", ")));
                }
            }
        }
    }
    Ok(())
}

fn optimize(config: &RunConfig, mode: Mode, out: &mut dyn Write) -> Result<(), CliError> {
    let opts = config.solver_options();
    let sol: SdpSolution = match mode {
        Mode::Symmetric => symmetric_optimum_with(&opts)?,
        Mode::MaxA => solve_with(&extreme_a_problem(Sense::Maximize), &opts)?.require_converged()?,
        Mode::MinA => solve_with(&extreme_a_problem(Sense::Minimize), &opts)?.require_converged()?,
    };
    if let Some(path) = &config.output_path {
        write_matrix_file(path, sol.d.matrix()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let (fa, fb) = average_fidelities(&sol.d);
    let mut v = serde_json::to_value(&sol).map_err(|e| CliError::Io(e.to_string()))?;
    let extra = json!({
        "mode": mode,
        "fidelity_a": fa,
        "fidelity_b": fb,
        "interference": interference_of_dynamical(&sol.d).value,
        "matrix_path": config.output_path.as_ref().map(|p| p.display().to_string()),
    });
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    emit(out, v)
}

/// Parses arguments and runs; errors go to stderr and set the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|config| {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        run(&config, &mut lock)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
