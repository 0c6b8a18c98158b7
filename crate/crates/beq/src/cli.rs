//! Batch experiment runner: JSON configs with schedule expressions, CSV
//! trace emission, parameter sweeps, and the command-line entry point used
//! by the `beq` binary (subcommands `run`, `sweep`, `validate`, `problems`).
//!
//! Determinism contract: identical config and seed produce byte-identical
//! CSV files. Sweeps run their members concurrently (`BEQ_THREADS` caps the
//! worker count) with per-run output files, so results and summaries are
//! stable under re-runs.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    run, validate_regime, Method, RegimeReport, RunOptions, Schedule, StopRule, Trace,
};
use crate::bifunctions::{AffineBifunction, Bifunction};
use crate::convex::{ConvexFunction, MaxOneNorm, ShiftedQuadratic};
use crate::expr::ScheduleExpr;
use crate::linalg::{ConvexSet, Matrix, Vector};
use crate::problems::{self, Problem};
use crate::resolvents::InnerSolveOptions;
use crate::{Error, Result};

/// Version tag of the JSON configuration schema.
pub const SCHEMA_VERSION: u64 = 1;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "BEQ_THREADS";

fn default_schema_version() -> u64 {
    SCHEMA_VERSION
}

fn default_budget() -> u64 {
    1000
}

fn default_true() -> bool {
    true
}

/// One experiment: problem, method, schedule, stopping, and output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u64,
    pub problem: ProblemSpec,
    pub method: String,
    pub schedule: ScheduleSpec,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
}

/// Either a registry name or an inline problem definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSpec {
    Name(String),
    Inline(Box<InlineProblem>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub lambda: String,
    pub beta: String,
    pub alpha: String,
    #[serde(default = "default_true")]
    pub clamp_alpha: bool,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct StopSpec {
    #[serde(default)]
    pub step_tol: Option<f64>,
    #[serde(default)]
    pub residual_tol: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiagnosticsSpec {
    #[serde(default)]
    pub record_ep_residual: bool,
    pub inner_tol: f64,
    pub inner_budget: u64,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        let inner = InnerSolveOptions::default();
        Self {
            record_ep_residual: false,
            inner_tol: inner.tol,
            inner_budget: inner.budget,
        }
    }
}

/// Inline problem definition for the registry-free path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InlineProblem {
    pub name: Option<String>,
    pub set: SetSpec,
    pub lower: BifunctionSpec,
    pub upper: BifunctionSpec,
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
    #[serde(default)]
    pub lower_solution_set: Option<SetSpec>,
    #[serde(default)]
    pub reference: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    WholeSpace { dim: usize },
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Halfspace { normal: Vec<f64>, offset: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BifunctionSpec {
    Affine {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        #[serde(default)]
        offset: Option<Vec<f64>>,
    },
    Difference {
        dim: usize,
        phi: PhiSpec,
    },
    Combined {
        terms: Vec<(f64, BifunctionSpec)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiSpec {
    MaxOneNorm,
    ShiftedQuadratic { center: Vec<f64> },
}

impl SetSpec {
    fn build(&self) -> Result<ConvexSet> {
        Ok(match self {
            SetSpec::WholeSpace { dim } => ConvexSet::whole_space(*dim),
            SetSpec::Ball { center, radius } => {
                ConvexSet::ball(Vector::from_vec(center.clone()), *radius)?
            }
            SetSpec::Box { lower, upper } => ConvexSet::boxed(
                Vector::from_vec(lower.clone()),
                Vector::from_vec(upper.clone()),
            )?,
            SetSpec::Halfspace { normal, offset } => {
                ConvexSet::halfspace(Vector::from_vec(normal.clone()), *offset)?
            }
        })
    }
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(
            "matrix rows have inconsistent lengths".into(),
        ));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl BifunctionSpec {
    fn build(&self) -> Result<Bifunction> {
        Ok(match self {
            BifunctionSpec::Affine { a, b, offset } => {
                let a = matrix_from_rows(a)?;
                let b = matrix_from_rows(b)?;
                let offset = offset
                    .clone()
                    .map(Vector::from_vec)
                    .unwrap_or_else(|| Vector::zeros(a.nrows()));
                Bifunction::Affine(AffineBifunction::with_offset(a, b, offset)?)
            }
            BifunctionSpec::Difference { dim, phi } => {
                let phi: std::sync::Arc<dyn ConvexFunction> = match phi {
                    PhiSpec::MaxOneNorm => std::sync::Arc::new(MaxOneNorm),
                    PhiSpec::ShiftedQuadratic { center } => {
                        std::sync::Arc::new(ShiftedQuadratic::new(Vector::from_vec(center.clone())))
                    }
                };
                Bifunction::difference(*dim, phi)
            }
            BifunctionSpec::Combined { terms } => {
                let built: Result<Vec<(f64, Bifunction)>> = terms
                    .iter()
                    .map(|(w, spec)| Ok((*w, spec.build()?)))
                    .collect();
                Bifunction::combined(built?)?
            }
        })
    }
}

impl InlineProblem {
    fn build(&self) -> Result<Problem> {
        let problem = Problem {
            name: self.name.clone().unwrap_or_else(|| "inline".into()),
            set: self.set.build()?,
            lower: self.lower.build()?,
            upper: self.upper.build()?,
            lower_solution_set: self
                .lower_solution_set
                .as_ref()
                .map(|s| s.build())
                .transpose()?,
            reference: self.reference.clone().map(Vector::from_vec),
            x0: Vector::from_vec(self.x0.clone()),
            x1: Vector::from_vec(self.x1.clone()),
        };
        problem.validate(0)?;
        Ok(problem)
    }
}

/// Builds the problem a config points at.
pub fn build_problem(spec: &ProblemSpec) -> Result<Problem> {
    match spec {
        ProblemSpec::Name(name) => problems::by_name(name),
        ProblemSpec::Inline(inline) => inline.build(),
    }
}

/// Compiles the schedule expression strings.
pub fn build_schedule(spec: &ScheduleSpec) -> Result<Schedule> {
    let lambda = ScheduleExpr::parse(&spec.lambda)?;
    let beta = ScheduleExpr::parse(&spec.beta)?;
    let alpha = ScheduleExpr::parse(&spec.alpha)?;
    Ok(Schedule::new(
        move |n| lambda.eval(n as f64),
        move |n| beta.eval(n as f64),
        move |n| alpha.eval(n as f64),
        spec.clamp_alpha,
    ))
}

/// Loads a config file, reporting unreadable files as config errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("cannot parse config {}: {e}", path.display())))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            cfg.schema_version
        )));
    }
    Ok(cfg)
}

fn format_field(v: f64) -> String {
    // 17 significant digits; enough to reproduce every f64 exactly.
    format!("{v:.16e}")
}

/// Writes a trace as CSV with the fixed column layout
/// `n,lambda,beta,alpha,step_norm,err_to_ref,ep_residual,x_0..x_{d-1}`.
/// Optional fields are left empty. Byte-deterministic for a given trace.
pub fn emit_trace(trace: &Trace, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let dim = trace.records.first().map_or(0, |r| r.x.len());
    let mut out = String::new();
    out.push_str("n,lambda,beta,alpha,step_norm,err_to_ref,ep_residual");
    for i in 0..dim {
        out.push_str(&format!(",x_{i}"));
    }
    out.push('\n');
    for record in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{}",
            record.n,
            format_field(record.lambda),
            format_field(record.beta),
            format_field(record.alpha),
            format_field(record.step_norm),
        ));
        out.push(',');
        if let Some(err) = record.err_to_ref {
            out.push_str(&format_field(err));
        }
        out.push(',');
        if let Some(ep) = record.ep_residual {
            out.push_str(&format_field(ep));
        }
        for i in 0..dim {
            out.push(',');
            out.push_str(&format_field(record.x[i]));
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Everything a single experiment produced.
pub struct RunArtifacts {
    pub trace: Trace,
    pub regime: RegimeReport,
    pub csv_path: Option<PathBuf>,
}

fn run_options(cfg: &ExperimentConfig) -> RunOptions {
    RunOptions {
        budget: cfg.budget,
        stop: StopRule {
            step_tol: cfg.stop.step_tol,
            residual_tol: cfg.stop.residual_tol,
            max_iters: cfg.stop.max_iters,
        },
        inner: InnerSolveOptions {
            tol: cfg.diagnostics.inner_tol,
            budget: cfg.diagnostics.inner_budget,
            seed: cfg.seed,
        },
        seed: cfg.seed,
        record_ep_residual: cfg.diagnostics.record_ep_residual,
    }
}

/// Runs one experiment end to end: build, validate the schedule regimes,
/// iterate, and emit the CSV when an output path is configured.
pub fn execute_run(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let problem = build_problem(&cfg.problem)?;
    let method: Method = cfg.method.parse()?;
    let schedule = build_schedule(&cfg.schedule)?;
    let regime = validate_regime(&schedule, 4096)?;
    let trace = run(&problem, method, &schedule, &run_options(cfg))?;
    let csv_path = cfg.output.clone();
    if let Some(path) = &csv_path {
        emit_trace(&trace, path)?;
    }
    Ok(RunArtifacts {
        trace,
        regime,
        csv_path,
    })
}

/// Which schedule field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaryField {
    Lambda,
    Beta,
    Alpha,
}

impl std::str::FromStr for VaryField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(VaryField::Lambda),
            "beta" => Ok(VaryField::Beta),
            "alpha" => Ok(VaryField::Alpha),
            other => Err(Error::Config(format!(
                "--vary must be lambda, beta, or alpha (got `{other}`)"
            ))),
        }
    }
}

/// Splits a comma-separated variant list, ignoring commas inside parentheses
/// so expressions like `min(1,n)` survive.
pub fn split_variants(list: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in list.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => {
                out.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out.retain(|s| !s.is_empty());
    out
}

/// One sweep member's outcome.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub index: usize,
    pub expression: String,
    pub iterations: u64,
    pub final_step_norm: f64,
    pub final_err: Option<f64>,
    pub csv_path: PathBuf,
}

/// Completed sweep with members in ranked order (best final error first).
pub struct SweepArtifacts {
    pub entries: Vec<SweepEntry>,
    pub summary_path: PathBuf,
    pub plot_path: PathBuf,
}

fn sanitize(expr: &str) -> String {
    expr.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn sweep_threads(member_count: usize) -> usize {
    let configured = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1);
    let fallback = std::thread::available_parallelism().map_or(1, |n| n.get());
    configured.unwrap_or(fallback).min(member_count.max(1))
}

/// Runs one experiment per variant expression concurrently and writes the
/// per-run CSVs, a ranked `summary.csv`, and a gnuplot script template.
pub fn execute_sweep(
    base: &ExperimentConfig,
    vary: VaryField,
    variants: &[String],
    out_dir: &Path,
) -> Result<SweepArtifacts> {
    if variants.is_empty() {
        return Err(Error::Config(
            "sweep needs at least one variant expression".into(),
        ));
    }
    std::fs::create_dir_all(out_dir)?;

    let field_name = match vary {
        VaryField::Lambda => "lambda",
        VaryField::Beta => "beta",
        VaryField::Alpha => "alpha",
    };
    let configs: Vec<(usize, ExperimentConfig, PathBuf)> = variants
        .iter()
        .enumerate()
        .map(|(i, expr)| {
            let mut cfg = base.clone();
            match vary {
                VaryField::Lambda => cfg.schedule.lambda = expr.clone(),
                VaryField::Beta => cfg.schedule.beta = expr.clone(),
                VaryField::Alpha => cfg.schedule.alpha = expr.clone(),
            }
            let path = out_dir.join(format!("sweep_{field_name}_{i}_{}.csv", sanitize(expr)));
            cfg.output = Some(path.clone());
            (i, cfg, path)
        })
        .collect();

    let results: Mutex<Vec<Option<Result<SweepEntry>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = sweep_threads(configs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let (index, cfg, path) = &configs[i];
                let outcome = execute_run(cfg).map(|artifacts| {
                    let last = artifacts.trace.last();
                    SweepEntry {
                        index: *index,
                        expression: variants[*index].clone(),
                        iterations: last.n,
                        final_step_norm: last.step_norm,
                        final_err: last.err_to_ref,
                        csv_path: path.clone(),
                    }
                });
                results.lock().expect("sweep results lock")[i] = Some(outcome);
            });
        }
    });

    let mut entries = Vec::with_capacity(configs.len());
    for slot in results.into_inner().expect("sweep results lock") {
        entries.push(slot.expect("every sweep member ran")?);
    }
    // Rank by final error (missing errors rank last), ties by variant order.
    entries.sort_by(|a, b| {
        let ka = a.final_err.unwrap_or(f64::INFINITY);
        let kb = b.final_err.unwrap_or(f64::INFINITY);
        ka.partial_cmp(&kb)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.index.cmp(&b.index))
    });

    let summary_path = out_dir.join("summary.csv");
    let mut summary =
        String::from("rank,variant_index,expression,iterations,final_step_norm,final_err\n");
    for (rank, e) in entries.iter().enumerate() {
        summary.push_str(&format!(
            "{},{},{},{},{},{}\n",
            rank,
            e.index,
            e.expression,
            e.iterations,
            format_field(e.final_step_norm),
            e.final_err.map(format_field).unwrap_or_default(),
        ));
    }
    std::fs::write(&summary_path, summary)?;

    let plot_path = out_dir.join("plot.gp");
    let mut plot = String::new();
    plot.push_str("# gnuplot template: convergence curves of this sweep\n");
    plot.push_str("set datafile separator \",\"\n");
    plot.push_str("set logscale y\n");
    plot.push_str("set xlabel \"iteration n\"\n");
    plot.push_str("set ylabel \"distance to reference\"\n");
    plot.push_str("plot \\\n");
    for (i, (index, _, path)) in configs.iter().enumerate() {
        let file = path
            .file_name()
            .expect("sweep csv has a name")
            .to_string_lossy();
        let sep = if i + 1 < configs.len() {
            ", \\\n"
        } else {
            "\n"
        };
        plot.push_str(&format!(
            "  '{file}' using 1:6 with lines title \"{field_name} = {}\"{sep}",
            variants[*index].replace('"', "'"),
        ));
    }
    std::fs::write(&plot_path, plot)?;

    Ok(SweepArtifacts {
        entries,
        summary_path,
        plot_path,
    })
}

#[derive(Parser, Debug)]
#[command(
    name = "beq",
    about = "Batch experiment runner for bilevel equilibrium solvers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand, Debug)]
enum Command {
    /// Run one experiment and write its trace CSV.
    Run(RunArgs),
    /// Run one experiment per schedule variant and rank the outcomes.
    Sweep(SweepArgs),
    /// Check a schedule against both convergence regimes.
    Validate(ValidateArgs),
    /// List the registered problems.
    Problems,
}

#[derive(clap::Args, Debug, Clone)]
struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Registered problem name.
    #[arg(long)]
    problem: Option<String>,
    /// ipsa | psm | inertial_prox | ppm_penalization | rppm
    #[arg(long)]
    method: Option<String>,
    /// Step-size schedule, e.g. "1/n".
    #[arg(long)]
    lambda: Option<String>,
    /// Penalization schedule, e.g. "1+n".
    #[arg(long)]
    beta: Option<String>,
    /// Inertia schedule, e.g. "0.1-1/n".
    #[arg(long)]
    alpha: Option<String>,
    /// Clamp inertia into its admissible range (default true).
    #[arg(long)]
    clamp_alpha: Option<bool>,
    /// Iteration budget.
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    step_tol: Option<f64>,
    #[arg(long)]
    residual_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record the lower-level equilibrium residual on every iterate.
    #[arg(long)]
    record_ep_residual: bool,
    #[arg(long)]
    inner_tol: Option<f64>,
    #[arg(long)]
    inner_budget: Option<u64>,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output CSV path (defaults to <problem>_<method>_<seed>.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Schedule field to vary: lambda | beta | alpha.
    #[arg(long)]
    vary: String,
    /// Comma-separated variant expressions (parenthesized commas are kept).
    #[arg(long)]
    values: String,
    /// Directory for per-run CSVs, summary.csv, and plot.gp.
    #[arg(long, default_value = "sweep")]
    out_dir: PathBuf,
}

#[derive(clap::Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Horizon for the schedule trend tests.
    #[arg(long, default_value_t = 4096)]
    horizon: u64,
}

fn merge_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            problem: ProblemSpec::Name("paper-r5".into()),
            method: "ipsa".into(),
            schedule: ScheduleSpec {
                lambda: "1/n".into(),
                beta: "1+n".into(),
                alpha: "0.1-1/n".into(),
                clamp_alpha: true,
            },
            budget: default_budget(),
            stop: StopSpec::default(),
            seed: 0,
            output: None,
            diagnostics: DiagnosticsSpec::default(),
        },
    };
    if let Some(problem) = &common.problem {
        cfg.problem = ProblemSpec::Name(problem.clone());
    }
    if let Some(method) = &common.method {
        cfg.method = method.clone();
    }
    if let Some(lambda) = &common.lambda {
        cfg.schedule.lambda = lambda.clone();
    }
    if let Some(beta) = &common.beta {
        cfg.schedule.beta = beta.clone();
    }
    if let Some(alpha) = &common.alpha {
        cfg.schedule.alpha = alpha.clone();
    }
    if let Some(clamp) = common.clamp_alpha {
        cfg.schedule.clamp_alpha = clamp;
    }
    if let Some(iters) = common.iters {
        cfg.budget = iters;
    }
    if let Some(step_tol) = common.step_tol {
        cfg.stop.step_tol = Some(step_tol);
    }
    if let Some(residual_tol) = common.residual_tol {
        cfg.stop.residual_tol = Some(residual_tol);
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.record_ep_residual {
        cfg.diagnostics.record_ep_residual = true;
    }
    if let Some(tol) = common.inner_tol {
        cfg.diagnostics.inner_tol = tol;
    }
    if let Some(budget) = common.inner_budget {
        cfg.diagnostics.inner_budget = budget;
    }
    Ok(cfg)
}

fn problem_label(spec: &ProblemSpec) -> String {
    match spec {
        ProblemSpec::Name(name) => name.clone(),
        ProblemSpec::Inline(inline) => inline.name.clone().unwrap_or_else(|| "inline".into()),
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut cfg = merge_config(&args.common)?;
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    if cfg.output.is_none() {
        cfg.output = Some(PathBuf::from(format!(
            "{}_{}_{}.csv",
            sanitize(&problem_label(&cfg.problem)),
            sanitize(&cfg.method),
            cfg.seed
        )));
    }
    // Surface the regime verdicts before spending the budget.
    let schedule = build_schedule(&cfg.schedule)?;
    let regime = validate_regime(&schedule, 4096)?;
    println!("{}", regime.summary());

    let artifacts = execute_run(&cfg)?;
    let last = artifacts.trace.last();
    println!(
        "{} on {}: {} iterates, final step norm {:.3e}{}",
        cfg.method,
        problem_label(&cfg.problem),
        last.n,
        last.step_norm,
        last.err_to_ref
            .map(|e| format!(", distance to reference {e:.3e}"))
            .unwrap_or_default()
    );
    if let Some(path) = &artifacts.csv_path {
        println!("trace written to {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = merge_config(&args.common)?;
    let vary: VaryField = args.vary.parse()?;
    let variants = split_variants(&args.values);
    let schedule = build_schedule(&cfg.schedule)?;
    println!("{}", validate_regime(&schedule, 4096)?.summary());

    let artifacts = execute_sweep(&cfg, vary, &variants, &args.out_dir)?;
    println!("rank  expression           final_err");
    for (rank, e) in artifacts.entries.iter().enumerate() {
        println!(
            "{rank:>4}  {:<20} {}",
            e.expression,
            e.final_err
                .map(|v| format!("{v:.6e}"))
                .unwrap_or_else(|| "-".into())
        );
    }
    println!("summary written to {}", artifacts.summary_path.display());
    println!("plot template written to {}", artifacts.plot_path.display());
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let cfg = merge_config(&args.common)?;
    let schedule = build_schedule(&cfg.schedule)?;
    let report = validate_regime(&schedule, args.horizon)?;
    println!("{}", report.summary());
    Ok(())
}

fn cmd_problems() -> Result<()> {
    for name in problems::registry_names() {
        let problem = problems::by_name(name)?;
        println!(
            "{name}: dim {}, reference {}",
            problem.dim(),
            if problem.reference.is_some() {
                "certified"
            } else {
                "unknown"
            }
        );
    }
    Ok(())
}

/// Exit code for an error: 2 for configuration problems, 3 for solver
/// failures.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Config(_)
        | Error::InvalidSchedule(_)
        | Error::InvalidSet(_)
        | Error::DimensionMismatch { .. } => 2,
        _ => 3,
    }
}

/// Command-line entry point; returns the process exit code.
pub fn main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version output.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Problems => cmd_problems(),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
