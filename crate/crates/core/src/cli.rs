//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible model,
//! 3 failed verification under `check --strict`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;

use crate::analysis::{AnalysisError, Param, PropertyStatus, SolvedModel};
use crate::io::{
    self, inputs_from_config, parse_config, read_config, read_plan_csv, read_solution,
    write_market_csv, InputConfig, IoError, RunManifest, DEFAULTS_CFG,
};
use crate::model::{assemble_qp, validate_config, ValidatedModel};
use crate::qp::{SolveStatus, SolverSettings};
use crate::scenarios::{
    analyse, default_grid, inventory_matrix, linear_grid, parameter_sweep, run_scenario,
    synth_data, ScenarioOptions, SynthSpec, DEFAULT_POINTS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Largest relative KKT residual `check` accepts for a saved solution.
pub const CHECK_KKT_TOL: f64 = 1e-6;

/// `println!` that ignores a closed stdout (for instance `| head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Relative tolerance when comparing a saved plan.csv with the plan
/// recovered from the saved solution.
const PLAN_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "trimarket",
    version,
    about = "VPP scheduling across electricity, REC and CER markets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario, run every property check and write the result set.
    Solve(SolveArgs),
    /// Solve with the REC and CER inventories toggled on and off.
    InventoryMatrix(MatrixArgs),
    /// Revenue components along a grid of r or α.
    Sweep(SweepArgs),
    /// Re-verify a saved solution and run the property checks on it.
    Check(CheckArgs),
    /// Write synthetic market data.
    GenData(GenArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Configuration file; the bundled base scenario if omitted.
    #[arg(short = 'c', long)]
    config: Option<PathBuf>,
    /// Market data CSV; overrides the config's data source.
    #[arg(short = 'd', long)]
    data: Option<PathBuf>,
    /// Solver tolerance on primal, dual and gap residuals.
    #[arg(short = 'e', long)]
    tol: Option<f64>,
    #[arg(short = 'm', long)]
    max_iter: Option<usize>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(short = 'o', long, default_value = "out")]
    out: PathBuf,
    /// Skip the SVG charts.
    #[arg(short = 'P', long)]
    no_plots: bool,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(short = 'o', long, default_value = "out")]
    out: PathBuf,
    #[arg(short = 'P', long)]
    no_plots: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParamArg {
    R,
    Alpha,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(short = 'p', long, value_enum)]
    param: ParamArg,
    #[arg(short = 'f', long)]
    from: Option<f64>,
    #[arg(short = 't', long)]
    to: Option<f64>,
    /// Number of grid points, both ends included.
    #[arg(short = 'n', long)]
    steps: Option<usize>,
    #[arg(short = 'o', long, default_value = "out")]
    out: PathBuf,
    #[arg(short = 'P', long)]
    no_plots: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Output directory of a previous `solve`; supplies config.cfg,
    /// market.csv, solution.json and plan.csv.
    #[arg(short = 'i', long)]
    dir: Option<PathBuf>,
    #[arg(short = 'c', long)]
    config: Option<PathBuf>,
    #[arg(short = 'd', long)]
    data: Option<PathBuf>,
    #[arg(short = 'S', long)]
    solution: Option<PathBuf>,
    /// Exit with code 3 if any verification or property fails.
    #[arg(short = 's', long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Generator settings are read from the synth.* keys of this config.
    #[arg(short = 'c', long)]
    config: Option<PathBuf>,
    #[arg(short = 's', long)]
    seed: Option<u64>,
    #[arg(short = 'T', long)]
    horizon: Option<usize>,
    #[arg(short = 'o', long)]
    out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(e) if e.is_infeasible() => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        }
    }
}

impl From<crate::model::ModelError> for CliError {
    fn from(e: crate::model::ModelError) -> Self {
        CliError::Io(e.into())
    }
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let args: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let res = match cli.command {
        Command::Solve(a) => solve(a, args),
        Command::InventoryMatrix(a) => matrix(a, args),
        Command::Sweep(a) => sweep(a, args),
        Command::Check(a) => check(a),
        Command::GenData(a) => gen_data(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<InputConfig, IoError> {
    match path {
        Some(p) => read_config(p),
        None => parse_config(DEFAULTS_CFG),
    }
}

fn settings(input: &InputArgs) -> Result<SolverSettings, CliError> {
    let mut s = SolverSettings::default();
    if let Some(t) = input.tol {
        (s.tol_primal, s.tol_dual, s.tol_gap) = (t, t, t);
    }
    if let Some(m) = input.max_iter {
        s.max_iter = m;
    }
    s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(s)
}

/// Loads and validates the model; returns it with the parsed config and a
/// manifest describing the inputs.
fn prepare(
    input: &InputArgs,
    command: &str,
    args: Vec<String>,
    out: &Path,
) -> Result<(ValidatedModel, InputConfig, RunManifest), CliError> {
    let cfg = load_config(input.config.as_deref())?;
    let mut manifest = RunManifest::new(command, args, out);
    manifest.config = input.config.clone();
    manifest.data = input.data.clone().or_else(|| cfg.data.clone());
    if manifest.data.is_none() {
        manifest.synth_seed = cfg.synth.as_ref().map(|s| s.seed);
    }
    manifest.tol = input.tol;
    manifest.max_iter = input.max_iter;
    let (vpp, data) = inputs_from_config(cfg.clone(), input.data.as_deref())?;
    let model = validate_config(vpp, data)?;
    for w in model.warnings() {
        warn!("{w}");
    }
    Ok((model, cfg, manifest))
}

fn status_word(s: PropertyStatus) -> &'static str {
    match s {
        PropertyStatus::Pass => "pass",
        PropertyStatus::Fail => "FAIL",
        PropertyStatus::Skipped => "skip",
        PropertyStatus::Informational => "info",
    }
}

fn solve(a: SolveArgs, args: Vec<String>) -> Result<i32, CliError> {
    let s = settings(&a.input)?;
    let (model, cfg, manifest) = prepare(&a.input, "solve", args, &a.out)?;
    let opts = ScenarioOptions {
        settings: s,
        ..ScenarioOptions::default()
    };
    let result = run_scenario(&model, &opts)?;
    let set = io::write_outputs(&result, &cfg, manifest, &a.out, !a.no_plots)?;
    let b = &result.breakdown;
    say!(
        "profit {:.2} (electricity {:.2}, REC {:.2}, CER {:.2}, TG cost {:.2})",
        b.profit,
        b.rev_g,
        b.rev_r,
        b.rev_c,
        b.cost_g
    );
    say!(
        "mu {} delta {}; max relative KKT residual {:.2e} after {} iterations",
        result.solved.duals.mu,
        result.solved.duals.delta,
        result.solved.residuals.max(),
        result.solved.solution.iterations
    );
    for r in &result.reports {
        say!("  {:<8} {}  {}", r.id, status_word(r.status), r.detail);
    }
    say!("{} files written to {}", set.files.len(), a.out.display());
    Ok(EXIT_OK)
}

fn matrix(a: MatrixArgs, args: Vec<String>) -> Result<i32, CliError> {
    let s = settings(&a.input)?;
    let (model, _, manifest) = prepare(&a.input, "inventory-matrix", args, &a.out)?;
    let m = inventory_matrix(&model, &s)?;
    io::write_matrix_outputs(&m, manifest, &a.out, !a.no_plots)?;
    say!("{:<10} {:>14} {:>9}", "inventory", "profit", "gain %");
    for c in &m.cells {
        say!(
            "{:<10} {:>14.2} {:>9.3}",
            c.cell.name(),
            c.breakdown.profit,
            c.improvement
        );
    }
    if !m.nesting_holds() {
        warn!("profits are not nested across the inventory cells");
    }
    say!("results written to {}", a.out.display());
    Ok(EXIT_OK)
}

fn sweep(a: SweepArgs, args: Vec<String>) -> Result<i32, CliError> {
    let s = settings(&a.input)?;
    let param = match a.param {
        ParamArg::R => Param::R,
        ParamArg::Alpha => Param::Alpha,
    };
    let grid = if a.from.is_none() && a.to.is_none() && a.steps.is_none() {
        default_grid(param, DEFAULT_POINTS)
    } else {
        let d = default_grid(param, DEFAULT_POINTS);
        let from = a.from.unwrap_or(d[0]);
        let to = a.to.unwrap_or(1.0);
        let steps = a.steps.unwrap_or(DEFAULT_POINTS);
        if steps == 0 || (steps > 1 && !(to > from)) {
            return Err(CliError::Usage(format!(
                "need --steps ≥ 1 and --from < --to, got {steps} points from {from} to {to}"
            )));
        }
        linear_grid(from, to, steps)
    };
    let (model, _, manifest) = prepare(&a.input, "sweep", args, &a.out)?;
    let result = parameter_sweep(&model, param, &grid, &s)?;
    let scenario = a
        .input
        .config
        .as_deref()
        .and_then(Path::file_stem)
        .map_or_else(
            || "defaults".to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
    let stem = format!("{scenario}_{}", param.name());
    io::write_sweep_outputs(&result, &stem, manifest, &a.out, !a.no_plots)?;
    say!(
        "{:>8} {:>14} {:>12} {:>12}",
        param.name(),
        "profit",
        "mu",
        "delta"
    );
    for p in &result.points {
        match (&p.breakdown, &p.error) {
            (Some(b), _) => say!(
                "{:>8.4} {:>14.2} {:>12.4} {:>12.4}",
                p.value,
                b.profit,
                p.mu.unwrap_or(f64::NAN),
                p.delta.unwrap_or(f64::NAN)
            ),
            (None, e) => say!("{:>8.4} failed: {}", p.value, e.as_deref().unwrap_or("")),
        }
    }
    say!(
        "varying: {}; breakpoints: {:?}",
        result.varying().join(", "),
        result.breakpoints
    );
    if result.failures() == result.points.len() {
        eprintln!("error: no grid point could be solved");
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(EXIT_OK)
}

/// Compares two plans column by column; returns the first mismatch.
fn plan_mismatch(
    saved: &crate::model::DispatchPlan,
    fresh: &crate::model::DispatchPlan,
) -> Option<String> {
    if saved.horizon() != fresh.horizon() {
        return Some(format!(
            "plan.csv has {} hours, solution has {}",
            saved.horizon(),
            fresh.horizon()
        ));
    }
    for (k, (a, b)) in saved.columns().iter().zip(fresh.columns()).enumerate() {
        for t in 0..a.len() {
            if (a[t] - b[t]).abs() > PLAN_TOL * (1.0 + b[t].abs()) {
                return Some(format!(
                    "plan.csv column {} hour {}: {} but the solution gives {}",
                    crate::model::PLAN_COLUMNS[k],
                    t + 1,
                    a[t],
                    b[t]
                ));
            }
        }
    }
    None
}

fn check(a: CheckArgs) -> Result<i32, CliError> {
    let in_dir = |name: &str| a.dir.as_ref().map(|d| d.join(name));
    let config = a.config.clone().or_else(|| in_dir("config.cfg"));
    let solution = a
        .solution
        .clone()
        .or_else(|| in_dir("solution.json"))
        .ok_or_else(|| CliError::Usage("check needs --dir or --solution".into()))?;
    let cfg = load_config(config.as_deref())?;
    let (vpp, data) = inputs_from_config(cfg, a.data.as_deref())?;
    let model = validate_config(vpp, data)?;
    let problem = assemble_qp(&model);
    let sol = read_solution(&solution)?;
    if sol.x.len() != problem.layout.n() {
        return Err(CliError::Usage(format!(
            "solution has {} variables, the model needs {}",
            sol.x.len(),
            problem.layout.n()
        )));
    }
    let optimal = sol.status == SolveStatus::Optimal;
    let solved = SolvedModel::from_solution(&model, problem, sol)?;
    let mut failures = Vec::new();

    let kkt = solved.residuals.max();
    let kkt_ok = optimal && kkt <= CHECK_KKT_TOL;
    say!(
        "KKT relative residuals: primal {:.2e}, dual {:.2e}, gap {:.2e} ({})",
        solved.residuals.primal,
        solved.residuals.dual,
        solved.residuals.gap,
        if kkt_ok { "pass" } else { "FAIL" }
    );
    if !kkt_ok {
        failures.push(format!(
            "kkt: largest residual {kkt:.3e} > {CHECK_KKT_TOL:e} or status not optimal"
        ));
    }
    if let Some(plan_path) = in_dir("plan.csv").filter(|p| p.exists()) {
        let saved = read_plan_csv(&plan_path, solved.plan.netted)?;
        match plan_mismatch(&saved, &solved.plan) {
            None => say!("plan.csv matches the solution"),
            Some(m) => {
                say!("plan.csv FAIL: {m}");
                failures.push(m);
            }
        }
    }

    if kkt_ok {
        let result = analyse(solved, &ScenarioOptions::default())?;
        for r in &result.reports {
            say!("  {:<8} {}  {}", r.id, status_word(r.status), r.detail);
        }
        failures.extend(result.failures().map(|r| format!("{}: {}", r.id, r.detail)));
    } else {
        say!("property checks skipped: the solution is not a verified optimum");
    }

    if failures.is_empty() {
        say!("check passed");
        Ok(EXIT_OK)
    } else {
        say!("{} failure(s)", failures.len());
        Ok(if a.strict { EXIT_CHECK_FAILED } else { EXIT_OK })
    }
}

fn gen_data(a: GenArgs) -> Result<i32, CliError> {
    let cfg = load_config(a.config.as_deref())?;
    let mut spec = cfg.synth.unwrap_or(SynthSpec {
        horizon: cfg.vpp.horizon,
        ..SynthSpec::default()
    });
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(h) = a.horizon {
        spec.horizon = h;
    }
    if spec.horizon == 0 {
        return Err(CliError::Usage("--horizon must be at least 1".into()));
    }
    let data = synth_data(&spec);
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| IoError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    write_market_csv(&a.out, &data)?;
    say!(
        "{} hours of market data (seed {}) written to {}",
        spec.horizon,
        spec.seed,
        a.out.display()
    );
    Ok(EXIT_OK)
}
