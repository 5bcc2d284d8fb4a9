//! Result file sets and the manifest that describes how they were made.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    emit_matrix_plots, emit_plots, emit_sweep_plots, write_config, write_duals_csv,
    write_market_csv, write_matrix_csv, write_plan_csv, write_sweep_csv, InputConfig, IoError,
};
use crate::analysis::PropertyReport;
use crate::qp::{RelativeResiduals, Solution};
use crate::scenarios::{InventoryMatrixResult, RevenueBreakdown, ScenarioResult, SweepResult};

/// Files written by [`write_outputs`], charts excluded.
pub const RESULT_FILES: [&str; 8] = [
    "plan.csv",
    "duals.csv",
    "breakdown.json",
    "properties.json",
    "solution.json",
    "config.cfg",
    "market.csv",
    "manifest.json",
];

/// Files written by [`write_matrix_outputs`], charts excluded.
pub const MATRIX_FILES: [&str; 3] = ["matrix.csv", "matrix.json", "manifest.json"];

/// How an output set was produced. Everything but `timestamp` is a function
/// of the command line and the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    /// Config file, or `None` for the bundled defaults.
    pub config: Option<PathBuf>,
    pub data: Option<PathBuf>,
    /// Set when the market data were generated.
    pub synth_seed: Option<u64>,
    pub out_dir: PathBuf,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Whether plan.csv has simultaneous charge/discharge netted out.
    pub netted: Option<bool>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub version: String,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, out_dir: &Path) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            command: command.to_string(),
            args,
            config: None,
            data: None,
            synth_seed: None,
            out_dir: out_dir.to_path_buf(),
            tol: None,
            max_iter: None,
            netted: None,
            timestamp,
            version: env!("CARGO_PKG_VERSION").to_string(),
            files: Vec::new(),
        }
    }
}

/// Paths written by one output call.
#[derive(Debug, Clone, Default)]
pub struct OutputSet {
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct BreakdownFile<'a> {
    #[serde(flatten)]
    breakdown: &'a RevenueBreakdown,
    objective: f64,
    mu: f64,
    delta: f64,
    residuals: &'a RelativeResiduals,
    iterations: usize,
    warnings: &'a [String],
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| IoError::json(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}

fn create(dir: &Path) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))
}

fn finish(dir: &Path, mut manifest: RunManifest, mut set: OutputSet) -> Result<OutputSet, IoError> {
    let path = dir.join("manifest.json");
    set.files.push(path.clone());
    manifest.files = set
        .files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    write_json(&path, &manifest)?;
    Ok(set)
}

/// Writes the full result set of a solved scenario.
///
/// `config.cfg` and `market.csv` are copies of the inputs, with the config
/// pointing at the copied data, so `solve -c <out>/config.cfg` repeats the
/// run and `check` can re-verify the saved solution.
pub fn write_outputs(
    result: &ScenarioResult,
    input: &InputConfig,
    manifest: RunManifest,
    out_dir: &Path,
    plots: bool,
) -> Result<OutputSet, IoError> {
    create(out_dir)?;
    let s = &result.solved;
    let mut set = OutputSet::default();
    let mut file = |name: &str| {
        let p = out_dir.join(name);
        set.files.push(p.clone());
        p
    };
    write_plan_csv(&file("plan.csv"), &s.plan)?;
    write_duals_csv(&file("duals.csv"), &s.duals)?;
    write_json(
        &file("breakdown.json"),
        &BreakdownFile {
            breakdown: &result.breakdown,
            objective: s.objective(),
            mu: s.duals.mu,
            delta: s.duals.delta,
            residuals: &s.residuals,
            iterations: s.solution.iterations,
            warnings: s.model.warnings(),
        },
    )?;
    write_json(&file("properties.json"), &result.reports)?;
    write_json(&file("solution.json"), &s.solution)?;
    let copy = InputConfig {
        vpp: s.model.config().clone(),
        synth: None,
        data: Some(PathBuf::from("market.csv")),
    };
    debug_assert_eq!(copy.vpp, input.vpp);
    write_config(&file("config.cfg"), &copy)?;
    write_market_csv(&file("market.csv"), s.model.data())?;
    if plots {
        set.files.extend(emit_plots(&s.plan, out_dir)?);
    }
    finish(
        out_dir,
        RunManifest {
            netted: Some(s.plan.netted),
            ..manifest
        },
        set,
    )
}

pub fn write_matrix_outputs(
    m: &InventoryMatrixResult,
    manifest: RunManifest,
    out_dir: &Path,
    plots: bool,
) -> Result<OutputSet, IoError> {
    create(out_dir)?;
    let mut set = OutputSet::default();
    let csv = out_dir.join("matrix.csv");
    write_matrix_csv(&csv, m)?;
    let json = out_dir.join("matrix.json");
    write_json(&json, m)?;
    set.files.extend([csv, json]);
    if plots {
        set.files.extend(emit_matrix_plots(m, out_dir)?);
    }
    finish(out_dir, manifest, set)
}

/// Writes `<stem>.csv` and, with `plots`, one chart per component.
pub fn write_sweep_outputs(
    sweep: &SweepResult,
    stem: &str,
    manifest: RunManifest,
    out_dir: &Path,
    plots: bool,
) -> Result<OutputSet, IoError> {
    create(out_dir)?;
    let mut set = OutputSet::default();
    let csv = out_dir.join(format!("{stem}.csv"));
    write_sweep_csv(&csv, sweep)?;
    set.files.push(csv);
    if plots {
        set.files.extend(emit_sweep_plots(sweep, out_dir, stem)?);
    }
    finish(out_dir, manifest, set)
}

pub fn read_solution(path: &Path) -> Result<Solution, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::json(path, e))
}

/// Reads back a `properties.json`.
pub fn read_properties(path: &Path) -> Result<Vec<PropertyReport>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::json(path, e))
}
