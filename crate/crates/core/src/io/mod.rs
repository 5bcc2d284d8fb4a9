//! Reading inputs, writing result sets and charts.

mod config;
mod outputs;
mod svg;
mod tables;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{
    config_keys, parse_config, read_config, render_config, write_config, InputConfig, DEFAULTS_CFG,
};
pub use outputs::{
    read_properties, read_solution, write_matrix_outputs, write_outputs, write_sweep_outputs,
    OutputSet, RunManifest, MATRIX_FILES, RESULT_FILES,
};
pub use svg::{emit_matrix_plots, emit_plots, emit_sweep_plots, BASE_CHARTS};
pub use tables::{
    read_market_csv, read_plan_csv, write_duals_csv, write_market_csv, write_matrix_csv,
    write_plan_csv, write_sweep_csv, MARKET_HEADER,
};

use crate::model::{MarketData, ModelError, VppConfig};
use crate::scenarios::synth_data;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    Value {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("{}: {msg}", path.display())]
    Table { path: PathBuf, msg: String },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {inner}", path.display())]
    InFile { path: PathBuf, inner: Box<IoError> },
    #[error("no market data: give a data file or synth.* keys in the config")]
    NoData,
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn table(path: &Path, msg: impl Into<String>) -> Self {
        IoError::Table {
            path: path.to_path_buf(),
            msg: msg.into(),
        }
    }

    pub(crate) fn json(path: &Path, source: serde_json::Error) -> Self {
        IoError::Json {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attaches the file name to a parse error.
    pub(crate) fn in_file(self, path: &Path) -> Self {
        IoError::InFile {
            path: path.to_path_buf(),
            inner: Box::new(self),
        }
    }

    /// The underlying error with any file context removed.
    pub fn root(&self) -> &IoError {
        match self {
            IoError::InFile { inner, .. } => inner.root(),
            e => e,
        }
    }
}

/// Loads the configuration and its market data.
///
/// The data come from `data_path` if given, else from the config's `data`
/// key, else from its synthetic generator settings.
pub fn load_inputs(
    config_path: &Path,
    data_path: Option<&Path>,
) -> Result<(VppConfig, MarketData), IoError> {
    let cfg = read_config(config_path)?;
    inputs_from_config(cfg, data_path)
}

/// [`load_inputs`] for an already parsed configuration.
pub fn inputs_from_config(
    cfg: InputConfig,
    data_path: Option<&Path>,
) -> Result<(VppConfig, MarketData), IoError> {
    let data = match (data_path, &cfg.data, &cfg.synth) {
        (Some(p), _, _) => read_market_csv(p)?,
        (None, Some(p), _) => read_market_csv(p)?,
        (None, None, Some(spec)) => synth_data(spec),
        (None, None, None) => return Err(IoError::NoData),
    };
    Ok((cfg.vpp, data))
}
