//! The subcommands. Each returns an [`Outcome`]; `main` turns it into an
//! exit code (0 clean, 1 invariant violation, 2 configuration or I/O error).

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig};

pub mod adversary;
pub mod functional;
pub mod rates;
pub mod simulate;
pub mod verify;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CmdError {
    Config(ConfigError),
    Core(gtp_core::Error),
    Io(String),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Config(e) => write!(f, "{e}"),
            CmdError::Core(e) => write!(f, "{e}"),
            CmdError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CmdError {}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e)
    }
}

impl From<gtp_core::Error> for CmdError {
    fn from(e: gtp_core::Error) -> Self {
        CmdError::Core(e)
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e.to_string())
    }
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) | CmdError::Io(_) => 2,
            // invariant faults raised inside the core
            CmdError::Core(gtp_core::Error::ConsistencyFault(_) | gtp_core::Error::AdversaryFault(_)) => 1,
            CmdError::Core(_) => 2,
        }
    }
}

pub type CmdResult<T> = Result<T, CmdError>;

#[derive(Debug, Clone)]
pub struct Outcome {
    /// 0 when every checked invariant held, 1 otherwise.
    pub exit_code: i32,
    /// Human-readable lines for stderr.
    pub messages: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn new(violated: bool) -> Self {
        Outcome { exit_code: i32::from(violated), messages: Vec::new(), files: Vec::new() }
    }
}

/// A loaded config plus the name its outputs are filed under.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub name: String,
}

impl Experiment {
    pub fn load(path: &Path, overrides: &[String]) -> CmdResult<Self> {
        let config = ExperimentConfig::load(path, overrides)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "experiment".into());
        Ok(Experiment { config, name })
    }

    pub fn from_config(config: ExperimentConfig, name: &str) -> Self {
        Experiment { config, name: name.to_string() }
    }

    fn path(&self, suffix: &str) -> CmdResult<PathBuf> {
        fs::create_dir_all(&self.config.output_dir).map_err(|e| CmdError::Io(format!("{}: {e}", self.config.output_dir.display())))?;
        Ok(self.config.output_dir.join(format!("{}.{suffix}", self.name)))
    }

    /// Seeds to run: all of them for random paths, one otherwise.
    fn seeds(&self) -> Vec<u64> {
        if self.config.reality.is_random() {
            self.config.seeds.clone()
        } else {
            self.config.seeds[..1].to_vec()
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult<()> {
    let mut w = BufWriter::new(fs::File::create(path).map_err(|e| CmdError::Io(format!("{}: {e}", path.display())))?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CmdError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> CmdResult<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| CmdError::Io(format!("{}: {e}", path.display())))?))
}

/// Empty for absent cells.
fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}
