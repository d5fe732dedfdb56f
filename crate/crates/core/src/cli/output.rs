use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MSCLIMATE_OUT_DIR";

/// Directory used when neither `--out` nor the environment names one.
pub const DEFAULT_OUT_DIR: &str = "msclimate-out";

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}

/// Record of one CLI run, sufficient to repeat it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub subcommand: String,
    /// Command line as given, program name first.
    pub argv: Vec<String>,
    /// Parsed flags, defaults filled in.
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    /// Numerical settings derived from the flags.
    pub config: serde_json::Value,
    pub out_dir: String,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Files produced by a command, written as they are added.
pub struct Outputs {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir, files: Vec::new() }
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir, name, bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}
