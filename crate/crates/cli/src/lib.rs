//! Declarative experiment runner: JSON configs in, CSV tables and a manifest out.

pub mod config;
pub mod error;
pub mod exec;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{parse_config, parse_config_str, ExperimentConfig, Parsed, Protocol};
pub use error::{CliError, Violation};
pub use run::{run, RunOptions, RunSummary};

use std::path::{Path, PathBuf};

/// Load a config from a file path, or from a bundled preset when no such
/// file exists. Returns the directory relative paths resolve against.
pub fn load(target: &str) -> Result<(Parsed, Option<PathBuf>), CliError> {
    let path = Path::new(target);
    if path.exists() {
        let parsed = parse_config(path)?;
        return Ok((parsed, path.parent().map(Path::to_path_buf)));
    }
    match presets::preset(target) {
        Some(text) => Ok((parse_config_str(text, None)?, None)),
        None => Err(CliError::Config(vec![Violation::new("", &format!("`{target}` is neither a file nor a bundled preset"))])),
    }
}
