//! Exit-code buckets: 0 success, 1 domain error, 2 usage or I/O error.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Unsatisfiable constraints, no-gap spectra, failed backends: exit 1.
    Domain(String),
    /// Bad flags, unreadable or malformed files: exit 2.
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(msg) | CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

pub fn domain(e: impl fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

pub fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Reads a file, naming the path in the failure message.
pub fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}
