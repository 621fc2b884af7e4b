use std::path::PathBuf;

use e4surf_core::GeomError;
use thiserror::Error;

fn at(line: &Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("{}unknown key `{key}`", at(.line))]
    UnknownKey { line: Option<usize>, key: String },
    #[error("{}cannot parse `{value}` for `{key}`", at(.line))]
    Value { line: Option<usize>, key: String, value: String },
    #[error("{}`{key}` {reason}", at(.line))]
    Invalid { line: Option<usize>, key: String, reason: String },
    #[error("missing required key {0}")]
    Missing(&'static str),
    #[error("override `{0}` is not of the form KEY=VALUE")]
    Override(String),
    #[error("{0}")]
    Surface(String),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numeric error: {0}")]
    Numeric(#[from] GeomError),
    #[error("{count} requested check(s) failed to evaluate")]
    ChecksErrored { count: usize },
    #[error("cannot access {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::ChecksErrored { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}
