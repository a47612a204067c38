use serde::Serialize;
use thiserror::Error;

/// One config problem at a key path such as `params.duration_ns`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: &str, message: &str) -> Self {
        Self { path: path.to_string(), message: message.to_string() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Config(Vec<Violation>),
    #[error("{0}")]
    Core(#[from] floquet_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            _ => 2,
        }
    }

    /// Machine-readable record written to stderr on failure.
    pub fn record(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Core(_) => "protocol",
            CliError::Io(_) | CliError::Csv(_) => "io",
            CliError::Runtime(_) => "runtime",
        };
        let mut v = serde_json::json!({ "error": kind, "message": self.to_string(), "exit_code": self.exit_code() });
        if let CliError::Config(list) = self {
            v["violations"] = serde_json::to_value(list).expect("violations serialize");
        }
        v
    }
}
