//! Orchestration behind the `fracns` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod manifest;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
            CliError::MalformedJson(_) => 5,
        }
    }
}

impl From<fracns::Error> for CliError {
    fn from(e: fracns::Error) -> Self {
        use fracns::Error as E;
        match e {
            E::Io(err) => CliError::Io(err.to_string()),
            E::Format(_) => CliError::Io(e.to_string()),
            E::Numerical(_) | E::NonFinite { .. } | E::NotHermitian { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(vec![other.to_string()]),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
