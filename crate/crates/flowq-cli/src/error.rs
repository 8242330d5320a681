use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config `{path}`: {source}")]
    ConfigRead {
        path: String,
        source: std::io::Error,
    },

    #[error("config `{path}` is not valid JSON: {source}")]
    ConfigJson {
        path: String,
        source: serde_json::Error,
    },

    #[error("config schema: {0}")]
    Schema(String),

    #[error("config declares algorithm `{config}` but the `{subcommand}` subcommand was invoked")]
    AlgorithmMismatch { config: String, subcommand: String },

    #[error("sweep grid has {points} points, cap is {cap}")]
    GridTooLarge { points: usize, cap: usize },

    #[error("oracle check `{check}` failed: deviation {delta:.3e} exceeds tolerance {tolerance:.1e}")]
    OracleCheck {
        check: String,
        delta: f64,
        tolerance: f64,
    },

    #[error("cannot write `{path}`: {source}")]
    OutputWrite {
        path: String,
        source: std::io::Error,
    },

    #[error("environment variable {name} is not a positive integer: `{value}`")]
    BadEnvVar { name: String, value: String },

    #[error(transparent)]
    Lib(#[from] flowq::Error),

    #[error("report serialization: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
