use std::path::PathBuf;

use manifold_mean_core::GeomError;
use serde_json::{json, Value};
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CONTRACT_FAILURE: i32 = 2;
    pub const INPUT_ERROR: i32 = 3;
    pub const SOLVER_FAILURE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },

    #[error("invalid scene at `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed mesh file {path}, line {line}: {message}")]
    MeshFormat { path: PathBuf, line: usize, message: String },

    #[error(transparent)]
    Geom(#[from] GeomError),
}

fn root_cause(e: &GeomError) -> &GeomError {
    match e {
        GeomError::SliceFailed { source, .. } | GeomError::MorphFailed { source, .. } => root_cause(source),
        other => other,
    }
}

fn geom_kind(e: &GeomError) -> &'static str {
    match e {
        GeomError::RankDeficient { .. } => "RankDeficient",
        GeomError::DimensionMismatch { .. } => "DimensionMismatch",
        GeomError::FullSpace => "FullSpace",
        GeomError::SpectralGapTooSmall { .. } => "SpectralGapTooSmall",
        GeomError::WeightError(_) => "WeightError",
        GeomError::BeyondInjectivity { .. } => "BeyondInjectivity",
        GeomError::NotUnique { .. } => "NotUnique",
        GeomError::NoConvergence { .. } => "NoConvergence",
        GeomError::LeftTube { .. } => "LeftTube",
        GeomError::NotPositive { .. } => "NotPositive",
        GeomError::NoSignChange { .. } => "NoSignChange",
        GeomError::EpsilonTooLarge { .. } => "EpsilonTooLarge",
        GeomError::SliceFailed { .. } => "SliceFailed",
        GeomError::MorphFailed { .. } => "MorphFailed",
        GeomError::InvalidShape(_) => "InvalidShape",
        GeomError::InvalidIsometry(_) => "InvalidIsometry",
        GeomError::Unsupported(_) => "Unsupported",
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "IoError",
            CliError::Parse { .. } => "ParseError",
            CliError::Validation { .. } => "ValidationError",
            CliError::UnsupportedFormat(_) => "UnsupportedFormat",
            CliError::MeshFormat { .. } => "MeshFormatError",
            CliError::Geom(e) => geom_kind(e),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. }
            | CliError::Parse { .. }
            | CliError::Validation { .. }
            | CliError::UnsupportedFormat(_)
            | CliError::MeshFormat { .. } => exit::INPUT_ERROR,
            CliError::Geom(e) => match root_cause(e) {
                GeomError::EpsilonTooLarge { .. } => exit::CONTRACT_FAILURE,
                GeomError::InvalidShape(_)
                | GeomError::InvalidIsometry(_)
                | GeomError::WeightError(_)
                | GeomError::DimensionMismatch { .. }
                | GeomError::Unsupported(_) => exit::INPUT_ERROR,
                _ => exit::SOLVER_FAILURE,
            },
        }
    }

    /// Machine-readable description written to stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        let extra = match self {
            CliError::Parse { line, column, .. } => json!({ "line": line, "column": column }),
            CliError::Validation { key, .. } => json!({ "key": key }),
            CliError::MeshFormat { line, .. } => json!({ "line": line }),
            CliError::Geom(e) => {
                let mut d = json!({ "cause": geom_kind(root_cause(e)) });
                match e {
                    GeomError::SliceFailed { vertex, .. } => d["vertex"] = json!(vertex),
                    GeomError::MorphFailed { time, .. } => d["time"] = json!(time),
                    GeomError::EpsilonTooLarge { epsilon, limit } => {
                        d["epsilon"] = json!(epsilon);
                        d["limit"] = json!(limit);
                    }
                    _ => {}
                }
                d
            }
            _ => json!({}),
        };
        if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
            obj.extend(more);
        }
        v
    }
}
