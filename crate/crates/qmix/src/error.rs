use serde_json::{json, Value};

/// Failures surfaced by the CLI, each mapped to one exit code.
#[derive(Debug)]
pub enum CliError {
    /// Spec or invocation could not be parsed or validated.
    Malformed {
        message: String,
        field: Option<String>,
        line: Option<usize>,
        column: Option<usize>,
    },
    NotPrimitive(String),
    /// A theorem-level consistency check failed; the report was still written.
    Verdict(String),
    Io {
        path: String,
        message: String,
    },
    /// Command line could not be parsed.
    Usage(String),
    /// Numerical failure while analysing a valid spec.
    Numeric(qmix_core::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_NOT_PRIMITIVE: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;

impl CliError {
    pub fn malformed(message: impl Into<String>, field: impl Into<String>) -> Self {
        CliError::Malformed {
            message: message.into(),
            field: Some(field.into()),
            line: None,
            column: None,
        }
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotPrimitive(_) => EXIT_NOT_PRIMITIVE,
            CliError::Verdict(_) => EXIT_VERDICT,
            CliError::Malformed { .. }
            | CliError::Io { .. }
            | CliError::Usage(_)
            | CliError::Numeric(_) => EXIT_MALFORMED,
        }
    }

    pub fn to_json(&self) -> Value {
        let code = self.exit_code();
        match self {
            CliError::Malformed {
                message,
                field,
                line,
                column,
            } => json!({
                "error": "malformed_spec",
                "message": message,
                "field": field,
                "line": line,
                "column": column,
                "exit_code": code,
            }),
            CliError::NotPrimitive(note) => json!({
                "error": "not_primitive",
                "message": note,
                "exit_code": code,
            }),
            CliError::Verdict(msg) => json!({
                "error": "verdict_violation",
                "message": msg,
                "exit_code": code,
            }),
            CliError::Io { path, message } => json!({
                "error": "io",
                "path": path,
                "message": message,
                "exit_code": code,
            }),
            CliError::Usage(msg) => json!({
                "error": "usage",
                "message": msg,
                "exit_code": code,
            }),
            CliError::Numeric(e) => json!({
                "error": "numeric",
                "message": e.to_string(),
                "exit_code": code,
            }),
        }
    }
}

impl From<qmix_core::Error> for CliError {
    fn from(e: qmix_core::Error) -> Self {
        match e {
            qmix_core::Error::NotPrimitive(note) => CliError::NotPrimitive(note),
            other => CliError::Numeric(other),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Malformed {
            message: e.to_string(),
            field: None,
            line: Some(e.line()),
            column: Some(e.column()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
