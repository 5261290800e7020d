use std::fmt;

/// Process-level failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            kind: "usage".into(),
            message: message.into(),
        }
    }

    pub fn data(kind: &str, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            kind: kind.into(),
            message: message.into(),
        }
    }

    /// `error: kind=<kind> message=<json string>`
    pub fn line(&self) -> String {
        format!(
            "error: kind={} message={}",
            self.kind,
            serde_json::to_string(&self.message).unwrap_or_default()
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<causal_advisor_core::Error> for CliError {
    fn from(e: causal_advisor_core::Error) -> Self {
        Self {
            code: if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_DATA
            },
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data("io", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::data("json", e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
