use serde::Serialize;

use dispersim_core::Error;

/// Failure class, which fixes the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Config,
    ResourceCap,
    Accuracy,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::ResourceCap => 3,
            ErrorKind::Accuracy => 4,
            ErrorKind::Numerical => 5,
        }
    }
}

/// Error record printed as one JSON line on stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            field: None,
            line: None,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn config_field(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: Some(field.to_owned()),
            ..Self::config(message)
        }
    }

    pub fn config_parse(message: &str, line: Option<usize>) -> Self {
        Self {
            line,
            ..Self::config(message.replace('\n', " "))
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn to_json(&self) -> String {
        let mut record = serde_json::to_value(self).expect("error record serializes");
        record["exit_code"] = self.exit_code().into();
        serde_json::to_string(&record).expect("error record serializes")
    }

    /// Attaches the config key a library rejection traces back to.
    pub fn at(mut self, field: &str) -> Self {
        if self.field.is_none() && self.kind == ErrorKind::Config {
            self.field = Some(field.to_owned());
        }
        self
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::InvalidInput(_) => ErrorKind::Config,
            Error::ResourceLimit { .. } | Error::Truncation { .. } => ErrorKind::ResourceCap,
            Error::AccuracyFailure { .. } => ErrorKind::Accuracy,
            Error::Numerical(_) => ErrorKind::Numerical,
        };
        Self::new(kind, e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}
