use phonon_dephasing::Error as LibError;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error(transparent)]
    Library(LibError),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub fn invalid(key: &str, value: f64, reason: &str) -> Self {
        CliError::Invalid {
            key: key.to_string(),
            reason: format!("{} ({reason})", crate::output::short(value)),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Io { .. } => exit::USAGE,
            CliError::Invalid { .. } => exit::VALIDATION,
            CliError::Library(LibError::Quadrature(_)) => exit::NON_CONVERGENCE,
            CliError::Library(LibError::UnknownPreset { .. }) => exit::USAGE,
            CliError::Library(_) => exit::VALIDATION,
        }
    }
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        CliError::Library(e)
    }
}
