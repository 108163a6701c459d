use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Usage(#[from] clap::Error),

    #[error(transparent)]
    Core(#[from] bss_core::Error),

    #[error("i/o error on {target}: {source}")]
    Io {
        target: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(target: impl Into<String>, source: io::Error) -> Self {
        CliError::Io {
            target: target.into(),
            source,
        }
    }

    /// 2 for bad configuration, 3 for numerical failure, 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 4,
        }
    }
}
