//! Configuration, parameter sweeps and CSV output around `dlz_core`.

pub mod config;
pub mod output;
pub mod run;

pub use config::{GridSpec, Point, RunConfig};
pub use run::{Command, Outcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Invalid configuration or output request; nothing was computed.
    #[error("configuration error: {0}")]
    Config(String),

    /// A solver failed; the message carries the last time reached.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::Io(_) => 1,
        }
    }
}

impl From<dlz_core::Error> for HarnessError {
    fn from(e: dlz_core::Error) -> Self {
        HarnessError::Numerical(e.to_string())
    }
}
