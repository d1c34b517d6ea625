use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] nvdnp_core::Error),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use nvdnp_core::Error as E;
        match self {
            CliError::Io { .. } | CliError::Core(E::Io { .. }) => EXIT_IO,
            CliError::Usage(_) => EXIT_VALIDATION,
            CliError::Core(e) => match e {
                E::Parse { .. } | E::Validation { .. } | E::TooLarge { .. } | E::Incompatible(_) => {
                    EXIT_VALIDATION
                }
                _ => EXIT_NUMERICAL,
            },
        }
    }
}
