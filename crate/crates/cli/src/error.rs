use std::path::PathBuf;

use ghostsim_core::Error as CoreError;
use thiserror::Error;

use crate::scenario::ConfigError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),

    #[error("{context}: {source}")]
    Core { context: String, source: CoreError },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }

    /// 2 for configuration problems (including arguments rejected by the
    /// kernels), 3 for numerical or degenerate-statistics failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Core { source, .. } => match source {
                CoreError::InvalidArgument(_) | CoreError::UnsupportedProfile(_) => EXIT_CONFIG,
                CoreError::Shape(_)
                | CoreError::Aliasing { .. }
                | CoreError::DegenerateStatistics(_)
                | CoreError::NotMeasurable(_) => EXIT_NUMERICAL,
            },
            RunError::Io { .. } => EXIT_IO,
        }
    }
}
