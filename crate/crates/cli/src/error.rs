use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("numerical failure in {module}: {source}")]
    Numerical {
        module: &'static str,
        source: fano_tunnel::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical { .. } => 2,
        }
    }

    pub fn numerical(module: &'static str) -> impl FnOnce(fano_tunnel::Error) -> CliError {
        move |source| CliError::Numerical { module, source }
    }
}
