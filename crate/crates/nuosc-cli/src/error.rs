use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown preset {0:?}; available: {1}")]
    UnknownPreset(String, String),
    #[error(transparent)]
    Sim(#[from] nuosc::Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("gate-count mismatch: {0}")]
    CountMismatch(String),
    #[error("{0} neutrinos need {1} tomography settings; set tomography.allow_large = true to proceed")]
    TooManySettings(usize, usize),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}
