use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] tempir::Error),
    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config { .. } => "invalid-config",
            CliError::Usage(_) => "usage",
            CliError::Output { .. } => "output",
        }
    }

    /// 2 for bad or unreadable input, 1 for failures while producing output.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(tempir::Error::TemporalViolation { .. }) | CliError::Output { .. } => 1,
            _ => 2,
        }
    }

    /// `error: kind=<kind> message=<text>` on one line.
    pub fn render(&self) -> String {
        let message: String = self
            .to_string()
            .chars()
            .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        format!("error: kind={} message={message}", self.kind())
    }
}

pub(crate) fn output_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Output { path, source }
}
