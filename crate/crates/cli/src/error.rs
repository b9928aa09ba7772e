use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Solver(#[from] mtfse::error::Error),
    #[error("blow-up detected at t = {t}")]
    BlowUp { t: f64 },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit status: 3 for blow-up, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::BlowUp { .. } => 3,
            _ => 1,
        }
    }
}
