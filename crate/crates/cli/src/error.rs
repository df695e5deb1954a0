use thiserror::Error;

/// Everything the binary can fail with, mapped onto the exit-code contract:
/// 2 for anything wrong with the input text or invocation, 3 for a
/// precondition the mathematics rejects, 4 for a broken internal invariant.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{message}")]
    Usage { message: String },
    #[error("{message}")]
    Io { message: String },
    #[error("{message}")]
    Precondition { message: String },
    #[error("{message}")]
    Internal { message: String },
}

/// Columns are 0-based byte offsets within the line; lines are 1-based.
/// Single-line input drops the line prefix so expression-level diagnostics
/// read as a plain column report.
#[derive(Debug, Error)]
#[error("{}", self.render())]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn render(&self) -> String {
        if self.line <= 1 {
            format!("syntax error at column {}: {}", self.column, self.message)
        } else {
            format!(
                "syntax error at line {}, column {}: {}",
                self.line, self.column, self.message
            )
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Usage { .. } | CliError::Io { .. } => 2,
            CliError::Precondition { .. } => 3,
            CliError::Internal { .. } => 4,
        }
    }
}
