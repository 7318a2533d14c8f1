use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] energy_shield::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Synthesis found no admissible shield; the outcome was still written.
    #[error("synthesis failed: even the steepest member exceeds the budget")]
    SynthesisFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use energy_shield::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Lib(E::Resource { .. }) => 4,
            CliError::Lib(_) => 2,
            CliError::Io(_) => 1,
            CliError::SynthesisFailed => 3,
        }
    }
}
