//! Error classification onto the exit-code contract: 1 for I/O, 2 for
//! configuration, 3 for physics-domain conditions such as a dark port or a
//! wavefunction node.

use std::fmt;

use weakwave::Error as PhysicsError;

#[derive(Debug)]
pub enum CliError {
    Io(std::io::Error),
    Config(String),
    Physics(String),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn physics(message: impl Into<String>) -> Self {
        CliError::Physics(message.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(err) => write!(f, "i/o error: {err}"),
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Physics(msg) => write!(f, "physics error: {msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err)
    }
}

impl From<PhysicsError> for CliError {
    fn from(err: PhysicsError) -> Self {
        match err {
            PhysicsError::OrthogonalPostselection { .. }
            | PhysicsError::ZeroPostselectedIntensity
            | PhysicsError::NodePoint { .. }
            | PhysicsError::ZeroDensity { .. }
            | PhysicsError::SmallOverlap { .. }
            | PhysicsError::DegenerateAmplifier { .. }
            | PhysicsError::NonCenteredProfile { .. } => CliError::Physics(err.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
