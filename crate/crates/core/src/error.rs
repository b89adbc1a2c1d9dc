use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("axis-angle needs a finite, nonzero axis and a finite angle")]
    InvalidAxisAngle,
    #[error("{quantity} must be nonnegative, got {value}")]
    NegativeInput { quantity: &'static str, value: f64 },
    #[error("thrust direction undefined: |a_tot| = {0} m/s^2")]
    ThrustDirectionUndefined(f64),
    #[error("commanded acceleration points straight down; inverted attitude is unreachable")]
    InvertedAttitude,
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("time step {0} s outside (0, 0.01]")]
    TimeStep(f64),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("mode change refused: {0}")]
    Interlock(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("metrics: {0}")]
    Metrics(String),
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("config: {0}")]
    ConfigFile(String),
    #[error("telemetry parse error at line {line}: {reason}")]
    TelemetryParse { line: usize, reason: String },
    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
