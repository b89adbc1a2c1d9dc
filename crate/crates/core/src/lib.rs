//! Controllers and a fixed-step simulator for a quadrotor that also drives
//! on the ground. Reversing the motors disengages the propellers through
//! one-way bearings and drives two wheels through differentials.

// `!(x > 0.0)` is used on purpose so NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod flight;
pub mod ground;
pub mod math;
pub mod metrics;
pub mod mode;
pub mod scenario;
pub mod sim;
pub mod telemetry;
pub mod vehicle;

pub use error::{Error, Result};
pub use math::{AxisAngle, RotationMatrix, Vec3};
pub use metrics::{compute_metrics, MetricsReport};
pub use mode::{Locomotion, Mode};
pub use scenario::Scenario;
pub use sim::{run_scenario, RunOptions, RunOutcome, RunStatus, Terrain, VehicleState};
pub use telemetry::TelemetryRecord;
pub use vehicle::{MotorCommand, VehicleParams};
