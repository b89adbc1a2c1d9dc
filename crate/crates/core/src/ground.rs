//! Ground mode: body speed commands to wheel speeds to reverse-direction
//! motor speeds, keeping every motor at or above its idle speed.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::vehicle::{MotorCommand, VehicleParams};

/// Desired forward speed (m/s) and yaw rate (rad/s, counter-clockwise).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundSetpoint {
    pub v_x: f64,
    pub omega_z: f64,
}

impl GroundSetpoint {
    pub const STOP: GroundSetpoint = GroundSetpoint {
        v_x: 0.0,
        omega_z: 0.0,
    };

    pub fn new(v_x: f64, omega_z: f64) -> Self {
        Self { v_x, omega_z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelSpeeds {
    pub right: f64,
    pub left: f64,
}

/// Motor pairs sharing a differential: (1, 2) on the right, (3, 4) on the
/// left, as zero-based indices.
pub const MOTOR_PAIRS: [(usize, usize); 2] = [(0, 1), (2, 3)];

pub fn wheel_speeds(sp: &GroundSetpoint, params: &VehicleParams) -> WheelSpeeds {
    let k1 = params.wheel_radius_inv_k1;
    let k2 = params.wheel_offset_k2;
    WheelSpeeds {
        right: k1 * (sp.v_x + k2 * sp.omega_z),
        left: k1 * (sp.v_x - k2 * sp.omega_z),
    }
}

/// Reverse-direction motor speed magnitudes before any clamping.
pub fn motor_commands(w: &WheelSpeeds, params: &VehicleParams) -> [f64; 4] {
    let k3 = params.reduction_k3;
    let wi = params.idle_speed_wi;
    [
        -k3 * w.right + wi,
        k3 * w.right + wi,
        k3 * w.left + wi,
        -k3 * w.left + wi,
    ]
}

/// Raises any command below the idle speed and shifts its partner by the
/// same amount so the pair difference is kept. If both motors of a pair
/// are low the pair moves up by the larger deficit.
pub fn clamp_commands(cmd: [f64; 4], params: &VehicleParams) -> [f64; 4] {
    let floor = params.idle_speed_wi;
    let mut out = cmd;
    for (a, b) in MOTOR_PAIRS {
        let deficit = (floor - out[a]).max(floor - out[b]);
        if deficit > 0.0 {
            out[a] += deficit;
            out[b] += deficit;
            // the raised motor lands exactly on the floor
            if out[a] < out[b] {
                out[a] = floor;
            } else {
                out[b] = floor;
            }
        }
    }
    out
}

/// Enforces the motor speed ceiling on clamped commands. A pair whose
/// faster motor is over the ceiling is shifted down keeping its
/// difference; if the difference alone does not fit above the idle floor
/// it is shrunk. Returns whether anything was limited.
pub fn limit_commands(cmd: [f64; 4], params: &VehicleParams) -> ([f64; 4], bool) {
    let ceiling = params.max_motor_speed;
    let floor = params.idle_speed_wi;
    let mut out = cmd;
    let mut limited = false;
    for (a, b) in MOTOR_PAIRS {
        let hi = out[a].max(out[b]);
        if hi <= ceiling {
            continue;
        }
        limited = true;
        let diff = (out[a] - out[b]).abs().min(ceiling - floor);
        let (fast, slow) = if out[a] >= out[b] { (a, b) } else { (b, a) };
        out[fast] = ceiling;
        out[slow] = ceiling - diff;
    }
    if limited {
        debug!("ground command over ceiling {ceiling}: {cmd:?} -> {out:?}");
    }
    (out, limited)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundOutput {
    pub command: MotorCommand,
    pub wheels: WheelSpeeds,
    pub limited: bool,
}

pub fn ground_control(sp: &GroundSetpoint, params: &VehicleParams) -> GroundOutput {
    let wheels = wheel_speeds(sp, params);
    let clamped = clamp_commands(motor_commands(&wheels, params), params);
    let (magnitudes, limited) = limit_commands(clamped, params);
    GroundOutput {
        command: MotorCommand(magnitudes.map(|w| -w)),
        wheels,
        limited,
    }
}

/// Signed motor setpoints for ground mode; all negative (reverse spin).
pub fn ground_step(sp: &GroundSetpoint, params: &VehicleParams) -> MotorCommand {
    ground_control(sp, params).command
}
