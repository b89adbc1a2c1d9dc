//! Actuation chain models: propeller aerodynamics, the one-way bearing
//! between each motor and its propeller, the belt/differential drivetrain,
//! the wheel traction limit and electrical power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec3;

pub const GRAVITY: f64 = 9.81;

/// Hover power the default thrust coefficient is calibrated against (W).
pub const DEFAULT_HOVER_POWER: f64 = 124.35;

/// Rotor positions in units of the rotor spacing `l`, as (x forward,
/// y left). Motors 1 and 2 sit on the right side (front, rear) and drive
/// the right wheel; 3 and 4 sit on the left (rear, front).
pub const ROTOR_POSITIONS: [(f64, f64); 4] = [(1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)];

/// Sign of each rotor's aerodynamic reaction torque about body z.
pub const ROTOR_YAW_SIGNS: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    pub mass: f64,
    /// Diagonal of the body inertia (kg m^2).
    pub inertia: Vec3,
    pub rotor_spacing_l: f64,
    pub thrust_to_torque_k: f64,
    /// Position-loop natural frequency (rad/s).
    pub omega_nat: f64,
    pub zeta: f64,
    pub tau_att: Vec3,
    pub tau_omega: Vec3,
    /// Inverse wheel radius (1/m).
    pub wheel_radius_inv_k1: f64,
    /// Lateral wheel offset from the centre (m).
    pub wheel_offset_k2: f64,
    /// Pulley-belt reduction ratio.
    pub reduction_k3: f64,
    /// Ground-mode idle motor speed (rad/s).
    pub idle_speed_wi: f64,
    /// f = c_t * omega^2 (N s^2 / rad^2).
    pub thrust_coeff_ct: f64,
    pub bearing_friction_torque: f64,
    pub prop_inertia: f64,
    /// Freewheeling propeller drag torque coefficient (N m s^2 / rad^2).
    pub prop_drag_coeff: f64,
    pub motor_time_constant: f64,
    pub drive_efficiency: f64,
    pub motor_efficiency: f64,
    pub idle_power: f64,
    pub rolling_resist_coeff: f64,
    /// Fraction of the lateral tyre force lost as scrub while turning.
    pub turn_scrub_coeff: f64,
    pub traction_mu: f64,
    /// Saturation on |a_des| (m/s^2).
    pub accel_sat: f64,
    /// Motor speed ceiling (rad/s) in either direction.
    pub max_motor_speed: f64,
    /// Length of the motor reversal ramp between modes (s).
    pub transition_duration: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        let mut p = Self {
            mass: 0.8,
            inertia: Vec3::new(4e-3, 4e-3, 7e-3),
            rotor_spacing_l: 0.22,
            thrust_to_torque_k: 0.014,
            omega_nat: hz_to_rad_s(2.0),
            zeta: 1.0,
            tau_att: Vec3::new(0.2, 0.2, 0.5),
            tau_omega: Vec3::new(0.05, 0.05, 0.2),
            wheel_radius_inv_k1: 1.0 / 0.03,
            wheel_offset_k2: 0.11,
            reduction_k3: 3.0,
            idle_speed_wi: 150.0,
            thrust_coeff_ct: 3.1e-6,
            bearing_friction_torque: 2e-4,
            prop_inertia: 2e-5,
            prop_drag_coeff: 8e-8,
            motor_time_constant: 0.03,
            drive_efficiency: 0.85,
            motor_efficiency: 0.70,
            idle_power: 3.5,
            rolling_resist_coeff: 0.015,
            turn_scrub_coeff: 0.6,
            traction_mu: 0.60,
            accel_sat: 2.0 * GRAVITY,
            max_motor_speed: 1200.0,
            transition_duration: 0.1,
        };
        p.thrust_coeff_ct =
            calibrate_thrust_coeff(DEFAULT_HOVER_POWER, &p).expect("default parameters calibrate");
        p
    }
}

pub fn hz_to_rad_s(hz: f64) -> f64 {
    hz * std::f64::consts::TAU
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("inertia.x", self.inertia.x),
            ("inertia.y", self.inertia.y),
            ("inertia.z", self.inertia.z),
            ("rotor_spacing_l", self.rotor_spacing_l),
            ("thrust_to_torque_k", self.thrust_to_torque_k),
            ("omega_nat", self.omega_nat),
            ("tau_att.x", self.tau_att.x),
            ("tau_att.y", self.tau_att.y),
            ("tau_att.z", self.tau_att.z),
            ("tau_omega.x", self.tau_omega.x),
            ("tau_omega.y", self.tau_omega.y),
            ("tau_omega.z", self.tau_omega.z),
            ("wheel_radius_inv_k1", self.wheel_radius_inv_k1),
            ("wheel_offset_k2", self.wheel_offset_k2),
            ("reduction_k3", self.reduction_k3),
            ("idle_speed_wi", self.idle_speed_wi),
            ("thrust_coeff_ct", self.thrust_coeff_ct),
            ("bearing_friction_torque", self.bearing_friction_torque),
            ("prop_inertia", self.prop_inertia),
            ("prop_drag_coeff", self.prop_drag_coeff),
            ("motor_time_constant", self.motor_time_constant),
            ("drive_efficiency", self.drive_efficiency),
            ("motor_efficiency", self.motor_efficiency),
            ("idle_power", self.idle_power),
            ("rolling_resist_coeff", self.rolling_resist_coeff),
            ("accel_sat", self.accel_sat),
            ("max_motor_speed", self.max_motor_speed),
            ("transition_duration", self.transition_duration),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        if !(self.zeta.is_finite() && self.zeta >= 0.0) {
            return Err(Error::InvalidParam {
                name: "zeta",
                reason: format!("must be >= 0, got {}", self.zeta),
            });
        }
        if !(self.turn_scrub_coeff.is_finite() && self.turn_scrub_coeff >= 0.0) {
            return Err(Error::InvalidParam {
                name: "turn_scrub_coeff",
                reason: format!("must be >= 0, got {}", self.turn_scrub_coeff),
            });
        }
        for (name, v) in [
            ("drive_efficiency", self.drive_efficiency),
            ("motor_efficiency", self.motor_efficiency),
        ] {
            if v > 1.0 {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("efficiency must lie in (0, 1], got {v}"),
                });
            }
        }
        if !(self.traction_mu > 0.0 && self.traction_mu < 2.0) {
            return Err(Error::InvalidParam {
                name: "traction_mu",
                reason: format!("must lie in (0, 2), got {}", self.traction_mu),
            });
        }
        if self.max_motor_speed <= self.idle_speed_wi {
            return Err(Error::InvalidParam {
                name: "max_motor_speed",
                reason: "must exceed the idle speed".into(),
            });
        }
        Ok(())
    }

    /// Per-rotor thrust at hover (N).
    pub fn hover_thrust(&self) -> f64 {
        self.mass * GRAVITY / 4.0
    }

    /// Motor speed producing hover thrust on each rotor (rad/s).
    pub fn hover_speed(&self) -> f64 {
        (self.hover_thrust() / self.thrust_coeff_ct).sqrt()
    }
}

/// Signed motor speed setpoints (rad/s); positive is the flight direction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotorCommand(pub [f64; 4]);

impl MotorCommand {
    pub fn uniform(speed: f64) -> Self {
        Self([speed; 4])
    }

    /// Linear blend `self + (other - self) * s`.
    pub fn lerp(&self, other: &MotorCommand, s: f64) -> MotorCommand {
        let mut out = self.0;
        for (o, b) in out.iter_mut().zip(other.0) {
            *o += (b - *o) * s;
        }
        MotorCommand(out)
    }
}

/// Per-rotor actuator state. Motor speeds are signed (positive spins the
/// propeller forward); propeller speeds are spin magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorState {
    pub motor_speed: [f64; 4],
    pub prop_speed: [f64; 4],
    pub engaged: [bool; 4],
}

impl ActuatorState {
    /// All four motors spinning at `speed` with the bearings settled
    /// accordingly.
    pub fn uniform(speed: f64) -> Self {
        if speed >= 0.0 {
            Self {
                motor_speed: [speed; 4],
                prop_speed: [speed; 4],
                engaged: [true; 4],
            }
        } else {
            Self {
                motor_speed: [speed; 4],
                prop_speed: [0.0; 4],
                engaged: [false; 4],
            }
        }
    }

    pub fn is_consistent(&self) -> bool {
        (0..4).all(|i| {
            self.prop_speed[i] >= 0.0
                && (!self.engaged[i]
                    || (self.motor_speed[i] >= 0.0 && self.prop_speed[i] == self.motor_speed[i]))
        })
    }
}

pub fn propeller_thrust(prop_speed: f64, params: &VehicleParams) -> Result<f64> {
    if prop_speed < 0.0 || prop_speed.is_nan() {
        return Err(Error::NegativeInput {
            quantity: "propeller speed",
            value: prop_speed,
        });
    }
    Ok(params.thrust_coeff_ct * prop_speed * prop_speed)
}

pub fn propeller_torque(thrust: f64, params: &VehicleParams) -> Result<f64> {
    if thrust < 0.0 || thrust.is_nan() {
        return Err(Error::NegativeInput {
            quantity: "thrust",
            value: thrust,
        });
    }
    Ok(params.thrust_to_torque_k * thrust)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingOutput {
    pub prop_speed: f64,
    pub engaged: bool,
    /// Torque the propeller loads the motor with (N m).
    pub reaction_torque: f64,
}

/// Advances one propeller through its one-way bearing.
///
/// The bearing locks when the motor drives forward at least as fast as the
/// propeller. Otherwise the propeller coasts: it only feels the bearing's
/// drag torque, pulling its spin magnitude toward the motor's, and its own
/// aerodynamic drag.
pub fn bearing_step(
    motor_speed: f64,
    prop_speed: f64,
    dt: f64,
    params: &VehicleParams,
) -> BearingOutput {
    let prop_speed = prop_speed.max(0.0);
    if motor_speed >= prop_speed {
        let thrust = params.thrust_coeff_ct * motor_speed * motor_speed;
        return BearingOutput {
            prop_speed: motor_speed,
            engaged: true,
            reaction_torque: params.thrust_to_torque_k * thrust,
        };
    }
    let slip = motor_speed.abs() - prop_speed;
    let friction = params.bearing_friction_torque * sign(slip);
    let drag = params.prop_drag_coeff * prop_speed * prop_speed;
    let accel = (friction - drag) / params.prop_inertia;
    let next = (prop_speed + accel * dt).max(0.0);
    BearingOutput {
        prop_speed: next,
        engaged: false,
        reaction_torque: -friction,
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Steady coasting speed of a propeller dragged along by a reversed motor.
pub fn freewheel_steady_speed(params: &VehicleParams) -> f64 {
    (params.bearing_friction_torque / params.prop_drag_coeff).sqrt()
}

/// Exact discretisation of the first-order motor lag.
pub fn motor_lag_step(current: f64, command: f64, dt: f64, params: &VehicleParams) -> f64 {
    let alpha = 1.0 - (-dt / params.motor_time_constant).exp();
    current + (command - current) * alpha
}

/// Wheel speed from one opposing motor pair. `rev_a` and `rev_b` are the
/// reverse-direction speed magnitudes of the pair's two motors.
pub fn drivetrain_wheel_speed(rev_a: f64, rev_b: f64, params: &VehicleParams) -> f64 {
    (rev_b - rev_a) / (2.0 * params.reduction_k3)
}

/// Right and left wheel speeds produced by four signed motor speeds.
pub fn wheels_from_motors(motor_speed: &[f64; 4], params: &VehicleParams) -> (f64, f64) {
    let rev = motor_speed.map(|w| -w);
    (
        drivetrain_wheel_speed(rev[0], rev[1], params),
        drivetrain_wheel_speed(rev[3], rev[2], params),
    )
}

/// True when the tyres hold on a slope of `slope_deg`.
pub fn traction_check(slope_deg: f64, params: &VehicleParams) -> bool {
    slope_deg.to_radians().tan() <= params.traction_mu
}

/// Electrical power drawn by the motors for the given rotor thrusts (W).
pub fn electrical_power_flight(thrusts: &[f64; 4], params: &VehicleParams) -> f64 {
    thrusts
        .iter()
        .map(|&f| {
            let f = f.max(0.0);
            params.thrust_to_torque_k * f * (f / params.thrust_coeff_ct).sqrt()
        })
        .sum::<f64>()
        / params.motor_efficiency
}

/// Electrical power while driving (W).
///
/// Idle loss plus traction work against grade, rolling resistance,
/// longitudinal acceleration and turning scrub, all through the drivetrain
/// efficiency. Never below the idle power.
pub fn electrical_power_ground(
    speed: f64,
    slope_deg: f64,
    accel: f64,
    yaw_rate: f64,
    params: &VehicleParams,
) -> f64 {
    let v = speed.abs();
    let theta = slope_deg.to_radians();
    let weight = params.mass * GRAVITY;
    let lateral = params.mass * (v * yaw_rate).abs();
    let force = weight * theta.sin()
        + params.rolling_resist_coeff * weight * theta.cos()
        + params.mass * accel
        + params.turn_scrub_coeff * lateral;
    let p = params.idle_power + force * v / params.drive_efficiency;
    p.max(params.idle_power)
}

/// Thrust coefficient making hover draw `target_hover_power` watts.
pub fn calibrate_thrust_coeff(target_hover_power: f64, params: &VehicleParams) -> Result<f64> {
    if !(target_hover_power.is_finite() && target_hover_power > 0.0) {
        return Err(Error::Calibration(format!(
            "target power must be positive, got {target_hover_power}"
        )));
    }
    // P = 4 k f^1.5 / (eta sqrt(c_t))
    let f = params.hover_thrust();
    let root = 4.0 * params.thrust_to_torque_k * f.powf(1.5)
        / (params.motor_efficiency * target_hover_power);
    let ct = root * root;
    if !(ct.is_finite() && ct > 0.0) {
        return Err(Error::Calibration(format!("solve produced c_t = {ct}")));
    }
    Ok(ct)
}

/// Forward allocation from rotor thrusts to (tau_x, tau_y, tau_z, f_tot),
/// built from the rotor layout.
pub fn allocation_matrix(params: &VehicleParams) -> [[f64; 4]; 4] {
    let l = params.rotor_spacing_l;
    let k = params.thrust_to_torque_k;
    let mut a = [[0.0; 4]; 4];
    for i in 0..4 {
        let (x, y) = ROTOR_POSITIONS[i];
        // r x (0, 0, f) = (y f, -x f, 0)
        a[0][i] = y * l;
        a[1][i] = -x * l;
        a[2][i] = ROTOR_YAW_SIGNS[i] * k;
        a[3][i] = 1.0;
    }
    a
}

/// Body torque and total thrust from rotor thrusts and the yaw reaction
/// torque of each rotor.
pub fn body_wrench(
    thrusts: &[f64; 4],
    yaw_reaction: &[f64; 4],
    params: &VehicleParams,
) -> (f64, Vec3) {
    let l = params.rotor_spacing_l;
    let mut torque = Vec3::ZERO;
    let mut total = 0.0;
    for i in 0..4 {
        let (x, y) = ROTOR_POSITIONS[i];
        torque += Vec3::new(
            y * l * thrusts[i],
            -x * l * thrusts[i],
            ROTOR_YAW_SIGNS[i] * yaw_reaction[i],
        );
        total += thrusts[i];
    }
    (total, torque)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params() -> VehicleParams {
        VehicleParams::default()
    }

    #[test]
    fn defaults_are_valid() {
        let p = params();
        p.validate().unwrap();
        assert_abs_diff_eq!(p.omega_nat, 12.566_370_614_359_172, epsilon = 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params();
        p.mass = 0.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.traction_mu = 2.5;
        assert!(p.validate().is_err());
        let mut p = params();
        p.zeta = -0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn thrust_law() {
        let p = params();
        assert_eq!(propeller_thrust(0.0, &p).unwrap(), 0.0);
        let f1 = propeller_thrust(400.0, &p).unwrap();
        let f2 = propeller_thrust(800.0, &p).unwrap();
        assert_abs_diff_eq!(f2, 4.0 * f1, epsilon = 1e-12);
        assert!(propeller_thrust(-1.0, &p).is_err());
    }

    #[test]
    fn thrust_at_hover_speed_with_calibrated_coefficient() {
        let mut p = params();
        p.thrust_coeff_ct = 3.1e-6;
        assert_abs_diff_eq!(propeller_thrust(795.0, &p).unwrap(), 1.959, epsilon = 0.01);
        let p = params();
        assert_abs_diff_eq!(
            propeller_thrust(p.hover_speed(), &p).unwrap(),
            1.962,
            epsilon = 1e-12
        );
    }

    #[test]
    fn torque_law() {
        let p = params();
        assert_abs_diff_eq!(propeller_torque(1.0, &p).unwrap(), 0.014, epsilon = 1e-15);
        assert_eq!(propeller_torque(0.0, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(
            propeller_torque(1.962, &p).unwrap(),
            0.02747,
            epsilon = 1e-5
        );
        assert!(propeller_torque(-0.5, &p).is_err());
    }

    #[test]
    fn bearing_locks_on_forward_drive() {
        let p = params();
        let out = bearing_step(600.0, 600.0, 0.002, &p);
        assert!(out.engaged);
        assert_eq!(out.prop_speed, 600.0);
        let f = propeller_thrust(600.0, &p).unwrap();
        assert_abs_diff_eq!(
            out.reaction_torque,
            p.thrust_to_torque_k * f,
            epsilon = 1e-15
        );
    }

    #[test]
    fn bearing_at_rest() {
        let p = params();
        let out = bearing_step(0.0, 0.0, 0.002, &p);
        assert_eq!(out.prop_speed, 0.0);
        assert_eq!(out.reaction_torque, 0.0);
    }

    #[test]
    fn reversed_motor_lets_prop_coast_to_slow_spin() {
        let p = params();
        // friction = drag at sqrt(2e-4 / 8e-8) = 50 rad/s
        let expected = (p.bearing_friction_torque / p.prop_drag_coeff).sqrt();
        assert_abs_diff_eq!(expected, 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(freewheel_steady_speed(&p), expected, epsilon = 1e-12);
        let mut prop = 600.0;
        for _ in 0..(600.0 / 0.002) as usize {
            let out = bearing_step(-150.0, prop, 0.002, &p);
            assert!(!out.engaged);
            assert!(out.reaction_torque.abs() <= p.bearing_friction_torque);
            prop = out.prop_speed;
        }
        assert_abs_diff_eq!(prop, expected, epsilon = 0.5);
    }

    #[test]
    fn slower_forward_motor_does_not_drive_prop() {
        let p = params();
        let out = bearing_step(500.0, 600.0, 0.002, &p);
        assert!(!out.engaged);
        assert!(out.prop_speed < 600.0);
    }

    #[test]
    fn drivetrain_examples() {
        let p = params();
        assert_eq!(drivetrain_wheel_speed(150.0, 150.0, &p), 0.0);
        assert_abs_diff_eq!(
            drivetrain_wheel_speed(150.0, 250.0, &p),
            16.667,
            epsilon = 1e-3
        );
        assert_eq!(
            drivetrain_wheel_speed(250.0, 150.0, &p),
            -drivetrain_wheel_speed(150.0, 250.0, &p)
        );
    }

    #[test]
    fn traction_examples() {
        let p = params();
        assert!(traction_check(0.0, &p));
        assert!(traction_check(30.0, &p));
        assert!(traction_check(30.9, &p));
        assert!(!traction_check(31.0, &p));
        assert!(!traction_check(35.0, &p));
    }

    #[test]
    fn flight_power_calibrated_to_hover() {
        let p = params();
        assert_eq!(electrical_power_flight(&[0.0; 4], &p), 0.0);
        let hover = electrical_power_flight(&[p.hover_thrust(); 4], &p);
        assert_abs_diff_eq!(hover, 124.35, epsilon = 0.5);
        let mut more = [p.hover_thrust(); 4];
        more[2] += 0.01;
        assert!(electrical_power_flight(&more, &p) > hover);
    }

    #[test]
    fn ground_power_examples() {
        let p = params();
        assert_eq!(
            electrical_power_ground(0.0, 0.0, 0.0, 0.0, &p),
            p.idle_power
        );
        let p5 = electrical_power_ground(0.5, 5.0, 0.0, 0.0, &p);
        assert_abs_diff_eq!(p5, 3.9713, epsilon = 1e-3);
        assert_abs_diff_eq!(p5, 4.0, epsilon = 0.05);
        // braking never drops below idle
        assert_eq!(
            electrical_power_ground(0.5, 0.0, -10.0, 0.0, &p),
            p.idle_power
        );
    }

    #[test]
    fn ground_power_circle_within_band() {
        // straight-line part at 1 m/s, then the same speed on r = 0.5 m
        let p = params();
        let straight = electrical_power_ground(1.0, 0.0, 0.0, 0.0, &p);
        assert_abs_diff_eq!(straight, 3.6385, epsilon = 1e-3);
        for (v, measured) in [(1.0, 3.9), (1.5, 8.2), (2.0, 14.9)] {
            let pw = electrical_power_ground(v, 0.0, 0.0, v / 0.5, &p);
            assert!((pw - measured).abs() / measured < 0.30, "{v}: {pw}");
        }
    }

    #[test]
    fn calibration_examples() {
        let p = params();
        let ct = calibrate_thrust_coeff(124.35, &p).unwrap();
        assert_abs_diff_eq!(ct, 3.125_974_305e-6, epsilon = 1e-14);
        let ct2 = calibrate_thrust_coeff(2.0 * 124.35, &p).unwrap();
        assert_abs_diff_eq!(ct2, ct / 4.0, epsilon = 1e-18);
        let mut q = p.clone();
        q.thrust_coeff_ct = ct;
        let residual = electrical_power_flight(&[q.hover_thrust(); 4], &q) - 124.35;
        assert!(residual.abs() < 1e-6);
        assert!(calibrate_thrust_coeff(0.0, &p).is_err());
        assert!(calibrate_thrust_coeff(f64::NAN, &p).is_err());
    }

    #[test]
    fn hover_speed_close_to_795() {
        let p = params();
        let w = p.hover_speed();
        assert_abs_diff_eq!(w, 792.24, epsilon = 0.01);
        assert!((w - 795.0).abs() / 795.0 < 0.01);
    }

    #[test]
    fn allocation_matches_geometry() {
        let p = params();
        let a = allocation_matrix(&p);
        let (f, tau) = body_wrench(
            &[1.0, 2.0, 3.0, 4.0],
            &[1.0, 2.0, 3.0, 4.0].map(|f| p.thrust_to_torque_k * f),
            &p,
        );
        let u = [1.0, 2.0, 3.0, 4.0];
        let row = |r: usize| (0..4).map(|i| a[r][i] * u[i]).sum::<f64>();
        assert_abs_diff_eq!(row(0), tau.x, epsilon = 1e-15);
        assert_abs_diff_eq!(row(1), tau.y, epsilon = 1e-15);
        assert_abs_diff_eq!(row(2), tau.z, epsilon = 1e-15);
        assert_abs_diff_eq!(row(3), f, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn prop_speed_never_negative(
            motor in -1200.0..1200.0f64,
            prop in 0.0..1200.0f64,
            dt in 1e-4..0.01f64,
        ) {
            let p = params();
            let out = bearing_step(motor, prop, dt, &p);
            prop_assert!(out.prop_speed >= 0.0);
            if motor < prop {
                // only friction crosses a disengaged bearing
                prop_assert!(!out.engaged);
                prop_assert!(out.reaction_torque.abs() <= p.bearing_friction_torque);
                prop_assert!(out.prop_speed <= prop + p.bearing_friction_torque / p.prop_inertia * dt + 1e-12);
            } else {
                prop_assert!(out.engaged);
                prop_assert_eq!(out.prop_speed, motor);
            }
        }

        #[test]
        fn equal_thrust_minimizes_power(
            d in proptest::array::uniform4(-0.5..0.5f64),
        ) {
            let p = params();
            let h = p.hover_thrust();
            let mean = d.iter().sum::<f64>() / 4.0;
            let f = [h + d[0] - mean, h + d[1] - mean, h + d[2] - mean, h + d[3] - mean];
            prop_assert!(electrical_power_flight(&f, &p) >= electrical_power_flight(&[h; 4], &p) - 1e-9);
        }

        #[test]
        fn slope_power_covers_climb_work(slope in 0.0..30.0f64, v in 0.05..2.0f64) {
            let p = params();
            let mech = p.mass * GRAVITY * slope.to_radians().sin() * v;
            let elec = electrical_power_ground(v, slope, 0.0, 0.0, &p);
            prop_assert!(elec >= mech);
        }
    }
}
