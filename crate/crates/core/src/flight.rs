//! Cascaded flight controller: position loop, attitude loop, mixer and the
//! conversion from rotor thrust to motor speed.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{
    axis_angle_to_matrix, matrix_to_rotvec, yaw_matrix, AxisAngle, RotationMatrix, Vec3,
};
use crate::sim::VehicleState;
use crate::vehicle::{MotorCommand, VehicleParams, GRAVITY};

/// Below this |a_tot| the thrust direction is considered undefined.
const MIN_TOTAL_ACCEL: f64 = 0.1;
const DEGENERATE_AXIS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlightSetpoint {
    pub position: Vec3,
    pub velocity: Vec3,
    pub yaw: f64,
}

impl FlightSetpoint {
    pub fn hold(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            velocity: Vec3::ZERO,
            yaw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotorThrusts {
    pub f: [f64; 4],
    /// At least one rotor asked for negative thrust and was clipped.
    pub clipped: bool,
}

/// Desired acceleration from the PD position law, norm-limited to
/// `accel_sat`. The flag reports whether the limit was active.
pub fn desired_acceleration(
    sp: &FlightSetpoint,
    position: Vec3,
    velocity: Vec3,
    params: &VehicleParams,
) -> (Vec3, bool) {
    let wn = params.omega_nat;
    let a =
        (sp.position - position) * (wn * wn) + (sp.velocity - velocity) * (2.0 * params.zeta * wn);
    let limited = a.clamp_norm(params.accel_sat);
    (limited, limited != a)
}

/// Total acceleration the thrust has to produce (gravity compensated,
/// z up).
pub fn position_control(
    sp: &FlightSetpoint,
    position: Vec3,
    velocity: Vec3,
    params: &VehicleParams,
) -> Vec3 {
    desired_acceleration(sp, position, velocity, params).0 + Vec3::new(0.0, 0.0, GRAVITY)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeTerms {
    pub desired: RotationMatrix,
    /// Rotation vector of `R_curᵀ R_des`.
    pub attitude_error: Vec3,
    pub rate_des: Vec3,
    pub alpha_des: Vec3,
}

/// Full attitude-loop evaluation, exposing the intermediate terms.
pub fn attitude_terms(
    a_tot: Vec3,
    yaw_des: f64,
    attitude: &RotationMatrix,
    body_rates: Vec3,
    params: &VehicleParams,
) -> Result<AttitudeTerms> {
    let norm = a_tot.norm();
    if !(norm > MIN_TOTAL_ACCEL) {
        return Err(Error::ThrustDirectionUndefined(norm));
    }
    let a_hat = a_tot / norm;
    let n_f = Vec3::Z.cross(a_hat);
    let beta = a_hat.dot(Vec3::Z).clamp(-1.0, 1.0).acos();
    let tilt = if n_f.norm() < DEGENERATE_AXIS {
        if beta < std::f64::consts::FRAC_PI_2 {
            RotationMatrix::IDENTITY
        } else {
            return Err(Error::InvertedAttitude);
        }
    } else {
        axis_angle_to_matrix(AxisAngle::new(n_f, beta)?)
    };
    let desired = tilt * yaw_matrix(yaw_des);
    let attitude_error = matrix_to_rotvec(&(attitude.transpose() * desired));
    let rate_des = attitude_error.div_elem(params.tau_att);
    let alpha_des = (rate_des - body_rates).div_elem(params.tau_omega);
    Ok(AttitudeTerms {
        desired,
        attitude_error,
        rate_des,
        alpha_des,
    })
}

/// Desired angular acceleration aligning the thrust axis with `a_tot` at
/// heading `yaw_des`.
pub fn attitude_control(
    a_tot: Vec3,
    yaw_des: f64,
    attitude: &RotationMatrix,
    body_rates: Vec3,
    params: &VehicleParams,
) -> Result<Vec3> {
    attitude_terms(a_tot, yaw_des, attitude, body_rates, params).map(|t| t.alpha_des)
}

pub fn thrusts_and_torque(a_tot: Vec3, alpha_des: Vec3, params: &VehicleParams) -> (f64, Vec3) {
    (
        params.mass * a_tot.norm(),
        params.inertia.hadamard(alpha_des),
    )
}

/// The mixer matrix including its 1/4 factor; rows map
/// (tau_x, tau_y, tau_z, f_tot) to rotor thrusts 1..4.
pub fn mixer_matrix(params: &VehicleParams) -> [[f64; 4]; 4] {
    let il = 1.0 / params.rotor_spacing_l;
    let ik = 1.0 / params.thrust_to_torque_k;
    let m = [
        [-il, -il, -ik, 1.0],
        [-il, il, ik, 1.0],
        [il, il, -ik, 1.0],
        [il, -il, ik, 1.0],
    ];
    m.map(|row| row.map(|v| 0.25 * v))
}

/// Thrust allocation. Negative rotor thrusts are clipped to zero since the
/// propellers cannot push in reverse.
pub fn mix(f_tot: f64, torque: Vec3, params: &VehicleParams) -> RotorThrusts {
    let m = mixer_matrix(params);
    let u = [torque.x, torque.y, torque.z, f_tot];
    let mut f = m.map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum::<f64>());
    let clipped = f.iter().any(|&v| v < 0.0);
    if clipped {
        debug!("mixer clipped negative thrust: {f:?}");
        for v in &mut f {
            *v = v.max(0.0);
        }
    }
    RotorThrusts { f, clipped }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightOutput {
    pub command: MotorCommand,
    pub thrusts: RotorThrusts,
    pub accel_limited: bool,
    /// A rotor hit the motor speed ceiling.
    pub speed_limited: bool,
}

impl FlightOutput {
    pub fn saturated(&self) -> bool {
        self.thrusts.clipped || self.speed_limited
    }
}

/// Runs the full cascade from the current rigid-body state.
pub fn flight_control(
    sp: &FlightSetpoint,
    position: Vec3,
    velocity: Vec3,
    attitude: &RotationMatrix,
    body_rates: Vec3,
    params: &VehicleParams,
) -> Result<FlightOutput> {
    let (a_des, accel_limited) = desired_acceleration(sp, position, velocity, params);
    let a_tot = a_des + Vec3::new(0.0, 0.0, GRAVITY);
    let alpha = attitude_control(a_tot, sp.yaw, attitude, body_rates, params)?;
    let (f_tot, torque) = thrusts_and_torque(a_tot, alpha, params);
    let thrusts = mix(f_tot, torque, params);
    let mut speed_limited = false;
    let command = thrusts.f.map(|f| {
        let w = (f / params.thrust_coeff_ct).sqrt();
        if w > params.max_motor_speed {
            speed_limited = true;
            params.max_motor_speed
        } else {
            w
        }
    });
    Ok(FlightOutput {
        command: MotorCommand(command),
        thrusts,
        accel_limited,
        speed_limited,
    })
}

/// Motor speed setpoints (all forward) for the current vehicle state.
pub fn flight_step(
    sp: &FlightSetpoint,
    state: &VehicleState,
    params: &VehicleParams,
) -> Result<MotorCommand> {
    flight_control(
        sp,
        state.position,
        state.velocity,
        &state.attitude,
        state.body_rates,
        params,
    )
    .map(|o| o.command)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn params() -> VehicleParams {
        VehicleParams::default()
    }

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn hover_needs_gravity_only() {
        let p = params();
        let sp = FlightSetpoint::hold(Vec3::new(1.0, 2.0, 3.0), 0.0);
        let a = position_control(&sp, sp.position, Vec3::ZERO, &p);
        assert_eq!(a, Vec3::new(0.0, 0.0, 9.81));
    }

    #[test]
    fn position_error_gives_pd_acceleration() {
        let p = params();
        let sp = FlightSetpoint::hold(Vec3::new(0.1, 0.0, 0.0), 0.0);
        let a = position_control(&sp, Vec3::ZERO, Vec3::ZERO, &p);
        assert_abs_diff_eq!(a.x, 15.791_367_041_742_973, epsilon = 1e-9);
        assert_abs_diff_eq!(a.y, 0.0);
        assert_abs_diff_eq!(a.z, 9.81, epsilon = 1e-12);
    }

    #[test]
    fn large_error_is_saturated_before_gravity() {
        let p = params();
        let sp = FlightSetpoint::hold(Vec3::new(10.0, 0.0, 0.0), 0.0);
        let (a_des, limited) = desired_acceleration(&sp, Vec3::ZERO, Vec3::ZERO, &p);
        assert!(limited);
        assert_abs_diff_eq!(a_des.norm(), 19.62, epsilon = 1e-12);
        let a = position_control(&sp, Vec3::ZERO, Vec3::ZERO, &p);
        assert_abs_diff_eq!(a.x, 19.62, epsilon = 1e-12);
        assert_abs_diff_eq!(a.z, 9.81, epsilon = 1e-12);
    }

    #[test]
    fn attitude_equilibrium() {
        let p = params();
        let alpha = attitude_control(
            Vec3::new(0.0, 0.0, 9.81),
            0.0,
            &RotationMatrix::IDENTITY,
            Vec3::ZERO,
            &p,
        )
        .unwrap();
        assert_eq!(alpha, Vec3::ZERO);
    }

    #[test]
    fn attitude_forty_five_degree_tilt() {
        let p = params();
        let t = attitude_terms(
            Vec3::new(9.81, 0.0, 9.81),
            0.0,
            &RotationMatrix::IDENTITY,
            Vec3::ZERO,
            &p,
        )
        .unwrap();
        assert!(close(
            t.attitude_error,
            Vec3::new(0.0, FRAC_PI_4, 0.0),
            1e-12
        ));
        assert!(close(
            t.rate_des,
            Vec3::new(0.0, 3.926_990_816_987_241, 0.0),
            1e-9
        ));
        assert!(close(
            t.alpha_des,
            Vec3::new(0.0, 78.539_816_339_744_83, 0.0),
            1e-9
        ));
    }

    #[test]
    fn attitude_fixed_point() {
        let p = params();
        let a_tot = Vec3::new(2.0, -3.0, 9.0);
        let t = attitude_terms(a_tot, 0.4, &RotationMatrix::IDENTITY, Vec3::ZERO, &p).unwrap();
        let alpha = attitude_control(a_tot, 0.4, &t.desired, Vec3::ZERO, &p).unwrap();
        assert!(alpha.norm() < 1e-12);
    }

    #[test]
    fn attitude_errors() {
        let p = params();
        let r = RotationMatrix::IDENTITY;
        assert!(matches!(
            attitude_control(Vec3::new(0.0, 0.0, 0.05), 0.0, &r, Vec3::ZERO, &p),
            Err(Error::ThrustDirectionUndefined(_))
        ));
        assert_eq!(
            attitude_control(Vec3::new(0.0, 0.0, -5.0), 0.0, &r, Vec3::ZERO, &p),
            Err(Error::InvertedAttitude)
        );
    }

    #[test]
    fn yaw_only_changes_z_error() {
        let p = params();
        let t = attitude_terms(
            Vec3::new(0.0, 0.0, 9.81),
            0.3,
            &RotationMatrix::IDENTITY,
            Vec3::ZERO,
            &p,
        )
        .unwrap();
        assert_eq!(t.attitude_error.x, 0.0);
        assert_eq!(t.attitude_error.y, 0.0);
        assert_abs_diff_eq!(t.attitude_error.z, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn thrust_and_torque_examples() {
        let p = params();
        let (f, tau) = thrusts_and_torque(Vec3::new(0.0, 0.0, 9.81), Vec3::ZERO, &p);
        assert_abs_diff_eq!(f, 7.848, epsilon = 1e-12);
        assert_eq!(tau, Vec3::ZERO);
        let (_, tau) = thrusts_and_torque(Vec3::Z, Vec3::X, &p);
        assert_eq!(tau, Vec3::new(4e-3, 0.0, 0.0));
        assert_eq!(thrusts_and_torque(Vec3::ZERO, Vec3::ZERO, &p).0, 0.0);
    }

    #[test]
    fn mixer_examples() {
        let p = params();
        let hover = mix(7.848, Vec3::ZERO, &p);
        for f in hover.f {
            assert_abs_diff_eq!(f, 1.962, epsilon = 1e-12);
        }
        assert!(!hover.clipped);
        let roll = mix(7.848, Vec3::new(0.1, 0.0, 0.0), &p);
        let expect = [1.848_363_636, 1.848_363_636, 2.075_636_364, 2.075_636_364];
        for (a, b) in roll.f.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-8);
        }
        let yaw = mix(7.848, Vec3::new(0.0, 0.0, 0.014), &p);
        for (a, b) in yaw.f.iter().zip([1.712, 2.212, 1.712, 2.212]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn mixer_clips_negative_thrust() {
        let p = params();
        let out = mix(1.0, Vec3::new(1.0, 0.0, 0.0), &p);
        assert!(out.clipped);
        assert!(out.f.iter().all(|&f| f >= 0.0));
    }

    #[test]
    fn hover_command_is_uniform() {
        let p = params();
        let sp = FlightSetpoint::hold(Vec3::new(0.0, 0.0, 1.0), 0.0);
        let out = flight_control(
            &sp,
            sp.position,
            Vec3::ZERO,
            &RotationMatrix::IDENTITY,
            Vec3::ZERO,
            &p,
        )
        .unwrap();
        for w in out.command.0 {
            assert_abs_diff_eq!(w, p.hover_speed(), epsilon = 1e-9);
            assert!((w - 795.0).abs() < 5.0);
        }
        // 10 cm low: every rotor speeds up
        let low = flight_control(
            &sp,
            Vec3::new(0.0, 0.0, 0.9),
            Vec3::ZERO,
            &RotationMatrix::IDENTITY,
            Vec3::ZERO,
            &p,
        )
        .unwrap();
        assert!(low.command.0.iter().all(|&w| w > p.hover_speed()));
    }

    #[test]
    fn zero_thrust_rotor_gets_zero_command() {
        let p = params();
        let out = mix(0.0, Vec3::ZERO, &p);
        let w = out.f.map(|f| (f / p.thrust_coeff_ct).sqrt());
        assert_eq!(w, [0.0; 4]);
    }

    proptest! {
        #[test]
        fn thrusts_sum_to_total(
            f_tot in 0.0..30.0f64,
            tx in -0.5..0.5f64, ty in -0.5..0.5f64, tz in -0.05..0.05f64,
        ) {
            let p = params();
            let m = mixer_matrix(&p);
            let u = [tx, ty, tz, f_tot];
            let raw: Vec<f64> = m.iter().map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum()).collect();
            prop_assert!((raw.iter().sum::<f64>() - f_tot).abs() < 1e-12);
        }

        #[test]
        fn yaw_error_is_pure_z(psi in -3.0..3.0f64) {
            let p = params();
            let t = attitude_terms(Vec3::new(0.0, 0.0, 9.81), psi, &RotationMatrix::IDENTITY, Vec3::ZERO, &p).unwrap();
            prop_assert!(t.attitude_error.x.abs() < 1e-15 && t.attitude_error.y.abs() < 1e-15);
            prop_assert!((t.attitude_error.z - psi).abs() < 1e-9);
        }
    }
}
