//! Fixed-step plant: rigid-body flight dynamics, kinematic ground motion on
//! a planar slope, motor lag, one-way bearings and energy bookkeeping. Also
//! hosts the closed-loop scenario runner.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flight::{flight_control, FlightSetpoint};
use crate::ground::{ground_control, ground_step, GroundSetpoint, WheelSpeeds};
use crate::math::{axis_angle_to_matrix, AxisAngle, RotationMatrix, Vec3};
use crate::mode::{ContactInfo, Locomotion, Mode, ModeEvent, ModeManager};
use crate::scenario::{Guidance, GuidanceContext, Reference, Scenario};
use crate::telemetry::{Flags, TelemetryRecord};
use crate::vehicle::{
    bearing_step, body_wrench, electrical_power_flight, electrical_power_ground, motor_lag_step,
    traction_check, wheels_from_motors, ActuatorState, MotorCommand, VehicleParams, GRAVITY,
};

pub const MAX_DT: f64 = 0.01;
pub const DEFAULT_DT: f64 = 0.002;
pub const DEFAULT_TELEMETRY_INTERVAL: f64 = 0.01;

/// Planar terrain: flat for x < 0, a constant incline over
/// `0 <= x <= extent` (rising with x), flat again beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terrain {
    pub slope_deg: f64,
    /// Tyre friction coefficient; falls back to the vehicle's when unset.
    pub friction_mu: Option<f64>,
    pub extent: f64,
}

impl Default for Terrain {
    fn default() -> Self {
        Self::flat()
    }
}

impl Terrain {
    pub fn flat() -> Self {
        Self {
            slope_deg: 0.0,
            friction_mu: None,
            extent: f64::INFINITY,
        }
    }

    pub fn incline(slope_deg: f64, extent: f64) -> Result<Self> {
        let t = Self {
            slope_deg,
            friction_mu: None,
            extent,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=45.0).contains(&self.slope_deg) {
            return Err(Error::InvalidScenario(format!(
                "slope {} deg outside [0, 45]",
                self.slope_deg
            )));
        }
        if !(self.extent > 0.0) {
            return Err(Error::InvalidScenario(
                "terrain extent must be positive".into(),
            ));
        }
        Ok(())
    }

    fn on_incline(&self, x: f64) -> bool {
        x >= 0.0 && x <= self.extent
    }

    pub fn slope_at(&self, x: f64) -> f64 {
        if self.on_incline(x) {
            self.slope_deg
        } else {
            0.0
        }
    }

    pub fn height(&self, x: f64) -> f64 {
        if self.slope_deg == 0.0 {
            return 0.0;
        }
        self.slope_deg.to_radians().tan() * x.clamp(0.0, self.extent)
    }

    pub fn friction(&self, params: &VehicleParams) -> f64 {
        self.friction_mu.unwrap_or(params.traction_mu)
    }

    /// Whether the tyres hold at `x`.
    pub fn grips(&self, x: f64, params: &VehicleParams) -> bool {
        let mu = self.friction(params);
        if mu == params.traction_mu {
            traction_check(self.slope_at(x), params)
        } else {
            self.slope_at(x).to_radians().tan() <= mu
        }
    }

    /// Body attitude of a vehicle resting on the surface at `x` facing
    /// `heading`.
    pub fn resting_attitude(&self, x: f64, heading: f64) -> RotationMatrix {
        RotationMatrix::about_y(-self.slope_at(x).to_radians()) * RotationMatrix::yaw(heading)
    }
}

/// Heading of a vehicle resting on the terrain (inverse of
/// `Terrain::resting_attitude`).
pub fn ground_heading(attitude: &RotationMatrix) -> f64 {
    attitude.get(1, 0).atan2(attitude.get(1, 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub mode: Mode,
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: RotationMatrix,
    pub body_rates: Vec3,
    pub actuators: ActuatorState,
    pub wheels: WheelSpeeds,
    pub on_ground: bool,
    pub energy_used: f64,
    pub time: f64,
    /// Electrical power drawn during the last step (W).
    pub power: f64,
    /// Tyres lost grip during the last step.
    pub slipping: bool,
}

impl VehicleState {
    /// Airborne, level, motors at hover speed.
    pub fn hovering(position: Vec3, yaw: f64, params: &VehicleParams) -> Self {
        Self {
            mode: Mode::Flight,
            position,
            velocity: Vec3::ZERO,
            attitude: RotationMatrix::yaw(yaw),
            body_rates: Vec3::ZERO,
            actuators: ActuatorState::uniform(params.hover_speed()),
            wheels: WheelSpeeds::default(),
            on_ground: false,
            energy_used: 0.0,
            time: 0.0,
            power: 0.0,
            slipping: false,
        }
    }

    /// At rest on the terrain in ground mode with the motors idling in
    /// reverse.
    pub fn parked(x: f64, y: f64, heading: f64, terrain: &Terrain, params: &VehicleParams) -> Self {
        Self {
            mode: Mode::Ground,
            position: Vec3::new(x, y, terrain.height(x)),
            velocity: Vec3::ZERO,
            attitude: terrain.resting_attitude(x, heading),
            body_rates: Vec3::ZERO,
            actuators: ActuatorState::uniform(-params.idle_speed_wi),
            wheels: WheelSpeeds::default(),
            on_ground: true,
            energy_used: 0.0,
            time: 0.0,
            power: 0.0,
            slipping: false,
        }
    }

    pub fn yaw(&self) -> f64 {
        if self.on_ground {
            ground_heading(&self.attitude)
        } else {
            self.attitude.heading()
        }
    }

    pub fn height_above(&self, terrain: &Terrain) -> f64 {
        self.position.z - terrain.height(self.position.x)
    }

    pub fn contact_info(&self, terrain: &Terrain) -> ContactInfo {
        ContactInfo {
            on_ground: self.on_ground,
            vertical_speed: self.velocity.z,
            height_above_terrain: self.height_above(terrain),
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt <= MAX_DT {
        Ok(())
    } else {
        Err(Error::TimeStep(dt))
    }
}

struct RotorUpdate {
    actuators: ActuatorState,
    thrusts: [f64; 4],
    yaw_reaction: [f64; 4],
}

fn update_rotors(
    state: &VehicleState,
    cmd: &MotorCommand,
    dt: f64,
    params: &VehicleParams,
) -> RotorUpdate {
    let mut actuators = state.actuators;
    let mut thrusts = [0.0; 4];
    let mut yaw_reaction = [0.0; 4];
    for i in 0..4 {
        let motor = motor_lag_step(state.actuators.motor_speed[i], cmd.0[i], dt, params);
        let out = bearing_step(motor, state.actuators.prop_speed[i], dt, params);
        actuators.motor_speed[i] = motor;
        actuators.prop_speed[i] = out.prop_speed;
        actuators.engaged[i] = out.engaged;
        thrusts[i] = params.thrust_coeff_ct * out.prop_speed * out.prop_speed;
        yaw_reaction[i] = out.reaction_torque;
    }
    RotorUpdate {
        actuators,
        thrusts,
        yaw_reaction,
    }
}

/// Power drawn by motors that are turning engaged propellers.
fn rotor_power(update: &RotorUpdate, params: &VehicleParams) -> f64 {
    let mut loaded = [0.0; 4];
    for ((l, &t), &on) in loaded
        .iter_mut()
        .zip(&update.thrusts)
        .zip(&update.actuators.engaged)
    {
        if on {
            *l = t;
        }
    }
    electrical_power_flight(&loaded, params)
}

/// One rigid-body step. A vehicle sitting on the terrain stays put until
/// the thrust can lift it; touching the terrain from above stops it.
pub fn step_flight(
    state: &VehicleState,
    cmd: &MotorCommand,
    dt: f64,
    terrain: &Terrain,
    params: &VehicleParams,
) -> Result<VehicleState> {
    check_dt(dt)?;
    let rotors = update_rotors(state, cmd, dt, params);
    let (f_tot, torque) = body_wrench(&rotors.thrusts, &rotors.yaw_reaction, params);
    let power = rotor_power(&rotors, params);

    let mut next = *state;
    next.actuators = rotors.actuators;
    let (wr, wl) = wheels_from_motors(&rotors.actuators.motor_speed, params);
    next.wheels = WheelSpeeds {
        right: wr,
        left: wl,
    };
    next.power = power;
    next.energy_used += power * dt;
    next.time += dt;
    next.slipping = false;

    let accel = state.attitude.column(2) * (f_tot / params.mass) - Vec3::new(0.0, 0.0, GRAVITY);
    if state.on_ground && accel.z <= 0.0 {
        next.velocity = Vec3::ZERO;
        next.body_rates = Vec3::ZERO;
        return Ok(next);
    }
    next.on_ground = false;

    let j = params.inertia;
    let w = state.body_rates;
    let gyro = w.cross(j.hadamard(w));
    let w_next = w + (torque - gyro).div_elem(j) * dt;
    let delta = axis_angle_to_matrix(AxisAngle::from_rotation_vector(w_next * dt)?);
    next.body_rates = w_next;
    next.attitude = (state.attitude * delta).orthonormalized();
    next.velocity = state.velocity + accel * dt;
    next.position = state.position + next.velocity * dt;

    let floor = terrain.height(next.position.x);
    if next.position.z < floor {
        let heading = next.attitude.heading();
        next.position.z = floor;
        next.velocity = Vec3::ZERO;
        next.body_rates = Vec3::ZERO;
        next.attitude = terrain.resting_attitude(next.position.x, heading);
        next.on_ground = true;
    }
    Ok(next)
}

/// One ground step. Wheel speeds come from the lagged motor speeds through
/// the differentials; the body follows unicycle kinematics on the slope
/// surface. Uphill progress stops when the slope exceeds the grip limit.
pub fn step_ground(
    state: &VehicleState,
    cmd: &MotorCommand,
    dt: f64,
    terrain: &Terrain,
    params: &VehicleParams,
) -> Result<VehicleState> {
    check_dt(dt)?;
    let rotors = update_rotors(state, cmd, dt, params);
    let (wr, wl) = wheels_from_motors(&rotors.actuators.motor_speed, params);
    let k1 = params.wheel_radius_inv_k1;
    let k2 = params.wheel_offset_k2;
    let mut speed = (wr + wl) / (2.0 * k1);
    let yaw_rate = (wr - wl) / (2.0 * k1 * k2);

    let x = state.position.x;
    let slope = terrain.slope_at(x);
    let theta = slope.to_radians();
    let heading = ground_heading(&state.attitude);
    let slipping = !terrain.grips(x, params);
    if slipping && speed * heading.cos() > 0.0 {
        speed = 0.0;
    }

    let (s, c) = heading.sin_cos();
    let velocity = Vec3::new(speed * c * theta.cos(), speed * s, speed * c * theta.sin());
    let mut position = state.position + velocity * dt;
    position.z = terrain.height(position.x);
    let heading_next = heading + yaw_rate * dt;

    let prev_speed = state.velocity.norm();
    let accel = (speed.abs() - prev_speed) / dt;
    let power = electrical_power_ground(speed.abs(), slope, accel, yaw_rate, params)
        + rotor_power(&rotors, params);

    let mut next = *state;
    next.actuators = rotors.actuators;
    next.wheels = WheelSpeeds {
        right: wr,
        left: wl,
    };
    next.position = position;
    next.velocity = velocity;
    next.attitude = terrain.resting_attitude(position.x, heading_next);
    next.body_rates = Vec3::new(0.0, 0.0, yaw_rate);
    next.on_ground = true;
    next.power = power;
    next.energy_used += power * dt;
    next.time += dt;
    next.slipping = slipping;
    Ok(next)
}

/// Picks the ground or flight plant for the current mode and contact.
pub fn step(
    state: &VehicleState,
    cmd: &MotorCommand,
    dt: f64,
    terrain: &Terrain,
    params: &VehicleParams,
) -> Result<VehicleState> {
    if state.on_ground && state.mode != Mode::Flight {
        step_ground(state, cmd, dt, terrain, params)
    } else {
        step_flight(state, cmd, dt, terrain, params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub dt: f64,
    pub telemetry_interval: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            telemetry_interval: DEFAULT_TELEMETRY_INTERVAL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed(String),
}

impl RunStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<TelemetryRecord>,
    pub status: RunStatus,
    pub steps: usize,
    /// Steps in which the flight mixer clipped or a motor hit its ceiling.
    pub saturated_steps: usize,
    pub final_state: VehicleState,
}

/// Runs `scenario` closed loop at a fixed step, controller at every step,
/// recording telemetry every `telemetry_interval` and at mode events.
pub fn run_scenario(
    scenario: &Scenario,
    params: &VehicleParams,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    check_dt(opts.dt)?;
    params.validate()?;
    scenario.validate()?;
    if !(opts.telemetry_interval > 0.0) {
        return Err(Error::InvalidScenario(
            "telemetry interval must be positive".into(),
        ));
    }
    let dt = opts.dt;
    let decimation = ((opts.telemetry_interval / dt).round() as usize).max(1);
    let total_steps = (scenario.duration / dt - 1e-9).ceil().max(0.0) as usize;
    let terrain = scenario.terrain;

    let mut state = scenario.initial_state(params);
    let initial = state;
    let initial_cmd = MotorCommand(state.actuators.motor_speed);
    let mut modes = ModeManager::new(state.mode, initial_cmd, params.transition_duration);
    let mut ctx = GuidanceContext {
        mode: state.mode,
        mode_since: 0.0,
        anchor: state.position,
        anchor_yaw: state.yaw(),
    };
    let mut records: Vec<TelemetryRecord> = Vec::new();
    let mut pending = Flags::default();
    let mut saturated_steps = 0;
    let mut status = RunStatus::Completed;
    let mut steps = 0;

    for n in 0..total_steps {
        let t = n as f64 * dt;
        let guidance = scenario.guidance(t, &ctx, params);

        let wanted = guidance.locomotion.settled_mode();
        if modes.mode() != wanted && modes.transition().map(|s| s.target) != Some(wanted) {
            let target_cmd = match guidance.locomotion {
                Locomotion::Fly => MotorCommand::uniform(params.hover_speed()),
                Locomotion::Drive => ground_step(&GroundSetpoint::STOP, params),
            };
            if let Ok(Some(ModeEvent::Requested(m))) = modes.request(
                guidance.locomotion,
                &state.contact_info(&terrain),
                target_cmd,
            ) {
                state.mode = m;
                let flags = Flags {
                    mode_request: true,
                    ..Flags::default()
                };
                match records.last_mut() {
                    Some(last) if last.t == crate::telemetry::quantize(t) => {
                        last.flags.merge(flags)
                    }
                    _ => {
                        let err = tracking_error(&state, &guidance);
                        records.push(TelemetryRecord::capture(
                            &state,
                            &modes.last_command(),
                            err,
                            flags,
                        ));
                    }
                }
            }
        }

        let mut event_now = false;
        let cmd = if let Some((cmd, event)) = modes.step_transition(dt) {
            if let Some(ModeEvent::Completed(_)) = event {
                pending.mode_complete = true;
                event_now = true;
            }
            cmd
        } else {
            match control(&state, &guidance, &ctx, &terrain, params) {
                Ok((cmd, saturated)) => {
                    if saturated {
                        saturated_steps += 1;
                        pending.saturation = true;
                    }
                    cmd
                }
                Err(e) => {
                    warn!("controller failed at t = {t}: {e}");
                    status = RunStatus::Failed(format!("controller error at t = {t:.3} s: {e}"));
                    pending.failure = true;
                    let err = tracking_error(&state, &guidance);
                    records.push(TelemetryRecord::capture(
                        &state,
                        &modes.last_command(),
                        err,
                        pending,
                    ));
                    break;
                }
            }
        };
        modes.record_command(cmd);
        let previous_mode = state.mode;
        state.mode = modes.mode();
        if state.mode != previous_mode && !state.mode.is_transition() {
            ctx = GuidanceContext {
                mode: state.mode,
                mode_since: (n + 1) as f64 * dt,
                anchor: state.position,
                anchor_yaw: state.yaw(),
            };
        }

        state = step(&state, &cmd, dt, &terrain, params)?;
        state.time = (n + 1) as f64 * dt;
        steps += 1;
        if state.slipping {
            pending.slip = true;
        }

        let t_next = state.time;
        let verdict = scenario.check_completion(&state, &initial, params);
        let last_step = n + 1 == total_steps;
        let time_out = last_step && verdict.is_none() && scenario.requires_goal();
        if let Some(RunStatus::Failed(_)) = &verdict {
            pending.failure = true;
        }
        if time_out {
            pending.failure = true;
        }
        if (n + 1) % decimation == 0 || event_now || verdict.is_some() || last_step {
            let g = scenario.guidance(t_next, &ctx, params);
            let err = tracking_error(&state, &g);
            records.push(TelemetryRecord::capture(&state, &cmd, err, pending));
            pending = Flags::default();
        }
        if let Some(v) = verdict {
            status = v;
            break;
        }
        if time_out {
            status = RunStatus::Failed(format!(
                "time limit {:.3} s reached before the goal",
                scenario.duration
            ));
        }
    }

    Ok(RunOutcome {
        records,
        status,
        steps,
        saturated_steps,
        final_state: state,
    })
}

fn tracking_error(state: &VehicleState, guidance: &Guidance) -> f64 {
    guidance
        .desired_position
        .map(|p| (state.position - p).norm())
        .unwrap_or(0.0)
}

/// Controller dispatch for the settled modes. Returns the command and
/// whether it saturated.
fn control(
    state: &VehicleState,
    guidance: &Guidance,
    ctx: &GuidanceContext,
    terrain: &Terrain,
    params: &VehicleParams,
) -> Result<(MotorCommand, bool)> {
    match state.mode {
        Mode::Flight => {
            let sp = match guidance.reference {
                Reference::Flight(sp) => sp,
                // waiting to land before driving: descend where we are
                Reference::Ground(_) => FlightSetpoint::hold(
                    Vec3::new(
                        state.position.x,
                        state.position.y,
                        terrain.height(state.position.x),
                    ),
                    ctx.anchor_yaw,
                ),
            };
            let out = flight_control(
                &sp,
                state.position,
                state.velocity,
                &state.attitude,
                state.body_rates,
                params,
            )?;
            Ok((out.command, out.saturated()))
        }
        _ => {
            let sp = match guidance.reference {
                Reference::Ground(sp) => sp,
                Reference::Flight(_) => GroundSetpoint::STOP,
            };
            let out = ground_control(&sp, params);
            Ok((out.command, out.limited))
        }
    }
}
