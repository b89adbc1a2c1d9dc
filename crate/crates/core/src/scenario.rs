//! Scenario definitions and reference trajectory generators.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::flight::FlightSetpoint;
use crate::ground::GroundSetpoint;
use crate::math::Vec3;
use crate::mode::{Locomotion, Mode};
use crate::sim::{RunStatus, Terrain, VehicleState};
use crate::vehicle::VehicleParams;

pub const DEFAULT_ALTITUDE: f64 = 1.0;
pub const DEFAULT_CIRCLE_RADIUS: f64 = 0.5;
pub const DEFAULT_CIRCLE_DURATION: f64 = 6.0;
/// Circle runs ignore the first second while the vehicle spins up.
pub const CIRCLE_SETTLE_TIME: f64 = 1.0;

/// Flat run-out past the top of a climb (m).
const SLOPE_RUNOUT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

/// Lemniscate of Gerono `x = a sin(th)`, `y = (a/2) sin(2 th)` with an arc
/// length table so it can be flown at constant speed.
#[derive(Debug, Clone)]
pub struct Lemniscate {
    a: f64,
    theta: Vec<f64>,
    arc: Vec<f64>,
}

const LEMNISCATE_SEGMENTS: usize = 2048;

impl Lemniscate {
    pub fn new(a: f64) -> Self {
        let n = LEMNISCATE_SEGMENTS;
        let theta: Vec<f64> = (0..=n).map(|i| TAU * i as f64 / n as f64).collect();
        let mut arc = Vec::with_capacity(n + 1);
        arc.push(0.0);
        for i in 0..n {
            let prev = arc[i];
            arc.push(prev + Self::simpson(a, theta[i], theta[i + 1]));
        }
        Self { a, theta, arc }
    }

    fn speed(a: f64, th: f64) -> f64 {
        a * (th.cos().powi(2) + (2.0 * th).cos().powi(2)).sqrt()
    }

    fn simpson(a: f64, t0: f64, t1: f64) -> f64 {
        let m = 0.5 * (t0 + t1);
        (t1 - t0) / 6.0 * (Self::speed(a, t0) + 4.0 * Self::speed(a, m) + Self::speed(a, t1))
    }

    pub fn cycle_length(&self) -> f64 {
        self.arc[LEMNISCATE_SEGMENTS]
    }

    pub fn position(&self, th: f64) -> Vec3 {
        Vec3::new(self.a * th.sin(), 0.5 * self.a * (2.0 * th).sin(), 0.0)
    }

    fn derivative(&self, th: f64) -> Vec3 {
        Vec3::new(self.a * th.cos(), self.a * (2.0 * th).cos(), 0.0)
    }

    /// Curve parameter at arc length `s` (any multiple of the cycle).
    pub fn theta_at(&self, s: f64) -> f64 {
        let len = self.cycle_length();
        let laps = (s / len).floor();
        let r = s - laps * len;
        let i = self
            .arc
            .partition_point(|&x| x <= r)
            .clamp(1, LEMNISCATE_SEGMENTS)
            - 1;
        let (t0, s0) = (self.theta[i], self.arc[i]);
        let mut th = t0 + (r - s0) / Self::speed(self.a, t0);
        for _ in 0..4 {
            let g = s0 + Self::simpson(self.a, t0, th) - r;
            th -= g / Self::speed(self.a, th);
        }
        laps * TAU + th
    }

    /// Point and unit tangent at arc length `s`.
    pub fn at_arc_length(&self, s: f64) -> (Vec3, Vec3) {
        let th = self.theta_at(s);
        let d = self.derivative(th);
        (self.position(th), d * (1.0 / d.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareSchedule {
    pub side: f64,
    pub segment_time: f64,
    pub turn_time: f64,
}

impl SquareSchedule {
    pub const SEGMENTS: usize = 4;

    pub fn total_time(&self) -> f64 {
        Self::SEGMENTS as f64 * self.segment_time + (Self::SEGMENTS - 1) as f64 * self.turn_time
    }

    pub fn drive_speed(&self) -> f64 {
        self.side / self.segment_time
    }

    pub fn turn_rate(&self) -> f64 {
        FRAC_PI_2 / self.turn_time
    }

    /// Phase boundaries: end times of drive segments and turns in order.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = 0.0;
        for k in 0..Self::SEGMENTS {
            t += self.segment_time;
            out.push(t);
            if k + 1 < Self::SEGMENTS {
                t += self.turn_time;
                out.push(t);
            }
        }
        out
    }

    pub fn setpoint(&self, t: f64) -> GroundSetpoint {
        match self.boundaries().iter().position(|&end| t < end) {
            Some(k) if k % 2 == 0 => GroundSetpoint::new(self.drive_speed(), 0.0),
            Some(_) => GroundSetpoint::new(0.0, self.turn_rate()),
            None => GroundSetpoint::STOP,
        }
    }

    /// Ideal pose (x, y, heading) after following the schedule for `t`.
    pub fn pose(&self, t: f64) -> (f64, f64, f64) {
        let (mut x, mut y, mut psi) = (0.0, 0.0, 0.0);
        let mut start = 0.0;
        for (k, end) in self.boundaries().into_iter().enumerate() {
            let span = t.min(end) - start;
            if span <= 0.0 {
                break;
            }
            if k % 2 == 0 {
                x += self.drive_speed() * span * f64::cos(psi);
                y += self.drive_speed() * span * f64::sin(psi);
            } else {
                psi += self.turn_rate() * span;
            }
            start = end;
        }
        (x, y, psi)
    }
}

#[derive(Debug, Clone)]
pub enum ScenarioKind {
    /// Hold a hover point offset by `step` from the start.
    Hover {
        altitude: f64,
        step: Vec3,
    },
    /// Counter-clockwise circle starting at the origin heading +x.
    Circle {
        radius: f64,
        speed: f64,
        locomotion: Locomotion,
        altitude: f64,
    },
    Figure8 {
        major_diameter: f64,
        speed: f64,
        cycles: u32,
        altitude: f64,
        path: Lemniscate,
    },
    SquarePath(SquareSchedule),
    SlopeClimb {
        slope_deg: f64,
        speed: f64,
        height_gain: f64,
    },
    /// Drive, stop, switch to flight, climb to a hover point.
    Transition {
        drive_speed: f64,
        drive_time: f64,
        request_time: f64,
        hover_height: f64,
        climb_time: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub duration: f64,
    pub terrain: Terrain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Flight(FlightSetpoint),
    Ground(GroundSetpoint),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guidance {
    pub locomotion: Locomotion,
    pub reference: Reference,
    /// Where the vehicle should be, for the tracking error.
    pub desired_position: Option<Vec3>,
}

/// What the runner knows about the current settled mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceContext {
    pub mode: Mode,
    pub mode_since: f64,
    pub anchor: Vec3,
    pub anchor_yaw: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidScenario(format!(
            "{name} must be > 0, got {v}"
        )))
    }
}

fn quintic(s: f64) -> (f64, f64) {
    let s = s.clamp(0.0, 1.0);
    let p = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    let dp = 30.0 * s * s * (1.0 - s) * (1.0 - s);
    (p, dp)
}

pub fn gen_hover(altitude: f64, step: Vec3, duration: f64) -> Result<Scenario> {
    let s = Scenario {
        kind: ScenarioKind::Hover { altitude, step },
        duration,
        terrain: Terrain::flat(),
    };
    s.validate()?;
    Ok(s)
}

pub fn gen_circle(
    radius: f64,
    speed: f64,
    duration: f64,
    locomotion: Locomotion,
) -> Result<Scenario> {
    let s = Scenario {
        kind: ScenarioKind::Circle {
            radius,
            speed,
            locomotion,
            altitude: DEFAULT_ALTITUDE,
        },
        duration,
        terrain: Terrain::flat(),
    };
    s.validate()?;
    Ok(s)
}

pub fn gen_figure8(major_diameter: f64, speed: f64, cycles: u32) -> Result<Scenario> {
    positive("major diameter", major_diameter)?;
    positive("speed", speed)?;
    if cycles < 1 {
        return Err(Error::InvalidScenario("cycles must be >= 1".into()));
    }
    let path = Lemniscate::new(major_diameter / 2.0);
    let duration = cycles as f64 * path.cycle_length() / speed;
    let s = Scenario {
        kind: ScenarioKind::Figure8 {
            major_diameter,
            speed,
            cycles,
            altitude: DEFAULT_ALTITUDE,
            path,
        },
        duration,
        terrain: Terrain::flat(),
    };
    s.validate()?;
    Ok(s)
}

pub fn gen_square_path(side: f64, segment_time: f64, turn_time: f64) -> Result<Scenario> {
    let sched = SquareSchedule {
        side,
        segment_time,
        turn_time,
    };
    let s = Scenario {
        kind: ScenarioKind::SquarePath(sched),
        duration: sched.total_time(),
        terrain: Terrain::flat(),
    };
    s.validate()?;
    Ok(s)
}

/// Straight uphill drive from the foot of an incline until `height_gain`
/// is reached. Allowed time is 25% over nominal plus two seconds.
pub fn gen_slope_climb(slope_deg: f64, speed: f64, height_gain: f64) -> Result<Scenario> {
    if !(slope_deg > 0.0 && slope_deg < 45.0) {
        return Err(Error::InvalidScenario(format!(
            "slope {slope_deg} deg outside (0, 45)"
        )));
    }
    positive("speed", speed)?;
    positive("height gain", height_gain)?;
    let theta = slope_deg.to_radians();
    let nominal = height_gain / (speed * theta.sin());
    let s = Scenario {
        kind: ScenarioKind::SlopeClimb {
            slope_deg,
            speed,
            height_gain,
        },
        duration: 1.25 * nominal + 2.0,
        terrain: Terrain::incline(slope_deg, height_gain / theta.tan() + SLOPE_RUNOUT)?,
    };
    s.validate()?;
    Ok(s)
}

/// Nominal climb time for a slope run.
pub fn slope_climb_time(slope_deg: f64, speed: f64, height_gain: f64) -> f64 {
    height_gain / (speed * slope_deg.to_radians().sin())
}

pub fn gen_transition(drive_speed: f64, drive_time: f64, hover_height: f64) -> Result<Scenario> {
    let request_time = drive_time + 0.5;
    let s = Scenario {
        kind: ScenarioKind::Transition {
            drive_speed,
            drive_time,
            request_time,
            hover_height,
            climb_time: 1.2,
        },
        duration: request_time + 3.5,
        terrain: Terrain::flat(),
    };
    s.validate()?;
    Ok(s)
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self.kind {
            ScenarioKind::Hover { .. } => "hover",
            ScenarioKind::Circle { .. } => "circle",
            ScenarioKind::Figure8 { .. } => "figure8",
            ScenarioKind::SquarePath(_) => "square",
            ScenarioKind::SlopeClimb { .. } => "slope",
            ScenarioKind::Transition { .. } => "transition",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "duration {} must be >= 0",
                self.duration
            )));
        }
        self.terrain.validate()?;
        match &self.kind {
            ScenarioKind::Hover { altitude, step } => {
                if !(altitude.is_finite() && step.is_finite()) {
                    return Err(Error::InvalidScenario("hover target must be finite".into()));
                }
            }
            ScenarioKind::Circle { radius, speed, .. } => {
                positive("radius", *radius)?;
                positive("speed", *speed)?;
            }
            ScenarioKind::Figure8 {
                major_diameter,
                speed,
                cycles,
                ..
            } => {
                positive("major diameter", *major_diameter)?;
                positive("speed", *speed)?;
                if *cycles < 1 {
                    return Err(Error::InvalidScenario("cycles must be >= 1".into()));
                }
            }
            ScenarioKind::SquarePath(s) => {
                if !(s.side.is_finite() && s.side >= 0.0) {
                    return Err(Error::InvalidScenario("side must be >= 0".into()));
                }
                positive("segment time", s.segment_time)?;
                positive("turn time", s.turn_time)?;
            }
            ScenarioKind::SlopeClimb {
                slope_deg,
                speed,
                height_gain,
            } => {
                positive("slope", *slope_deg)?;
                positive("speed", *speed)?;
                positive("height gain", *height_gain)?;
            }
            ScenarioKind::Transition {
                drive_speed,
                drive_time,
                request_time,
                hover_height,
                climb_time,
            } => {
                positive("drive speed", *drive_speed)?;
                positive("drive time", *drive_time)?;
                positive("climb time", *climb_time)?;
                positive("hover height", *hover_height)?;
                if request_time < drive_time {
                    return Err(Error::InvalidScenario(
                        "mode request before the drive ends".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Time span the tracking and power metrics are taken over.
    pub fn active_window(&self) -> (f64, f64) {
        match self.kind {
            ScenarioKind::Circle { .. } => (CIRCLE_SETTLE_TIME.min(self.duration), self.duration),
            ScenarioKind::Transition { request_time, .. } => {
                (request_time.min(self.duration), self.duration)
            }
            _ => (0.0, self.duration),
        }
    }

    /// Scenarios that fail unless they reach a goal before the time limit.
    pub fn requires_goal(&self) -> bool {
        matches!(self.kind, ScenarioKind::SlopeClimb { .. })
    }

    pub fn initial_state(&self, params: &VehicleParams) -> VehicleState {
        let parked = || VehicleState::parked(0.0, 0.0, 0.0, &self.terrain, params);
        match &self.kind {
            ScenarioKind::Hover { altitude, .. } => {
                VehicleState::hovering(Vec3::new(0.0, 0.0, *altitude), 0.0, params)
            }
            ScenarioKind::Circle {
                locomotion: Locomotion::Fly,
                altitude,
                ..
            }
            | ScenarioKind::Figure8 { altitude, .. } => {
                VehicleState::hovering(Vec3::new(0.0, 0.0, *altitude), 0.0, params)
            }
            _ => parked(),
        }
    }

    /// Reference point and velocity of path-following scenarios at `t`.
    pub fn sample(&self, t: f64) -> Option<TrajectorySample> {
        let t_c = t.clamp(0.0, self.duration);
        let (position, velocity) = match &self.kind {
            ScenarioKind::Circle {
                radius,
                speed,
                locomotion,
                altitude,
            } => {
                let phi = speed * t_c / radius;
                let z = if *locomotion == Locomotion::Fly {
                    *altitude
                } else {
                    0.0
                };
                let (s, c) = phi.sin_cos();
                (
                    Vec3::new(radius * s, radius * (1.0 - c), z),
                    Vec3::new(speed * c, speed * s, 0.0),
                )
            }
            ScenarioKind::Figure8 {
                speed,
                altitude,
                path,
                ..
            } => {
                let (p, tangent) = path.at_arc_length(speed * t_c);
                (p + Vec3::new(0.0, 0.0, *altitude), tangent * *speed)
            }
            ScenarioKind::SquarePath(sched) => {
                let (x, y, psi) = sched.pose(t_c);
                let sp = sched.setpoint(t_c);
                (
                    Vec3::new(x, y, 0.0),
                    Vec3::new(sp.v_x * psi.cos(), sp.v_x * psi.sin(), 0.0),
                )
            }
            ScenarioKind::SlopeClimb {
                slope_deg, speed, ..
            } => {
                let th = slope_deg.to_radians();
                let d = Vec3::new(th.cos(), 0.0, th.sin());
                (d * (speed * t_c), d * *speed)
            }
            _ => return None,
        };
        Some(TrajectorySample {
            t: t_c,
            position,
            velocity,
        })
    }

    /// Reference samples every `dt` from 0 to the duration inclusive.
    pub fn samples(&self, dt: f64) -> Vec<TrajectorySample> {
        if !(dt > 0.0) {
            return Vec::new();
        }
        let n = (self.duration / dt + 1e-9).floor() as usize;
        (0..=n).filter_map(|i| self.sample(i as f64 * dt)).collect()
    }

    pub fn guidance(&self, t: f64, ctx: &GuidanceContext, _params: &VehicleParams) -> Guidance {
        match &self.kind {
            ScenarioKind::Hover { altitude, step } => {
                let target = Vec3::new(0.0, 0.0, *altitude) + *step;
                Guidance {
                    locomotion: Locomotion::Fly,
                    reference: Reference::Flight(FlightSetpoint::hold(target, 0.0)),
                    desired_position: Some(target),
                }
            }
            ScenarioKind::Circle {
                radius,
                speed,
                locomotion,
                ..
            } => {
                let s = self.sample(t).expect("circle has samples");
                let reference = match locomotion {
                    Locomotion::Fly => Reference::Flight(FlightSetpoint {
                        position: s.position,
                        velocity: s.velocity,
                        yaw: 0.0,
                    }),
                    Locomotion::Drive => {
                        if t < self.duration {
                            Reference::Ground(GroundSetpoint::new(*speed, speed / radius))
                        } else {
                            Reference::Ground(GroundSetpoint::STOP)
                        }
                    }
                };
                Guidance {
                    locomotion: *locomotion,
                    reference,
                    desired_position: Some(s.position),
                }
            }
            ScenarioKind::Figure8 { .. } => {
                let s = self.sample(t).expect("figure-8 has samples");
                Guidance {
                    locomotion: Locomotion::Fly,
                    reference: Reference::Flight(FlightSetpoint {
                        position: s.position,
                        velocity: s.velocity,
                        yaw: 0.0,
                    }),
                    desired_position: Some(s.position),
                }
            }
            ScenarioKind::SquarePath(sched) => Guidance {
                locomotion: Locomotion::Drive,
                reference: Reference::Ground(sched.setpoint(t)),
                desired_position: self.sample(t).map(|s| s.position),
            },
            ScenarioKind::SlopeClimb { speed, .. } => Guidance {
                locomotion: Locomotion::Drive,
                reference: Reference::Ground(GroundSetpoint::new(*speed, 0.0)),
                desired_position: self.sample(t).map(|s| s.position),
            },
            ScenarioKind::Transition {
                drive_speed,
                drive_time,
                request_time,
                hover_height,
                climb_time,
            } => {
                if t < *request_time {
                    let v = if t < *drive_time { *drive_speed } else { 0.0 };
                    return Guidance {
                        locomotion: Locomotion::Drive,
                        reference: Reference::Ground(GroundSetpoint::new(v, 0.0)),
                        desired_position: None,
                    };
                }
                if ctx.mode != Mode::Flight {
                    return Guidance {
                        locomotion: Locomotion::Fly,
                        reference: Reference::Flight(FlightSetpoint::hold(
                            ctx.anchor,
                            ctx.anchor_yaw,
                        )),
                        desired_position: None,
                    };
                }
                let (p, dp) = quintic((t - ctx.mode_since) / climb_time);
                let position = ctx.anchor + Vec3::new(0.0, 0.0, hover_height * p);
                let velocity = Vec3::new(0.0, 0.0, hover_height * dp / climb_time);
                Guidance {
                    locomotion: Locomotion::Fly,
                    reference: Reference::Flight(FlightSetpoint {
                        position,
                        velocity,
                        yaw: ctx.anchor_yaw,
                    }),
                    desired_position: Some(position),
                }
            }
        }
    }

    /// Goal or failure check after each step. `None` means keep going.
    pub fn check_completion(
        &self,
        state: &VehicleState,
        initial: &VehicleState,
        _params: &VehicleParams,
    ) -> Option<RunStatus> {
        match self.kind {
            ScenarioKind::SlopeClimb {
                slope_deg,
                height_gain,
                ..
            } => {
                if state.slipping {
                    Some(RunStatus::Failed(format!(
                        "traction lost on the {slope_deg} deg slope at t = {:.3} s",
                        state.time
                    )))
                } else if state.position.z - initial.position.z >= height_gain {
                    Some(RunStatus::Completed)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn lemniscate_cycle_length() {
        let l = Lemniscate::new(0.75);
        assert_abs_diff_eq!(l.cycle_length(), 4.572917602578687, epsilon = 1e-9);
    }

    #[test]
    fn figure8_is_closed_and_bounded() {
        let s = gen_figure8(1.5, 2.0, 3).unwrap();
        let first = s.sample(0.0).unwrap();
        let last = s.sample(s.duration).unwrap();
        assert!((first.position - last.position).norm() < 1e-9);
        for smp in s.samples(0.002) {
            assert!(smp.position.x.abs() <= 0.75 + 1e-12);
            assert_abs_diff_eq!(smp.velocity.norm(), 2.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn figure8_samples_are_kinematically_consistent() {
        let s = gen_figure8(1.5, 2.0, 1).unwrap();
        let dt = 1e-4;
        let smp = s.samples(dt);
        for w in smp.windows(2) {
            let fd = (w[1].position - w[0].position) * (1.0 / dt);
            let mid = (w[0].velocity + w[1].velocity) * 0.5;
            assert!((fd - mid).norm() < 1e-3 * 2.0);
        }
    }

    #[test]
    fn circle_examples() {
        let s = gen_circle(0.5, 1.0, 6.0, Locomotion::Drive).unwrap();
        let ctx = GuidanceContext {
            mode: Mode::Ground,
            mode_since: 0.0,
            anchor: Vec3::ZERO,
            anchor_yaw: 0.0,
        };
        let g = s.guidance(2.0, &ctx, &VehicleParams::default());
        assert_eq!(
            g.reference,
            Reference::Ground(GroundSetpoint::new(1.0, 2.0))
        );
        let smp = s.sample(1.0).unwrap();
        assert_abs_diff_eq!(
            (smp.position - Vec3::new(0.0, 0.5, 0.0)).norm(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(smp.velocity.norm(), 1.0, epsilon = 1e-12);
        assert!(gen_circle(0.5, 0.0, 6.0, Locomotion::Fly).is_err());
    }

    #[test]
    fn square_schedule_defaults() {
        let s = SquareSchedule {
            side: 0.75,
            segment_time: 1.5,
            turn_time: 1.0,
        };
        let b = s.boundaries();
        assert_eq!(b.len(), 7);
        assert_eq!(b[0], 1.5);
        assert_eq!(b[1], 2.5);
        assert_eq!(b[2], 4.0);
        assert_eq!(b[4], 6.5);
        assert!(s.total_time() >= 7.5);
        assert_eq!(s.setpoint(2.0), GroundSetpoint::new(0.0, FRAC_PI_2));
        assert_eq!(s.setpoint(0.5), GroundSetpoint::new(0.5, 0.0));
        let (x, y, psi) = s.pose(s.total_time());
        // three left turns close the square
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-12);
        let (x, y, _) = s.pose(4.0);
        assert_abs_diff_eq!(x, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(psi, 3.0 * FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn square_without_side_only_turns() {
        let s = SquareSchedule {
            side: 0.0,
            segment_time: 1.5,
            turn_time: 1.0,
        };
        assert_eq!(s.pose(9.0).0, 0.0);
        assert_eq!(s.pose(9.0).1, 0.0);
    }

    #[test]
    fn slope_timing() {
        assert_abs_diff_eq!(slope_climb_time(5.0, 0.5, 0.5), 11.4737, epsilon = 1e-4);
        let s = gen_slope_climb(5.0, 0.5, 0.5).unwrap();
        assert!(s.duration > 11.4737);
        assert!(s.requires_goal());
        assert!(gen_slope_climb(45.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn wrap() {
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-0.5), -0.5, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn arc_length_inverse(s in 0.0..20.0f64) {
            let l = Lemniscate::new(0.75);
            let th = l.theta_at(s);
            let laps = (th / TAU).floor();
            let rem = th - laps * TAU;
            let i = ((rem / TAU) * LEMNISCATE_SEGMENTS as f64).floor() as usize;
            let i = i.min(LEMNISCATE_SEGMENTS - 1);
            let back = laps * l.cycle_length() + l.arc[i] + Lemniscate::simpson(0.75, l.theta[i], rem);
            prop_assert!((back - s).abs() < 1e-9);
        }
    }
}
