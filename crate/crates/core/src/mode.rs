//! Flight/ground mode state machine. Switching modes is a timed reversal of
//! the motor spin direction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vehicle::MotorCommand;

/// Flight to ground needs the vehicle slower than this vertically (m/s).
pub const LANDED_MAX_VERTICAL_SPEED: f64 = 0.2;
/// ... and closer than this to the terrain (m).
pub const LANDED_MAX_HEIGHT: f64 = 0.05;

/// Slack when comparing accumulated transition time with its duration.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Flight,
    Ground,
    TransitionToFlight,
    TransitionToGround,
}

impl Mode {
    pub fn is_transition(self) -> bool {
        matches!(self, Mode::TransitionToFlight | Mode::TransitionToGround)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Flight => "flight",
            Mode::Ground => "ground",
            Mode::TransitionToFlight => "to_flight",
            Mode::TransitionToGround => "to_ground",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "flight" => Ok(Mode::Flight),
            "ground" => Ok(Mode::Ground),
            "to_flight" => Ok(Mode::TransitionToFlight),
            "to_ground" => Ok(Mode::TransitionToGround),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// The two modes a caller can ask for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Locomotion {
    Fly,
    Drive,
}

impl Locomotion {
    pub fn settled_mode(self) -> Mode {
        match self {
            Locomotion::Fly => Mode::Flight,
            Locomotion::Drive => Mode::Ground,
        }
    }

    fn transition_mode(self) -> Mode {
        match self {
            Locomotion::Fly => Mode::TransitionToFlight,
            Locomotion::Drive => Mode::TransitionToGround,
        }
    }
}

/// Pure state-machine edge for a mode request.
pub fn request_mode(current: Mode, target: Locomotion) -> Mode {
    if current == target.settled_mode() || current == target.transition_mode() {
        current
    } else {
        target.transition_mode()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionStatus {
    pub elapsed: f64,
    pub duration: f64,
    pub source: Mode,
    pub target: Mode,
    /// Setpoint the ramp starts from.
    pub from: MotorCommand,
    /// Setpoint the ramp ends on.
    pub to: MotorCommand,
}

impl TransitionStatus {
    pub fn new(
        source: Mode,
        target: Mode,
        from: MotorCommand,
        to: MotorCommand,
        duration: f64,
    ) -> Self {
        Self {
            elapsed: 0.0,
            duration,
            source,
            target,
            from,
            to,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.elapsed >= self.duration - TIME_EPS
    }
}

/// Advances a transition by `dt`. The setpoint ramps linearly from `from`
/// to `to`; once the ramp has run its full duration the returned mode is
/// the target mode, otherwise it is the transition mode.
pub fn transition_step(status: &mut TransitionStatus, dt: f64) -> (MotorCommand, Mode) {
    status.elapsed = (status.elapsed + dt).min(status.duration);
    if status.is_complete() {
        status.elapsed = status.duration;
        return (status.to, status.target);
    }
    let s = status.elapsed / status.duration;
    let mode = match status.target {
        Mode::Flight => Mode::TransitionToFlight,
        _ => Mode::TransitionToGround,
    };
    (status.from.lerp(&status.to, s), mode)
}

/// What the mode manager needs to know about the vehicle to check
/// interlocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactInfo {
    pub on_ground: bool,
    pub vertical_speed: f64,
    pub height_above_terrain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeEvent {
    Requested(Mode),
    Completed(Mode),
}

/// Owns the mode, the active transition and the last issued command.
#[derive(Debug, Clone)]
pub struct ModeManager {
    mode: Mode,
    transition: Option<TransitionStatus>,
    last_command: MotorCommand,
    duration: f64,
}

impl ModeManager {
    pub fn new(mode: Mode, initial_command: MotorCommand, duration: f64) -> Self {
        Self {
            mode,
            transition: None,
            last_command: initial_command,
            duration,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn transition(&self) -> Option<&TransitionStatus> {
        self.transition.as_ref()
    }

    pub fn last_command(&self) -> MotorCommand {
        self.last_command
    }

    /// Starts (or supersedes) a transition toward `target`. The ramp runs
    /// from the last issued command to `target_setpoint`.
    pub fn request(
        &mut self,
        target: Locomotion,
        contact: &ContactInfo,
        target_setpoint: MotorCommand,
    ) -> Result<Option<ModeEvent>> {
        let next = request_mode(self.mode, target);
        if next == self.mode {
            return Ok(None);
        }
        match target {
            Locomotion::Fly if !contact.on_ground => {
                return Err(Error::Interlock(
                    "ground to flight requires ground contact".into(),
                ));
            }
            Locomotion::Drive
                if contact.vertical_speed.abs() >= LANDED_MAX_VERTICAL_SPEED
                    || contact.height_above_terrain >= LANDED_MAX_HEIGHT =>
            {
                return Err(Error::Interlock(format!(
                    "flight to ground requires |v_z| < {LANDED_MAX_VERTICAL_SPEED} m/s and height < {LANDED_MAX_HEIGHT} m"
                )));
            }
            _ => {}
        }
        let source = match target {
            Locomotion::Fly => Mode::Ground,
            Locomotion::Drive => Mode::Flight,
        };
        self.transition = Some(TransitionStatus::new(
            source,
            target.settled_mode(),
            self.last_command,
            target_setpoint,
            self.duration,
        ));
        self.mode = next;
        Ok(Some(ModeEvent::Requested(next)))
    }

    /// Produces the ramp command while a transition is active. Returns
    /// `None` outside transitions, when the caller's controller owns the
    /// motors.
    pub fn step_transition(&mut self, dt: f64) -> Option<(MotorCommand, Option<ModeEvent>)> {
        let status = self.transition.as_mut()?;
        let (cmd, mode) = transition_step(status, dt);
        self.last_command = cmd;
        self.mode = mode;
        if mode.is_transition() {
            Some((cmd, None))
        } else {
            self.transition = None;
            Some((cmd, Some(ModeEvent::Completed(mode))))
        }
    }

    /// Records a command issued by the flight or ground controller.
    pub fn record_command(&mut self, cmd: MotorCommand) {
        self.last_command = cmd;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const GROUNDED: ContactInfo = ContactInfo {
        on_ground: true,
        vertical_speed: 0.0,
        height_above_terrain: 0.0,
    };

    #[test]
    fn request_edges() {
        assert_eq!(
            request_mode(Mode::Ground, Locomotion::Fly),
            Mode::TransitionToFlight
        );
        assert_eq!(request_mode(Mode::Flight, Locomotion::Fly), Mode::Flight);
        assert_eq!(
            request_mode(Mode::TransitionToFlight, Locomotion::Drive),
            Mode::TransitionToGround
        );
        assert_eq!(
            request_mode(Mode::TransitionToFlight, Locomotion::Fly),
            Mode::TransitionToFlight
        );
        assert_eq!(
            request_mode(Mode::Flight, Locomotion::Drive),
            Mode::TransitionToGround
        );
    }

    #[test]
    fn ramp_midpoint_and_completion() {
        let mut st = TransitionStatus::new(
            Mode::Ground,
            Mode::Flight,
            MotorCommand::uniform(-150.0),
            MotorCommand::uniform(795.0),
            0.1,
        );
        let (cmd, mode) = transition_step(&mut st, 0.05);
        assert_eq!(mode, Mode::TransitionToFlight);
        assert_abs_diff_eq!(cmd.0[0], 322.5, epsilon = 1e-9);
        let (cmd, mode) = transition_step(&mut st, 0.05);
        assert_eq!(mode, Mode::Flight);
        assert_eq!(cmd, MotorCommand::uniform(795.0));
    }

    #[test]
    fn default_transition_takes_fifty_steps() {
        let mut st = TransitionStatus::new(
            Mode::Ground,
            Mode::Flight,
            MotorCommand::uniform(-150.0),
            MotorCommand::uniform(700.0),
            0.1,
        );
        let dt = 0.002;
        let mut steps = 0;
        let mut prev = st.from;
        loop {
            let (cmd, mode) = transition_step(&mut st, dt);
            steps += 1;
            // no jump bigger than one ramp increment
            let slope = (700.0 + 150.0) / 0.1;
            assert!((cmd.0[0] - prev.0[0]).abs() <= slope * dt + 1e-9);
            prev = cmd;
            if mode == Mode::Flight {
                break;
            }
        }
        assert_eq!(steps, 50);
        assert_abs_diff_eq!(steps as f64 * dt, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn manager_interlocks() {
        let mut m = ModeManager::new(Mode::Flight, MotorCommand::uniform(790.0), 0.1);
        let airborne = ContactInfo {
            on_ground: false,
            vertical_speed: -0.5,
            height_above_terrain: 1.0,
        };
        assert!(m
            .request(Locomotion::Drive, &airborne, MotorCommand::uniform(-150.0))
            .is_err());
        assert_eq!(m.mode(), Mode::Flight);
        let ev = m
            .request(Locomotion::Drive, &GROUNDED, MotorCommand::uniform(-150.0))
            .unwrap();
        assert_eq!(ev, Some(ModeEvent::Requested(Mode::TransitionToGround)));

        let mut g = ModeManager::new(Mode::Ground, MotorCommand::uniform(-150.0), 0.1);
        let lifted = ContactInfo {
            on_ground: false,
            ..GROUNDED
        };
        assert!(g
            .request(Locomotion::Fly, &lifted, MotorCommand::uniform(790.0))
            .is_err());
    }

    #[test]
    fn manager_runs_transition_to_ground() {
        let mut m = ModeManager::new(Mode::Flight, MotorCommand::uniform(790.0), 0.1);
        m.request(Locomotion::Drive, &GROUNDED, MotorCommand::uniform(-150.0))
            .unwrap();
        let mut done = None;
        for _ in 0..60 {
            let (cmd, ev) = m.step_transition(0.002).unwrap();
            if let Some(ev) = ev {
                done = Some((cmd, ev));
                break;
            }
        }
        let (cmd, ev) = done.unwrap();
        assert_eq!(ev, ModeEvent::Completed(Mode::Ground));
        assert!(cmd.0.iter().all(|&w| w <= -150.0));
        assert_eq!(m.mode(), Mode::Ground);
        assert!(m.step_transition(0.002).is_none());
    }

    #[test]
    fn supersede_starts_from_current_command() {
        let mut m = ModeManager::new(Mode::Ground, MotorCommand::uniform(-150.0), 0.1);
        m.request(Locomotion::Fly, &GROUNDED, MotorCommand::uniform(650.0))
            .unwrap();
        for _ in 0..25 {
            m.step_transition(0.002);
        }
        let mid = m.last_command();
        assert_abs_diff_eq!(mid.0[0], 250.0, epsilon = 1e-9);
        m.request(Locomotion::Drive, &GROUNDED, MotorCommand::uniform(-150.0))
            .unwrap();
        assert_eq!(m.mode(), Mode::TransitionToGround);
        let st = m.transition().unwrap();
        assert_eq!(st.from, mid);
        assert_eq!(st.source, Mode::Flight);
        assert_eq!(st.elapsed, 0.0);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [
            Mode::Flight,
            Mode::Ground,
            Mode::TransitionToFlight,
            Mode::TransitionToGround,
        ] {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("hover".parse::<Mode>().is_err());
    }
}
