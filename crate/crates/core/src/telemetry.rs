//! Telemetry records and their CSV / JSON encodings.
//!
//! Every real is rounded to 9 significant digits when a record is captured,
//! so the CSV text round-trips to the in-memory value exactly.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::Mode;
use crate::sim::VehicleState;
use crate::vehicle::MotorCommand;

pub const CSV_HEADER: &str =
    "t,mode,px,py,pz,vx,vy,vz,yaw,cmd1,cmd2,cmd3,cmd4,w1,w2,w3,w4,p1,p2,p3,p4,wr,wl,power,energy,err,flags";

const COLUMNS: usize = 27;

/// Rounds to 9 significant digits. Negative zero becomes zero.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let q: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

fn fmt_real(out: &mut String, x: f64) {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e15).contains(&a) {
        write!(out, "{x}").unwrap();
    } else {
        write!(out, "{x:e}").unwrap();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Flags {
    pub slip: bool,
    pub saturation: bool,
    pub mode_request: bool,
    pub mode_complete: bool,
    pub failure: bool,
}

impl Flags {
    const TOKENS: [&'static str; 5] = [
        "slip",
        "saturation",
        "mode_request",
        "mode_complete",
        "failure",
    ];

    fn bits(&self) -> [bool; 5] {
        [
            self.slip,
            self.saturation,
            self.mode_request,
            self.mode_complete,
            self.failure,
        ]
    }

    pub fn merge(&mut self, other: Flags) {
        self.slip |= other.slip;
        self.saturation |= other.saturation;
        self.mode_request |= other.mode_request;
        self.mode_complete |= other.mode_complete;
        self.failure |= other.failure;
    }

    pub fn is_empty(&self) -> bool {
        !self.bits().iter().any(|&b| b)
    }

    /// Semicolon-joined token list, empty when no flag is set.
    pub fn to_tokens(&self) -> String {
        Self::TOKENS
            .iter()
            .zip(self.bits())
            .filter(|(_, b)| *b)
            .map(|(t, _)| *t)
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let mut f = Flags::default();
        for tok in s.split(';').filter(|t| !t.is_empty()) {
            match tok {
                "slip" => f.slip = true,
                "saturation" => f.saturation = true,
                "mode_request" => f.mode_request = true,
                "mode_complete" => f.mode_complete = true,
                "failure" => f.failure = true,
                other => return Err(format!("unknown flag {other:?}")),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRecord {
    pub t: f64,
    pub mode: Mode,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub yaw: f64,
    pub motor_cmd: [f64; 4],
    pub motor_speed: [f64; 4],
    pub prop_speed: [f64; 4],
    /// Right, left.
    pub wheel_speed: [f64; 2],
    pub power_w: f64,
    pub energy_j: f64,
    pub tracking_error_m: f64,
    pub flags: Flags,
}

impl TelemetryRecord {
    pub fn capture(
        state: &VehicleState,
        cmd: &MotorCommand,
        tracking_error: f64,
        flags: Flags,
    ) -> Self {
        let q3 = |v: [f64; 3]| v.map(quantize);
        let q4 = |v: [f64; 4]| v.map(quantize);
        Self {
            t: quantize(state.time),
            mode: state.mode,
            position: q3(state.position.to_array()),
            velocity: q3(state.velocity.to_array()),
            yaw: quantize(state.yaw()),
            motor_cmd: q4(cmd.0),
            motor_speed: q4(state.actuators.motor_speed),
            prop_speed: q4(state.actuators.prop_speed),
            wheel_speed: [quantize(state.wheels.right), quantize(state.wheels.left)],
            power_w: quantize(state.power),
            energy_j: quantize(state.energy_used),
            tracking_error_m: quantize(tracking_error),
            flags,
        }
    }

    fn reals(&self) -> Vec<f64> {
        let mut v = vec![self.t];
        v.extend(self.position);
        v.extend(self.velocity);
        v.push(self.yaw);
        v.extend(self.motor_cmd);
        v.extend(self.motor_speed);
        v.extend(self.prop_speed);
        v.extend(self.wheel_speed);
        v.extend([self.power_w, self.energy_j, self.tracking_error_m]);
        v
    }

    pub fn to_csv_row(&self) -> String {
        let reals = self.reals();
        let mut out = String::with_capacity(256);
        fmt_real(&mut out, reals[0]);
        out.push(',');
        out.push_str(self.mode.as_str());
        for x in &reals[1..] {
            out.push(',');
            fmt_real(&mut out, *x);
        }
        out.push(',');
        out.push_str(&self.flags.to_tokens());
        out
    }

    pub fn from_csv_row(row: &str, line: usize) -> Result<Self> {
        let bad = |reason: String| Error::TelemetryParse { line, reason };
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != COLUMNS {
            return Err(bad(format!(
                "expected {COLUMNS} columns, found {}",
                cols.len()
            )));
        }
        let mode = Mode::from_str(cols[1]).map_err(|e| bad(e.to_string()))?;
        let mut reals = Vec::with_capacity(COLUMNS - 2);
        for (i, c) in cols.iter().enumerate() {
            if i == 1 || i == COLUMNS - 1 {
                continue;
            }
            reals.push(
                c.parse::<f64>()
                    .map_err(|e| bad(format!("column {}: {e}", i + 1)))?,
            );
        }
        let flags = Flags::parse(cols[COLUMNS - 1]).map_err(bad)?;
        let r = |i: usize| reals[i];
        Ok(Self {
            t: r(0),
            mode,
            position: [r(1), r(2), r(3)],
            velocity: [r(4), r(5), r(6)],
            yaw: r(7),
            motor_cmd: [r(8), r(9), r(10), r(11)],
            motor_speed: [r(12), r(13), r(14), r(15)],
            prop_speed: [r(16), r(17), r(18), r(19)],
            wheel_speed: [r(20), r(21)],
            power_w: r(22),
            energy_j: r(23),
            tracking_error_m: r(24),
            flags,
        })
    }
}

pub fn to_csv(records: &[TelemetryRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 256);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

pub fn from_csv(text: &str) -> Result<Vec<TelemetryRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => {
            return Err(Error::TelemetryParse {
                line: 1,
                reason: "missing or wrong header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| TelemetryRecord::from_csv_row(l.trim_end(), i + 1))
        .collect()
}

pub fn to_json(records: &[TelemetryRecord]) -> Result<String> {
    serde_json::to_string_pretty(records).map_err(|e| Error::Serialization(e.to_string()))
}
