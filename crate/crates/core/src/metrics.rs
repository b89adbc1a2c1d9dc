//! Run metrics computed from telemetry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Scenario, ScenarioKind};
use crate::telemetry::TelemetryRecord;

/// Standard gravity used when quoting accelerations in g.
pub const STANDARD_GRAVITY: f64 = 9.80665;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rmse_m: Option<f64>,
    pub mean_power_w: Option<f64>,
    pub energy_per_height_j_per_m: Option<f64>,
    pub lateral_g: Option<f64>,
    pub transition_time_s: Option<f64>,
    pub slip_occurred: bool,
}

fn in_window(r: &TelemetryRecord, (start, end): (f64, f64)) -> bool {
    r.t >= start - 1e-9 && r.t <= end + 1e-9
}

/// Energy over time across consecutive records with increasing time.
/// Pairs that step backwards (concatenated runs) are skipped.
fn mean_power(records: &[&TelemetryRecord]) -> Option<f64> {
    let (mut de, mut dt) = (0.0, 0.0);
    for w in records.windows(2) {
        let step = w[1].t - w[0].t;
        if step > 0.0 {
            de += w[1].energy_j - w[0].energy_j;
            dt += step;
        }
    }
    (dt > 0.0).then(|| de / dt)
}

fn speed_sq(r: &TelemetryRecord) -> f64 {
    r.velocity.iter().map(|v| v * v).sum()
}

pub fn compute_metrics(records: &[TelemetryRecord], scenario: &Scenario) -> Result<MetricsReport> {
    if records.is_empty() {
        return Err(Error::Metrics("telemetry is empty".into()));
    }
    let window = scenario.active_window();
    let active: Vec<&TelemetryRecord> = records.iter().filter(|r| in_window(r, window)).collect();

    let rmse_m = (!active.is_empty()).then(|| {
        let ss: f64 = active.iter().map(|r| r.tracking_error_m.powi(2)).sum();
        (ss / active.len() as f64).sqrt()
    });
    let slip_occurred = records.iter().any(|r| r.flags.slip);

    let lateral_g = match scenario.kind {
        ScenarioKind::Circle { radius, .. } if !active.is_empty() => {
            let v2 = active.iter().map(|r| speed_sq(r)).sum::<f64>() / active.len() as f64;
            Some(v2 / (radius * STANDARD_GRAVITY))
        }
        _ => None,
    };

    let energy_per_height_j_per_m = match scenario.kind {
        ScenarioKind::SlopeClimb { .. } => {
            let (first, last) = (&records[0], &records[records.len() - 1]);
            let gain = last.position[2] - first.position[2];
            if gain > 0.0 {
                Some((last.energy_j - first.energy_j) / gain)
            } else if slip_occurred {
                None
            } else {
                return Err(Error::Metrics("no height gained on the slope".into()));
            }
        }
        _ => None,
    };

    let transition_time_s = records
        .iter()
        .position(|r| r.flags.mode_request)
        .and_then(|i| {
            let start = records[i].t;
            records[i..]
                .iter()
                .find(|r| r.flags.mode_complete)
                .map(|r| r.t - start)
        });

    Ok(MetricsReport {
        rmse_m,
        mean_power_w: mean_power(&active),
        energy_per_height_j_per_m,
        lateral_g,
        transition_time_s,
        slip_occurred,
    })
}
