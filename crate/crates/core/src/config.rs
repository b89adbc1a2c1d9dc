//! Flat `key = value` parameter files.
//!
//! Keys carry their unit as a suffix. Blank lines and `#` comments are
//! ignored, unknown or repeated keys are errors and missing keys keep their
//! default. The position-loop bandwidth must be given exactly once, either
//! as `omega_nat_hz` or `omega_nat_rad_s`. The thrust coefficient is either
//! given directly or calibrated against `hover_power_w` (default 124.35 W).

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::vehicle::{calibrate_thrust_coeff, hz_to_rad_s, VehicleParams, DEFAULT_HOVER_POWER};

type Setter = fn(&mut VehicleParams, f64);

const KEYS: &[(&str, Setter)] = &[
    ("mass_kg", |p, v| p.mass = v),
    ("inertia_xx_kg_m2", |p, v| p.inertia.x = v),
    ("inertia_yy_kg_m2", |p, v| p.inertia.y = v),
    ("inertia_zz_kg_m2", |p, v| p.inertia.z = v),
    ("rotor_spacing_m", |p, v| p.rotor_spacing_l = v),
    ("thrust_to_torque_m", |p, v| p.thrust_to_torque_k = v),
    ("omega_nat_hz", |p, v| p.omega_nat = hz_to_rad_s(v)),
    ("omega_nat_rad_s", |p, v| p.omega_nat = v),
    ("zeta", |p, v| p.zeta = v),
    ("tau_att_roll_s", |p, v| p.tau_att.x = v),
    ("tau_att_pitch_s", |p, v| p.tau_att.y = v),
    ("tau_att_yaw_s", |p, v| p.tau_att.z = v),
    ("tau_rate_roll_s", |p, v| p.tau_omega.x = v),
    ("tau_rate_pitch_s", |p, v| p.tau_omega.y = v),
    ("tau_rate_yaw_s", |p, v| p.tau_omega.z = v),
    ("wheel_radius_inv_per_m", |p, v| p.wheel_radius_inv_k1 = v),
    ("wheel_offset_m", |p, v| p.wheel_offset_k2 = v),
    ("reduction_ratio", |p, v| p.reduction_k3 = v),
    ("idle_speed_rad_s", |p, v| p.idle_speed_wi = v),
    ("thrust_coeff_n_s2", |p, v| p.thrust_coeff_ct = v),
    ("bearing_friction_n_m", |p, v| p.bearing_friction_torque = v),
    ("prop_inertia_kg_m2", |p, v| p.prop_inertia = v),
    ("prop_drag_n_m_s2", |p, v| p.prop_drag_coeff = v),
    ("motor_time_constant_s", |p, v| p.motor_time_constant = v),
    ("drive_efficiency", |p, v| p.drive_efficiency = v),
    ("motor_efficiency", |p, v| p.motor_efficiency = v),
    ("idle_power_w", |p, v| p.idle_power = v),
    ("rolling_resist_coeff", |p, v| p.rolling_resist_coeff = v),
    ("turn_scrub_coeff", |p, v| p.turn_scrub_coeff = v),
    ("traction_mu", |p, v| p.traction_mu = v),
    ("accel_sat_m_s2", |p, v| p.accel_sat = v),
    ("max_motor_speed_rad_s", |p, v| p.max_motor_speed = v),
    ("transition_duration_s", |p, v| p.transition_duration = v),
    // handled after the rest are applied
    ("hover_power_w", |_, _| {}),
];

fn config_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Config {
        line,
        reason: reason.into(),
    }
}

/// Parses parameter text. Line numbers in errors are 1-based.
pub fn parse_params(text: &str) -> Result<VehicleParams> {
    let mut seen: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected key = value, got {content:?}")))?;
        let key = key.trim();
        let (name, _) = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| config_err(line, format!("unknown key {key:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| config_err(line, format!("{key}: not a number: {:?}", value.trim())))?;
        if !value.is_finite() {
            return Err(config_err(line, format!("{key}: value must be finite")));
        }
        if let Some((first, _)) = seen.insert(name, (line, value)) {
            return Err(config_err(
                line,
                format!("{key} already set on line {first}"),
            ));
        }
    }

    match (
        seen.contains_key("omega_nat_hz"),
        seen.contains_key("omega_nat_rad_s"),
    ) {
        (true, true) => {
            return Err(Error::ConfigFile(
                "give only one of omega_nat_hz and omega_nat_rad_s".into(),
            ))
        }
        (false, false) => {
            return Err(Error::ConfigFile(
                "one of omega_nat_hz or omega_nat_rad_s is required".into(),
            ))
        }
        _ => {}
    }
    if seen.contains_key("thrust_coeff_n_s2") && seen.contains_key("hover_power_w") {
        return Err(Error::ConfigFile(
            "give only one of thrust_coeff_n_s2 and hover_power_w".into(),
        ));
    }

    let mut params = VehicleParams::default();
    for (key, setter) in KEYS {
        if let Some((_, v)) = seen.get(key) {
            setter(&mut params, *v);
        }
    }
    if !seen.contains_key("thrust_coeff_n_s2") {
        let target = seen
            .get("hover_power_w")
            .map(|(_, v)| *v)
            .unwrap_or(DEFAULT_HOVER_POWER);
        params.thrust_coeff_ct = calibrate_thrust_coeff(target, &params)?;
    }
    params.validate()?;
    Ok(params)
}

pub fn load_params(path: &Path) -> Result<VehicleParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigFile(format!("cannot read {}: {e}", path.display())))?;
    parse_params(&text)
}
