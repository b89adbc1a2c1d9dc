//! Command-line front end: runs one scenario (or a batch of all of them)
//! and writes telemetry plus a metrics report.
//!
//! Exit codes: 0 success, 1 scenario failure (slip, timeout), 2 usage,
//! configuration or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use hybrid_quad::config::load_params;
use hybrid_quad::math::Vec3;
use hybrid_quad::metrics::compute_metrics;
use hybrid_quad::mode::Locomotion;
use hybrid_quad::scenario::{
    gen_circle, gen_figure8, gen_hover, gen_slope_climb, gen_square_path, gen_transition, Scenario,
    DEFAULT_CIRCLE_DURATION, DEFAULT_CIRCLE_RADIUS,
};
use hybrid_quad::sim::{
    run_scenario, RunOptions, RunStatus, DEFAULT_DT, DEFAULT_TELEMETRY_INTERVAL,
};
use hybrid_quad::telemetry::{to_csv, to_json};
use hybrid_quad::vehicle::VehicleParams;

#[derive(Parser)]
#[command(
    name = "hybrid-quad",
    version,
    about = "Hybrid aerial-ground quadrotor simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its telemetry and metrics.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioName {
    Hover,
    Circle,
    Figure8,
    Square,
    Slope,
    Transition,
}

impl ScenarioName {
    fn file_stem(self) -> &'static str {
        match self {
            ScenarioName::Hover => "hover",
            ScenarioName::Circle => "circle",
            ScenarioName::Figure8 => "figure8",
            ScenarioName::Square => "square",
            ScenarioName::Slope => "slope",
            ScenarioName::Transition => "transition",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Fly,
    Drive,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum, required_unless_present = "batch")]
    scenario: Option<ScenarioName>,
    /// Vehicle parameter file (key = value).
    #[arg(long)]
    config: PathBuf,
    /// Telemetry output path.
    #[arg(long, required_unless_present = "batch")]
    out: Option<PathBuf>,
    /// Run every scenario with its defaults, in parallel, writing into DIR.
    #[arg(long, value_name = "DIR", conflicts_with_all = ["scenario", "out", "metrics"])]
    batch: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Metrics JSON path [default: next to the telemetry, *.metrics.json].
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long)]
    slope_deg: Option<f64>,
    #[arg(long)]
    speed: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    cycles: Option<u32>,
    /// Figure-8 major diameter (m).
    #[arg(long)]
    diameter: Option<f64>,
    /// Square side (m).
    #[arg(long)]
    side: Option<f64>,
    /// Slope climb height gain (m).
    #[arg(long)]
    height_gain: Option<f64>,
    /// Locomotion for the circle scenario.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Run length for hover and circle (s).
    #[arg(long)]
    duration: Option<f64>,
}

/// Builds a scenario from its name and any overrides given on the command
/// line. Flags that do not apply to the scenario are ignored.
fn build_scenario(name: ScenarioName, a: &SimulateArgs) -> Result<Scenario> {
    let s = match name {
        ScenarioName::Hover => gen_hover(1.0, Vec3::ZERO, a.duration.unwrap_or(5.0)),
        ScenarioName::Circle => {
            let loco = match a.mode.unwrap_or(ModeArg::Drive) {
                ModeArg::Fly => Locomotion::Fly,
                ModeArg::Drive => Locomotion::Drive,
            };
            gen_circle(
                a.radius.unwrap_or(DEFAULT_CIRCLE_RADIUS),
                a.speed.unwrap_or(1.0),
                a.duration.unwrap_or(DEFAULT_CIRCLE_DURATION),
                loco,
            )
        }
        ScenarioName::Figure8 => gen_figure8(
            a.diameter.unwrap_or(1.5),
            a.speed.unwrap_or(2.0),
            a.cycles.unwrap_or(3),
        ),
        ScenarioName::Square => gen_square_path(a.side.unwrap_or(0.75), 1.5, 1.0),
        ScenarioName::Slope => gen_slope_climb(
            a.slope_deg.unwrap_or(15.0),
            a.speed.unwrap_or(0.5),
            a.height_gain.unwrap_or(0.5),
        ),
        ScenarioName::Transition => gen_transition(a.speed.unwrap_or(0.5), 1.0, 1.0),
    };
    s.context("invalid scenario parameters")
}

fn default_metrics_path(out: &Path) -> PathBuf {
    out.with_extension("metrics.json")
}

/// Runs one scenario and writes its files. Returns whether it succeeded.
fn simulate_one(
    scenario: &Scenario,
    params: &VehicleParams,
    dt: f64,
    format: Format,
    out: &Path,
    metrics_path: &Path,
) -> Result<bool> {
    let opts = RunOptions {
        dt,
        telemetry_interval: DEFAULT_TELEMETRY_INTERVAL,
    };
    let outcome = run_scenario(scenario, params, &opts).context("simulation setup rejected")?;
    info!(
        "{}: {} steps, {} records, status {:?}",
        scenario.name(),
        outcome.steps,
        outcome.records.len(),
        outcome.status
    );
    let body = match format {
        Format::Csv => to_csv(&outcome.records),
        Format::Json => to_json(&outcome.records)?,
    };
    fs::write(out, body).with_context(|| format!("writing {}", out.display()))?;

    let metrics = if outcome.records.is_empty() {
        None
    } else {
        Some(compute_metrics(&outcome.records, scenario)?)
    };
    let (status, reason) = match &outcome.status {
        RunStatus::Completed => ("completed", None),
        RunStatus::Failed(why) => ("failed", Some(why.clone())),
    };
    let report = json!({
        "scenario": scenario.name(),
        "status": status,
        "failure_reason": reason,
        "dt": dt,
        "steps": outcome.steps,
        "saturated_steps": outcome.saturated_steps,
        "metrics": metrics,
    });
    let text = serde_json::to_string_pretty(&report)? + "\n";
    fs::write(metrics_path, text).with_context(|| format!("writing {}", metrics_path.display()))?;
    if let Some(why) = reason {
        eprintln!("{}: scenario failed: {why}", scenario.name());
    }
    Ok(outcome.status.is_success())
}

fn simulate(args: &SimulateArgs) -> Result<bool> {
    let params = load_params(&args.config).context("loading configuration")?;
    let ext = match args.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };

    if let Some(dir) = &args.batch {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let jobs: Vec<(Scenario, PathBuf, PathBuf)> = ScenarioName::value_variants()
            .iter()
            .map(|&name| {
                let stem = name.file_stem();
                Ok((
                    build_scenario(name, args)?,
                    dir.join(format!("{stem}.{ext}")),
                    dir.join(format!("{stem}.metrics.json")),
                ))
            })
            .collect::<Result<_>>()?;
        let results: Vec<Result<bool>> = thread::scope(|scope| {
            let handles: Vec<_> = jobs
                .iter()
                .map(|(s, out, m)| {
                    let params = &params;
                    scope.spawn(move || simulate_one(s, params, args.dt, args.format, out, m))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scenario thread panicked"))
                .collect()
        });
        let mut all_ok = true;
        for r in results {
            all_ok &= r?;
        }
        return Ok(all_ok);
    }

    let name = args.scenario.expect("clap enforces --scenario");
    let out = args.out.as_deref().expect("clap enforces --out");
    let scenario = build_scenario(name, args)?;
    let metrics_path = args
        .metrics
        .clone()
        .unwrap_or_else(|| default_metrics_path(out));
    simulate_one(&scenario, &params, args.dt, args.format, out, &metrics_path)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // clap omits the usage line for some errors; always show it
            let rendered = e.render().to_string();
            eprint!("{rendered}");
            if !rendered.contains("Usage:") {
                let mut cmd = Cli::command();
                cmd.build();
                let sub = cmd
                    .find_subcommand_mut("simulate")
                    .expect("simulate exists");
                eprintln!("\n{}", sub.render_usage());
            }
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => simulate(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
