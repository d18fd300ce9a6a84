//! Command-line front end: `simulate`, `design`, `sensitivity` and `analytics`.
//!
//! Each command computes all of its outputs in memory and only then writes
//! them, so a failed run leaves the output directory untouched.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::analytics::{
    closest_approach_distance, current_density, current_density_right_angle, fall_time,
    incident_velocity, k_parameter, min_width_after_scattering, nv_angular_frequency,
    nv_initial_separation, nv_max_separation, nv_spin_acceleration, scattering_angle,
    scattering_velocity_kick, total_time, CurrentDensity, GroundWidths, NVModel, ScatteringInput,
    TimeBreakdown, WavePacketModel,
};
use crate::config::{ConfigError, RunConfig};
use crate::dynamics::Trajectory;
use crate::error::Error;
use crate::protocol::{
    amplification_factor, design_currents, run_protocol_full, ScenarioConfig, ScenarioReport,
};
use crate::sensitivity::{
    current_limit, limit_curve, linear_fit, monte_carlo_deviation, second_deviation,
    FluctuationSpec, LinearFit, MonteCarloStats, OffsetDistribution, SegmentedPath,
};
use crate::types::TrajectoryState;

/// Version of the output file layout and CSV column sets.
pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(
    name = "diamag",
    version,
    about = "Diamagnetic wire-scattering superposition toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate both branches and write trajectories, events and the report.
    Simulate(CommonArgs),
    /// Design the splitting and side currents and check current densities.
    Design(CommonArgs),
    /// Current-fluctuation limits and Monte Carlo deviation statistics.
    Sensitivity(CommonArgs),
    /// Closed-form results only.
    Analytics(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Design(_) => "design",
            Command::Sensitivity(_) => "sensitivity",
            Command::Analytics(_) => "analytics",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Design(a)
            | Command::Sensitivity(a)
            | Command::Analytics(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Override `fluctuation.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override `fluctuation.samples`.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run {
                source: Error::InvalidInput(_),
                ..
            } => 2,
            CliError::Run { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }
}

trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for crate::Result<T> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Run {
            context: what.to_string(),
            source,
        })
    }
}

/// Exit codes beyond the error cases.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 4;

/// Files produced by one command, written together at the end.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("outputs serialize");
        text.push('\n');
        self.add(name, text);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(io(&path))?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub format_version: String,
    pub command: String,
    pub config_path: String,
    pub output_dir: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub files: Vec<String>,
    pub resolved_config: RunConfig,
}

/// Result of a successful command.
#[derive(Debug)]
pub struct Outcome {
    pub outputs: OutputSet,
    pub exit_code: i32,
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn trajectory_csv(states: &[TrajectoryState]) -> String {
    let mut out = String::from("t,x,z,vx,vz\r\n");
    for s in states {
        let _ = write!(
            out,
            "{},{},{},{},{}\r\n",
            f(s.t),
            f(s.pos.x),
            f(s.pos.z),
            f(s.vel.x),
            f(s.vel.z)
        );
    }
    out
}

fn events_csv(branches: &[(&str, &Trajectory)]) -> String {
    let mut out = String::from("branch,event,t,x,z,vx,vz\r\n");
    for (name, traj) in branches {
        for e in &traj.events {
            let s = e.state;
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}\r\n",
                name,
                csv_field(&e.kind.label()),
                f(e.t),
                f(s.pos.x),
                f(s.pos.z),
                f(s.vel.x),
                f(s.vel.z)
            );
        }
    }
    out
}

/// Parse the configuration and apply command-line overrides.
pub fn load_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.fluctuation.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.fluctuation.samples = samples;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run a command and write its outputs.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let args = cli.command.args();
    let cfg = load_config(args)?;
    let mut outcome = match &cli.command {
        Command::Simulate(_) => simulate(&cfg)?,
        Command::Design(_) => design(&cfg)?,
        Command::Sensitivity(_) => sensitivity(&cfg)?,
        Command::Analytics(_) => analytics(&cfg)?,
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let mut files: Vec<String> = outcome.outputs.names().map(String::from).collect();
    files.push("manifest.json".into());
    let manifest = RunManifest {
        format_version: FORMAT_VERSION.into(),
        command: cli.command.name().into(),
        config_path: args.config.display().to_string(),
        output_dir: args.out.display().to_string(),
        timestamp,
        files,
        resolved_config: cfg,
    };
    outcome.outputs.add_json("manifest.json", &manifest);
    outcome.outputs.write(&args.out)?;
    Ok(outcome)
}

/// Parse arguments, run, report errors on stderr and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if outcome.exit_code == EXIT_INFEASIBLE {
                eprintln!("design infeasible: current density exceeds the configured maximum");
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, Serialize)]
struct SimulationReport<'a> {
    report: &'a ScenarioReport,
    amplification_factor: f64,
    analytic_total_time: TimeBreakdown,
    left_steps: usize,
    right_steps: usize,
}

fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scenario = cfg.scenario();
    let run = run_protocol_full(&scenario).context("protocol run")?;
    let mut out = OutputSet::default();
    out.add("left.csv", trajectory_csv(&run.left.states));
    out.add("right.csv", trajectory_csv(&run.right.states));
    out.add(
        "events.csv",
        events_csv(&[("left", &run.left), ("right", &run.right)]),
    );

    let mut sup = String::from("t,delta_x\r\n");
    for (t, d) in run.superposition_series(cfg.outputs.superposition_points) {
        let _ = write!(sup, "{},{}\r\n", f(t), f(d));
    }
    out.add("superposition.csv", sup);

    let mut overlay = String::from("branch,t,x,z\r\n");
    for (name, traj) in [("left", &run.left), ("right", &run.right)] {
        for s in &traj.states {
            let _ = write!(
                overlay,
                "{name},{},{},{}\r\n",
                f(s.t),
                f(s.pos.x),
                f(s.pos.z)
            );
        }
    }
    out.add("overlay.csv", overlay);

    let mut wires = String::from("index,role,x,z,current\r\n");
    for (i, (w, role)) in run
        .env
        .wires
        .iter()
        .zip(["split", "left", "right"])
        .enumerate()
    {
        let _ = write!(
            wires,
            "{i},{role},{},{},{}\r\n",
            f(w.position.x),
            f(w.position.z),
            f(w.current)
        );
    }
    out.add("wires.csv", wires);

    let analytic = total_time(scenario.z0, scenario.x_spl, &scenario.effective_constants())
        .context("analytic time")?;
    out.add_json(
        "report.json",
        &SimulationReport {
            report: &run.report,
            amplification_factor: amplification_factor(&run.report, &scenario),
            analytic_total_time: analytic,
            left_steps: run.left.stats.accepted,
            right_steps: run.right.stats.accepted,
        },
    );
    Ok(Outcome {
        outputs: out,
        exit_code: EXIT_OK,
    })
}

#[derive(Debug, Serialize)]
struct DensityReport {
    split_from_distance: f64,
    split_right_angle: f64,
    side_from_distance: f64,
}

#[derive(Debug, Serialize)]
struct DesignReport {
    i_split: f64,
    i_side: f64,
    exit_angle_residual: f64,
    closest_approach_split: f64,
    closest_approach_side: f64,
    current_density: DensityReport,
    max_current_density: f64,
    feasible: bool,
}

fn design(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scenario = cfg.scenario();
    let designed = design_currents(&scenario).context("current design")?;
    let fixed = ScenarioConfig {
        i_split: Some(designed.i_split),
        i_side: Some(designed.i_side),
        ..scenario.clone()
    };
    let run = run_protocol_full(&fixed).context("verification run")?;
    let c = fixed.effective_constants();
    let v_in = incident_velocity(fixed.z0, &c).context("incident velocity")?;
    let b = fixed.delta_x0 / 2.0;
    let split = current_density(
        &ScatteringInput::new(designed.i_split, b, v_in),
        run.report.closest_approach_split,
        &c,
    )
    .context("splitting-wire density")?;
    let side = current_density(
        &ScatteringInput::new(designed.i_side, b, v_in),
        run.report.closest_approach_side,
        &c,
    )
    .context("side-wire density")?;
    let densities = DensityReport {
        split_from_distance: split.from_distance,
        split_right_angle: current_density_right_angle(b, v_in, &c)
            .context("right-angle density")?,
        side_from_distance: side.from_distance,
    };
    let worst = densities
        .split_from_distance
        .max(densities.split_right_angle)
        .max(densities.side_from_distance);
    let feasible = worst <= cfg.design.max_current_density;

    let mut resolved = cfg.clone();
    resolved.scenario.i_split = Some(designed.i_split);
    resolved.scenario.i_side = Some(designed.i_side);

    let mut out = OutputSet::default();
    out.add_json(
        "design.json",
        &DesignReport {
            i_split: designed.i_split,
            i_side: designed.i_side,
            exit_angle_residual: designed.exit_angle_residual,
            closest_approach_split: run.report.closest_approach_split,
            closest_approach_side: run.report.closest_approach_side,
            current_density: densities,
            max_current_density: cfg.design.max_current_density,
            feasible,
        },
    );
    out.add("resolved_config.json", resolved.to_json() + "\n");
    Ok(Outcome {
        outputs: out,
        exit_code: if feasible { EXIT_OK } else { EXIT_INFEASIBLE },
    })
}

#[derive(Debug, Serialize)]
struct PathComparison {
    label: &'static str,
    path: SegmentedPath,
    first_deviation: f64,
    second_deviation: f64,
}

#[derive(Debug, Serialize)]
struct LimitRow {
    length: f64,
    target: f64,
    current_limit: f64,
}

#[derive(Debug, Serialize)]
struct Linearity {
    offsets: Vec<f64>,
    deviations: Vec<f64>,
    fit: LinearFit,
}

#[derive(Debug, Serialize)]
struct SensitivityReport {
    monte_carlo: MonteCarloStats,
    analytic: Vec<PathComparison>,
    limits: Vec<LimitRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    linearity: Option<Linearity>,
}

/// Segment lengths compared with the Monte Carlo result: the nominal 500 um
/// and the straight-line distance from the splitting wire to a side wire.
pub fn comparison_lengths(scenario: &ScenarioConfig) -> [(&'static str, f64); 2] {
    [
        ("nominal", 500e-6),
        (
            "straight_line",
            scenario.x_spl.hypot(scenario.resolved_z_side()),
        ),
    ]
}

fn sensitivity(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scenario = cfg
        .scenario()
        .with_resolved_currents()
        .context("current resolution")?;
    let b = scenario.delta_x0 / 2.0;
    let mc = monte_carlo_deviation(&scenario, &cfg.fluctuation).context("Monte Carlo")?;

    let sigma = cfg.fluctuation.relative_sigma;
    let analytic = comparison_lengths(&scenario)
        .into_iter()
        .map(|(label, length)| {
            let path = SegmentedPath::two_stage(length, b)?;
            Ok(PathComparison {
                label,
                path,
                first_deviation: crate::sensitivity::first_deviation(sigma, &path),
                second_deviation: second_deviation(sigma, &path)?,
            })
        })
        .collect::<crate::Result<Vec<_>>>()
        .context("analytic deviation")?;

    let target = cfg.outputs.limit_target;
    let mut limits = Vec::new();
    let mut limits_csv = String::from("length,target,current_limit\r\n");
    let mut curve_csv = String::from("length,deviation,current_limit\r\n");
    let [lo, hi] = cfg.outputs.limit_curve_range;
    for &length in &cfg.outputs.limit_lengths {
        let path = SegmentedPath::two_stage(length, b).context("segmented path")?;
        let lim = current_limit(target, &path).context("current limit")?;
        let _ = write!(limits_csv, "{},{},{}\r\n", f(length), f(target), f(lim));
        limits.push(LimitRow {
            length,
            target,
            current_limit: lim,
        });
        for p in
            limit_curve(&path, (lo, hi), cfg.outputs.limit_curve_points).context("limit curve")?
        {
            let _ = write!(
                curve_csv,
                "{},{},{}\r\n",
                f(length),
                f(p.deviation),
                f(p.current_limit)
            );
        }
    }

    let linearity = if cfg.outputs.linearity_offsets.is_empty() {
        None
    } else {
        let mut deviations = Vec::new();
        for &offset in &cfg.outputs.linearity_offsets {
            let spec = FluctuationSpec {
                relative_sigma: offset,
                distribution: OffsetDistribution::Fixed,
                samples: 1,
                seed: 0,
            };
            deviations.push(
                monte_carlo_deviation(&scenario, &spec)
                    .context("linearity run")?
                    .mean,
            );
        }
        let fit = linear_fit(&cfg.outputs.linearity_offsets, &deviations).context("linear fit")?;
        Some(Linearity {
            offsets: cfg.outputs.linearity_offsets.clone(),
            deviations,
            fit,
        })
    };

    let mut samples_csv = String::from("index,relative_offset,deviation\r\n");
    for s in &mc.samples {
        let _ = write!(
            samples_csv,
            "{},{},{}\r\n",
            s.index,
            f(s.relative_offset),
            f(s.deviation)
        );
    }

    let mut out = OutputSet::default();
    out.add_json(
        "statistics.json",
        &SensitivityReport {
            monte_carlo: mc,
            analytic,
            limits,
            linearity,
        },
    );
    out.add("samples.csv", samples_csv);
    out.add("limits.csv", limits_csv);
    out.add("limit_curve.csv", curve_csv);
    Ok(Outcome {
        outputs: out,
        exit_code: EXIT_OK,
    })
}

#[derive(Debug, Serialize)]
struct Kinematics {
    incident_velocity: f64,
    fall_time: f64,
}

#[derive(Debug, Serialize)]
struct Scattering {
    impact_parameter: f64,
    i_split: f64,
    k: f64,
    angle: f64,
    closest_approach: f64,
}

#[derive(Debug, Serialize)]
struct Densities {
    #[serde(skip_serializing_if = "Option::is_none")]
    split: Option<CurrentDensity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    side_from_distance: Option<f64>,
    right_angle: f64,
}

#[derive(Debug, Serialize)]
struct NvReport {
    model: NVModel,
    angular_frequency: f64,
    spin_acceleration: [f64; 2],
    max_separation: f64,
    t_max_separation: f64,
}

#[derive(Debug, Serialize)]
struct SpreadRow {
    t: f64,
    width: f64,
}

#[derive(Debug, Serialize)]
struct WidthRow {
    mass: f64,
    width: f64,
}

#[derive(Debug, Serialize)]
struct WavePacketReport {
    packet: WavePacketModel,
    ground: GroundWidths,
    free_spread: Vec<SpreadRow>,
    velocity_kick: f64,
    min_width_after_scattering: Vec<WidthRow>,
}

#[derive(Debug, Serialize)]
struct AnalyticsReport {
    kinematics: Kinematics,
    total_time: TimeBreakdown,
    scattering: Scattering,
    current_density: Densities,
    #[serde(skip_serializing_if = "Option::is_none")]
    nv: Option<NvReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wave_packet: Option<WavePacketReport>,
}

fn analytics(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scenario = cfg.scenario();
    let c = scenario.effective_constants();
    let a = &cfg.analytics;
    let b = scenario.delta_x0 / 2.0;
    let v_in = incident_velocity(scenario.z0, &c).context("incident velocity")?;
    let i_split = scenario.splitting_current().context("splitting current")?;
    let split_input = ScatteringInput::new(i_split, b, v_in);
    let mut out = OutputSet::default();

    let density = |current: f64, d: Option<f64>| -> Result<Option<CurrentDensity>, CliError> {
        d.map(|d| current_density(&ScatteringInput::new(current, b, v_in), d, &c))
            .transpose()
            .context("current density")
    };

    let nv = match &a.nv {
        Some(o) => {
            let model = NVModel::new(o.mass, o.gradient);
            let (t_max_separation, max_separation) =
                nv_max_separation(&model, o.t_max, &c).context("NV separation")?;
            let (plus, minus) = nv_spin_acceleration(&model, &c);
            let mut curve = String::from("t,separation\r\n");
            for i in 0..o.points {
                let t = o.t_max * i as f64 / (o.points - 1) as f64;
                let d = nv_initial_separation(&model, t, &c).context("NV separation")?;
                let _ = write!(curve, "{},{}\r\n", f(t), f(d));
            }
            out.add("nv_separation.csv", curve);
            Some(NvReport {
                model,
                angular_frequency: nv_angular_frequency(&model, &c),
                spin_acceleration: [plus, minus],
                max_separation,
                t_max_separation,
            })
        }
        None => None,
    };

    let wave_packet = match &a.wave_packet {
        Some(o) => {
            let mass = scenario.particle.mass;
            let mut packet =
                WavePacketModel::from_trap(mass, o.trap_omega, &c).context("trap widths")?;
            let ground = GroundWidths {
                position: packet.initial_width,
                momentum: packet.initial_momentum_width,
            };
            if let Some(w) = o.initial_width {
                packet.initial_width = w;
                packet.initial_momentum_width = c.hbar / (2.0 * w);
            }
            let free_spread = o
                .spread_times
                .iter()
                .map(|&t| {
                    Ok(SpreadRow {
                        t,
                        width: packet.spread_after(t, &c)?,
                    })
                })
                .collect::<crate::Result<Vec<_>>>()
                .context("free spread")?;
            let velocity_kick =
                scattering_velocity_kick(&split_input, o.kick_reference_distance, &c)
                    .context("velocity kick")?;
            let min_width_after_scattering = std::iter::once(mass)
                .chain(o.extra_masses.iter().copied())
                .map(|m| {
                    Ok(WidthRow {
                        mass: m,
                        width: min_width_after_scattering(m, velocity_kick, &c)?,
                    })
                })
                .collect::<crate::Result<Vec<_>>>()
                .context("post-scattering width")?;
            Some(WavePacketReport {
                packet,
                ground,
                free_spread,
                velocity_kick,
                min_width_after_scattering,
            })
        }
        None => None,
    };

    let report = AnalyticsReport {
        kinematics: Kinematics {
            incident_velocity: v_in,
            fall_time: fall_time(scenario.z0, &c).context("fall time")?,
        },
        total_time: total_time(scenario.z0, scenario.x_spl, &c).context("total time")?,
        scattering: Scattering {
            impact_parameter: b,
            i_split,
            k: k_parameter(&split_input, &c),
            angle: scattering_angle(&split_input, &c),
            closest_approach: closest_approach_distance(&split_input, &c),
        },
        current_density: Densities {
            split: density(i_split, a.closest_approach_split)?,
            side_from_distance: match scenario.i_side {
                Some(i) => density(i, a.closest_approach_side)?.map(|d| d.from_distance),
                None => None,
            },
            right_angle: current_density_right_angle(b, v_in, &c).context("right-angle density")?,
        },
        nv,
        wave_packet,
    };
    out.add_json("analytics.json", &report);
    Ok(Outcome {
        outputs: out,
        exit_code: EXIT_OK,
    })
}
