mod args;
mod io;
mod manifest;
mod plan;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use spinqa::device::DeviceConfig;
use spinqa::dynamics::{AnnealConfig, AnnealMode};
use spinqa::ising::Schedule;
use spinqa::mht::{PruneBackend, Region, Scenario, ScenarioConfig, TargetState, TrackMode, TrackerConfig, WeightPolicy};
use spinqa::sqa::QmcConfig;
use spinqa::timing::{ResetMode, TimingModel};
use spinqa::Error;

use args::*;
use manifest::RunManifest;
use plan::{shape, MwisBackend, Plan};

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Usage(_) | Failure::Run(Error::Config(_)) => 2,
        Failure::Run(Error::Input(_) | Error::Parse { .. } | Error::Io(_) | Error::Json(_)) => 3,
        Failure::Run(Error::Capacity { .. }) => 4,
        Failure::Run(Error::Numerical(_)) => 5,
    }
}

fn describe(f: &Failure) -> String {
    match f {
        Failure::Usage(m) => format!("usage error: {m}"),
        Failure::Run(Error::Capacity { message, suggestion: Some(s) }) => {
            format!("capacity exceeded: {message} (try the `{s}` backend)")
        }
        Failure::Run(e) => e.to_string(),
    }
}

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn parse_region(s: &str) -> CliResult<Region> {
    let v: Vec<f64> = match s.split(',').map(|p| p.trim().parse::<f64>()).collect() {
        Ok(v) => v,
        Err(_) => return usage(format!("bad --region `{s}`")),
    };
    match v[..] {
        [side] => Ok(Region::square(side)),
        [x_min, x_max, y_min, y_max] => Ok(Region { x_min, x_max, y_min, y_max }),
        _ => usage("--region takes a side length or x_min,x_max,y_min,y_max"),
    }
}

/// Targets entering on the left edge, spread between y = 200 and y = 800
/// of the default square and heading slightly towards its middle.
fn targets(n: usize, r: &Region) -> Vec<TargetState> {
    let (w, h) = (r.x_max - r.x_min, r.y_max - r.y_min);
    (0..n)
        .map(|i| {
            let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            TargetState::new(r.x_min + 0.1 * w, r.y_min + (0.2 + 0.6 * f) * h, 0.04 * w, (0.01 - 0.02 * f) * h)
        })
        .collect()
}

fn anneal_mode(a: &AnnealArgs) -> AnnealMode {
    match a.mode {
        ModeArg::Ideal => AnnealMode::Ideal,
        ModeArg::Device => AnnealMode::Device,
        ModeArg::Auto if a.noise == OnOff::On => AnnealMode::Device,
        ModeArg::Auto => AnnealMode::Ideal,
    }
}

fn device_config() -> CliResult<DeviceConfig> {
    Ok(io::config_file("device.json")?.unwrap_or_default())
}

fn anneal_config(tf_us: f64, shape_arg: ShapeArg, shots: usize, noise: OnOff, seed: u64) -> CliResult<AnnealConfig> {
    if !(tf_us > 0.0 && tf_us.is_finite()) {
        return usage("--tf must be positive");
    }
    let schedule = Schedule::new(tf_us * 1e-6, shape(shape_arg))?;
    let mut c = AnnealConfig::new(schedule, shots, seed).with_noise(noise == OnOff::On);
    c.device = device_config()?;
    Ok(c)
}

fn qmc_config(tf_us: f64, shape_arg: ShapeArg, restarts: Option<usize>, seed: u64) -> CliResult<QmcConfig> {
    let mut c: QmcConfig = io::config_file("qmc.json")?.unwrap_or_default();
    c.schedule = Schedule::new(tf_us * 1e-6, shape(shape_arg))?;
    c.seed = seed;
    if let Some(r) = restarts {
        c.restarts = r;
    }
    Ok(c)
}

fn build_plan(cmd: &Command) -> CliResult<Plan> {
    Ok(match cmd {
        Command::Scenario(a) => {
            if a.targets == 0 {
                return usage("--targets must be at least 1");
            }
            let region = parse_region(&a.region)?;
            let config = ScenarioConfig {
                targets: targets(a.targets, &region),
                dt: a.dt,
                scans: a.scans,
                sigma_m: a.sigma,
                p_detect: a.pd,
                clutter_density: a.lambda_c,
                region,
                seed: a.seed,
            };
            config.validate()?;
            Plan::Scenario { config, out: a.out.clone() }
        }
        Command::Mwis(a) => {
            let backend = match a.backend {
                MwisBackendArg::Exact => MwisBackend::Exact,
                MwisBackendArg::Anneal => MwisBackend::Anneal {
                    config: anneal_config(a.anneal.tf_us, a.anneal.shape, a.anneal.shots.unwrap_or(1000), a.anneal.noise, a.anneal.seed)?,
                    mode: anneal_mode(&a.anneal),
                },
                MwisBackendArg::Sqa => {
                    if a.anneal.noise == OnOff::On {
                        return usage("--noise applies to the anneal backend only");
                    }
                    MwisBackend::Sqa { config: qmc_config(a.anneal.tf_us, a.anneal.shape, a.anneal.shots, a.anneal.seed)? }
                }
            };
            Plan::Mwis { graph: a.graph.clone(), backend, per_shot: a.per_shot, out: a.out.clone() }
        }
        Command::Track(a) => {
            if a.step_scan.is_some() && a.mode != TrackModeArg::SingleStep {
                return usage("--step-scan needs --mode single-step");
            }
            if a.mode == TrackModeArg::SingleStep && matches!(a.backend, TrackBackendArg::None | TrackBackendArg::Exact) {
                return usage("single-step mode needs the dynamics or sqa backend");
            }
            let backend = match a.backend {
                TrackBackendArg::None => PruneBackend::None,
                TrackBackendArg::Exact => PruneBackend::Exact,
                TrackBackendArg::Dynamics => {
                    let config = anneal_config(a.tf_us, ShapeArg::Linear, a.shots, a.noise, a.seed)?;
                    let mode = if a.noise == OnOff::On { AnnealMode::Device } else { AnnealMode::Ideal };
                    PruneBackend::Dynamics { config, mode }
                }
                TrackBackendArg::Sqa => PruneBackend::Sqa { config: qmc_config(a.tf_us, ShapeArg::Linear, None, a.seed)? },
            };
            let mode = match a.mode {
                TrackModeArg::Sequential => TrackMode::Sequential,
                TrackModeArg::SingleStep => TrackMode::SingleStep { scan: a.step_scan },
            };
            let scenario = Scenario::from_json(&io::read_text(&a.scenario)?)?;
            let mut tracker = TrackerConfig::for_scenario(&scenario.config);
            tracker.weight_policy = match a.weight_policy {
                WeightPolicyArg::DropNonpositive => WeightPolicy::DropNonpositive,
                WeightPolicyArg::Shift => WeightPolicy::Shift,
            };
            if let Some(l) = a.lambda_c {
                tracker.clutter_density = l;
            }
            tracker.validate()?;
            Plan::Track {
                scenario: a.scenario.clone(),
                tracker,
                backend,
                mode,
                out_dir: a.out_dir.clone(),
            }
        }
        Command::Timing(a) => {
            let mut m: TimingModel = io::config_file("timing.json")?.unwrap_or_default();
            if let Some(r) = a.reset {
                m.reset_mode = if r == ResetArg::Active { ResetMode::Active } else { ResetMode::Passive };
            }
            if a.parallel_readout {
                m.parallel_readout = true;
            }
            if a.serial_readout {
                m.parallel_readout = false;
            }
            m.shots = a.shots.unwrap_or(m.shots);
            m.n_qubits = a.qubits.unwrap_or(m.n_qubits);
            m.t_anneal = a.anneal_us.map_or(m.t_anneal, |v| v * 1e-6);
            m.t_reset_passive = a.reset_ms.map_or(m.t_reset_passive, |v| v * 1e-3);
            m.t_readout_single = a.readout_us.map_or(m.t_readout_single, |v| v * 1e-6);
            m.t_single_qubit_op = a.op_ns.map_or(m.t_single_qubit_op, |v| v * 1e-9);
            m.validate()?;
            if a.bins == 0 {
                return usage("--bins must be at least 1");
            }
            Plan::Timing { model: m, from_report: a.from_report.clone(), bins: a.bins, out: a.out.clone(), histogram: a.histogram.clone() }
        }
        Command::Sweep(a) => {
            if a.tf_grid.is_empty() {
                return usage("--tf-grid is empty");
            }
            if !a.tf_grid.iter().all(|t| *t > 0.0 && t.is_finite()) {
                return usage("--tf-grid values must be positive");
            }
            let config = anneal_config(a.tf_grid[0], a.anneal.shape, a.anneal.shots.unwrap_or(1000), a.anneal.noise, a.anneal.seed)?;
            Plan::Sweep { graph: a.graph.clone(), config, mode: anneal_mode(&a.anneal), grid_us: a.tf_grid.clone(), out: a.out.clone() }
        }
        Command::Device(a) => {
            let config = match &a.config {
                Some(p) => io::load_json(p)?,
                None => device_config()?,
            };
            if !(a.tf_us > 0.0 && a.tf_us.is_finite()) {
                return usage("--tf must be positive");
            }
            Plan::Device { config, qubits: a.qubits, schedule: Schedule::new(a.tf_us * 1e-6, shape(a.shape))?, out: a.out.clone() }
        }
        Command::Replay(_) => unreachable!("replay has no plan of its own"),
    })
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn run(cli: &Cli) -> CliResult<()> {
    let (plan, argv, check) = match &cli.command {
        Command::Replay(r) => {
            let m: RunManifest = io::load_json(&r.manifest)?;
            (m.plan, m.argv, r.check)
        }
        cmd => (build_plan(cmd)?, std::env::args().collect(), false),
    };
    let started_at = now();
    let clock = Instant::now();
    let outcome = plan.execute()?;

    if check {
        let mut differing = Vec::new();
        for (path, bytes) in &outcome.artifacts {
            if std::fs::read(path).ok().as_deref() != Some(bytes.as_slice()) {
                differing.push(path.display().to_string());
            }
        }
        if !differing.is_empty() {
            return Err(Failure::Run(Error::Input(format!("artifacts differ: {}", differing.join(", ")))));
        }
        println!("{} artifacts reproduced", outcome.artifacts.len());
        return Ok(());
    }

    for (path, bytes) in &outcome.artifacts {
        io::write_atomic(path, bytes)?;
    }
    let manifest_path: PathBuf = cli.manifest.clone().unwrap_or_else(|| plan.manifest_path());
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: plan.name().into(),
        argv,
        seeds: plan.seeds(),
        inputs: outcome.inputs.clone(),
        artifacts: outcome.artifacts.iter().map(|a| a.0.clone()).collect(),
        plan,
        started_at,
        wall_clock_s: clock.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
    text.push('\n');
    io::write_atomic(&manifest_path, text.as_bytes())?;

    if cli.json {
        let v = serde_json::json!({ "summary": outcome.summary, "artifacts": manifest.artifacts, "manifest": manifest_path });
        println!("{}", serde_json::to_string_pretty(&v).map_err(Error::from)?);
    } else {
        println!("{}", outcome.text);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("spinqa: {}", describe(&f));
            ExitCode::from(exit_code(&f))
        }
    }
}
