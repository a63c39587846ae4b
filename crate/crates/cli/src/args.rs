//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "spinqa", version, about = "Noisy spin-qubit annealing emulator and MHT pruning benchmarks")]
pub struct Cli {
    /// Print machine-readable JSON summaries.
    #[arg(long, global = true)]
    pub json: bool,

    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic radar scenario.
    Scenario(ScenarioArgs),
    /// Solve a maximum-weight independent set instance.
    Mwis(MwisArgs),
    /// Track a scenario, pruning hypotheses with an MWIS backend.
    Track(TrackArgs),
    /// Estimate hardware run time.
    Timing(TimingArgs),
    /// Success probability against anneal time.
    Sweep(SweepArgs),
    /// Export the device parameter trajectory of an anneal.
    Device(DeviceArgs),
    /// Re-run the plan stored in a run manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long, default_value_t = 2)]
    pub targets: usize,
    #[arg(long, default_value_t = 20)]
    pub scans: usize,
    /// Clutter density, false measurements per square metre.
    #[arg(long = "lambda-c", default_value_t = 1e-5)]
    pub lambda_c: f64,
    #[arg(long, default_value_t = 0.9)]
    pub pd: f64,
    /// Measurement noise in metres.
    #[arg(long, default_value_t = 5.0)]
    pub sigma: f64,
    /// Side of a square region, or `x_min,x_max,y_min,y_max`.
    #[arg(long, default_value = "1000")]
    pub region: String,
    /// Scan interval in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "scenario.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// `device` when noise is on, otherwise `ideal`.
    Auto,
    Ideal,
    Device,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Linear,
    Smooth,
}

/// Annealer settings shared by several commands.
#[derive(Debug, Clone, Args)]
pub struct AnnealArgs {
    /// Anneal time in microseconds.
    #[arg(long = "tf", default_value_t = 50.0)]
    pub tf_us: f64,
    /// Shots (annealer) or restarts (sqa); default 1000 and 20.
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long, value_enum, default_value_t = OnOff::Off)]
    pub noise: OnOff,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ShapeArg::Linear)]
    pub shape: ShapeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MwisBackendArg {
    Exact,
    Anneal,
    Sqa,
}

#[derive(Debug, Args)]
pub struct MwisArgs {
    /// Graph file (JSON or DIMACS-like text).
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = MwisBackendArg::Exact)]
    pub backend: MwisBackendArg,
    #[command(flatten)]
    pub anneal: AnnealArgs,
    /// Keep the per-shot arrays in the output.
    #[arg(long)]
    pub per_shot: bool,
    #[arg(long, default_value = "solution.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrackBackendArg {
    None,
    Exact,
    Dynamics,
    Sqa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrackModeArg {
    Sequential,
    SingleStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightPolicyArg {
    DropNonpositive,
    Shift,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = TrackBackendArg::Exact)]
    pub backend: TrackBackendArg,
    #[arg(long, value_enum, default_value_t = TrackModeArg::Sequential)]
    pub mode: TrackModeArg,
    /// Scan for single-step mode (default: busiest scan of an exact dry run).
    #[arg(long)]
    pub step_scan: Option<usize>,
    /// Clutter density used in the scores (default: the scenario's).
    #[arg(long = "lambda-c")]
    pub lambda_c: Option<f64>,
    #[arg(long, value_enum, default_value_t = WeightPolicyArg::DropNonpositive)]
    pub weight_policy: WeightPolicyArg,
    /// Anneal time in microseconds for the quantum backends.
    #[arg(long = "tf", default_value_t = 50.0)]
    pub tf_us: f64,
    /// Shots per dynamics call.
    #[arg(long, default_value_t = 200)]
    pub shots: usize,
    #[arg(long, value_enum, default_value_t = OnOff::Off)]
    pub noise: OnOff,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "track")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResetArg {
    Active,
    Passive,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    #[arg(long, value_enum)]
    pub reset: Option<ResetArg>,
    #[arg(long, conflicts_with = "serial_readout")]
    pub parallel_readout: bool,
    #[arg(long)]
    pub serial_readout: bool,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long = "anneal-us")]
    pub anneal_us: Option<f64>,
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long = "reset-ms")]
    pub reset_ms: Option<f64>,
    #[arg(long = "readout-us")]
    pub readout_us: Option<f64>,
    #[arg(long = "op-ns")]
    pub op_ns: Option<f64>,
    /// Histogram the per-scan backend times of a track report instead.
    #[arg(long)]
    pub from_report: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long, default_value = "timing.json")]
    pub out: PathBuf,
    /// Histogram CSV (with `--from-report`).
    #[arg(long, default_value = "timing_histogram.csv")]
    pub histogram: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated anneal times in microseconds.
    #[arg(long = "tf-grid", value_delimiter = ',', default_value = "5,10,20,50,100,200,500")]
    pub tf_grid: Vec<f64>,
    #[command(flatten)]
    pub anneal: AnnealArgs,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeviceArgs {
    #[arg(long, default_value_t = 2)]
    pub qubits: usize,
    /// Anneal time in microseconds.
    #[arg(long = "tf", default_value_t = 50.0)]
    pub tf_us: f64,
    #[arg(long, value_enum, default_value_t = ShapeArg::Linear)]
    pub shape: ShapeArg,
    /// Device configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "trajectory.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Compare regenerated artifacts with the files on disk instead of
    /// writing them.
    #[arg(long)]
    pub check: bool,
}
