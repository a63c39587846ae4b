//! Fully resolved runs. A [`Plan`] holds every setting a command needs, so
//! executing it twice gives byte-identical artifacts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use spinqa::device::DeviceConfig;
use spinqa::dynamics::{anneal, success_probability, summary_csv, AnnealConfig, AnnealMode, AnnealResult};
use spinqa::graph::{mwis_exact, parse_graph, VertexSet, WeightedGraph};
use spinqa::ising::{Schedule, Shape};
use spinqa::mht::{generate_scenario, run_tracker, PruneBackend, Scenario, ScenarioConfig, TrackMode, TrackReport, TrackerConfig};
use spinqa::sqa::{sqa_mwis, QmcConfig};
use spinqa::timing::{histogram, histogram_csv, total_runtime, TimingModel};
use spinqa::{Error, Result};

use crate::io::read_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MwisBackend {
    Exact,
    Anneal { config: AnnealConfig, mode: AnnealMode },
    Sqa { config: QmcConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Plan {
    Scenario { config: ScenarioConfig, out: PathBuf },
    Mwis { graph: PathBuf, backend: MwisBackend, per_shot: bool, out: PathBuf },
    Track { scenario: PathBuf, tracker: TrackerConfig, backend: PruneBackend, mode: TrackMode, out_dir: PathBuf },
    Timing { model: TimingModel, from_report: Option<PathBuf>, bins: usize, out: PathBuf, histogram: PathBuf },
    Sweep { graph: PathBuf, config: AnnealConfig, mode: AnnealMode, grid_us: Vec<f64>, out: PathBuf },
    Device { config: DeviceConfig, qubits: usize, schedule: Schedule, out: PathBuf },
}

/// Result of executing a plan: files to write and a summary.
pub struct Outcome {
    pub artifacts: Vec<(PathBuf, Vec<u8>)>,
    pub inputs: Vec<PathBuf>,
    pub summary: Value,
    pub text: String,
}

impl Plan {
    pub fn name(&self) -> &'static str {
        match self {
            Plan::Scenario { .. } => "scenario",
            Plan::Mwis { .. } => "mwis",
            Plan::Track { .. } => "track",
            Plan::Timing { .. } => "timing",
            Plan::Sweep { .. } => "sweep",
            Plan::Device { .. } => "device",
        }
    }

    /// Default manifest location.
    pub fn manifest_path(&self) -> PathBuf {
        match self {
            Plan::Track { out_dir, .. } => out_dir.join("manifest.json"),
            Plan::Scenario { out, .. }
            | Plan::Mwis { out, .. }
            | Plan::Timing { out, .. }
            | Plan::Sweep { out, .. }
            | Plan::Device { out, .. } => {
                let mut s = out.clone().into_os_string();
                s.push(".manifest.json");
                PathBuf::from(s)
            }
        }
    }

    /// Every seed the run depends on.
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            Plan::Scenario { config, .. } => vec![config.seed],
            Plan::Mwis { backend: MwisBackend::Anneal { config, .. }, .. } => vec![config.seed],
            Plan::Mwis { backend: MwisBackend::Sqa { config }, .. } => vec![config.seed],
            Plan::Track { backend: PruneBackend::Dynamics { config, .. }, .. } => vec![config.seed],
            Plan::Track { backend: PruneBackend::Sqa { config }, .. } => vec![config.seed],
            Plan::Sweep { config, .. } => vec![config.seed],
            _ => Vec::new(),
        }
    }

    pub fn execute(&self) -> Result<Outcome> {
        match self {
            Plan::Scenario { config, out } => scenario(config, out),
            Plan::Mwis { graph, backend, per_shot, out } => mwis(graph, backend, *per_shot, out),
            Plan::Track { scenario, tracker, backend, mode, out_dir } => track(scenario, tracker, backend, *mode, out_dir),
            Plan::Timing { model, from_report, bins, out, histogram } => {
                timing(model, from_report.as_deref(), *bins, out, histogram)
            }
            Plan::Sweep { graph, config, mode, grid_us, out } => sweep(graph, config, *mode, grid_us, out),
            Plan::Device { config, qubits, schedule, out } => device(config, *qubits, schedule, out),
        }
    }
}

fn pretty(v: &impl Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn load_graph(path: &Path) -> Result<WeightedGraph> {
    parse_graph(&read_text(path)?)
}

fn scenario(config: &ScenarioConfig, out: &Path) -> Result<Outcome> {
    let s = generate_scenario(config)?;
    let measurements: usize = s.scans.iter().map(Vec::len).sum();
    let mut text = s.to_json()?;
    text.push('\n');
    Ok(Outcome {
        artifacts: vec![(out.to_path_buf(), text.into_bytes())],
        inputs: Vec::new(),
        summary: json!({ "targets": config.n_targets(), "scans": config.scans, "measurements": measurements, "out": out }),
        text: format!(
            "{} targets, {} scans, {measurements} measurements -> {}",
            config.n_targets(),
            config.scans,
            out.display()
        ),
    })
}

fn annealer_summary(r: &AnnealResult, oracle: Option<&(VertexSet, f64)>) -> Value {
    json!({
        "backend": r.backend,
        "set": r.best_set,
        "weight": r.best_weight,
        "shots": r.shots,
        "success_probability": oracle.map(|o| success_probability(r, o)),
        "p_ground": r.p_ground,
    })
}

fn mwis(graph: &Path, backend: &MwisBackend, per_shot: bool, out: &Path) -> Result<Outcome> {
    let g = load_graph(graph)?;
    // reference optimum when the exact solver can afford it
    let oracle = mwis_exact(&g).ok();
    let (bytes, summary) = match backend {
        MwisBackend::Exact => {
            let (set, weight) = mwis_exact(&g)?;
            let v = json!({ "backend": "exact", "set": set, "weight": weight });
            (pretty(&v)?, v)
        }
        MwisBackend::Anneal { config, mode } => {
            let r = anneal(&g, config, *mode)?;
            let mut s = r.to_json(per_shot, oracle.as_ref())?;
            s.push('\n');
            (s.into_bytes(), annealer_summary(&r, oracle.as_ref()))
        }
        MwisBackend::Sqa { config } => {
            let r = sqa_mwis(&g, config)?;
            let mut s = r.to_json(per_shot, oracle.as_ref())?;
            s.push('\n');
            (s.into_bytes(), annealer_summary(&r, oracle.as_ref()))
        }
    };
    let text = format!(
        "{} backend: set {}, weight {}",
        summary["backend"].as_str().unwrap_or("?"),
        summary["set"],
        summary["weight"]
    );
    Ok(Outcome { artifacts: vec![(out.to_path_buf(), bytes)], inputs: vec![graph.to_path_buf()], summary, text })
}

fn track(
    path: &Path,
    cfg: &TrackerConfig,
    backend: &PruneBackend,
    mode: TrackMode,
    out_dir: &Path,
) -> Result<Outcome> {
    let s = Scenario::from_json(&read_text(path)?)?;
    let r = run_tracker(&s, cfg, backend, mode)?;
    let mut report = r.to_json()?;
    report.push('\n');
    let summary = json!({
        "backend": backend.name(),
        "mode": r.mode,
        "quantum_scans": r.quantum_scans,
        "tracks": r.tracks.len(),
        "peak_hypotheses": r.counts.iter().map(|c| c.n_hypotheses).max(),
        "errors": r.errors,
    });
    let mut text = format!(
        "{} backend, {} scans, {} tracks, quantum scans {:?}",
        backend.name(),
        r.counts.len(),
        r.tracks.len(),
        r.quantum_scans
    );
    for e in &r.errors {
        match e.rms {
            Some(rms) => text.push_str(&format!("\ntarget {}: rms {rms:.3} m, fragments {}", e.target, e.fragments)),
            None => text.push_str(&format!("\ntarget {}: missed", e.target)),
        }
    }
    Ok(Outcome {
        artifacts: vec![
            (out_dir.join("report.json"), report.into_bytes()),
            (out_dir.join("counts.csv"), r.counts_csv().into_bytes()),
            (out_dir.join("tracks.csv"), r.tracks_csv().into_bytes()),
        ],
        inputs: vec![path.to_path_buf()],
        summary,
        text,
    })
}

fn timing(model: &TimingModel, from_report: Option<&Path>, bins: usize, out: &Path, hist: &Path) -> Result<Outcome> {
    if let Some(path) = from_report {
        let r = TrackReport::from_json(&read_text(path)?)?;
        let values: Vec<f64> = r.counts.iter().map(|c| c.backend_time_model_s).collect();
        let h = histogram(&values, bins)?;
        let total: f64 = values.iter().sum();
        let summary = json!({ "invocations": values.len(), "total_s": total, "bins": h });
        return Ok(Outcome {
            artifacts: vec![(out.to_path_buf(), pretty(&summary)?), (hist.to_path_buf(), histogram_csv(&h).into_bytes())],
            inputs: vec![path.to_path_buf()],
            text: format!("{} scans, modelled backend time {total:.6} s -> {}", values.len(), hist.display()),
            summary,
        });
    }
    let r = total_runtime(model)?;
    let summary = json!({ "model": model, "report": r });
    let text = format!(
        "per shot {:.3e} s (reset {:.3e}, anneal {:.3e}, readout {:.3e}); {} shots: {:.6} s, {:?} dominates ({:.1}%)",
        r.per_shot.total,
        r.per_shot.reset,
        r.per_shot.anneal,
        r.per_shot.readout,
        r.shots,
        r.total,
        r.dominant,
        100.0 * r.dominant_share
    );
    Ok(Outcome { artifacts: vec![(out.to_path_buf(), pretty(&summary)?)], inputs: Vec::new(), summary, text })
}

fn sweep(graph: &Path, config: &AnnealConfig, mode: AnnealMode, grid_us: &[f64], out: &Path) -> Result<Outcome> {
    let g = load_graph(graph)?;
    let oracle = mwis_exact(&g)?;
    let mut results = Vec::with_capacity(grid_us.len());
    for &tf in grid_us {
        let mut c = config.clone();
        c.schedule.t_f = tf * 1e-6;
        results.push(anneal(&g, &c, mode)?);
    }
    let csv = summary_csv(results.iter().map(|r| (r, &oracle)));
    let rates: Vec<f64> = results.iter().map(|r| success_probability(r, &oracle)).collect();
    let best = rates.iter().enumerate().fold(0, |b, (i, &p)| if p > rates[b] { i } else { b });
    let interior = best > 0 && best + 1 < rates.len();
    let summary = json!({
        "t_f_us": grid_us,
        "success_probability": rates,
        "best_t_f_us": grid_us[best],
        "interior_maximum": interior,
    });
    let mut text = String::new();
    for (t, p) in grid_us.iter().zip(&rates) {
        text.push_str(&format!("t_f {t} us: success {p:.4}\n"));
    }
    text.push_str(&format!("best at {} us{}", grid_us[best], if interior { " (interior)" } else { "" }));
    Ok(Outcome { artifacts: vec![(out.to_path_buf(), csv.into_bytes())], inputs: vec![graph.to_path_buf()], summary, text })
}

fn device(config: &DeviceConfig, qubits: usize, schedule: &Schedule, out: &Path) -> Result<Outcome> {
    if qubits == 0 {
        return Err(Error::Config("at least one qubit is required".into()));
    }
    let traj = config.trajectory_for(schedule, qubits)?;
    let csv = traj.to_csv();
    let summary = json!({ "qubits": qubits, "points": traj.len(), "t_f": traj.t_f(), "out": out });
    let text = format!("{qubits} qubits, {} points over {} s -> {}", traj.len(), traj.t_f(), out.display());
    Ok(Outcome { artifacts: vec![(out.to_path_buf(), csv.into_bytes())], inputs: Vec::new(), summary, text })
}

pub fn shape(s: crate::args::ShapeArg) -> Shape {
    match s {
        crate::args::ShapeArg::Linear => Shape::Linear,
        crate::args::ShapeArg::Smooth => Shape::Smooth,
    }
}
