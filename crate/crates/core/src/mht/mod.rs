//! Multiple hypothesis tracking with MWIS pruning.
//!
//! [`generate_scenario`] draws radar scans, [`TrackerState`] grows and
//! prunes the hypothesis trees, and [`run_tracker`] drives a whole scenario
//! in either sequential or single-step mode.

mod kalman;
mod scenario;
mod tracker;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use kalman::{
    default_process_noise, gate, innovation, kalman_predict, kalman_update, Innovation, KalmanState, DEFAULT_GATE,
    MEASUREMENT_VARIANCE_FLOOR,
};
pub use scenario::{generate_scenario, Measurement, Origin, Region, Scenario, ScenarioConfig, TargetState};
pub use tracker::{
    build_conflict_graph, score_hypothesis, Assoc, PruneBackend, ScanCount, Track, TrackHypothesis, TrackPoint,
    TrackerConfig, TrackerState, WeightPolicy, LAMBDA_FLOOR, SHIFT_EPSILON,
};

/// Where the selected backend runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrackMode {
    /// Backend at every scan.
    Sequential,
    /// Backend at one scan, exact elsewhere. `None` picks the scan with the
    /// most hypotheses in an exact dry run.
    SingleStep { scan: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackError {
    pub target: usize,
    /// Recovered tracks following this target.
    pub fragments: usize,
    /// Track with the longest overlap.
    pub matched: Option<u64>,
    /// RMS position error of the matched track over its overlap.
    pub rms: Option<f64>,
    /// Fraction of the target's scans the matched track covers.
    pub coverage: f64,
}

impl TrackError {
    pub fn missed(&self) -> bool {
        self.matched.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackReport {
    pub mode: TrackMode,
    pub backend: PruneBackend,
    pub tracker: TrackerConfig,
    pub counts: Vec<ScanCount>,
    /// Scans pruned by a quantum backend.
    pub quantum_scans: Vec<usize>,
    pub tracks: Vec<Track>,
    pub errors: Vec<TrackError>,
}

impl TrackReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| crate::Error::Parse { line: e.line(), message: e.to_string() })
    }

    /// `scan,n_hypotheses,n_survivors,backend_time_model_s`
    pub fn counts_csv(&self) -> String {
        let mut s = String::from("scan,n_hypotheses,n_survivors,backend_time_model_s\n");
        for c in &self.counts {
            let _ = writeln!(s, "{},{},{},{}", c.scan, c.n_hypotheses, c.n_survivors, c.backend_time_model_s);
        }
        s
    }

    /// `scan,track_id,x,y`
    pub fn tracks_csv(&self) -> String {
        let mut s = String::from("scan,track_id,x,y\n");
        for t in &self.tracks {
            for p in &t.points {
                let _ = writeln!(s, "{},{},{},{}", p.scan, t.id, p.x, p.y);
            }
        }
        s
    }
}

/// Radius within which a track counts as following a target, from the
/// sensor noise.
pub fn match_radius(sigma_m: f64) -> f64 {
    (5.0 * sigma_m).max(1e-6)
}

/// Per target: how many recovered tracks follow it (mean distance over
/// their common scans within [`match_radius`]) and the RMS error of the one
/// with the longest overlap. Targets nobody follows are reported as missed.
pub fn track_error(tracks: &[Track], truth: &Scenario) -> Vec<TrackError> {
    let radius = match_radius(truth.config.sigma_m);
    truth
        .truth
        .iter()
        .enumerate()
        .map(|(target, path)| {
            let mut fragments = 0;
            let mut best: Option<(usize, f64, u64)> = None;
            for t in tracks {
                let d2: Vec<f64> = t
                    .points
                    .iter()
                    .filter_map(|p| path.get(p.scan).map(|q| (p.x - q[0]).powi(2) + (p.y - q[1]).powi(2)))
                    .collect();
                if d2.is_empty() {
                    continue;
                }
                let mean = d2.iter().map(|v| v.sqrt()).sum::<f64>() / d2.len() as f64;
                if mean > radius {
                    continue;
                }
                fragments += 1;
                let rms = (d2.iter().sum::<f64>() / d2.len() as f64).sqrt();
                let better = match best {
                    None => true,
                    Some((len, r, _)) => d2.len() > len || (d2.len() == len && rms < r),
                };
                if better {
                    best = Some((d2.len(), rms, t.id));
                }
            }
            TrackError {
                target,
                fragments,
                matched: best.map(|b| b.2),
                rms: best.map(|b| b.1),
                coverage: best.map_or(0.0, |b| b.0 as f64 / path.len().max(1) as f64),
            }
        })
        .collect()
}

fn run_pass(scenario: &Scenario, cfg: &TrackerConfig, backend_at: impl Fn(usize) -> PruneBackend) -> Result<TrackerState> {
    let mut t = TrackerState::new(cfg.clone())?;
    for (k, scan) in scenario.scans.iter().enumerate() {
        t.step(scan, &backend_at(k))?;
    }
    Ok(t)
}

/// Tracks a whole scenario.
///
/// With [`PruneBackend::None`] nothing is pruned and the mode is ignored.
pub fn run_tracker(
    scenario: &Scenario,
    cfg: &TrackerConfig,
    backend: &PruneBackend,
    mode: TrackMode,
) -> Result<TrackReport> {
    scenario.config.validate()?;
    let (state, mode) = match mode {
        TrackMode::Sequential => (run_pass(scenario, cfg, |_| backend.clone())?, mode),
        TrackMode::SingleStep { scan } => {
            let k = match scan {
                Some(k) => k,
                None => {
                    let dry = run_pass(scenario, cfg, |_| PruneBackend::Exact)?;
                    dry.counts
                        .iter()
                        .fold((0, 0), |(bk, bn), c| if c.n_hypotheses > bn { (c.scan, c.n_hypotheses) } else { (bk, bn) })
                        .0
                }
            };
            if k >= scenario.scans.len() {
                return Err(crate::Error::config(format!("single-step scan {k} is past the last scan")));
            }
            let state = run_pass(scenario, cfg, |s| if s == k { backend.clone() } else { PruneBackend::Exact })?;
            (state, TrackMode::SingleStep { scan: Some(k) })
        }
    };
    let tracks = state.tracks();
    let quantum_scans = state
        .counts
        .iter()
        .filter(|c| c.backend == "dynamics" || c.backend == "sqa")
        .map(|c| c.scan)
        .collect();
    Ok(TrackReport {
        mode,
        backend: backend.clone(),
        tracker: cfg.clone(),
        errors: track_error(&tracks, scenario),
        counts: state.counts,
        quantum_scans,
        tracks,
    })
}
