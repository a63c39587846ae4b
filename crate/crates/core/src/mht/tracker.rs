//! Track-oriented hypothesis trees, conflict graphs and MWIS pruning.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kalman::{default_process_noise, kalman_predict, kalman_update, KalmanState, DEFAULT_GATE};
use super::scenario::{Measurement, ScenarioConfig};
use crate::dynamics::{anneal, AnnealConfig, AnnealMode};
use crate::error::{Error, Result};
use crate::graph::{mwis_exact, VertexSet, WeightedGraph};
use crate::ising::Schedule;
use crate::sqa::{sqa_mwis, QmcConfig};
use crate::timing::{total_runtime, TimingModel};

/// Clutter density used in scores when the configured one is zero.
pub const LAMBDA_FLOOR: f64 = 1e-12;
/// Offset added by [`WeightPolicy::Shift`].
pub const SHIFT_EPSILON: f64 = 1e-6;
const MISS_FLOOR: f64 = 1e-12;

/// How log-likelihood ratios become MWIS vertex weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightPolicy {
    /// Raw LLR; hypotheses with LLR ≤ 0 never survive.
    #[default]
    DropNonpositive,
    /// `LLR − min LLR + ε`, so every hypothesis is a candidate.
    Shift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub p_detect: f64,
    pub sigma_m: f64,
    pub dt: f64,
    /// λ_c used in the scores (not necessarily the scenario's).
    pub clutter_density: f64,
    /// Expected new targets per unit area and scan.
    pub new_track_density: f64,
    pub gate: f64,
    /// Acceleration noise variance per axis.
    pub process_noise: f64,
    /// Prior velocity standard deviation of a new track.
    pub velocity_sigma: f64,
    /// Consecutive misses after which a branch ends.
    pub max_misses: usize,
    pub weight_policy: WeightPolicy,
    /// Hard limit on live hypotheses after an extension.
    pub hypothesis_cap: usize,
    /// Assignments a tree needs before it is reported as a track.
    pub min_hits: usize,
}

impl TrackerConfig {
    /// Tracker matched to the sensor of `s`.
    pub fn for_scenario(s: &ScenarioConfig) -> Self {
        Self {
            p_detect: s.p_detect,
            sigma_m: s.sigma_m,
            dt: s.dt,
            clutter_density: s.clutter_density,
            new_track_density: 1e-4,
            gate: DEFAULT_GATE,
            process_noise: default_process_noise(s.sigma_m, s.dt),
            velocity_sigma: 30.0,
            max_misses: 3,
            weight_policy: WeightPolicy::default(),
            hypothesis_cap: 200_000,
            min_hits: 3,
        }
    }

    pub fn with_clutter_density(mut self, lambda: f64) -> Self {
        self.clutter_density = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_detect > 0.0 && self.p_detect <= 1.0) {
            return Err(Error::config("detection probability must lie in (0, 1]"));
        }
        let nonneg = [self.sigma_m, self.clutter_density, self.process_noise];
        if !nonneg.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::config("noise levels and clutter density must be non-negative"));
        }
        let pos = [self.dt, self.new_track_density, self.velocity_sigma];
        if !pos.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::config("dt, new-track density and velocity prior must be positive"));
        }
        if !(self.gate > 0.0) {
            return Err(Error::config("gate threshold must be positive"));
        }
        if self.hypothesis_cap == 0 {
            return Err(Error::config("hypothesis cap must be at least 1"));
        }
        Ok(())
    }

    fn lambda(&self) -> f64 {
        self.clutter_density.max(LAMBDA_FLOOR)
    }
}

/// One scan of a hypothesis' history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Assoc {
    /// Track started from this measurement.
    Birth { meas: usize },
    Hit { meas: usize, log_likelihood: f64 },
    Miss,
}

impl Assoc {
    pub fn measurement(&self) -> Option<usize> {
        match *self {
            Assoc::Birth { meas } | Assoc::Hit { meas, .. } => Some(meas),
            Assoc::Miss => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackHypothesis {
    pub id: u64,
    /// Root of the hypothesis tree, shared by all descendants.
    pub track: u64,
    pub birth_scan: usize,
    /// One entry per scan since `birth_scan`.
    pub history: Vec<Assoc>,
    pub state: KalmanState,
    pub log_weight: f64,
    /// Trailing run of misses.
    pub misses: usize,
}

impl TrackHypothesis {
    /// `(scan, measurement id)` pairs used by this hypothesis.
    pub fn assignments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.history
            .iter()
            .enumerate()
            .filter_map(move |(i, a)| a.measurement().map(|m| (self.birth_scan + i, m)))
    }

    pub fn hits(&self) -> usize {
        self.history.iter().filter(|a| a.measurement().is_some()).count()
    }
}

fn term(a: &Assoc, cfg: &TrackerConfig) -> f64 {
    let lambda = cfg.lambda();
    match *a {
        Assoc::Birth { .. } => (cfg.p_detect * cfg.new_track_density / lambda).ln(),
        Assoc::Hit { log_likelihood, .. } => cfg.p_detect.ln() + log_likelihood - lambda.ln(),
        Assoc::Miss => (1.0 - cfg.p_detect).max(MISS_FLOOR).ln(),
    }
}

/// Cumulative log-likelihood ratio against clutter.
///
/// A birth contributes `ln(P_D β/λ)`, an assignment `ln(P_D N(ν; S)/λ)` and
/// a miss `ln(1 − P_D)`. `λ` is floored at [`LAMBDA_FLOOR`].
pub fn score_hypothesis(h: &TrackHypothesis, cfg: &TrackerConfig) -> Result<f64> {
    if h.history.is_empty() {
        return Err(Error::input("hypothesis has an empty history"));
    }
    Ok(h.history.iter().map(|a| term(a, cfg)).sum())
}

/// One vertex per hypothesis; an edge wherever two hypotheses use the same
/// `(scan, measurement)` pair.
pub fn build_conflict_graph(hyps: &[TrackHypothesis], policy: WeightPolicy) -> Result<WeightedGraph> {
    let mut users: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, h) in hyps.iter().enumerate() {
        for key in h.assignments() {
            users.entry(key).or_default().push(i);
        }
    }
    let mut edges = BTreeSet::new();
    for list in users.values() {
        for (a, &i) in list.iter().enumerate() {
            for &j in &list[a + 1..] {
                edges.insert((i, j));
            }
        }
    }
    let weights = match policy {
        WeightPolicy::DropNonpositive => hyps.iter().map(|h| h.log_weight).collect(),
        WeightPolicy::Shift => {
            let min = hyps.iter().map(|h| h.log_weight).fold(f64::INFINITY, f64::min);
            hyps.iter().map(|h| h.log_weight - min + SHIFT_EPSILON).collect()
        }
    };
    WeightedGraph::new(weights, edges)
}

/// MWIS solver used to prune.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PruneBackend {
    /// Keep every hypothesis.
    None,
    Exact,
    Dynamics { config: AnnealConfig, mode: AnnealMode },
    Sqa { config: QmcConfig },
}

impl PruneBackend {
    /// Noiseless ideal anneal, 50 µs linear schedule, 200 shots.
    pub fn dynamics_default() -> Self {
        let schedule = Schedule::linear(50e-6).expect("valid schedule");
        PruneBackend::Dynamics { config: AnnealConfig::new(schedule, 200, 0), mode: AnnealMode::Ideal }
    }

    pub fn sqa_default() -> Self {
        PruneBackend::Sqa { config: QmcConfig::default() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PruneBackend::None => "none",
            PruneBackend::Exact => "exact",
            PruneBackend::Dynamics { .. } => "dynamics",
            PruneBackend::Sqa { .. } => "sqa",
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, PruneBackend::Dynamics { .. } | PruneBackend::Sqa { .. })
    }

    fn reseeded(&self, seed: u64) -> Self {
        let mut b = self.clone();
        match &mut b {
            PruneBackend::Dynamics { config, .. } => config.seed = config.seed.wrapping_add(seed),
            PruneBackend::Sqa { config } => config.seed = config.seed.wrapping_add(seed),
            _ => {}
        }
        b
    }

    /// Hardware time the anneals for one component of `n` vertices take.
    fn time_model(&self, n: usize) -> Result<f64> {
        let (t_anneal, shots) = match self {
            PruneBackend::Dynamics { config, .. } => (config.schedule.t_f, config.shots),
            PruneBackend::Sqa { config } => (config.schedule.t_f, config.restarts),
            _ => return Ok(0.0),
        };
        let m = TimingModel { n_qubits: n.max(1), t_anneal, shots, ..TimingModel::default() };
        Ok(total_runtime(&m)?.total)
    }

    /// Best independent set of `g` (all weights positive).
    pub fn solve(&self, g: &WeightedGraph) -> Result<(VertexSet, f64)> {
        match self {
            PruneBackend::None => Err(Error::config("the `none` backend does not solve MWIS")),
            PruneBackend::Exact => mwis_exact(g),
            PruneBackend::Dynamics { config, mode } => {
                let r = anneal(g, config, *mode)?;
                Ok((r.best_set, r.best_weight))
            }
            PruneBackend::Sqa { config } => {
                let r = sqa_mwis(g, config)?;
                Ok((r.best_set, r.best_weight))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCount {
    pub scan: usize,
    /// Live hypotheses after extension.
    pub n_hypotheses: usize,
    pub n_survivors: usize,
    pub backend: String,
    /// Candidate vertices handed to the solver.
    pub conflict_vertices: usize,
    pub largest_component: usize,
    /// Annealer calls made for this scan.
    pub backend_calls: usize,
    pub backend_time_model_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub scan: usize,
    pub x: f64,
    pub y: f64,
    pub hit: bool,
}

/// Filtered trajectory of one hypothesis tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub id: u64,
    pub points: Vec<TrackPoint>,
}

impl Track {
    pub fn hits(&self) -> usize {
        self.points.iter().filter(|p| p.hit).count()
    }

    /// Without the trailing misses.
    fn trimmed(&self) -> Track {
        let end = self.points.iter().rposition(|p| p.hit).map_or(0, |i| i + 1);
        Track { id: self.id, points: self.points[..end].to_vec() }
    }
}

/// Mutable tracker: live hypotheses, per-scan counts and the surviving
/// trajectory of every tree.
#[derive(Debug, Clone)]
pub struct TrackerState {
    pub config: TrackerConfig,
    pub hypotheses: Vec<TrackHypothesis>,
    pub counts: Vec<ScanCount>,
    tracks: BTreeMap<u64, Track>,
    next_id: u64,
    scan: usize,
}

impl TrackerState {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, hypotheses: Vec::new(), counts: Vec::new(), tracks: BTreeMap::new(), next_id: 0, scan: 0 })
    }

    /// Scans processed so far.
    pub fn scans(&self) -> usize {
        self.scan
    }

    /// Trees with at least `min_hits` assignments, trailing misses removed.
    pub fn tracks(&self) -> Vec<Track> {
        self.tracks
            .values()
            .map(Track::trimmed)
            .filter(|t| t.hits() >= self.config.min_hits)
            .collect()
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id - 1
    }

    fn children(&self, h: &TrackHypothesis, scan: &[Measurement]) -> Result<Vec<TrackHypothesis>> {
        let cfg = &self.config;
        let pred = kalman_predict(&h.state, cfg.dt, cfg.process_noise)?;
        let mut out = Vec::new();
        if h.misses < cfg.max_misses {
            let mut c = h.clone();
            c.history.push(Assoc::Miss);
            c.state = pred;
            c.log_weight += term(&Assoc::Miss, cfg);
            c.misses += 1;
            out.push(c);
        }
        for m in scan {
            let (post, inn) = kalman_update(&pred, m.position(), cfg.sigma_m)?;
            if inn.distance2 > cfg.gate {
                continue;
            }
            let a = Assoc::Hit { meas: m.id, log_likelihood: inn.log_likelihood };
            let mut c = h.clone();
            c.history.push(a);
            c.state = post;
            c.log_weight += term(&a, cfg);
            c.misses = 0;
            out.push(c);
        }
        Ok(out)
    }

    /// Branches every live hypothesis over a miss and each gated measurement
    /// and starts one new track per measurement.
    pub fn extend(&mut self, scan: &[Measurement]) -> Result<()> {
        if let Some(m) = scan.iter().find(|m| m.scan != self.scan) {
            return Err(Error::input(format!("expected scan {}, got a measurement of scan {}", self.scan, m.scan)));
        }
        if scan.iter().enumerate().any(|(i, m)| m.id != i) {
            return Err(Error::input(format!("measurement ids of scan {} are not 0..n", self.scan)));
        }
        let per_parent: Vec<Vec<TrackHypothesis>> =
            self.hypotheses.par_iter().map(|h| self.children(h, scan)).collect::<Result<_>>()?;
        let total = per_parent.iter().map(Vec::len).sum::<usize>() + scan.len();
        if total > self.config.hypothesis_cap {
            return Err(Error::capacity(
                format!("{total} hypotheses at scan {} exceed the cap of {}", self.scan, self.config.hypothesis_cap),
                Some("exact"),
            ));
        }
        let mut next = Vec::with_capacity(total);
        for mut c in per_parent.into_iter().flatten() {
            c.id = self.fresh_id();
            next.push(c);
        }
        for m in scan {
            let a = Assoc::Birth { meas: m.id };
            let id = self.fresh_id();
            next.push(TrackHypothesis {
                id,
                track: id,
                birth_scan: self.scan,
                history: vec![a],
                state: KalmanState::birth(m.position(), self.config.sigma_m, self.config.velocity_sigma),
                log_weight: term(&a, &self.config),
                misses: 0,
            });
        }
        self.hypotheses = next;
        self.counts.push(ScanCount {
            scan: self.scan,
            n_hypotheses: total,
            n_survivors: total,
            backend: "none".into(),
            conflict_vertices: 0,
            largest_component: 0,
            backend_calls: 0,
            backend_time_model_s: 0.0,
        });
        self.scan += 1;
        Ok(())
    }

    pub fn conflict_graph(&self) -> Result<WeightedGraph> {
        build_conflict_graph(&self.hypotheses, self.config.weight_policy)
    }

    /// Keeps the MWIS of the current conflict graph, solved component by
    /// component with `backend`. Singleton components are decided directly.
    pub fn prune(&mut self, backend: &PruneBackend) -> Result<()> {
        let Some(count) = self.counts.last_mut() else {
            return Err(Error::input("prune called before any scan"));
        };
        if count.scan + 1 != self.scan {
            return Err(Error::input("scan already pruned"));
        }
        if *backend == PruneBackend::None {
            return Ok(());
        }
        let g = build_conflict_graph(&self.hypotheses, self.config.weight_policy)?;
        let (pos, map) = g.drop_nonpositive();
        let mut keep = Vec::new();
        let (mut calls, mut time, mut largest) = (0, 0.0, 0);
        for (ci, comp) in pos.components().into_iter().enumerate() {
            largest = largest.max(comp.len());
            if comp.len() == 1 {
                keep.push(map[comp[0]]);
                continue;
            }
            let (sub, local) = pos.induced(&comp);
            let b = backend.reseeded(((self.scan as u64) << 20) + ci as u64);
            let (set, _) = b.solve(&sub)?;
            if !sub.is_independent(&set)? {
                return Err(Error::numerical("backend returned a dependent set"));
            }
            keep.extend(set.iter().map(|v| map[local[v]]));
            if backend.is_quantum() {
                calls += 1;
                time += backend.time_model(sub.n())?;
            }
        }
        keep.sort_unstable();
        let survivors = VertexSet::from_iter(keep.iter().copied());
        debug_assert!(g.is_independent(&survivors).unwrap_or(false));
        let old = std::mem::take(&mut self.hypotheses);
        self.hypotheses = old.into_iter().enumerate().filter(|(i, _)| survivors.contains(*i)).map(|(_, h)| h).collect();

        count.n_survivors = self.hypotheses.len();
        count.backend = backend.name().into();
        count.conflict_vertices = pos.n();
        count.largest_component = largest;
        count.backend_calls = calls;
        count.backend_time_model_s = time;

        let scan = self.scan - 1;
        for h in &self.hypotheses {
            let [x, y] = h.state.position();
            let hit = h.history.last().is_some_and(|a| a.measurement().is_some());
            self.tracks
                .entry(h.track)
                .or_insert_with(|| Track { id: h.track, points: Vec::new() })
                .points
                .push(TrackPoint { scan, x, y, hit });
        }
        Ok(())
    }

    /// `extend` followed by `prune`.
    pub fn step(&mut self, scan: &[Measurement], backend: &PruneBackend) -> Result<()> {
        self.extend(scan)?;
        self.prune(backend)
    }
}
