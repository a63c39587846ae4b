//! Open-system annealing of small registers.
//!
//! The register follows `H(t) = f(t) (ω₀/2) Σ σ_z + h(t) H_t + Σ (Θ_k/2) σ_y`
//! from the driver ground state (every qubit at `σ_z = −1`) and is read out
//! in the `σ_x` product basis, where `H_t` is diagonal. An outcome bit `0`
//! (`|+⟩`) is spin `+1`, i.e. a selected vertex.
//!
//! Registers up to [`AnnealConfig::backend_limit`] qubits are propagated as
//! a dense density matrix; larger ones up to [`TRAJECTORY_LIMIT`] use
//! averaged jump trajectories.

mod evolve;
mod jumps;
mod ops;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{DeviceConfig, DeviceTrajectory, QubitSnapshot};
use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph, WEIGHT_TOL};
use crate::ising::{
    decode_spins, encode_reduced, ground_states_exhaustive, ising_energy, DecodeMap, IsingProblem, Schedule, Spins,
};
use crate::sqa::QmcConfig;

pub use evolve::{evolve_dense, DensityState, EvolveStats, Model, StepOptions};
pub use jumps::trajectory_distribution;
pub use ops::{Channel, RegisterHamiltonian};

/// Largest register any quantum backend here accepts; beyond it use `sqa`.
pub const TRAJECTORY_LIMIT: usize = 16;
/// Default dense density-matrix limit.
pub const DENSE_LIMIT: usize = 8;

/// Ideal: schedule envelopes only. Device: adds the diabatic `Θ_k(t)/2 σ_y`
/// terms of the device trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnealMode {
    #[default]
    Ideal,
    Device,
}

/// Where the `σ_xσ_x` couplings come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSource {
    /// `h(t) J_kj` of the encoded problem.
    #[default]
    Target,
    /// The resonator-mediated `J_kj(t)` of the device trajectory, which is
    /// generally not proportional to the target.
    Device,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub schedule: Schedule,
    /// Apply the device relaxation and dephasing rates.
    pub noise_enabled: bool,
    pub shots: usize,
    pub seed: u64,
    /// Largest register evolved as a dense density matrix.
    #[serde(default = "default_backend_limit")]
    pub backend_limit: usize,
    /// Jump trajectories averaged above `backend_limit`.
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub step: StepOptions,
    #[serde(default)]
    pub couplings: CouplingSource,
    #[serde(default)]
    pub device: DeviceConfig,
}

fn default_backend_limit() -> usize {
    DENSE_LIMIT
}

fn default_trajectories() -> usize {
    256
}

impl AnnealConfig {
    pub fn new(schedule: Schedule, shots: usize, seed: u64) -> Self {
        Self {
            schedule,
            noise_enabled: false,
            shots,
            seed,
            backend_limit: DENSE_LIMIT,
            trajectories: default_trajectories(),
            step: StepOptions::default(),
            couplings: CouplingSource::Target,
            device: DeviceConfig::default(),
        }
    }

    pub fn with_noise(mut self, on: bool) -> Self {
        self.noise_enabled = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.shots == 0 {
            return Err(Error::config("shots must be at least 1"));
        }
        if self.backend_limit > 12 {
            return Err(Error::config("backend_limit above 12 qubits is not supported by the dense solver"));
        }
        if self.trajectories == 0 {
            return Err(Error::config("trajectories must be at least 1"));
        }
        Ok(())
    }

    fn needs_device(&self, mode: AnnealMode) -> bool {
        mode == AnnealMode::Device || self.noise_enabled || self.couplings == CouplingSource::Device
    }
}

/// Builds `H(t)` for the problem `p` (in units of `schedule.problem_scale`).
///
/// `dev` supplies `Θ_k(t)` and, with [`CouplingSource::Device`], the
/// couplings; pass `None` for the ideal coherent Hamiltonian.
pub fn build_hamiltonian(
    p: &IsingProblem,
    dev: Option<&DeviceTrajectory>,
    s: &Schedule,
    t: f64,
    couplings: CouplingSource,
) -> Result<RegisterHamiltonian> {
    let (f, h) = s.eval(t)?;
    let n = p.n();
    if n > TRAJECTORY_LIMIT {
        return Err(Error::capacity(format!("{n} qubits exceed the dynamics limit of {TRAJECTORY_LIMIT}"), Some("sqa")));
    }
    if let Some(d) = dev {
        if d.n_qubits() != n {
            return Err(Error::input("device trajectory and problem sizes differ"));
        }
    }
    if couplings == CouplingSource::Device && dev.is_none() {
        return Err(Error::config("device couplings need a device trajectory"));
    }
    let snap = dev.map(|d| d.snapshot(t));
    Ok(assemble(p, snap.as_deref(), s, f, h, couplings))
}

fn assemble(
    p: &IsingProblem,
    snap: Option<&[QubitSnapshot]>,
    s: &Schedule,
    f: f64,
    h: f64,
    couplings: CouplingSource,
) -> RegisterHamiltonian {
    let n = p.n();
    let ep = s.problem_scale;
    let mut ham = RegisterHamiltonian::new(n);
    for k in 0..n {
        let theta = snap.map_or(0.0, |q| q[k].theta);
        ham.local[k] = [h * ep * p.field(k), theta / 2.0, f * s.driver_scale / 2.0];
    }
    ham.xx = match (couplings, snap) {
        (CouplingSource::Device, Some(q)) => {
            let mut list = Vec::new();
            for k in 0..n {
                for j in (k + 1)..n {
                    let v = q[k].alpha_re * q[j].g + q[j].alpha_re * q[k].g;
                    if v != 0.0 {
                        list.push((k, j, v));
                    }
                }
            }
            list
        }
        _ => p.coupling_list().into_iter().map(|(k, j, v)| (k, j, h * ep * v)).collect(),
    };
    ham
}

/// The time-dependent register of one anneal.
pub struct AnnealModel<'a> {
    problem: &'a IsingProblem,
    schedule: Schedule,
    device: Option<&'a DeviceTrajectory>,
    theta: bool,
    noise: bool,
    couplings: CouplingSource,
}

impl<'a> AnnealModel<'a> {
    pub fn new(
        problem: &'a IsingProblem,
        cfg: &AnnealConfig,
        mode: AnnealMode,
        device: Option<&'a DeviceTrajectory>,
    ) -> Result<Self> {
        cfg.validate()?;
        let needed = cfg.needs_device(mode);
        match device {
            None if needed => return Err(Error::config("this mode needs a device trajectory")),
            Some(d) if d.n_qubits() != problem.n() => return Err(Error::input("device trajectory and problem sizes differ")),
            _ => {}
        }
        Ok(Self {
            problem,
            schedule: cfg.schedule,
            device,
            theta: mode == AnnealMode::Device,
            noise: cfg.noise_enabled,
            couplings: cfg.couplings,
        })
    }
}

impl Model for AnnealModel<'_> {
    fn n(&self) -> usize {
        self.problem.n()
    }

    fn hamiltonian(&self, t: f64) -> RegisterHamiltonian {
        let (f, h) = self.schedule.envelopes(t / self.schedule.t_f);
        let snap = self.device.map(|d| d.snapshot(t));
        let mut ham = assemble(self.problem, snap.as_deref(), &self.schedule, f, h, self.couplings);
        if !self.theta {
            ham.local.iter_mut().for_each(|l| l[1] = 0.0);
        }
        ham
    }

    fn channels(&self, t: f64) -> Option<Vec<Channel>> {
        if !self.noise {
            return None;
        }
        let snap = self.device?.snapshot(t);
        Some(
            snap.iter()
                .map(|q| Channel { down: q.rates.relax, up: q.rates.excite, dephase: q.rates.dephase })
                .collect(),
        )
    }
}

/// Dense evolution over `[0, t_f]` from the driver ground state.
pub fn evolve_lindblad(
    p: &IsingProblem,
    dev: Option<&DeviceTrajectory>,
    cfg: &AnnealConfig,
    mode: AnnealMode,
) -> Result<DensityState> {
    let n = p.n();
    if n > cfg.backend_limit {
        let suggestion = if n <= TRAJECTORY_LIMIT { "trajectories" } else { "sqa" };
        return Err(Error::capacity(
            format!("{n} qubits exceed the dense limit of {}", cfg.backend_limit),
            Some(suggestion),
        ));
    }
    let model = AnnealModel::new(p, cfg, mode, dev)?;
    let mut rho = DensityState::driver_ground(n)?;
    let stats = evolve_dense(&model, &mut rho, 0.0, cfg.schedule.t_f, &cfg.step)?;
    if stats.max_trace_drift > 1e-9 {
        return Err(Error::numerical(format!(
            "trace drifted by {:e}; retry with a smaller step (lower max_phase)",
            stats.max_trace_drift
        )));
    }
    rho.validate(1e-9, 1e-12, 1e-6)?;
    Ok(rho)
}

/// Spins of a `σ_x` readout outcome: bit `k` clear is `s_k = +1`.
pub fn spins_from_outcome(outcome: usize, n: usize) -> Spins {
    (0..n).map(|k| if (outcome >> k) & 1 == 0 { 1 } else { -1 }).collect()
}

/// Draws `shots` outcomes from `probs`. Shot `i` uses its own ChaCha
/// stream of `seed`, so the sequence does not depend on thread scheduling.
pub fn sample_distribution(probs: &[f64], shots: usize, seed: u64) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let last = probs.len().saturating_sub(1);
    (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

/// Samples `σ_x`-basis readouts of `rho`, returned as spin vectors.
pub fn sample_measurements(rho: &DensityState, shots: usize, seed: u64) -> Vec<Spins> {
    sample_distribution(&rho.x_distribution(), shots, seed)
        .into_iter()
        .map(|o| spins_from_outcome(o, rho.n()))
        .collect()
}

/// Settings that produced an [`AnnealResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RunConfig {
    Dynamics { config: AnnealConfig, mode: AnnealMode },
    Qmc { config: QmcConfig },
}

/// Output of [`anneal`] and of the `sqa` annealer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub run: RunConfig,
    pub t_f: f64,
    pub shots: usize,
    pub seed: u64,
    /// `"dense"`, `"trajectories"` or `"sqa"`.
    pub backend: String,
    /// Per-shot spins of the encoded (positive-weight) register.
    pub bitstrings: Vec<Spins>,
    pub energies: Vec<f64>,
    /// Per-shot decoded vertex sets, in original graph indices.
    pub sets: Vec<VertexSet>,
    /// Greedy repairs of `sets` (identical where a set is independent).
    pub repaired: Vec<VertexSet>,
    pub weights: Vec<f64>,
    pub independent: Vec<bool>,
    /// Highest-weight independent set over the repaired shots.
    pub best_set: VertexSet,
    pub best_weight: f64,
    /// Probability of the exact ground states in the final state.
    pub p_ground: Option<f64>,
}

impl AnnealResult {
    /// JSON export; per-shot arrays are dropped unless `per_shot`.
    pub fn to_json(&self, per_shot: bool, oracle: Option<&(VertexSet, f64)>) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        let obj = v.as_object_mut().expect("struct serializes to an object");
        if !per_shot {
            for key in ["bitstrings", "energies", "sets", "repaired", "weights", "independent"] {
                obj.remove(key);
            }
        }
        let summary = serde_json::json!({
            "success_probability": oracle.map(|o| success_probability(self, o)),
            "independent_fraction": self.independent.iter().filter(|b| **b).count() as f64 / self.shots as f64,
            "mean_energy": self.energies.iter().sum::<f64>() / self.shots as f64,
        });
        obj.insert("summary".into(), summary);
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

/// CSV summary rows `t_f,shots,success_probability,best_weight`.
pub fn summary_csv<'a>(rows: impl IntoIterator<Item = (&'a AnnealResult, &'a (VertexSet, f64))>) -> String {
    let mut out = String::from("t_f,shots,success_probability,best_weight\n");
    for (r, opt) in rows {
        writeln!(out, "{},{},{},{}", r.t_f, r.shots, success_probability(r, opt), r.best_weight).expect("write to string");
    }
    out
}

/// Encode, evolve, sample and decode.
///
/// Vertices with non-positive weight never belong to an optimum and are
/// dropped before encoding.
pub fn anneal(g: &WeightedGraph, cfg: &AnnealConfig, mode: AnnealMode) -> Result<AnnealResult> {
    cfg.validate()?;
    let (p, map) = encode_reduced(g)?;
    let n = p.n();
    if n > TRAJECTORY_LIMIT {
        return Err(Error::capacity(
            format!("{n} qubits exceed the dynamics limit of {TRAJECTORY_LIMIT}"),
            Some("sqa"),
        ));
    }
    let max_w = map.vertices.iter().map(|&v| g.weight(v)).fold(0.0, f64::max);
    let scaled = if max_w > 0.0 { p.scaled(1.0 / max_w) } else { p.clone() };
    let device = if cfg.needs_device(mode) && n > 0 {
        Some(cfg.device.trajectory_for(&cfg.schedule, n)?)
    } else {
        None
    };
    let (probs, backend) = if n <= cfg.backend_limit {
        let rho = evolve_lindblad(&scaled, device.as_ref(), cfg, mode)?;
        (rho.x_distribution(), "dense")
    } else {
        let model = AnnealModel::new(&scaled, cfg, mode, device.as_ref())?;
        let probs = trajectory_distribution(&model, cfg.schedule.t_f, cfg.trajectories, cfg.seed, &cfg.step)?;
        (probs, "trajectories")
    };
    let tol = 1e-9 * p.max_abs().max(1.0);
    let p_ground = ground_states_exhaustive(&p, tol)
        .ok()
        .map(|states| states.iter().map(|s| probs[outcome_from_spins(s)]).sum::<f64>().clamp(0.0, 1.0));

    let bitstrings = sample_distribution(&probs, cfg.shots, cfg.seed)
        .into_iter()
        .map(|o| spins_from_outcome(o, n))
        .collect();
    let run = RunConfig::Dynamics { config: cfg.clone(), mode };
    let mut res = AnnealResult::from_shots(run, cfg.schedule.t_f, cfg.seed, backend, &p, bitstrings)?;
    res.p_ground = p_ground;
    res.decode(g, &map)?;
    Ok(res)
}

impl AnnealResult {
    /// Result with per-shot spins and energies; decoded fields empty.
    pub(crate) fn from_shots(
        run: RunConfig,
        t_f: f64,
        seed: u64,
        backend: &str,
        p: &IsingProblem,
        bitstrings: Vec<Spins>,
    ) -> Result<Self> {
        let energies = bitstrings.iter().map(|s| ising_energy(p, s)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            run,
            t_f,
            shots: bitstrings.len(),
            seed,
            backend: backend.into(),
            bitstrings,
            energies,
            sets: Vec::new(),
            repaired: Vec::new(),
            weights: Vec::new(),
            independent: Vec::new(),
            best_set: VertexSet::new(),
            best_weight: 0.0,
            p_ground: None,
        })
    }

    /// Decodes every shot through `map`, repairs infeasible sets and picks
    /// the best feasible one (ties to the lexicographically smallest).
    pub fn decode(&mut self, g: &WeightedGraph, map: &DecodeMap) -> Result<()> {
        self.sets.clear();
        self.repaired.clear();
        self.weights.clear();
        self.independent.clear();
        self.best_set = VertexSet::new();
        self.best_weight = 0.0;
        for spins in &self.bitstrings {
            let set = decode_spins(spins, map)?;
            let independent = g.is_independent(&set)?;
            let repaired = if independent { set.clone() } else { g.repair(&set)? };
            let w = g.total_weight(&repaired)?;
            if w > self.best_weight + WEIGHT_TOL
                || ((w - self.best_weight).abs() <= WEIGHT_TOL && repaired < self.best_set)
            {
                self.best_weight = w;
                self.best_set = repaired.clone();
            }
            self.weights.push(g.total_weight(&set)?);
            self.independent.push(independent);
            self.sets.push(set);
            self.repaired.push(repaired);
        }
        Ok(())
    }
}

fn outcome_from_spins(s: &[i8]) -> usize {
    s.iter().enumerate().filter(|(_, v)| **v < 0).fold(0, |m, (k, _)| m | 1 << k)
}

/// Fraction of shots that decode to an independent set of optimal weight;
/// `oracle` is the output of `mwis_exact`.
pub fn success_probability(res: &AnnealResult, oracle: &(VertexSet, f64)) -> f64 {
    let optimal_weight = oracle.1;
    if res.shots == 0 {
        return 0.0;
    }
    let tol = WEIGHT_TOL * optimal_weight.abs().max(1.0) * 1e3;
    let hits = res
        .independent
        .iter()
        .zip(&res.weights)
        .filter(|(ok, w)| **ok && (**w - optimal_weight).abs() <= tol)
        .count();
    hits as f64 / res.shots as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::mwis_exact;
    use crate::ising::{encode_mwis, spins_from_index};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn path3() -> WeightedGraph {
        WeightedGraph::new(vec![1.0, 5.0, 1.0], [(0, 1), (1, 2)]).unwrap()
    }

    fn dense(h: &RegisterHamiltonian) -> DMatrix<Complex64> {
        let d = 1 << h.n();
        DMatrix::from_row_slice(d, d, &h.to_dense())
    }

    /// `H^{⊗n}` with unit normalization.
    fn walsh(n: usize) -> DMatrix<Complex64> {
        let d = 1usize << n;
        let s = (d as f64).sqrt();
        DMatrix::from_fn(d, d, |r, c| {
            let sign = if (r & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(sign / s, 0.0)
        })
    }

    #[test]
    fn driver_at_start() {
        let (p, _) = encode_mwis(&path3(), 10.0).unwrap();
        let s = Schedule::linear(1e-6).unwrap();
        let h = build_hamiltonian(&p, None, &s, 0.0, CouplingSource::Target).unwrap();
        assert!(h.xx.iter().all(|c| c.2 == 0.0));
        let m = dense(&h);
        let eig = m.clone().symmetric_eigen();
        let (imin, _) = eig.eigenvalues.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &e)| if e < a.1 { (i, e) } else { a });
        let ground = eig.eigenvectors.column(imin);
        assert!((ground[7].norm() - 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[imin] + 1.5 * s.driver_scale).abs() < 1e-3);
    }

    #[test]
    fn target_at_end_is_diagonal_in_x_basis() {
        let g = WeightedGraph::new(vec![3.0, 2.0, 2.0, 1.0], [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let (p, _) = encode_mwis(&g, 6.0).unwrap();
        let s = Schedule::smooth(2e-6).unwrap();
        let h = build_hamiltonian(&p, None, &s, s.t_f, CouplingSource::Target).unwrap();
        let w = walsh(4);
        let hx = &w * dense(&h) * &w;
        for r in 0..16 {
            for c in 0..16 {
                if r != c {
                    assert!(hx[(r, c)].norm() < 1e-6, "({r},{c}) = {}", hx[(r, c)]);
                }
            }
            let spins = spins_from_outcome(r, 4);
            let e = (ising_energy(&p, &spins).unwrap() - p.offset()) * s.problem_scale;
            assert!((hx[(r, r)].re - e).abs() < 1e-6 * s.problem_scale, "{r}");
        }
    }

    #[test]
    fn device_hamiltonian_is_hermitian() {
        let g = path3();
        let (p, _) = encode_mwis(&g, 10.0).unwrap();
        let s = Schedule::linear(2e-6).unwrap();
        let mut dc = DeviceConfig::default();
        dc.anneal_points = 101;
        let dev = dc.trajectory_for(&s, 3).unwrap();
        for i in 0..20 {
            let t = s.t_f * i as f64 / 19.0;
            for src in [CouplingSource::Target, CouplingSource::Device] {
                let h = build_hamiltonian(&p, Some(&dev), &s, t, src).unwrap();
                assert!(h.local.iter().all(|l| l[1] != 0.0));
                let m = dense(&h);
                assert!((&m - m.adjoint()).norm() < 1e-9 * m.norm());
            }
        }
        assert!(build_hamiltonian(&p, Some(&dev), &s, 3e-6, CouplingSource::Target).is_err());
    }

    #[test]
    fn outcome_and_spin_conventions() {
        assert_eq!(spins_from_outcome(0b0101, 4), vec![-1, 1, -1, 1]);
        for o in 0..32 {
            assert_eq!(outcome_from_spins(&spins_from_outcome(o, 5)), o);
        }
        // opposite bit sense to the ising index helper
        assert_eq!(spins_from_outcome(0b01, 2), spins_from_index(0b10, 2));
    }

    #[test]
    fn sampling_contracts() {
        // |++⟩ is an x-basis product state
        let plus = vec![Complex64::new(0.5, 0.0); 4];
        let rho = DensityState::from_pure(2, &plus).unwrap();
        let shots = sample_measurements(&rho, 200, 7);
        assert!(shots.iter().all(|s| s == &vec![1, 1]));

        let mixed = DensityState::maximally_mixed(1).unwrap();
        let shots = sample_measurements(&mixed, 100_000, 3);
        let up = shots.iter().filter(|s| s[0] == 1).count() as f64 / 1e5;
        assert!((up - 0.5).abs() <= 0.01);

        assert_eq!(sample_measurements(&mixed, 500, 11), sample_measurements(&mixed, 500, 11));
        assert_ne!(sample_measurements(&mixed, 500, 11), sample_measurements(&mixed, 500, 12));
        // shot i does not depend on the total count
        assert_eq!(sample_distribution(&[0.3, 0.7], 10, 5)[..5], sample_distribution(&[0.3, 0.7], 5, 5)[..]);
    }

    #[test]
    fn adiabatic_single_qubit() {
        let g = WeightedGraph::edgeless(vec![1.0]).unwrap();
        let (p, _) = encode_mwis(&g, 2.0).unwrap();
        let cfg = AnnealConfig::new(Schedule::smooth(2e-6).unwrap(), 1, 0);
        let rho = evolve_lindblad(&p, None, &cfg, AnnealMode::Ideal).unwrap();
        // final Hamiltonian ∝ −σ_x: ground state is |+⟩
        let fid = rho.x_distribution()[0];
        assert!(fid >= 0.999, "{fid}");
    }

    #[test]
    fn path3_slow_anneal() {
        let cfg = AnnealConfig::new(Schedule::linear(10e-6).unwrap(), 100, 1);
        let r = anneal(&path3(), &cfg, AnnealMode::Ideal).unwrap();
        let oracle = mwis_exact(&path3()).unwrap();
        assert_eq!(r.best_set, oracle.0);
        assert_eq!(r.best_set, VertexSet::from([1]));
        assert!(success_probability(&r, &oracle) >= 0.9);
        assert!(r.p_ground.unwrap() >= 0.9);
        assert_eq!(r.bitstrings.len(), 100);
        assert_eq!(r.backend, "dense");
    }

    #[test]
    fn single_vertex() {
        let g = WeightedGraph::edgeless(vec![2.5]).unwrap();
        let cfg = AnnealConfig::new(Schedule::linear(1e-6).unwrap(), 500, 4);
        let r = anneal(&g, &cfg, AnnealMode::Ideal).unwrap();
        assert_eq!(r.best_set, VertexSet::from([0]));
        let freq = r.sets.iter().filter(|s| **s == VertexSet::from([0])).count() as f64 / 500.0;
        assert!(freq >= 0.99, "{freq}");
    }

    #[test]
    fn nonpositive_vertices_are_dropped() {
        let g = WeightedGraph::new(vec![-1.0, 2.0, 0.0], [(0, 1)]).unwrap();
        let cfg = AnnealConfig::new(Schedule::linear(2e-6).unwrap(), 50, 4);
        let r = anneal(&g, &cfg, AnnealMode::Ideal).unwrap();
        assert_eq!(r.best_set, VertexSet::from([1]));
        assert!(r.bitstrings.iter().all(|b| b.len() == 1));
    }

    #[test]
    fn capacity_routing() {
        let big = WeightedGraph::edgeless(vec![1.0; 17]).unwrap();
        let cfg = AnnealConfig::new(Schedule::linear(1e-6).unwrap(), 1, 0);
        match anneal(&big, &cfg, AnnealMode::Ideal) {
            Err(Error::Capacity { suggestion, .. }) => assert_eq!(suggestion.as_deref(), Some("sqa")),
            other => panic!("{other:?}"),
        }
        let (p, _) = encode_mwis(&WeightedGraph::edgeless(vec![1.0; 9]).unwrap(), 2.0).unwrap();
        match evolve_lindblad(&p, None, &cfg, AnnealMode::Ideal) {
            Err(Error::Capacity { suggestion, .. }) => assert_eq!(suggestion.as_deref(), Some("trajectories")),
            other => panic!("{other:?}"),
        }
        let mut bad = cfg.clone();
        bad.shots = 0;
        assert!(matches!(anneal(&path3(), &bad, AnnealMode::Ideal), Err(Error::Config(_))));
    }

    fn fake_result(weights: &[f64], independent: &[bool]) -> AnnealResult {
        let cfg = AnnealConfig::new(Schedule::linear(1e-6).unwrap(), weights.len(), 0);
        let p = IsingProblem::zeros(0);
        let run = RunConfig::Dynamics { config: cfg, mode: AnnealMode::Ideal };
        let mut r = AnnealResult::from_shots(run, 1e-6, 0, "dense", &p, vec![vec![]; weights.len()]).unwrap();
        r.weights = weights.to_vec();
        r.independent = independent.to_vec();
        r
    }

    #[test]
    fn success_counting() {
        let oracle = (VertexSet::from([1]), 5.0);
        assert_eq!(success_probability(&fake_result(&[5.0; 4], &[true; 4]), &oracle), 1.0);
        assert_eq!(success_probability(&fake_result(&[2.0, 1.0], &[true, true]), &oracle), 0.0);
        let mut w = vec![5.0; 7];
        w.extend([2.0, 6.0, 5.0]);
        let mut ind = vec![true; 9];
        ind.push(false);
        assert!((success_probability(&fake_result(&w, &ind), &oracle) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn exports() {
        let cfg = AnnealConfig::new(Schedule::linear(3e-6).unwrap(), 20, 2);
        let r = anneal(&path3(), &cfg, AnnealMode::Ideal).unwrap();
        let oracle = mwis_exact(&path3()).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json(false, Some(&oracle)).unwrap()).unwrap();
        assert!(json.get("bitstrings").is_none());
        assert!(json["summary"]["success_probability"].as_f64().is_some());
        assert_eq!(json["run"]["config"]["shots"], 20);
        assert_eq!(json["run"]["kind"], "dynamics");
        let full: AnnealResult = serde_json::from_str(&r.to_json(true, None).unwrap()).unwrap();
        assert_eq!(full.bitstrings, r.bitstrings);
        let csv = summary_csv([(&r, &oracle)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t_f,shots,success_probability,best_weight"));
        assert!(lines.next().unwrap().starts_with("0.000003,20,"));
    }

    #[test]
    fn noisy_evolution_stays_physical() {
        let g = WeightedGraph::new(vec![3.0, 2.0, 2.0], [(0, 1), (1, 2), (0, 2)]).unwrap();
        let (p, _) = encode_mwis(&g, 6.0).unwrap();
        let mut cfg = AnnealConfig::new(Schedule::linear(2e-6).unwrap(), 1, 0).with_noise(true);
        cfg.device.anneal_points = 101;
        cfg.device.noise.phonon_relaxation = 2e5;
        cfg.device.noise.temperature = 0.5;
        let dev = cfg.device.trajectory_for(&cfg.schedule, 3).unwrap();
        let rho = evolve_lindblad(&p.scaled(1.0 / 3.0), Some(&dev), &cfg, AnnealMode::Device).unwrap();
        assert!((rho.trace().re - 1.0).abs() <= 1e-9);
        assert!(rho.hermiticity_error() <= 1e-12);
        assert!(rho.min_eigenvalue() >= -1e-9);
    }
}
