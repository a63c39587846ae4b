//! Simulated quantum annealing: discrete-time path-integral Monte Carlo of
//! the transverse-field Ising model along the annealing schedule.
//!
//! In the basis where the target Hamiltonian is diagonal the driver is a
//! transverse field `Γ(t) = f(t) ω₀/2`. The register is replicated into `P`
//! imaginary-time slices with classical energy
//!
//! ```text
//! E = Σ_k h(t) H_t(s^k) / P  −  J_⊥ Σ_k Σ_i s_i^k s_i^{k+1}
//! J_⊥ = −(1/2β) ln tanh(β Γ / P)
//! ```
//!
//! sampled at inverse temperature `β`. Energies are in units of the
//! schedule's problem scale `E_p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{AnnealResult, RunConfig};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::ising::{encode_reduced, ising_energy, IsingProblem, Schedule, Spins};

/// Largest register accepted.
pub const SQA_LIMIT: usize = 256;

/// Which slice of the final replica becomes the shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadoutPolicy {
    FinalSlice,
    #[default]
    BestEnergySlice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmcConfig {
    /// Envelope shape and the ratio `ω₀ / E_p`; `t_f` is only recorded.
    pub schedule: Schedule,
    pub trotter_slices: usize,
    /// Inverse temperature in units of `1/E_p`.
    pub beta: f64,
    pub sweeps_per_point: usize,
    pub schedule_points: usize,
    /// Independent restarts; each yields one shot.
    pub restarts: usize,
    pub seed: u64,
    #[serde(default)]
    pub readout: ReadoutPolicy,
    /// Whole-worldline flips after every sweep.
    #[serde(default = "yes")]
    pub cluster_updates: bool,
}

fn yes() -> bool {
    true
}

impl Default for QmcConfig {
    fn default() -> Self {
        Self {
            schedule: Schedule::linear(50e-6).expect("valid default schedule"),
            trotter_slices: 32,
            beta: 10.0,
            sweeps_per_point: 50,
            schedule_points: 64,
            restarts: 20,
            seed: 0,
            readout: ReadoutPolicy::BestEnergySlice,
            cluster_updates: true,
        }
    }
}

impl QmcConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.trotter_slices < 2 {
            return Err(Error::config("at least two Trotter slices are required"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("beta must be positive"));
        }
        if self.sweeps_per_point == 0 || self.schedule_points == 0 || self.restarts == 0 {
            return Err(Error::config("sweeps, schedule points and restarts must be at least 1"));
        }
        Ok(())
    }

    /// Transverse field `Γ = f ω₀ / 2` in units of `E_p`, with `f` clamped
    /// below at `1e-6 f(0)`.
    pub fn transverse_field(&self, f: f64) -> f64 {
        let f0 = self.schedule.envelopes(0.0).0;
        f.max(1e-6 * f0) * self.schedule.driver_scale / (2.0 * self.schedule.problem_scale)
    }

    /// Ferromagnetic inter-slice coupling at envelope value `f`.
    pub fn inter_slice_coupling(&self, f: f64) -> f64 {
        let p = self.trotter_slices as f64;
        -(self.beta * self.transverse_field(f) / p).tanh().ln() / (2.0 * self.beta)
    }
}

/// Spins of all slices, row-major `[P × n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicaState {
    pub slices: usize,
    pub n: usize,
    pub spins: Vec<i8>,
}

impl ReplicaState {
    pub fn slice(&self, k: usize) -> &[i8] {
        &self.spins[k * self.n..(k + 1) * self.n]
    }

    /// True if every slice holds the same configuration.
    pub fn is_locked(&self) -> bool {
        (1..self.slices).all(|k| self.slice(k) == self.slice(0))
    }
}

/// `ising_energy` of one slice.
pub fn classical_energy(p: &IsingProblem, slice: &[i8]) -> Result<f64> {
    ising_energy(p, slice)
}

/// Sparse coupling rows.
struct Couplings {
    rows: Vec<Vec<(usize, f64)>>,
    fields: Vec<f64>,
}

impl Couplings {
    fn new(p: &IsingProblem) -> Self {
        let mut rows = vec![Vec::new(); p.n()];
        for (i, j, v) in p.coupling_list() {
            rows[i].push((j, v));
            rows[j].push((i, v));
        }
        Self { rows, fields: p.fields().to_vec() }
    }

    /// `Ω_i + Σ_j J_ij s_j`.
    fn local(&self, s: &[i8], i: usize) -> f64 {
        self.fields[i] + self.rows[i].iter().map(|&(j, v)| v * s[j] as f64).sum::<f64>()
    }
}

/// One restart; returns the final replica.
pub fn run_restart(p: &IsingProblem, cfg: &QmcConfig, restart: u64) -> Result<ReplicaState> {
    cfg.validate()?;
    let n = p.n();
    let slices = cfg.trotter_slices;
    let c = Couplings::new(p);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart);
    let mut spins: Vec<i8> = (0..slices * n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    let beta = cfg.beta;
    let pf = slices as f64;
    let points = cfg.schedule_points;
    for m in 0..points {
        let u = if points == 1 { 1.0 } else { m as f64 / (points - 1) as f64 };
        let (f, h) = cfg.schedule.envelopes(u);
        let jp = cfg.inter_slice_coupling(f);
        let scale = h / pf;
        for _ in 0..cfg.sweeps_per_point {
            for k in 0..slices {
                let up = ((k + slices - 1) % slices) * n;
                let down = ((k + 1) % slices) * n;
                for i in 0..n {
                    let row = k * n;
                    let s = spins[row + i] as f64;
                    let de_p = -2.0 * s * scale * c.local(&spins[row..row + n], i);
                    let de_perp = 2.0 * jp * s * (spins[up + i] + spins[down + i]) as f64;
                    let de = de_p + de_perp;
                    if de <= 0.0 || rng.random::<f64>() < (-beta * de).exp() {
                        spins[row + i] = -spins[row + i];
                    }
                }
            }
            if cfg.cluster_updates {
                for i in 0..n {
                    let de: f64 = (0..slices)
                        .map(|k| {
                            let row = k * n;
                            -2.0 * spins[row + i] as f64 * scale * c.local(&spins[row..row + n], i)
                        })
                        .sum();
                    if de <= 0.0 || rng.random::<f64>() < (-beta * de).exp() {
                        for k in 0..slices {
                            spins[k * n + i] = -spins[k * n + i];
                        }
                    }
                }
            }
        }
    }
    Ok(ReplicaState { slices, n, spins })
}

fn readout(p: &IsingProblem, r: &ReplicaState, policy: ReadoutPolicy) -> Result<Spins> {
    match policy {
        ReadoutPolicy::FinalSlice => Ok(r.slice(r.slices - 1).to_vec()),
        ReadoutPolicy::BestEnergySlice => {
            let mut best = (f64::INFINITY, 0);
            for k in 0..r.slices {
                let e = classical_energy(p, r.slice(k))?;
                if e < best.0 {
                    best = (e, k);
                }
            }
            Ok(r.slice(best.1).to_vec())
        }
    }
}

/// Anneals `p` (in units of `E_p`); one shot per restart. The returned
/// result carries spins and energies; decode with [`AnnealResult::decode`].
pub fn sqa_anneal(p: &IsingProblem, cfg: &QmcConfig) -> Result<AnnealResult> {
    let (shots, _) = sqa_replicas(p, cfg)?;
    AnnealResult::from_shots(
        RunConfig::Qmc { config: cfg.clone() },
        cfg.schedule.t_f,
        cfg.seed,
        "sqa",
        p,
        shots,
    )
}

/// Shots together with the final replicas.
pub fn sqa_replicas(p: &IsingProblem, cfg: &QmcConfig) -> Result<(Vec<Spins>, Vec<ReplicaState>)> {
    cfg.validate()?;
    if p.n() > SQA_LIMIT {
        return Err(Error::capacity(format!("{} spins exceed the sqa limit of {SQA_LIMIT}", p.n()), None));
    }
    let replicas: Vec<ReplicaState> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|r| run_restart(p, cfg, r))
        .collect::<Result<_>>()?;
    let shots = replicas.iter().map(|r| readout(p, r, cfg.readout)).collect::<Result<_>>()?;
    Ok((shots, replicas))
}

/// MWIS through SQA: drops non-positive vertices, encodes, normalizes by
/// the largest weight, anneals and decodes (raw and repaired sets).
pub fn sqa_mwis(g: &WeightedGraph, cfg: &QmcConfig) -> Result<AnnealResult> {
    let (p, map) = encode_reduced(g)?;
    let max_w = map.vertices.iter().map(|&v| g.weight(v)).fold(0.0, f64::max);
    let scaled = if max_w > 0.0 { p.scaled(1.0 / max_w) } else { p.clone() };
    let (shots, _) = sqa_replicas(&scaled, cfg)?;
    let mut res = AnnealResult::from_shots(
        RunConfig::Qmc { config: cfg.clone() },
        cfg.schedule.t_f,
        cfg.seed,
        "sqa",
        &p,
        shots,
    )?;
    res.decode(g, &map)?;
    Ok(res)
}

/// Agreement of a batch of restarts with a known ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// Fraction of restarts reaching the ground energy.
    pub success_rate: f64,
    /// Mean of `E − E_0` over restarts, never negative.
    pub mean_residual: f64,
    /// Restarts needed for 99% confidence of one success; `None` when no
    /// restart succeeded.
    pub restarts_to_solution: Option<f64>,
    pub best_energy: f64,
}

/// Runs [`sqa_anneal`] and compares each shot with `oracle = (spins, E_0)`.
pub fn agreement_report(p: &IsingProblem, cfg: &QmcConfig, oracle: &(Spins, f64)) -> Result<AgreementReport> {
    let res = sqa_anneal(p, cfg)?;
    Ok(agreement_of(&res.energies, oracle.1, p))
}

fn agreement_of(energies: &[f64], e0: f64, p: &IsingProblem) -> AgreementReport {
    let tol = 1e-9 * p.max_abs().max(1.0);
    let hits = energies.iter().filter(|&&e| e <= e0 + tol).count();
    let m = energies.len().max(1) as f64;
    let success_rate = hits as f64 / m;
    let mean_residual = energies.iter().map(|&e| (e - e0).max(0.0)).sum::<f64>() / m;
    let restarts_to_solution = match success_rate {
        s if s >= 1.0 => Some(1.0),
        s if s <= 0.0 => None,
        s => Some(((0.01f64).ln() / (1.0 - s).ln()).max(1.0)),
    };
    let best_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
    AgreementReport { success_rate, mean_residual, restarts_to_solution, best_energy }
}
