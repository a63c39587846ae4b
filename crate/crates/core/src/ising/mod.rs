//! Ising target Hamiltonians: MWIS encoding, decoding, energies, schedules
//! and an exhaustive ground-state oracle.
//!
//! Spin `+1` marks a selected vertex, so `x_i = (1 + s_i)/2`. With
//! `J_ij = M/4` per edge, `Ω_i = -w_i/2 + (M/4) deg(i)` and a constant
//! offset, [`ising_energy`] equals the penalized objective
//! `-Σ w_i x_i + M Σ_(i,j)∈E x_i x_j` for every spin configuration.

mod schedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};

pub use schedule::{Schedule, Shape, DEFAULT_DRIVER_SCALE, DEFAULT_PROBLEM_SCALE};

/// Largest register [`ground_state_exhaustive`] enumerates.
pub const GROUND_STATE_LIMIT: usize = 24;

/// Spins are `±1` stored as `i8`.
pub type Spins = Vec<i8>;

/// Fields `Ω_k`, symmetric couplings `J_kj` with zero diagonal, and an offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsingFile", into = "IsingFile")]
pub struct IsingProblem {
    fields: Vec<f64>,
    /// Row-major `n × n`.
    couplings: Vec<f64>,
    offset: f64,
}

/// JSON shape of an [`IsingProblem`]; couplings listed once per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingFile {
    pub n: usize,
    pub fields: Vec<f64>,
    pub couplings: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub offset: f64,
}

impl IsingProblem {
    /// Problem with the given fields and no couplings.
    pub fn new(fields: Vec<f64>, offset: f64) -> Result<Self> {
        let n = fields.len();
        let p = Self { fields, couplings: vec![0.0; n * n], offset };
        if !p.fields.iter().all(|x| x.is_finite()) || !offset.is_finite() {
            return Err(Error::input("Ising fields and offset must be finite"));
        }
        Ok(p)
    }

    /// All-zero problem on `n` spins.
    pub fn zeros(n: usize) -> Self {
        Self { fields: vec![0.0; n], couplings: vec![0.0; n * n], offset: 0.0 }
    }

    pub fn with_couplings(
        fields: Vec<f64>,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
        offset: f64,
    ) -> Result<Self> {
        let mut p = Self::new(fields, offset)?;
        for (i, j, v) in couplings {
            p.add_coupling(i, j, v)?;
        }
        Ok(p)
    }

    /// Adds `v` to `J_ij` (and `J_ji`).
    pub fn add_coupling(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(Error::input(format!("coupling ({i}, {j}) outside {n} spins")));
        }
        if i == j {
            return Err(Error::input(format!("diagonal coupling on spin {i}")));
        }
        if !v.is_finite() {
            return Err(Error::input(format!("coupling ({i}, {j}) is not finite")));
        }
        self.couplings[i * n + j] += v;
        self.couplings[j * n + i] += v;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn field(&self, k: usize) -> f64 {
        self.fields[k]
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n() + j]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Non-zero couplings `(i, j, J)` with `i < j`.
    pub fn coupling_list(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.couplings[i * n + j];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Largest `|Ω_k|` or `|J_kj|`.
    pub fn max_abs(&self) -> f64 {
        self.fields.iter().chain(&self.couplings).fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Multiplies fields, couplings and offset by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            fields: self.fields.iter().map(|x| x * factor).collect(),
            couplings: self.couplings.iter().map(|x| x * factor).collect(),
            offset: self.offset * factor,
        }
    }
}

impl TryFrom<IsingFile> for IsingProblem {
    type Error = Error;

    fn try_from(f: IsingFile) -> Result<Self> {
        if f.fields.len() != f.n {
            return Err(Error::input(format!(
                "Ising problem declares n = {} but lists {} fields",
                f.n,
                f.fields.len()
            )));
        }
        Self::with_couplings(f.fields, f.couplings, f.offset)
    }
}

impl From<IsingProblem> for IsingFile {
    fn from(p: IsingProblem) -> Self {
        IsingFile { n: p.n(), couplings: p.coupling_list(), fields: p.fields, offset: p.offset }
    }
}

/// Spin index → vertex index of the original graph. Spin `+1` means selected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeMap {
    pub vertices: Vec<usize>,
}

impl DecodeMap {
    pub fn identity(n: usize) -> Self {
        Self { vertices: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Default penalty `M = 2 max w`.
pub fn default_penalty(g: &WeightedGraph) -> f64 {
    2.0 * g.max_weight().unwrap_or(0.0)
}

/// Encodes a strictly positive-weight graph. Use
/// [`WeightedGraph::drop_nonpositive`] together with [`encode_reduced`] for
/// graphs that contain non-positive vertices.
pub fn encode_mwis(g: &WeightedGraph, penalty: f64) -> Result<(IsingProblem, DecodeMap)> {
    if let Some(v) = (0..g.n()).find(|&v| g.weight(v) <= 0.0) {
        return Err(Error::input(format!(
            "vertex {v} has non-positive weight {}; drop it before encoding",
            g.weight(v)
        )));
    }
    let max_w = g.max_weight().unwrap_or(0.0);
    if !(penalty.is_finite() && penalty > max_w) {
        return Err(Error::input(format!(
            "penalty {penalty} must exceed the largest weight {max_w}"
        )));
    }
    let quarter = penalty / 4.0;
    let fields: Vec<f64> = (0..g.n())
        .map(|v| -g.weight(v) / 2.0 + quarter * g.degree(v) as f64)
        .collect();
    let offset = -g.weights().iter().sum::<f64>() / 2.0 + quarter * g.edges().len() as f64;
    let couplings = g.edges().iter().map(|&(a, b)| (a, b, quarter));
    let p = IsingProblem::with_couplings(fields, couplings, offset)?;
    Ok((p, DecodeMap::identity(g.n())))
}

/// Drops non-positive vertices, encodes the rest with the default penalty,
/// and returns a map back to the original vertex indices.
pub fn encode_reduced(g: &WeightedGraph) -> Result<(IsingProblem, DecodeMap)> {
    let (reduced, map) = g.drop_nonpositive();
    let (p, _) = encode_mwis(&reduced, default_penalty(&reduced).max(f64::MIN_POSITIVE))?;
    Ok((p, DecodeMap { vertices: map }))
}

/// Vertices whose spin is `+1`.
pub fn decode_spins(spins: &[i8], map: &DecodeMap) -> Result<VertexSet> {
    if spins.len() != map.len() {
        return Err(Error::input(format!(
            "{} spins for a map of {} vertices",
            spins.len(),
            map.len()
        )));
    }
    Ok(spins.iter().zip(&map.vertices).filter(|(s, _)| **s > 0).map(|(_, &v)| v).collect())
}

/// `Σ_{k<j} J_kj s_k s_j + Σ_k Ω_k s_k + offset`.
pub fn ising_energy(p: &IsingProblem, spins: &[i8]) -> Result<f64> {
    let n = p.n();
    if spins.len() != n {
        return Err(Error::input(format!("{} spins for a problem of {n}", spins.len())));
    }
    let mut e = p.offset;
    for k in 0..n {
        let sk = spins[k] as f64;
        e += p.fields[k] * sk;
        let row = &p.couplings[k * n..(k + 1) * n];
        for j in (k + 1)..n {
            e += row[j] * sk * spins[j] as f64;
        }
    }
    Ok(e)
}

/// Spin vector for a binary index: bit `k` set means `s_k = +1`.
pub fn spins_from_index(index: u64, n: usize) -> Spins {
    (0..n).map(|k| if index >> k & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn index_from_spins(spins: &[i8]) -> u64 {
    spins.iter().enumerate().filter(|(_, s)| **s > 0).fold(0, |m, (k, _)| m | 1 << k)
}

/// Visits all `2^n` configurations in Gray-code order, calling
/// `visit(index, energy)` with an incrementally updated energy.
fn gray_walk(p: &IsingProblem, mut visit: impl FnMut(u64, f64)) {
    let n = p.n();
    let mut spins = vec![-1i8; n];
    let mut local: Vec<f64> = (0..n)
        .map(|k| p.fields[k] - (0..n).map(|j| p.coupling(k, j)).sum::<f64>())
        .collect();
    let mut e = ising_energy(p, &spins).expect("length matches");
    let mut index = 0u64;
    visit(index, e);
    for step in 1u64..(1u64 << n) {
        let k = step.trailing_zeros() as usize;
        let old = spins[k] as f64;
        e -= 2.0 * old * local[k];
        spins[k] = -spins[k];
        index ^= 1 << k;
        let delta = -2.0 * old;
        let row = &p.couplings[k * n..(k + 1) * n];
        for j in 0..n {
            local[j] += row[j] * delta;
        }
        visit(index, e);
    }
}

fn check_ground_state_size(p: &IsingProblem) -> Result<()> {
    if p.n() > GROUND_STATE_LIMIT {
        return Err(Error::capacity(
            format!(
                "exhaustive ground state limited to {GROUND_STATE_LIMIT} spins, got {}",
                p.n()
            ),
            Some("sqa"),
        ));
    }
    Ok(())
}

/// Global minimizer of [`ising_energy`]. Among configurations within `1e-9`
/// (relative to the problem scale) of the minimum, the lowest binary index
/// wins (bit `k` set means `s_k = +1`).
pub fn ground_state_exhaustive(p: &IsingProblem) -> Result<(Spins, f64)> {
    check_ground_state_size(p)?;
    let tol = 1e-9 * p.max_abs().max(1.0);
    let mut best = (0u64, f64::INFINITY);
    gray_walk(p, |idx, e| {
        if e < best.1 - tol || (e <= best.1 + tol && idx < best.0) {
            best = (idx, e.min(best.1));
        }
    });
    let spins = spins_from_index(best.0, p.n());
    let e = ising_energy(p, &spins)?;
    Ok((spins, e))
}

/// Every configuration within `tol` of the ground energy, in increasing
/// binary index.
pub fn ground_states_exhaustive(p: &IsingProblem, tol: f64) -> Result<Vec<Spins>> {
    let (_, e0) = ground_state_exhaustive(p)?;
    let mut out = Vec::new();
    gray_walk(p, |idx, e| {
        if e <= e0 + tol {
            out.push(idx);
        }
    });
    out.sort_unstable();
    Ok(out
        .into_iter()
        .map(|i| spins_from_index(i, p.n()))
        .filter(|s| ising_energy(p, s).map(|e| e <= e0 + tol).unwrap_or(false))
        .collect())
}
