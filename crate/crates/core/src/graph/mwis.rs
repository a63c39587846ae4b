//! Exact MWIS solvers.
//!
//! Both solvers only ever select vertices of strictly positive weight and
//! break ties (within [`WEIGHT_TOL`]) towards the lexicographically smallest
//! sorted vertex list, so they agree set-for-set, not just on the weight.

use super::{VertexSet, WeightedGraph, WEIGHT_TOL};
use crate::error::{Error, Result};

/// Largest graph the exhaustive oracle accepts.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Size limits for the branch-and-bound solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MwisBudget {
    /// Largest connected component (after dropping non-positive vertices)
    /// the search will attempt. Hard ceiling: 128.
    pub max_component: usize,
}

impl Default for MwisBudget {
    fn default() -> Self {
        Self { max_component: 100 }
    }
}

type Mask = u128;
const MASK_BITS: usize = 128;

/// `a < b` as sorted index sequences.
fn lex_less(a: Mask, b: Mask) -> bool {
    if a == b {
        return false;
    }
    let d = (a ^ b).trailing_zeros() as usize;
    let above: Mask = if d + 1 >= MASK_BITS { 0 } else { !((1 << (d + 1)) - 1) };
    if a & (1 << d) != 0 {
        b & above != 0
    } else {
        a & above == 0
    }
}

fn better(w: f64, set: Mask, best_w: f64, best_set: Mask) -> bool {
    w > best_w + WEIGHT_TOL || ((w - best_w).abs() <= WEIGHT_TOL && lex_less(set, best_set))
}

/// Exact MWIS with the default budget.
pub fn mwis_exact(g: &WeightedGraph) -> Result<(VertexSet, f64)> {
    mwis_exact_with(g, MwisBudget::default())
}

/// Branch-and-bound MWIS, solved independently per connected component.
///
/// The bound at every node is the summed weight of a greedy clique partition
/// of the remaining candidates (each clique contributes its heaviest vertex),
/// which never exceeds the plain candidate weight sum.
pub fn mwis_exact_with(g: &WeightedGraph, budget: MwisBudget) -> Result<(VertexSet, f64)> {
    let limit = budget.max_component.min(MASK_BITS);
    let (pos, map) = g.drop_nonpositive();
    let mut chosen = Vec::new();
    for comp in pos.components() {
        if comp.len() > limit {
            return Err(Error::capacity(
                format!(
                    "connected component with {} vertices exceeds the exact-solver budget of {}",
                    comp.len(),
                    limit
                ),
                Some("sqa"),
            ));
        }
        let (sub, sub_map) = pos.induced(&comp);
        let local = BranchAndBound::new(&sub).solve();
        chosen.extend(local.into_iter().map(|v| map[sub_map[v]]));
    }
    let set = VertexSet::from_iter(chosen);
    let w = g.total_weight(&set)?;
    Ok((set, w))
}

struct BranchAndBound {
    weights: Vec<f64>,
    nbr: Vec<Mask>,
    best_w: f64,
    best_set: Mask,
}

impl BranchAndBound {
    fn new(g: &WeightedGraph) -> Self {
        let nbr = (0..g.n())
            .map(|v| g.neighbors(v).iter().fold(0, |m, &u| m | (1 << u)))
            .collect();
        Self {
            weights: g.weights().to_vec(),
            nbr,
            best_w: 0.0,
            best_set: 0,
        }
    }

    fn solve(mut self) -> Vec<usize> {
        let n = self.weights.len();
        let all: Mask = if n == MASK_BITS { !0 } else { (1 << n) - 1 };
        self.branch(all, 0, 0.0);
        (0..n).filter(|&v| self.best_set & (1 << v) != 0).collect()
    }

    fn clique_bound(&self, mut cand: Mask) -> f64 {
        let mut bound = 0.0;
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            let mut clique_max = self.weights[v];
            let mut members = self.nbr[v] & cand;
            cand &= !(1 << v);
            // grow a clique greedily in index order
            let mut clique = 1 << v;
            while members != 0 {
                let u = members.trailing_zeros() as usize;
                members &= !(1 << u);
                if self.nbr[u] & clique == clique {
                    clique |= 1 << u;
                    clique_max = clique_max.max(self.weights[u]);
                    members &= self.nbr[u];
                }
            }
            cand &= !clique;
            bound += clique_max;
        }
        bound
    }

    fn branch(&mut self, cand: Mask, chosen: Mask, w: f64) {
        if cand == 0 {
            if better(w, chosen, self.best_w, self.best_set) {
                self.best_w = w;
                self.best_set = chosen;
            }
            return;
        }
        if w + self.clique_bound(cand) < self.best_w - WEIGHT_TOL {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let bit = 1 << v;
        self.branch(cand & !bit & !self.nbr[v], chosen | bit, w + self.weights[v]);
        self.branch(cand & !bit, chosen, w);
    }
}

/// Plain enumeration of every subset of the positive-weight vertices.
/// Only for graphs with at most [`EXHAUSTIVE_LIMIT`] vertices.
pub fn mwis_exhaustive(g: &WeightedGraph) -> Result<(VertexSet, f64)> {
    let n = g.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::capacity(
            format!("exhaustive enumeration is limited to {EXHAUSTIVE_LIMIT} vertices, got {n}"),
            Some("exact"),
        ));
    }
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let positive: u32 = (0..n).filter(|&v| g.weight(v) > 0.0).fold(0, |m, v| m | (1 << v));
    let mut best_w = 0.0;
    let mut best: Mask = 0;
    for mask in 0u32..(1u32 << n) {
        if mask & !positive != 0 {
            continue;
        }
        let mut ok = true;
        let mut w = 0.0;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if nbr[v] & mask != 0 {
                ok = false;
                break;
            }
            w += g.weight(v);
        }
        if ok && better(w, mask as Mask, best_w, best) {
            best_w = w;
            best = mask as Mask;
        }
    }
    let set = VertexSet::from_iter((0..n).filter(|&v| best & (1 << v) != 0));
    let w = g.total_weight(&set)?;
    Ok((set, w))
}
