//! Pure-state trajectory unraveling of the master equation (jump method),
//! for registers too large for a dense density matrix.
//!
//! Each trajectory follows the same split step as the dense integrator with
//! the dissipator replaced by the non-Hermitian decay
//! `exp(−τ Σ_c L_c†L_c / 2)`, which is diagonal in the `σ_z` basis. A jump
//! fires when the squared norm drops below a uniform threshold; the channel
//! is drawn in proportion to `‖L_c ψ‖²`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::evolve::{walk_steps, Model, StepOptions};
use super::ops::{apply_local_vec, dimension, hadamard_vec, local_unitary, phases, Channel};
use crate::error::Result;

/// Keeps the trajectory streams apart from the shot streams of the same seed.
const TRAJECTORY_DOMAIN: u64 = 0x6a09_e667_f3bc_c908;

/// Ensemble-averaged `σ_x` outcome distribution at `t_f` over
/// `trajectories` unravelings, starting from the driver ground state.
pub fn trajectory_distribution(model: &dyn Model, t_f: f64, trajectories: usize, seed: u64, opts: &StepOptions) -> Result<Vec<f64>> {
    let d = dimension(model.n())?;
    let trajectories = trajectories.max(1);
    let sum = (0..trajectories)
        .into_par_iter()
        .map(|i| run_one(model, t_f, seed, i as u64, opts))
        .try_reduce(|| vec![0.0; d], |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            Ok(a)
        })?;
    Ok(sum.into_iter().map(|x| x / trajectories as f64).collect())
}

fn run_one(model: &dyn Model, t_f: f64, seed: u64, index: u64, opts: &StepOptions) -> Result<Vec<f64>> {
    let n = model.n();
    let d = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ TRAJECTORY_DOMAIN);
    rng.set_stream(index);
    let mut psi = vec![Complex64::new(0.0, 0.0); d];
    psi[d - 1] = Complex64::new(1.0, 0.0);
    let mut threshold: f64 = rng.random();
    walk_steps(model, 0.0, t_f, opts, |tm, h| {
        let ham = model.hamiltonian(tm);
        let channels = model.channels(tm);
        let decay = channels.as_deref().map(|c| decay_factors(c, n, h / 2.0));
        let scale = |psi: &mut [Complex64]| {
            if let Some(f) = &decay {
                psi.iter_mut().zip(f).for_each(|(a, f)| *a *= f);
            }
        };
        let locals: Vec<[Complex64; 4]> = ham.local.iter().map(|&c| local_unitary(c, h / 2.0)).collect();
        scale(&mut psi);
        for (k, u) in locals.iter().enumerate() {
            apply_local_vec(&mut psi, k, u);
        }
        if !ham.xx.is_empty() {
            hadamard_vec(&mut psi);
            for (a, p) in psi.iter_mut().zip(phases(&ham.xx_energies(), h)) {
                *a *= p;
            }
            hadamard_vec(&mut psi);
        }
        for (k, u) in locals.iter().enumerate() {
            apply_local_vec(&mut psi, k, u);
        }
        scale(&mut psi);
        if let Some(chs) = channels {
            if norm_sqr(&psi) < threshold {
                jump(&mut psi, &chs, &mut rng);
                threshold = rng.random();
            }
        }
        Ok(())
    })?;
    let norm = norm_sqr(&psi);
    hadamard_vec(&mut psi);
    Ok(psi.iter().map(|a| a.norm_sqr() / norm).collect())
}

fn norm_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

/// Amplitude factors of `exp(−τ Σ L†L / 2)` per basis state.
fn decay_factors(chs: &[Channel], n: usize, tau: f64) -> Vec<f64> {
    let d = 1usize << n;
    let uniform: f64 = chs.iter().map(|c| c.dephase / 2.0).sum();
    (0..d)
        .map(|i| {
            let rate: f64 = chs.iter().enumerate().map(|(k, c)| if (i >> k) & 1 == 0 { c.down } else { c.up }).sum();
            (-(rate + uniform) * tau / 2.0).exp()
        })
        .collect()
}

/// Applies one jump drawn from `‖L_c ψ‖²` and renormalizes.
fn jump(psi: &mut [Complex64], chs: &[Channel], rng: &mut ChaCha8Rng) {
    let total = norm_sqr(psi);
    let mut weights = Vec::with_capacity(3 * chs.len());
    for (k, c) in chs.iter().enumerate() {
        let bit = 1usize << k;
        let excited: f64 = psi.iter().enumerate().filter(|(i, _)| i & bit == 0).map(|(_, a)| a.norm_sqr()).sum();
        weights.push(c.down * excited);
        weights.push(c.up * (total - excited));
        weights.push(c.dephase / 2.0 * total);
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return;
    }
    let mut r = rng.random::<f64>() * sum;
    let mut pick = weights.len() - 1;
    for (i, w) in weights.iter().enumerate() {
        if r < *w {
            pick = i;
            break;
        }
        r -= w;
    }
    let (k, kind) = (pick / 3, pick % 3);
    let bit = 1usize << k;
    let zero = Complex64::new(0.0, 0.0);
    for i in 0..psi.len() {
        if i & bit != 0 {
            continue;
        }
        let j = i | bit;
        match kind {
            // σ−: excited (bit 0) → ground (bit 1)
            0 => (psi[j], psi[i]) = (psi[i], zero),
            1 => (psi[i], psi[j]) = (psi[j], zero),
            _ => psi[j] = -psi[j],
        }
    }
    let norm = norm_sqr(psi).sqrt();
    psi.iter_mut().for_each(|a| *a /= norm);
}
