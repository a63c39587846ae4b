//! Dense density-matrix propagation.
//!
//! Each step of length `h` applies, with every coefficient taken at the
//! step midpoint, the symmetric product
//!
//! ```text
//! D(h/2) · L(h/2) · X(h) · L(h/2) · D(h/2)
//! ```
//!
//! where `L` is the exact single-qubit rotation part, `X` the exact
//! `σ_xσ_x` part (diagonal after a Hadamard transform) and `D` the exact
//! per-qubit dissipator. The scheme is second order, unitary/CPTP by
//! construction, and the step is chosen so that the largest per-qubit
//! phase per step stays below `max_phase`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{
    apply_channel_rho, apply_diag_rho, apply_local_rho, dimension, hadamard_rho, hermitize, local_unitary, phases,
    Channel, RegisterHamiltonian,
};
use crate::error::{Error, Result};

/// A time-dependent open register.
pub trait Model: Sync {
    fn n(&self) -> usize;
    fn hamiltonian(&self, t: f64) -> RegisterHamiltonian;
    /// One channel per qubit, or `None` for closed evolution.
    fn channels(&self, _t: f64) -> Option<Vec<Channel>> {
        None
    }
}

/// Step control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    /// Largest per-qubit phase `Λ(t)·h` accumulated in one step.
    pub max_phase: f64,
    /// Minimum number of steps over the window, so slow envelopes and
    /// rates are still resolved.
    pub min_steps: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { max_phase: 0.2, min_steps: 400 }
    }
}

impl StepOptions {
    fn validate(&self) -> Result<()> {
        if !(self.max_phase > 0.0 && self.max_phase.is_finite()) {
            return Err(Error::config("max_phase must be positive"));
        }
        Ok(())
    }

    /// Next step length from `t` towards `t1`.
    pub(crate) fn next_step(&self, scale: f64, t: f64, t1: f64, span: f64) -> f64 {
        let cap = span / self.min_steps.max(1) as f64;
        let h = if scale > 0.0 { (self.max_phase / scale).min(cap) } else { cap };
        let rest = t1 - t;
        // avoid a sliver of a final step
        if h >= rest || rest - h < 1e-3 * h { rest } else { h }
    }
}

/// Dense register state, row-major `2^n × 2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityState {
    /// Pure basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let d = dimension(n)?;
        if index >= d {
            return Err(Error::input("basis index out of range"));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        data[index * d + index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, data })
    }

    /// Every qubit at `σ_z = −1`, the ground state of the driver.
    pub fn driver_ground(n: usize) -> Result<Self> {
        Self::basis(n, dimension(n)? - 1)
    }

    pub fn from_pure(n: usize, psi: &[Complex64]) -> Result<Self> {
        let d = dimension(n)?;
        if psi.len() != d {
            return Err(Error::input("state vector has the wrong length"));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[r * d + c] = psi[r] * psi[c].conj();
            }
        }
        Ok(Self { n, data })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let d = dimension(n)?;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            data[i * d + i] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// Largest `|ρ_ij − ρ_ji*|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.data)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.to_matrix().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Tr(ρ H)`.
    pub fn expectation(&self, h: &RegisterHamiltonian) -> f64 {
        let d = self.dim();
        let m = h.to_dense();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                acc += self.data[r * d + c] * m[c * d + r];
            }
        }
        acc.re
    }

    /// Populations of the `σ_z` basis.
    pub fn z_populations(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).collect()
    }

    /// Outcome distribution of a `σ_x` readout on every qubit (bit `0` of
    /// an outcome means `+1`).
    pub fn x_distribution(&self) -> Vec<f64> {
        let d = self.dim();
        let mut rot = self.data.clone();
        hadamard_rho(&mut rot, d);
        let p: Vec<f64> = (0..d).map(|i| rot[i * d + i].re.max(0.0)).collect();
        let s: f64 = p.iter().sum();
        p.into_iter().map(|x| x / s).collect()
    }

    /// Checks the trace, Hermiticity and positivity contracts.
    pub fn validate(&self, trace_tol: f64, herm_tol: f64, eig_tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::numerical(format!("trace drifted to {tr}")));
        }
        let h = self.hermiticity_error();
        if h > herm_tol {
            return Err(Error::numerical(format!("density matrix lost Hermiticity ({h:e})")));
        }
        let e = self.min_eigenvalue();
        if e < -eig_tol {
            return Err(Error::numerical(format!(
                "density matrix has eigenvalue {e:e}; retry with a smaller step (lower max_phase)"
            )));
        }
        Ok(())
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
}

/// Statistics of one propagation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvolveStats {
    pub steps: usize,
    /// Largest `|Tr ρ − 1|` seen after any step.
    pub max_trace_drift: f64,
}

/// Propagates `rho` from `t0` to `t1` under `model`.
pub fn evolve_dense(model: &dyn Model, rho: &mut DensityState, t0: f64, t1: f64, opts: &StepOptions) -> Result<EvolveStats> {
    if rho.n() != model.n() {
        return Err(Error::input("state and model sizes differ"));
    }
    let d = rho.dim();
    let mut stats = EvolveStats::default();
    walk_steps(model, t0, t1, opts, |tm, h| {
        let ham = model.hamiltonian(tm);
        let channels = model.channels(tm);
        step_rho(rho.data_mut(), d, &ham, channels.as_deref(), h);
        stats.steps += 1;
        let tr = rho.trace();
        stats.max_trace_drift = stats.max_trace_drift.max((tr.re - 1.0).abs().max(tr.im.abs()));
        if !tr.re.is_finite() {
            return Err(Error::numerical(format!("state diverged at t = {tm:e}")));
        }
        Ok(())
    })?;
    Ok(stats)
}

/// Calls `step(t_mid, h)` for every step of the grid from `t0` to `t1`.
pub(crate) fn walk_steps(
    model: &dyn Model,
    t0: f64,
    t1: f64,
    opts: &StepOptions,
    mut step: impl FnMut(f64, f64) -> Result<()>,
) -> Result<()> {
    opts.validate()?;
    if !(t1 >= t0) {
        return Err(Error::input("evolution window must be forward in time"));
    }
    let span = t1 - t0;
    let mut t = t0;
    while t < t1 {
        let mut h = opts.next_step(model.hamiltonian(t).frequency_scale(), t, t1, span);
        // refine with the midpoint scale so fast sweeps are not overstepped
        let mid_scale = model.hamiltonian(t + h / 2.0).frequency_scale();
        if mid_scale * h > opts.max_phase * 1.5 {
            h = opts.next_step(mid_scale, t, t1, span);
        }
        step(t + h / 2.0, h)?;
        t = if t1 - (t + h) < 1e-15 * t1.abs().max(span) { t1 } else { t + h };
    }
    Ok(())
}

fn step_rho(rho: &mut [Complex64], d: usize, ham: &RegisterHamiltonian, channels: Option<&[Channel]>, h: f64) {
    let dissipate = |rho: &mut [Complex64]| {
        if let Some(chs) = channels {
            for (k, ch) in chs.iter().enumerate() {
                apply_channel_rho(rho, d, k, ch, h / 2.0);
            }
        }
    };
    let locals: Vec<[Complex64; 4]> = ham.local.iter().map(|&c| local_unitary(c, h / 2.0)).collect();
    dissipate(rho);
    for (k, u) in locals.iter().enumerate() {
        apply_local_rho(rho, d, k, u);
    }
    if !ham.xx.is_empty() {
        hadamard_rho(rho, d);
        apply_diag_rho(rho, d, &phases(&ham.xx_energies(), h));
        hadamard_rho(rho, d);
    }
    for (k, u) in locals.iter().enumerate() {
        apply_local_rho(rho, d, k, u);
    }
    dissipate(rho);
    hermitize(rho, d);
}
