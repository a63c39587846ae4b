//! Spin-qubit cQED device physics.
//!
//! A single flopping-mode qubit is a one-electron double quantum dot with
//! bias `ε`, tunnel energy `γ` and a spin texture `(α_s, α_as)`:
//!
//! ```text
//! H = ε/2 τ_z + γ τ_x + α_s/2 σ_z + α_as/2 σ_x τ_z
//! ```
//!
//! Its two lowest levels form the qubit. The resonator couples to `τ_z`,
//! which in the qubit frame becomes a transverse `g_σ σ_x` and a
//! longitudinal `λ_σ σ_z` term. Every energy is an angular frequency in
//! rad/s (ħ = 1).

mod sw;
mod trajectory;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use sw::{
    ising_couplings, solve_sw_ode, static_fixed_point, SwCoefficients, SwInputs, SwOptions,
    SW_WARN_MAGNITUDE,
};
pub use trajectory::{
    diabatic_theta, lindblad_rates, BiasSpec, BiasTrajectory, CouplingReport, DeviceConfig,
    DeviceTrajectory, GridSpec, QubitSnapshot, QubitTrack, Rates,
};

/// Converts a frequency in Hz to an angular frequency.
pub fn hz(f: f64) -> f64 {
    2.0 * PI * f
}

/// Single-qubit parameters (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    /// DQD tunnel energy `γ`.
    pub gamma: f64,
    /// Symmetric magnetic energy `α_s`.
    pub alpha_s: f64,
    /// Anti-symmetric magnetic energy `α_as`.
    pub alpha_as: f64,
    /// Bare electron-photon coupling `g0`.
    pub g0: f64,
}

impl Default for QubitParams {
    fn default() -> Self {
        Self { gamma: hz(10e9), alpha_s: hz(4e9), alpha_as: hz(1e9), g0: hz(50e6) }
    }
}

impl QubitParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma, self.alpha_s, self.alpha_as, self.g0].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::config("qubit parameters must be finite"));
        }
        if self.gamma <= 0.0 {
            return Err(Error::config("tunnel energy gamma must be positive"));
        }
        if self.alpha_s <= 0.0 {
            return Err(Error::config("alpha_s must be positive"));
        }
        if self.g0 < 0.0 {
            return Err(Error::config("g0 must be non-negative"));
        }
        Ok(())
    }

    /// Orbital splitting `√(ε² + 4γ²)`.
    pub fn orbital_splitting(&self, eps: f64) -> f64 {
        eps.hypot(2.0 * self.gamma)
    }

    /// Orbital mixing angle `φ` with `cos φ = ε/Ω_orb`, `sin φ = 2γ/Ω_orb`.
    pub fn mixing_angle(&self, eps: f64) -> f64 {
        (2.0 * self.gamma).atan2(eps)
    }

    /// Spin-orbit admixture `α_as / √(α_as² + (Ω_orb − α_s)²)`.
    pub fn admixture(&self, eps: f64) -> f64 {
        let detuning = self.orbital_splitting(eps) - self.alpha_s;
        if self.alpha_as == 0.0 {
            return 0.0;
        }
        self.alpha_as / self.alpha_as.hypot(detuning)
    }

    fn k_l(&self, eps: f64) -> (f64, f64) {
        let m2 = self.alpha_s * self.alpha_s + self.alpha_as * self.alpha_as;
        let k = (eps * eps + 4.0 * self.gamma * self.gamma + m2) / 4.0;
        let l = (eps * eps * m2 / 4.0 + self.gamma * self.gamma * self.alpha_s * self.alpha_s).sqrt();
        (k, l)
    }
}

/// The four eigenvalues of the single-qubit Hamiltonian in ascending order:
/// `±√(K ± L)` with `K = (ε² + 4γ² + α_s² + α_as²)/4` and
/// `L = √(ε²(α_s² + α_as²)/4 + γ²α_s²)`.
pub fn qubit_spectrum(eps: f64, q: &QubitParams) -> [f64; 4] {
    let (k, l) = q.k_l(eps);
    let hi = (k + l).sqrt();
    let lo = (k - l).max(0.0).sqrt();
    [-hi, -lo, lo, hi]
}

/// Qubit frequency: the splitting of the two lowest levels,
/// `√(K + L) − √(K − L)`.
///
/// At large `|ε|` the orbit freezes and the frequency tends to
/// `√(α_s² + α_as²)`, the spin splitting in the local field of one dot.
pub fn qubit_frequency(eps: f64, q: &QubitParams) -> f64 {
    let [a, b, _, _] = qubit_spectrum(eps, q);
    b - a
}

/// `∂ω_q/∂ε`, analytic.
pub fn frequency_slope(eps: f64, q: &QubitParams) -> f64 {
    let (k, l) = q.k_l(eps);
    let m2 = q.alpha_s * q.alpha_s + q.alpha_as * q.alpha_as;
    let dk = eps / 2.0;
    let dl = if l > 0.0 { eps * m2 / (4.0 * l) } else { 0.0 };
    let hi = (k + l).sqrt();
    let lo = (k - l).max(0.0).sqrt();
    let d_hi = (dk + dl) / (2.0 * hi);
    let d_lo = if lo > 0.0 { (dk - dl) / (2.0 * lo) } else { 0.0 };
    d_hi - d_lo
}

/// Transverse and longitudinal dipole couplings `(g_σ, λ_σ)`:
/// `g_σ = g0 sin φ η`, `λ_σ = g0 cos φ sin φ η` with `η` the spin-orbit
/// admixture.
pub fn dipole_couplings(eps: f64, q: &QubitParams) -> (f64, f64) {
    let phi = q.mixing_angle(eps);
    let (s, c) = phi.sin_cos();
    let eta = q.admixture(eps);
    let g = q.g0 * s * eta;
    // cos φ is not exactly zero at ε = 0 in floating point
    let lambda = if eps == 0.0 { 0.0 } else { q.g0 * c * s * eta };
    (g, lambda)
}

/// Resonator parameters (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    pub omega_c: f64,
    pub kappa: f64,
}

impl Default for ResonatorParams {
    fn default() -> Self {
        Self { omega_c: hz(5e9), kappa: hz(1e6) }
    }
}

impl ResonatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c.is_finite() && self.omega_c > 0.0) {
            return Err(Error::config("omega_c must be positive"));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::config("kappa must be non-negative"));
        }
        Ok(())
    }
}

/// Incoherent noise scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Charge-noise scale `S` (1/s): dephasing `S (∂ω/∂ε)²`.
    pub charge_noise: f64,
    /// Phonon and contact relaxation rate (1/s), added to the Purcell rate.
    pub phonon_relaxation: f64,
    /// Bath temperature in kelvin; zero disables thermal excitation.
    #[serde(default)]
    pub temperature: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { charge_noise: 2.0e4, phonon_relaxation: 4.0e3, temperature: 0.0 }
    }
}

impl NoiseParams {
    pub fn quiet() -> Self {
        Self { charge_noise: 0.0, phonon_relaxation: 0.0, temperature: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.charge_noise, self.phonon_relaxation, self.temperature]
            .iter()
            .all(|x| x.is_finite() && *x >= 0.0);
        if !ok {
            return Err(Error::config("noise parameters must be finite and non-negative"));
        }
        Ok(())
    }

    /// Thermal occupation at angular frequency `omega`.
    pub fn occupation(&self, omega: f64) -> f64 {
        const HBAR_OVER_KB: f64 = 7.638_232_577_577_646e-12; // K·s
        if self.temperature <= 0.0 {
            return 0.0;
        }
        1.0 / ((HBAR_OVER_KB * omega / self.temperature).exp() - 1.0)
    }
}
