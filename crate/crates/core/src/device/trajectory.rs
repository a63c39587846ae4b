//! Bias trajectories and the per-qubit device parameters derived from them.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sw::{ising_couplings, solve_sw_ode, SwCoefficients, SwInputs, SwOptions};
use super::{dipole_couplings, frequency_slope, qubit_frequency, NoiseParams, QubitParams, ResonatorParams};
use crate::error::{Error, Result};
use crate::ising::{IsingProblem, Schedule, Shape};

/// Per-qubit bias `ε_k` sampled on the uniform grid `t_i = i·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTrajectory {
    pub dt: f64,
    /// `values[k][i]` is `ε_k(t_i)`.
    pub values: Vec<Vec<f64>>,
}

impl BiasTrajectory {
    pub fn new(dt: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config("bias grid step must be positive"));
        }
        let len = values.first().map_or(0, Vec::len);
        if len == 0 || values.iter().any(|v| v.len() != len) {
            return Err(Error::config("bias series must be non-empty and of equal length"));
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::config("bias values must be finite"));
        }
        Ok(Self { dt, values })
    }

    /// `ε_k(t) = eps_max · f(t)` for every qubit, `f` the driver envelope.
    pub fn from_schedule(spec: &BiasSpec, schedule: &Schedule, n_qubits: usize, points: usize) -> Result<Self> {
        let points = points.max(2);
        let dt = schedule.t_f / (points - 1) as f64;
        let env = Schedule { shape: spec.shape.unwrap_or(schedule.shape), ..*schedule };
        let series: Vec<f64> = (0..points).map(|i| spec.eps_max * env.envelopes(i as f64 / (points - 1) as f64).0).collect();
        Self::new(dt, vec![series; n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.values.len()
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| i as f64 * self.dt).collect()
    }

    /// Grid index of `t`, rejecting times off the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt;
        let i = x.round();
        if !(i >= 0.0 && (i as usize) < self.len() && (x - i).abs() <= 1e-9) {
            return Err(Error::input(format!("t = {t:e} s is not on the bias grid")));
        }
        Ok(i as usize)
    }

    /// `dε_k/dt` at grid index `i`: central differences inside, one-sided
    /// at the ends.
    pub fn slope(&self, k: usize, i: usize) -> f64 {
        let v = &self.values[k];
        let n = v.len();
        if n < 2 {
            return 0.0;
        }
        if i == 0 {
            (v[1] - v[0]) / self.dt
        } else if i == n - 1 {
            (v[n - 1] - v[n - 2]) / self.dt
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * self.dt)
        }
    }
}

/// `Θ_k(t) = dφ/dt = −2γ ε̇ / (ε² + 4γ²)`, the rotation rate of the qubit
/// frame. `t` must lie on the grid.
pub fn diabatic_theta(traj: &BiasTrajectory, q: &QubitParams, k: usize, t: f64) -> Result<f64> {
    if k >= traj.n_qubits() {
        return Err(Error::input(format!("qubit {k} outside trajectory")));
    }
    let i = traj.index_of(t)?;
    Ok(theta_at(traj, q, k, i))
}

fn theta_at(traj: &BiasTrajectory, q: &QubitParams, k: usize, i: usize) -> f64 {
    let eps = traj.values[k][i];
    -2.0 * q.gamma * traj.slope(k, i) / (eps * eps + 4.0 * q.gamma * q.gamma)
}

/// Relaxation, thermal excitation and pure dephasing rates (1/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rates {
    pub relax: f64,
    pub excite: f64,
    pub dephase: f64,
}

/// Instantaneous rates from the SW frame:
/// relaxation `κ|α + iβ|² + Γ_phonon` (the Purcell part reduces to
/// `κ(g/Δ)²` at the static point), dephasing `S (∂ω/∂ε)² + κ|γ_sw|²`.
pub fn lindblad_rates(sw: [Complex64; 3], slope: f64, omega_q: f64, noise: &NoiseParams, r: &ResonatorParams) -> Rates {
    let [a, b, c] = sw;
    let purcell = r.kappa * (a + Complex64::i() * b).norm_sqr();
    let down = purcell + noise.phonon_relaxation;
    let n_th = noise.occupation(omega_q);
    Rates {
        relax: down * (n_th + 1.0),
        excite: down * n_th,
        dephase: noise.charge_noise * slope * slope + r.kappa * c.norm_sqr(),
    }
}

/// Output grid of the device command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_f: f64,
    pub dt: f64,
}

impl GridSpec {
    pub fn points(&self) -> Result<usize> {
        if !(self.t_f > 0.0 && self.dt > 0.0 && self.t_f.is_finite()) {
            return Err(Error::config("grid needs positive t_f and dt"));
        }
        let steps = self.t_f / self.dt;
        if (steps - steps.round()).abs() > 1e-6 || steps.round() > 1e7 {
            return Err(Error::config("grid dt must divide t_f (and give at most 1e7 steps)"));
        }
        Ok(steps.round() as usize + 1)
    }
}

/// How the bias follows the schedule: `ε(t) = eps_max · f(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasSpec {
    /// Bias at `t = 0` (rad/s), deep in memory mode.
    pub eps_max: f64,
    /// Envelope shape; the schedule's own shape when absent.
    #[serde(default)]
    pub shape: Option<Shape>,
}

impl Default for BiasSpec {
    fn default() -> Self {
        Self { eps_max: 8.0 * QubitParams::default().gamma, shape: None }
    }
}

/// Device configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    /// One entry (replicated over the register) or one per qubit.
    pub qubits: Vec<QubitParams>,
    #[serde(default)]
    pub resonator: ResonatorParams,
    #[serde(default)]
    pub noise: NoiseParams,
    pub grid: GridSpec,
    #[serde(default)]
    pub bias: BiasSpec,
    /// Output grid points used when the trajectory follows an anneal.
    #[serde(default = "default_anneal_points")]
    pub anneal_points: usize,
}

fn default_anneal_points() -> usize {
    1001
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            qubits: vec![QubitParams::default()],
            resonator: ResonatorParams::default(),
            noise: NoiseParams::default(),
            grid: GridSpec { t_f: 50e-6, dt: 50e-9 },
            bias: BiasSpec::default(),
            anneal_points: default_anneal_points(),
        }
    }
}

impl DeviceConfig {
    /// Parameters of each of `n` qubits.
    pub fn qubit_list(&self, n: usize) -> Result<Vec<QubitParams>> {
        let list = match self.qubits.len() {
            1 => vec![self.qubits[0]; n],
            m if m == n => self.qubits.clone(),
            m => return Err(Error::config(format!("device lists {m} qubits, register has {n}"))),
        };
        for q in &list {
            q.validate()?;
        }
        Ok(list)
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::config("device needs at least one qubit entry"));
        }
        for q in &self.qubits {
            q.validate()?;
        }
        self.resonator.validate()?;
        self.noise.validate()?;
        if !self.bias.eps_max.is_finite() {
            return Err(Error::config("eps_max must be finite"));
        }
        Ok(())
    }

    /// Trajectory for an anneal following `schedule` on `n` qubits.
    pub fn trajectory_for(&self, schedule: &Schedule, n: usize) -> Result<DeviceTrajectory> {
        self.validate()?;
        let bias = BiasTrajectory::from_schedule(&self.bias, schedule, n, self.anneal_points)?;
        DeviceTrajectory::build(&bias, &self.qubit_list(n)?, &self.resonator, &self.noise, &SwOptions::default())
    }

    /// Trajectory on the configured output grid, with the bias envelope of
    /// a `shape` schedule over `grid.t_f`.
    pub fn trajectory_on_grid(&self, n: usize, shape: Shape) -> Result<DeviceTrajectory> {
        self.validate()?;
        let points = self.grid.points()?;
        let schedule = Schedule::new(self.grid.t_f, shape)?;
        let bias = BiasTrajectory::from_schedule(&self.bias, &schedule, n, points)?;
        DeviceTrajectory::build(&bias, &self.qubit_list(n)?, &self.resonator, &self.noise, &SwOptions::default())
    }
}

/// Everything the dynamics needs about one qubit, on the shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitTrack {
    pub eps: Vec<f64>,
    pub omega: Vec<f64>,
    pub theta: Vec<f64>,
    pub g: Vec<f64>,
    pub lambda: Vec<f64>,
    pub sw: SwCoefficients,
    pub rates: Vec<Rates>,
}

/// Per-qubit device parameters over the anneal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceTrajectory {
    pub times: Vec<f64>,
    pub qubits: Vec<QubitTrack>,
}

/// Device values of one qubit at an arbitrary time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QubitSnapshot {
    pub omega: f64,
    pub theta: f64,
    pub g: f64,
    pub rates: Rates,
    pub alpha_re: f64,
}

impl DeviceTrajectory {
    /// Derives frequencies, couplings, `Θ`, SW coefficients and rates.
    /// Qubits with identical parameters and bias share one ODE solve.
    pub fn build(
        bias: &BiasTrajectory,
        qubits: &[QubitParams],
        r: &ResonatorParams,
        noise: &NoiseParams,
        opts: &SwOptions,
    ) -> Result<Self> {
        if qubits.len() != bias.n_qubits() {
            return Err(Error::config("one qubit parameter set per bias series required"));
        }
        r.validate()?;
        noise.validate()?;
        let times = bias.times();
        let n = qubits.len();
        // first qubit index with identical inputs
        let rep: Vec<usize> = (0..n)
            .map(|k| (0..k).find(|&j| qubits[j] == qubits[k] && bias.values[j] == bias.values[k]).unwrap_or(k))
            .collect();
        let unique: Vec<usize> = (0..n).filter(|&k| rep[k] == k).collect();
        let solved: Vec<(usize, QubitTrack)> = unique
            .par_iter()
            .map(|&k| Ok((k, Self::track(bias, k, &qubits[k], &times, r, noise, opts)?)))
            .collect::<Result<_>>()?;
        let qubits = rep
            .iter()
            .map(|&k| solved.iter().find(|(j, _)| *j == k).expect("solved").1.clone())
            .collect();
        Ok(Self { times, qubits })
    }

    fn track(
        bias: &BiasTrajectory,
        k: usize,
        q: &QubitParams,
        times: &[f64],
        r: &ResonatorParams,
        noise: &NoiseParams,
        opts: &SwOptions,
    ) -> Result<QubitTrack> {
        q.validate()?;
        let eps = bias.values[k].clone();
        let len = eps.len();
        let omega: Vec<f64> = eps.iter().map(|&e| qubit_frequency(e, q)).collect();
        let (g, lambda): (Vec<f64>, Vec<f64>) = eps.iter().map(|&e| dipole_couplings(e, q)).unzip();
        let theta: Vec<f64> = (0..len).map(|i| theta_at(bias, q, k, i)).collect();
        let inputs = SwInputs { times: times.to_vec(), omega_q: omega.clone(), g: g.clone(), lambda: lambda.clone(), theta: theta.clone() };
        let sw = solve_sw_ode(&inputs, r, opts)?;
        let rates = (0..len)
            .map(|i| {
                let coeff = [sw.alpha[i], sw.beta[i], sw.gamma[i]];
                lindblad_rates(coeff, frequency_slope(eps[i], q), omega[i], noise, r)
            })
            .collect();
        Ok(QubitTrack { eps, omega, theta, g, lambda, sw, rates })
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_f(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// `J_kj` at grid index `i`.
    pub fn couplings(&self, i: usize) -> DMatrix<f64> {
        let alpha: Vec<Complex64> = self.qubits.iter().map(|q| q.sw.alpha[i]).collect();
        let g: Vec<f64> = self.qubits.iter().map(|q| q.g[i]).collect();
        ising_couplings(&alpha, &g).expect("lengths match")
    }

    /// Linear interpolation of every qubit's values at time `t`
    /// (clamped to the grid).
    pub fn snapshot(&self, t: f64) -> Vec<QubitSnapshot> {
        let n = self.len();
        let (i, s) = if n < 2 {
            (0, 0.0)
        } else {
            let dt = self.times[1] - self.times[0];
            let x = (t / dt).clamp(0.0, (n - 1) as f64);
            let i = (x.floor() as usize).min(n - 2);
            (i, x - i as f64)
        };
        let j = (i + 1).min(n - 1);
        let mix = |a: f64, b: f64| a + (b - a) * s;
        self.qubits
            .iter()
            .map(|q| QubitSnapshot {
                omega: mix(q.omega[i], q.omega[j]),
                theta: mix(q.theta[i], q.theta[j]),
                g: mix(q.g[i], q.g[j]),
                alpha_re: mix(q.sw.alpha[i].re, q.sw.alpha[j].re),
                rates: Rates {
                    relax: mix(q.rates[i].relax, q.rates[j].relax),
                    excite: mix(q.rates[i].excite, q.rates[j].excite),
                    dephase: mix(q.rates[i].dephase, q.rates[j].dephase),
                },
            })
            .collect()
    }

    /// CSV with `t` followed by `omega_k, theta_k, g_k, lambda_k, relax_k,
    /// deph_k` for every qubit `k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for k in 0..self.n_qubits() {
            for name in ["omega", "theta", "g", "lambda", "relax", "deph"] {
                write!(out, ",{name}_{k}").expect("write to string");
            }
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            write!(out, "{t}").expect("write to string");
            for q in &self.qubits {
                let row = [q.omega[i], q.theta[i], q.g[i], q.lambda[i], q.rates[i].relax, q.rates[i].dephase];
                for v in row {
                    write!(out, ",{v}").expect("write to string");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Compares the couplings the device realizes at the end of the anneal
    /// with the couplings of `target` (both in rad/s).
    pub fn coupling_report(&self, target: &IsingProblem) -> Result<CouplingReport> {
        let n = self.n_qubits();
        if target.n() != n {
            return Err(Error::input("target and device sizes differ"));
        }
        let dev = self.couplings(self.len() - 1);
        let (mut dot, mut dd, mut tt) = (0.0, 0.0, 0.0);
        let mut max_dev: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (target.coupling(i, j), dev[(i, j)]);
                dot += a * b;
                dd += b * b;
                tt += a * a;
                max_dev = max_dev.max(b.abs());
            }
        }
        let scale = if dd > 0.0 { dot / dd } else { 0.0 };
        let residual = if tt > 0.0 { ((tt - 2.0 * scale * dot + scale * scale * dd).max(0.0) / tt).sqrt() } else { 0.0 };
        Ok(CouplingReport { best_scale: scale, relative_residual: residual, max_device_coupling: max_dev, max_target_coupling: target.coupling_list().iter().fold(0.0, |m, c| m.max(c.2.abs())) })
    }
}

/// Discrepancy between target couplings and the device-realized ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    /// Least-squares factor `c` in `J_target ≈ c · J_device`.
    pub best_scale: f64,
    /// `‖J_target − c J_device‖ / ‖J_target‖` over the upper triangle.
    pub relative_residual: f64,
    pub max_device_coupling: f64,
    pub max_target_coupling: f64,
}
