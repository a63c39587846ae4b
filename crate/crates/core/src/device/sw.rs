//! Time-dependent Schrieffer-Wolff coefficients.
//!
//! The generator `S = a(α σ_x + β σ_y + γ σ_z) − h.c.` obeys
//!
//! ```text
//! α' = iω_c α + ω_q β − Θ γ + i g_σ
//! β' = iω_c β − ω_q α
//! γ' = iω_c γ + Θ α + i λ_σ
//! ```
//!
//! which is integrated with classical RK4 on sub-steps of the output grid.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ResonatorParams;
use crate::error::{Error, Result};

/// Coefficient magnitude above which the dispersive expansion is doubtful.
pub const SW_WARN_MAGNITUDE: f64 = 0.3;

/// Largest accepted `ω_c · step` of the integrator.
const STEP_GUARD: f64 = 0.1;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-qubit coefficient series on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SwInputs {
    pub times: Vec<f64>,
    pub omega_q: Vec<f64>,
    pub g: Vec<f64>,
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
}

impl SwInputs {
    /// Constant coefficients over `times`.
    pub fn constant(times: Vec<f64>, omega_q: f64, g: f64, lambda: f64, theta: f64) -> Self {
        let n = times.len();
        Self {
            times,
            omega_q: vec![omega_q; n],
            g: vec![g; n],
            lambda: vec![lambda; n],
            theta: vec![theta; n],
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n == 0 {
            return Err(Error::config("empty time grid"));
        }
        if [self.omega_q.len(), self.g.len(), self.lambda.len(), self.theta.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::config("coefficient series do not match the time grid"));
        }
        let all = self.times.iter().chain(&self.omega_q).chain(&self.g).chain(&self.lambda).chain(&self.theta);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::config("non-finite coefficient in SW inputs"));
        }
        if n > 1 {
            let dt = self.times[1] - self.times[0];
            if dt <= 0.0 {
                return Err(Error::config("time grid must be increasing"));
            }
            for w in self.times.windows(2) {
                if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
                    return Err(Error::config("time grid must be uniform"));
                }
            }
        }
        Ok(())
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwOptions {
    /// Explicit integration step; must divide the grid step and satisfy
    /// `ω_c · step < 0.1`. When absent the largest step with
    /// `ω_c · step ≤ max_phase` is used.
    pub step: Option<f64>,
    pub max_phase: f64,
    /// Initial `(α, β, γ)`; the static fixed point when absent.
    #[serde(skip)]
    pub initial: Option<[Complex64; 3]>,
}

impl Default for SwOptions {
    fn default() -> Self {
        Self { step: None, max_phase: 0.05, initial: None }
    }
}

/// `(α, β, γ)` per grid time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwCoefficients {
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    pub gamma: Vec<Complex64>,
}

impl SwCoefficients {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `|A| = √(|α|² + |β|² + |γ|²)` at grid index `i`.
    pub fn magnitude(&self, i: usize) -> f64 {
        (self.alpha[i].norm_sqr() + self.beta[i].norm_sqr() + self.gamma[i].norm_sqr()).sqrt()
    }
}

fn system(omega_c: f64, wq: f64, theta: f64) -> Matrix3<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let d = I * omega_c;
    Matrix3::new(
        d, c(wq), c(-theta),
        c(-wq), d, c(0.0),
        c(theta), c(0.0), d,
    )
}

fn forcing(g: f64, lambda: f64) -> Vector3<Complex64> {
    Vector3::new(I * g, Complex64::new(0.0, 0.0), I * lambda)
}

/// Static solution of the coefficient equations, `x* = −M⁻¹ b`.
///
/// For `Θ = 0` this is `α = g ω_c/(ω_q² − ω_c²)`, `β = −i ω_q α/ω_c`,
/// `γ = −λ/ω_c`.
pub fn static_fixed_point(omega_c: f64, omega_q: f64, g: f64, lambda: f64, theta: f64) -> Result<[Complex64; 3]> {
    let m = system(omega_c, omega_q, theta);
    let x = m
        .lu()
        .solve(&(-forcing(g, lambda)))
        .ok_or_else(|| Error::numerical("resonant qubit: SW fixed point does not exist"))?;
    Ok([x[0], x[1], x[2]])
}

/// Integrates the coefficient equations over the grid of `inputs`.
pub fn solve_sw_ode(inputs: &SwInputs, r: &ResonatorParams, opts: &SwOptions) -> Result<SwCoefficients> {
    inputs.validate()?;
    r.validate()?;
    let n = inputs.times.len();
    let x0 = match opts.initial {
        Some(x) => x,
        None => static_fixed_point(r.omega_c, inputs.omega_q[0], inputs.g[0], inputs.lambda[0], inputs.theta[0])?,
    };
    let mut x = Vector3::new(x0[0], x0[1], x0[2]);
    let mut out = SwCoefficients {
        alpha: Vec::with_capacity(n),
        beta: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
    };
    let push = |x: &Vector3<Complex64>, out: &mut SwCoefficients| {
        out.alpha.push(x[0]);
        out.beta.push(x[1]);
        out.gamma.push(x[2]);
    };
    push(&x, &mut out);
    if n == 1 {
        return Ok(out);
    }
    let dt = inputs.times[1] - inputs.times[0];
    let sub = match opts.step {
        Some(h) => {
            if !(h > 0.0) || r.omega_c * h >= STEP_GUARD {
                return Err(Error::config(format!(
                    "SW step {h:e} s violates ω_c·step < {STEP_GUARD} (ω_c = {:e} rad/s)",
                    r.omega_c
                )));
            }
            let m = (dt / h).round().max(1.0);
            if ((dt / m) - h).abs() > 1e-9 * h {
                return Err(Error::config("SW step must divide the grid step"));
            }
            m as usize
        }
        None => {
            if !(opts.max_phase > 0.0 && opts.max_phase < STEP_GUARD) {
                return Err(Error::config(format!("max_phase must lie in (0, {STEP_GUARD})")));
            }
            (r.omega_c * dt / opts.max_phase).ceil().max(1.0) as usize
        }
    };
    let h = dt / sub as f64;
    let wc = r.omega_c;
    for k in 0..n - 1 {
        let lerp = |v: &[f64], s: f64| v[k] + (v[k + 1] - v[k]) * s;
        let rhs = |s: f64, x: &Vector3<Complex64>| {
            let m = system(wc, lerp(&inputs.omega_q, s), lerp(&inputs.theta, s));
            m * x + forcing(lerp(&inputs.g, s), lerp(&inputs.lambda, s))
        };
        for j in 0..sub {
            let s0 = j as f64 / sub as f64;
            let sm = (j as f64 + 0.5) / sub as f64;
            let s1 = (j + 1) as f64 / sub as f64;
            let k1 = rhs(s0, &x);
            let k2 = rhs(sm, &(x + k1 * Complex64::from(h / 2.0)));
            let k3 = rhs(sm, &(x + k2 * Complex64::from(h / 2.0)));
            let k4 = rhs(s1, &(x + k3 * Complex64::from(h)));
            x += (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0);
        }
        if !x.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::numerical(format!("SW coefficients diverged at t = {:e} s", inputs.times[k + 1])));
        }
        push(&x, &mut out);
    }
    if let Some(i) = (0..n).find(|&i| out.magnitude(i) > SW_WARN_MAGNITUDE) {
        log::warn!(
            "SW coefficient magnitude {:.3} exceeds {SW_WARN_MAGNITUDE} at t = {:e} s; dispersive regime is doubtful",
            out.magnitude(i),
            inputs.times[i]
        );
    }
    Ok(out)
}

/// Dispersive exchange `J_kj = Re(α_k) g_j + Re(α_j) g_k` at one time,
/// zero diagonal.
///
/// At the static fixed point this is
/// `(g_k g_j / 2)(1/Δ_k + 1/Δ_j − 1/Σ_k − 1/Σ_j)` with `Δ = ω_q − ω_c` and
/// `Σ = ω_q + ω_c`: the familiar `g_k g_j (1/Δ_k + 1/Δ_j)/2` plus the
/// counter-rotating corrections.
pub fn ising_couplings(alpha: &[Complex64], g: &[f64]) -> Result<DMatrix<f64>> {
    let n = alpha.len();
    if g.len() != n {
        return Err(Error::input("one coupling per SW coefficient required"));
    }
    Ok(DMatrix::from_fn(n, n, |k, j| {
        if k == j {
            0.0
        } else {
            alpha[k].re * g[j] + alpha[j].re * g[k]
        }
    }))
}
