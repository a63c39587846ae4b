//! Constant-velocity Kalman filter in the plane. State `[x, y, vx, vy]`.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest measurement variance used, so a noise-free sensor still gives
/// a positive-definite covariance.
pub const MEASUREMENT_VARIANCE_FLOOR: f64 = 1e-8;

/// χ² quantile (2 degrees of freedom, 0.99).
pub const DEFAULT_GATE: f64 = 9.21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KalmanState {
    pub x: Vector4<f64>,
    pub p: Matrix4<f64>,
}

/// Innovation statistics of one measurement against a predicted state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Innovation {
    pub nu: Vector2<f64>,
    pub s: Matrix2<f64>,
    /// Squared Mahalanobis distance `νᵀ S⁻¹ ν`.
    pub distance2: f64,
    /// `ln N(ν; 0, S)`.
    pub log_likelihood: f64,
}

fn h() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

fn r(sigma_m: f64) -> Matrix2<f64> {
    Matrix2::identity() * (sigma_m * sigma_m).max(MEASUREMENT_VARIANCE_FLOOR)
}

fn check_spd4(p: &Matrix4<f64>) -> Result<()> {
    let asym = (p - p.transpose()).abs().max();
    if asym > 1e-9 * p.abs().max().max(1.0) || p.cholesky().is_none() {
        return Err(Error::numerical("track covariance is not symmetric positive-definite"));
    }
    Ok(())
}

impl KalmanState {
    /// Track started from one measurement: position variance `σ_m²`,
    /// zero-mean velocity with standard deviation `sigma_v` per axis.
    pub fn birth(z: [f64; 2], sigma_m: f64, sigma_v: f64) -> Self {
        let pos = (sigma_m * sigma_m).max(MEASUREMENT_VARIANCE_FLOOR);
        let vel = (sigma_v * sigma_v).max(MEASUREMENT_VARIANCE_FLOOR);
        Self {
            x: Vector4::new(z[0], z[1], 0.0, 0.0),
            p: Matrix4::from_diagonal(&Vector4::new(pos, pos, vel, vel)),
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x[0], self.x[1]]
    }
}

/// Default process-noise intensity `(0.1 σ_m / Δt²)²` per axis.
pub fn default_process_noise(sigma_m: f64, dt: f64) -> f64 {
    (0.1 * sigma_m / (dt * dt)).powi(2)
}

/// Prediction over `dt` with white-acceleration noise of variance `q`.
pub fn kalman_predict(s: &KalmanState, dt: f64, q: f64) -> Result<KalmanState> {
    check_spd4(&s.p)?;
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    let (a, b, c) = (dt.powi(4) / 4.0, dt.powi(3) / 2.0, dt * dt);
    #[rustfmt::skip]
    let qm = Matrix4::new(
        a, 0.0, b, 0.0,
        0.0, a, 0.0, b,
        b, 0.0, c, 0.0,
        0.0, b, 0.0, c,
    ) * q;
    let p = f * s.p * f.transpose() + qm;
    Ok(KalmanState { x: f * s.x, p: (p + p.transpose()) * 0.5 })
}

/// Innovation of `z` against the (predicted) state.
pub fn innovation(s: &KalmanState, z: [f64; 2], sigma_m: f64) -> Result<Innovation> {
    let hm = h();
    let nu = Vector2::new(z[0], z[1]) - hm * s.x;
    let sm = hm * s.p * hm.transpose() + r(sigma_m);
    let chol = sm.cholesky().ok_or_else(|| Error::numerical("innovation covariance is not positive-definite"))?;
    let distance2 = nu.dot(&chol.solve(&nu));
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let log_likelihood = -(2.0 * std::f64::consts::PI).ln() - 0.5 * log_det - 0.5 * distance2;
    Ok(Innovation { nu, s: sm, distance2, log_likelihood })
}

/// Measurement update (Joseph form).
pub fn kalman_update(s: &KalmanState, z: [f64; 2], sigma_m: f64) -> Result<(KalmanState, Innovation)> {
    check_spd4(&s.p)?;
    let inn = innovation(s, z, sigma_m)?;
    let hm = h();
    let s_inv = inn.s.try_inverse().ok_or_else(|| Error::numerical("singular innovation covariance"))?;
    let k = s.p * hm.transpose() * s_inv;
    let x = s.x + k * inn.nu;
    let ikh = Matrix4::identity() - k * hm;
    let p = ikh * s.p * ikh.transpose() + k * r(sigma_m) * k.transpose();
    let p = (p + p.transpose()) * 0.5;
    check_spd4(&p)?;
    Ok((KalmanState { x, p }, inn))
}

/// True iff the squared Mahalanobis distance of `z` is within `threshold`.
pub fn gate(s: &KalmanState, z: [f64; 2], sigma_m: f64, threshold: f64) -> Result<bool> {
    Ok(innovation(s, z, sigma_m)?.distance2 <= threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn noise_free_update_collapses_onto_measurement() {
        let s = KalmanState::birth([0.0, 0.0], 10.0, 5.0);
        let pred = kalman_predict(&s, 1.0, 0.0).unwrap();
        let (post, _) = kalman_update(&pred, [3.0, -4.0], 0.0).unwrap();
        assert!((post.x[0] - 3.0).abs() < 1e-6 && (post.x[1] + 4.0).abs() < 1e-6);
        assert!(post.p[(0, 0)] <= 1.01 * MEASUREMENT_VARIANCE_FLOOR);
    }

    #[test]
    fn repeated_measurements_converge() {
        let sigma = 2.0;
        let mut s = KalmanState::birth([1.0, 1.0], sigma, 1e-3);
        s.p[(2, 2)] = 1e-12;
        s.p[(3, 3)] = 1e-12;
        for k in 2..=50usize {
            let (post, _) = kalman_update(&s, [0.0, 0.0], sigma).unwrap();
            s = post;
            // scalar closed form: mean of k samples (first at 1, rest at 0)
            let expected = 1.0 / k as f64;
            assert!((s.x[0] - expected).abs() < 1e-6, "{k}: {}", s.x[0]);
            assert!(s.x[0].abs() <= sigma / (k as f64).sqrt());
            assert!((s.p[(0, 0)] - sigma * sigma / k as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn gate_cases() {
        let s = KalmanState::birth([0.0, 0.0], 1.0, 1.0);
        assert!(gate(&s, [0.0, 0.0], 1.0, DEFAULT_GATE).unwrap());
        assert!(!gate(&s, [100.0 * 2f64.sqrt(), 0.0], 1.0, DEFAULT_GATE).unwrap());
        assert!(gate(&s, [1e6, -1e6], 1.0, f64::INFINITY).unwrap());
    }

    #[test]
    fn likelihood_prefers_the_mean() {
        let s = KalmanState::birth([0.0, 0.0], 1.0, 1.0);
        let at_mean = innovation(&s, [0.0, 0.0], 1.0).unwrap();
        let off = innovation(&s, [3.0 * 2f64.sqrt(), 0.0], 1.0).unwrap();
        assert!(at_mean.log_likelihood > off.log_likelihood);
        // S = 2 I, so ln N(0) = −ln(2π·2)
        assert!((at_mean.log_likelihood + (4.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_spd() {
        let mut s = KalmanState::birth([0.0, 0.0], 1.0, 1.0);
        s.p[(0, 0)] = -1.0;
        assert!(matches!(kalman_predict(&s, 1.0, 0.0), Err(Error::Numerical(_))));
        assert!(kalman_update(&s, [0.0, 0.0], 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn predict_keeps_spd(
            sm in 0.0f64..50.0,
            sv in 0.1f64..100.0,
            dt in 0.01f64..10.0,
            q in 0.0f64..10.0,
            x in -1e3f64..1e3,
        ) {
            let s = KalmanState::birth([x, -x], sm, sv);
            let p = kalman_predict(&s, dt, q).unwrap();
            prop_assert!(p.p.cholesky().is_some());
            prop_assert!((p.p - p.p.transpose()).abs().max() == 0.0);
            let (u, _) = kalman_update(&p, [x + 1.0, -x], sm).unwrap();
            prop_assert!(u.p.cholesky().is_some());
        }
    }
}
