//! Register operators and the kernels that apply them to flat state arrays.
//!
//! Basis index bit `k` describes qubit `k`: `0` is `σ_z = +1` (excited under
//! the driver), `1` is `σ_z = −1`. In the `σ_x` basis bit `0` is `|+⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `H = Σ_k (x_k σ_x + y_k σ_y + z_k σ_z) + Σ J_kj σ_x^k σ_x^j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegisterHamiltonian {
    /// `[x, y, z]` per qubit.
    pub local: Vec<[f64; 3]>,
    /// `(k, j, J)` with `k < j`.
    pub xx: Vec<(usize, usize, f64)>,
}

impl RegisterHamiltonian {
    pub fn new(n: usize) -> Self {
        Self { local: vec![[0.0; 3]; n], xx: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.local.len()
    }

    /// Per-qubit frequency scale: largest local field norm plus the largest
    /// summed coupling magnitude on one qubit.
    pub fn frequency_scale(&self) -> f64 {
        let n = self.n();
        let local = self.local.iter().map(|[x, y, z]| (x * x + y * y + z * z).sqrt()).fold(0.0, f64::max);
        let mut row = vec![0.0; n];
        for &(k, j, v) in &self.xx {
            row[k] += v.abs();
            row[j] += v.abs();
        }
        local + row.into_iter().fold(0.0, f64::max)
    }

    /// `σ_x`-basis energies of the coupling part, indexed like the basis.
    pub fn xx_energies(&self) -> Vec<f64> {
        let d = 1usize << self.n();
        (0..d)
            .map(|i| {
                self.xx
                    .iter()
                    .map(|&(k, j, v)| if ((i >> k) ^ (i >> j)) & 1 == 0 { v } else { -v })
                    .sum()
            })
            .collect()
    }

    /// Dense matrix, row-major `d × d`.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.n();
        let d = 1usize << n;
        let mut m = vec![ZERO; d * d];
        for i in 0..d {
            for (k, &[x, y, z]) in self.local.iter().enumerate() {
                let bit = (i >> k) & 1;
                let sz = if bit == 0 { 1.0 } else { -1.0 };
                m[i * d + i] += z * sz;
                let f = i ^ (1 << k);
                // ⟨f|σ_x|i⟩ = 1, ⟨f|σ_y|i⟩ = i·sz
                m[f * d + i] += Complex64::new(x, y * sz);
            }
            for &(k, j, v) in &self.xx {
                let f = i ^ (1 << k) ^ (1 << j);
                m[f * d + i] += v;
            }
        }
        m
    }
}

/// Markovian channels acting on one qubit (rates in 1/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Channel {
    /// `σ_z = +1 → −1` decay.
    pub down: f64,
    /// Thermal excitation `σ_z = −1 → +1`.
    pub up: f64,
    /// Pure dephasing: coherences decay as `e^{−Γ_φ t}`.
    pub dephase: f64,
}

impl Channel {
    pub fn is_zero(&self) -> bool {
        self.down == 0.0 && self.up == 0.0 && self.dephase == 0.0
    }
}

/// `exp(−iτ(xσ_x + yσ_y + zσ_z))` as `[u00, u01, u10, u11]`.
pub fn local_unitary([x, y, z]: [f64; 3], tau: f64) -> [Complex64; 4] {
    let r = (x * x + y * y + z * z).sqrt();
    let (s, c) = (r * tau).sin_cos();
    let s = if r > 0.0 { s / r } else { tau };
    let mi = Complex64::new(0.0, -s);
    [
        Complex64::new(c, -s * z),
        mi * Complex64::new(x, -y),
        mi * Complex64::new(x, y),
        Complex64::new(c, s * z),
    ]
}

/// `v ← U_k v` on a state vector.
pub fn apply_local_vec(v: &mut [Complex64], k: usize, u: &[Complex64; 4]) {
    let bit = 1usize << k;
    for i0 in 0..v.len() {
        if i0 & bit == 0 {
            let i1 = i0 | bit;
            let (a, b) = (v[i0], v[i1]);
            v[i0] = u[0] * a + u[1] * b;
            v[i1] = u[2] * a + u[3] * b;
        }
    }
}

/// `ρ ← U_k ρ U_k†` on a row-major density matrix.
pub fn apply_local_rho(rho: &mut [Complex64], d: usize, k: usize, u: &[Complex64; 4]) {
    let bit = 1usize << k;
    // left: rows
    for r0 in 0..d {
        if r0 & bit != 0 {
            continue;
        }
        let r1 = r0 | bit;
        let (row0, row1) = (r0 * d, r1 * d);
        for c in 0..d {
            let (a, b) = (rho[row0 + c], rho[row1 + c]);
            rho[row0 + c] = u[0] * a + u[1] * b;
            rho[row1 + c] = u[2] * a + u[3] * b;
        }
    }
    // right: columns, multiply by U†
    let uc = [u[0].conj(), u[1].conj(), u[2].conj(), u[3].conj()];
    for r in 0..d {
        let row = &mut rho[r * d..(r + 1) * d];
        for c0 in 0..d {
            if c0 & bit != 0 {
                continue;
            }
            let c1 = c0 | bit;
            let (a, b) = (row[c0], row[c1]);
            row[c0] = a * uc[0] + b * uc[1];
            row[c1] = a * uc[2] + b * uc[3];
        }
    }
}

/// Unnormalized Walsh-Hadamard transform of a vector (length a power of 2).
pub fn wht(v: &mut [Complex64]) {
    let d = v.len();
    let mut h = 1;
    while h < d {
        for i in (0..d).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `ρ ← W ρ W` with `W` the normalized `n`-qubit Hadamard.
pub fn hadamard_rho(rho: &mut [Complex64], d: usize) {
    for r in 0..d {
        wht(&mut rho[r * d..(r + 1) * d]);
    }
    let mut col = vec![ZERO; d];
    for c in 0..d {
        for r in 0..d {
            col[r] = rho[r * d + c];
        }
        wht(&mut col);
        for r in 0..d {
            rho[r * d + c] = col[r];
        }
    }
    let s = 1.0 / d as f64;
    rho.iter_mut().for_each(|x| *x *= s);
}

/// `v ← W v`.
pub fn hadamard_vec(v: &mut [Complex64]) {
    wht(v);
    let s = 1.0 / (v.len() as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= s);
}

/// Phases `e^{−iτE_i}` for diagonal energies.
pub fn phases(energies: &[f64], tau: f64) -> Vec<Complex64> {
    energies.iter().map(|&e| Complex64::from_polar(1.0, -tau * e)).collect()
}

/// `ρ_ij ← p_i ρ_ij p_j*`.
pub fn apply_diag_rho(rho: &mut [Complex64], d: usize, p: &[Complex64]) {
    for r in 0..d {
        let pr = p[r];
        let row = &mut rho[r * d..(r + 1) * d];
        for (x, pc) in row.iter_mut().zip(p) {
            *x = pr * *x * pc.conj();
        }
    }
}

/// Exact solution of the single-qubit dissipator over `tau`.
pub fn apply_channel_rho(rho: &mut [Complex64], d: usize, k: usize, ch: &Channel, tau: f64) {
    if ch.is_zero() || tau == 0.0 {
        return;
    }
    let bit = 1usize << k;
    let g1 = ch.down + ch.up;
    let decay = (-g1 * tau).exp();
    let (q_down, q_up) = if g1 > 0.0 {
        (ch.down / g1 * (1.0 - decay), ch.up / g1 * (1.0 - decay))
    } else {
        (0.0, 0.0)
    };
    let coherence = (-(g1 / 2.0 + ch.dephase) * tau).exp();
    for r0 in 0..d {
        if r0 & bit != 0 {
            continue;
        }
        let r1 = r0 | bit;
        for c0 in 0..d {
            if c0 & bit != 0 {
                continue;
            }
            let c1 = c0 | bit;
            let (ee, gg) = (rho[r0 * d + c0], rho[r1 * d + c1]);
            rho[r0 * d + c0] = ee * (1.0 - q_down) + gg * q_up;
            rho[r1 * d + c1] = gg * (1.0 - q_up) + ee * q_down;
            rho[r0 * d + c1] *= coherence;
            rho[r1 * d + c0] *= coherence;
        }
    }
}

/// Replaces `ρ` by `(ρ + ρ†)/2`.
pub fn hermitize(rho: &mut [Complex64], d: usize) {
    for r in 0..d {
        rho[r * d + r].im = 0.0;
        for c in (r + 1)..d {
            let avg = (rho[r * d + c] + rho[c * d + r].conj()) * 0.5;
            rho[r * d + c] = avg;
            rho[c * d + r] = avg.conj();
        }
    }
}

pub fn dimension(n: usize) -> Result<usize> {
    if n >= usize::BITS as usize - 1 {
        return Err(Error::capacity(format!("{n} qubits cannot be stored densely"), Some("sqa")));
    }
    Ok(1usize << n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn to_matrix(v: &[Complex64], d: usize) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(d, d, v)
    }

    fn random_rho(n: usize, seed: u64) -> Vec<Complex64> {
        let d = 1 << n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let m = &m / m.trace();
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                out[r * d + c] = m[(r, c)];
            }
        }
        out
    }

    fn expm_dense(h: &[Complex64], d: usize, tau: f64) -> DMatrix<Complex64> {
        let m = to_matrix(h, d);
        let eig = m.clone().symmetric_eigen();
        let phases = eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -tau * e));
        &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
    }

    #[test]
    fn dense_matrix_is_hermitian_and_correct() {
        let mut h = RegisterHamiltonian::new(2);
        h.local[0] = [0.3, -0.7, 0.2];
        h.local[1] = [0.0, 0.5, -1.0];
        h.xx.push((0, 1, 0.4));
        let m = to_matrix(&h.to_dense(), 4);
        assert!((&m - m.adjoint()).norm() < 1e-15);
        // ⟨0|H|0⟩: both σ_z = +1, so z_0 + z_1
        assert!((m[(0, 0)].re - (0.2 - 1.0)).abs() < 1e-15);
        // σ_y on qubit 0: ⟨1|σ_y|0⟩ = i
        assert_eq!(m[(1, 0)], Complex64::new(0.3, -0.7));
        assert_eq!(m[(3, 0)], Complex64::new(0.4, 0.0));
    }

    #[test]
    fn local_unitary_matches_expm() {
        let mut h = RegisterHamiltonian::new(1);
        h.local[0] = [0.3, -0.7, 1.2];
        let u = expm_dense(&h.to_dense(), 2, 0.9);
        let l = local_unitary(h.local[0], 0.9);
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)].iter().zip(l) {
            assert!((u[*a] - b).norm() < 1e-14);
        }
    }

    #[test]
    fn split_factors_match_dense_propagation() {
        let n = 3;
        let d = 8;
        let mut h = RegisterHamiltonian::new(n);
        h.local[1] = [0.4, 0.2, -0.3];
        h.local[2] = [-0.1, 0.0, 0.8];
        let tau = 0.37;
        let rho0 = random_rho(n, 3);
        let mut rho = rho0.clone();
        for k in 0..n {
            apply_local_rho(&mut rho, d, k, &local_unitary(h.local[k], tau));
        }
        let u = expm_dense(&h.to_dense(), d, tau);
        let want = &u * to_matrix(&rho0, d) * u.adjoint();
        assert!((to_matrix(&rho, d) - want).norm() < 1e-13);

        let mut x = RegisterHamiltonian::new(n);
        x.xx = vec![(0, 1, 0.5), (1, 2, -0.3), (0, 2, 0.2)];
        let mut rho = rho0.clone();
        hadamard_rho(&mut rho, d);
        apply_diag_rho(&mut rho, d, &phases(&x.xx_energies(), tau));
        hadamard_rho(&mut rho, d);
        let u = expm_dense(&x.to_dense(), d, tau);
        let want = &u * to_matrix(&rho0, d) * u.adjoint();
        assert!((to_matrix(&rho, d) - want).norm() < 1e-13);
    }

    #[test]
    fn channel_matches_lindblad_generator() {
        // integrate dρ/dt = L(ρ) with tiny Euler steps as an independent check
        let ch = Channel { down: 1.3, up: 0.4, dephase: 0.7 };
        let d = 4;
        let rho0 = random_rho(2, 9);
        let mut exact = rho0.clone();
        apply_channel_rho(&mut exact, d, 1, &ch, 0.5);
        let sm = DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, Complex64::from(1.0), ZERO]);
        let sz = DMatrix::from_row_slice(2, 2, &[Complex64::from(1.0), ZERO, ZERO, Complex64::from(-1.0)]);
        let id = DMatrix::<Complex64>::identity(2, 2);
        // qubit 1 is the high bit: operator = op ⊗ id in row-major index order
        let lift = |m: &DMatrix<Complex64>| m.kronecker(&id);
        let ops = [
            lift(&sm) * Complex64::from(ch.down.sqrt()),
            lift(&sm.adjoint()) * Complex64::from(ch.up.sqrt()),
            lift(&sz) * Complex64::from((ch.dephase / 2.0).sqrt()),
        ];
        let mut rho = to_matrix(&rho0, d);
        let steps = 200_000;
        let dt = 0.5 / steps as f64;
        for _ in 0..steps {
            let mut drho = DMatrix::<Complex64>::zeros(d, d);
            for l in &ops {
                let ld = l.adjoint();
                drho += l * &rho * &ld - (&ld * l * &rho + &rho * &ld * l) * Complex64::from(0.5);
            }
            rho += drho * Complex64::from(dt);
        }
        assert!((to_matrix(&exact, d) - rho).norm() < 1e-5);
    }

    #[test]
    fn vector_and_hadamard_kernels() {
        let mut v = vec![Complex64::from(1.0), ZERO, ZERO, ZERO];
        hadamard_vec(&mut v);
        assert!(v.iter().all(|x| (x.re - 0.5).abs() < 1e-15));
        let u = local_unitary([1.0, 0.0, 0.0], std::f64::consts::FRAC_PI_2);
        let mut w = vec![Complex64::from(1.0), ZERO];
        apply_local_vec(&mut w, 0, &u);
        assert!((w[1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }
}
