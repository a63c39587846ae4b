use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Envelope shape of the interpolation `H = f(t) H_d + h(t) H_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `f = 1 - t/t_f`, `h = t/t_f`.
    Linear,
    /// `f = cos²(πt/2t_f)`, `h = sin²(πt/2t_f)`.
    Smooth,
}

/// Default driver scale ω₀ (rad/s).
pub const DEFAULT_DRIVER_SCALE: f64 = 2.0 * PI * 100e6;
/// Default problem energy scale E_p (rad/s): one unit of normalized weight.
pub const DEFAULT_PROBLEM_SCALE: f64 = 2.0 * PI * 10e6;

/// An annealing schedule over `[0, t_f]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Final time in seconds.
    pub t_f: f64,
    pub shape: Shape,
    /// ω₀ of the driver `(ω₀/2) Σ σ_z`, rad/s.
    pub driver_scale: f64,
    /// E_p, the energy (rad/s) of one unit of the encoded Ising problem.
    pub problem_scale: f64,
}

impl Schedule {
    pub fn new(t_f: f64, shape: Shape) -> Result<Self> {
        let s = Self {
            t_f,
            shape,
            driver_scale: DEFAULT_DRIVER_SCALE,
            problem_scale: DEFAULT_PROBLEM_SCALE,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn linear(t_f: f64) -> Result<Self> {
        Self::new(t_f, Shape::Linear)
    }

    pub fn smooth(t_f: f64) -> Result<Self> {
        Self::new(t_f, Shape::Smooth)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_f.is_finite() && self.t_f > 0.0) {
            return Err(Error::config(format!("t_f must be positive, got {}", self.t_f)));
        }
        if !(self.driver_scale.is_finite() && self.driver_scale > 0.0) {
            return Err(Error::config("driver scale must be positive"));
        }
        if !(self.problem_scale.is_finite() && self.problem_scale > 0.0) {
            return Err(Error::config("problem scale must be positive"));
        }
        Ok(())
    }

    /// `(f(t), h(t))`. Times outside `[0, t_f]` are rejected.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.t_f).contains(&t) {
            return Err(Error::input(format!("t = {t} outside [0, {}]", self.t_f)));
        }
        Ok(self.envelopes(t / self.t_f))
    }

    /// Envelopes at the fraction `u = t/t_f`, clamped to `[0, 1]`.
    pub fn envelopes(&self, u: f64) -> (f64, f64) {
        let u = u.clamp(0.0, 1.0);
        match self.shape {
            Shape::Linear => (1.0 - u, u),
            Shape::Smooth => {
                let (s, c) = (FRAC_PI_2 * u).sin_cos();
                (c * c, s * s)
            }
        }
    }

    /// Time derivatives `(ḟ, ḣ)` at the fraction `u`.
    pub fn rates(&self, u: f64) -> (f64, f64) {
        let d = match self.shape {
            Shape::Linear => 1.0,
            Shape::Smooth => FRAC_PI_2 * (PI * u.clamp(0.0, 1.0)).sin(),
        };
        (-d / self.t_f, d / self.t_f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundaries() {
        let lin = Schedule::linear(2e-6).unwrap();
        assert_eq!(lin.eval(0.0).unwrap(), (1.0, 0.0));
        assert_eq!(lin.eval(2e-6).unwrap(), (0.0, 1.0));
        let sm = Schedule::smooth(2e-6).unwrap();
        assert_eq!(sm.eval(0.0).unwrap(), (1.0, 0.0));
        let (f, h) = sm.eval(2e-6).unwrap();
        assert!(f.abs() < 1e-30 && h == 1.0, "{f} {h}");
        let (f, h) = sm.eval(1e-6).unwrap();
        assert!((f - 0.5).abs() < 1e-15 && (h - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        let s = Schedule::linear(1.0).unwrap();
        assert!(s.eval(-1e-9).is_err());
        assert!(s.eval(1.0 + 1e-9).is_err());
        assert!(Schedule::linear(0.0).is_err());
    }

    proptest! {
        #[test]
        fn envelopes_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, smooth in any::<bool>()) {
            let s = Schedule::new(1.0, if smooth { Shape::Smooth } else { Shape::Linear }).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (f0, h0) = s.envelopes(lo);
            let (f1, h1) = s.envelopes(hi);
            prop_assert!(f1 <= f0 && h1 >= h0);
            prop_assert!(((f0 + h0) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn rates_match_finite_difference(u in 0.01f64..0.99, smooth in any::<bool>()) {
            let s = Schedule::new(3.0, if smooth { Shape::Smooth } else { Shape::Linear }).unwrap();
            let du = 1e-6;
            let (fa, ha) = s.envelopes(u - du);
            let (fb, hb) = s.envelopes(u + du);
            let (df, dh) = s.rates(u);
            prop_assert!(((fb - fa) / (2.0 * du * 3.0) - df).abs() < 1e-6);
            prop_assert!(((hb - ha) / (2.0 * du * 3.0) - dh).abs() < 1e-6);
        }
    }
}
