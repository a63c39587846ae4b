//! Synthetic radar scenarios: constant-velocity targets, Gaussian position
//! noise, missed detections and Poisson clutter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn square(side: f64) -> Self {
        Self { x_min: 0.0, x_max: side, y_min: 0.0, y_max: side }
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.x_min..=self.x_max).contains(&p[0]) && (self.y_min..=self.y_max).contains(&p[1])
    }
}

/// Initial target state `[x, y, vx, vy]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl TargetState {
    pub fn new(x: f64, y: f64, vx: f64, vy: f64) -> Self {
        Self { x, y, vx, vy }
    }

    pub fn position_at(&self, t: f64) -> [f64; 2] {
        [self.x + self.vx * t, self.y + self.vy * t]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub targets: Vec<TargetState>,
    /// Scan interval Δt in seconds.
    pub dt: f64,
    pub scans: usize,
    /// Position noise σ_m per axis, metres.
    pub sigma_m: f64,
    pub p_detect: f64,
    /// Expected false measurements per unit area.
    pub clutter_density: f64,
    pub region: Region,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    /// Two targets crossing a 1 km square over 20 scans.
    fn default() -> Self {
        Self {
            targets: vec![TargetState::new(100.0, 200.0, 40.0, 10.0), TargetState::new(100.0, 800.0, 40.0, -10.0)],
            dt: 1.0,
            scans: 20,
            sigma_m: 5.0,
            p_detect: 0.9,
            clutter_density: 1e-5,
            region: Region::square(1000.0),
            seed: 7,
        }
    }
}

impl ScenarioConfig {
    /// Default settings with only the first target.
    pub fn single_target() -> Self {
        let mut c = Self::default();
        c.targets.truncate(1);
        c
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.region;
        if !(r.x_max > r.x_min && r.y_max > r.y_min) || !r.area().is_finite() {
            return Err(Error::config("surveillance region is degenerate"));
        }
        if !(self.p_detect > 0.0 && self.p_detect <= 1.0) {
            return Err(Error::config("detection probability must lie in (0, 1]"));
        }
        if !(self.clutter_density >= 0.0 && self.clutter_density.is_finite()) {
            return Err(Error::config("clutter density must be non-negative"));
        }
        if !(self.sigma_m >= 0.0 && self.sigma_m.is_finite()) {
            return Err(Error::config("measurement noise must be non-negative"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("scan interval must be positive"));
        }
        if self.scans == 0 {
            return Err(Error::config("at least one scan is required"));
        }
        let ok = self.targets.iter().all(|t| [t.x, t.y, t.vx, t.vy].iter().all(|v| v.is_finite()));
        if !ok {
            return Err(Error::config("target states must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Target(usize),
    Clutter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub scan: usize,
    /// Index within the scan.
    pub id: usize,
    pub x: f64,
    pub y: f64,
    /// Ground-truth origin; never read by the tracker.
    pub origin: Origin,
}

impl Measurement {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// `truth[target][scan]`; scan `k` is at time `k·Δt`.
    pub truth: Vec<Vec<[f64; 2]>>,
    pub scans: Vec<Vec<Measurement>>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        s.config.validate()?;
        if s.scans.len() != s.config.scans || s.truth.len() != s.config.n_targets() {
            return Err(Error::input("scenario data does not match its configuration"));
        }
        for (k, scan) in s.scans.iter().enumerate() {
            for (i, m) in scan.iter().enumerate() {
                if m.scan != k || m.id != i {
                    return Err(Error::input(format!("measurement {i} of scan {k} is mislabelled")));
                }
            }
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Draws a scenario. Detections falling outside the region are discarded
/// (the target is treated as undetected), so every measurement lies inside.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.sigma_m).map_err(|e| Error::config(e.to_string()))?;
    let mean_clutter = cfg.clutter_density * cfg.region.area();
    let clutter = if mean_clutter > 0.0 {
        Some(Poisson::new(mean_clutter).map_err(|e| Error::config(e.to_string()))?)
    } else {
        None
    };
    let r = cfg.region;
    let truth: Vec<Vec<[f64; 2]>> = cfg
        .targets
        .iter()
        .map(|t| (0..cfg.scans).map(|k| t.position_at(k as f64 * cfg.dt)).collect())
        .collect();
    let mut scans = Vec::with_capacity(cfg.scans);
    for k in 0..cfg.scans {
        let mut scan = Vec::new();
        for (i, track) in truth.iter().enumerate() {
            if rng.random::<f64>() >= cfg.p_detect {
                continue;
            }
            let p = [track[k][0] + noise.sample(&mut rng), track[k][1] + noise.sample(&mut rng)];
            if r.contains(p) {
                scan.push((p, Origin::Target(i)));
            }
        }
        let count = clutter.as_ref().map_or(0, |d| d.sample(&mut rng) as usize);
        for _ in 0..count {
            let p = [rng.random_range(r.x_min..=r.x_max), rng.random_range(r.y_min..=r.y_max)];
            scan.push((p, Origin::Clutter));
        }
        // Shuffle so that measurement ids carry no origin information.
        for i in (1..scan.len()).rev() {
            let j = rng.random_range(0..=i);
            scan.swap(i, j);
        }
        scans.push(
            scan.into_iter()
                .enumerate()
                .map(|(id, (p, origin))| Measurement { scan: k, id, x: p[0], y: p[1], origin })
                .collect(),
        );
    }
    Ok(Scenario { config: cfg.clone(), truth, scans })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_scans_hold_exact_target_positions() {
        let cfg = ScenarioConfig { sigma_m: 0.0, p_detect: 1.0, clutter_density: 0.0, ..Default::default() };
        let s = generate_scenario(&cfg).unwrap();
        for (k, scan) in s.scans.iter().enumerate() {
            assert_eq!(scan.len(), 2);
            for m in scan {
                let Origin::Target(i) = m.origin else { panic!("clutter in a clutter-free scenario") };
                assert_eq!(m.position(), s.truth[i][k]);
            }
        }
    }

    #[test]
    fn clutter_count_is_poisson_mean() {
        let cfg = ScenarioConfig {
            targets: vec![],
            scans: 1000,
            clutter_density: 3.0 / 1e6,
            ..Default::default()
        };
        let s = generate_scenario(&cfg).unwrap();
        let mean = s.scans.iter().map(Vec::len).sum::<usize>() as f64 / 1000.0;
        assert!((mean - 3.0).abs() <= 0.2, "mean clutter {mean}");
        assert!(s.scans.iter().flatten().all(|m| cfg.region.contains(m.position())));
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = ScenarioConfig::default();
        let a = generate_scenario(&cfg).unwrap();
        assert_eq!(a, generate_scenario(&cfg).unwrap());
        let b = generate_scenario(&ScenarioConfig { seed: cfg.seed + 1, ..cfg }).unwrap();
        assert_ne!(a.scans, b.scans);
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            ScenarioConfig { p_detect: 0.0, ..Default::default() },
            ScenarioConfig { p_detect: 1.1, ..Default::default() },
            ScenarioConfig { clutter_density: -1.0, ..Default::default() },
            ScenarioConfig { region: Region::square(0.0), ..Default::default() },
            ScenarioConfig { scans: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(generate_scenario(&c), Err(Error::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn json_round_trip() {
        let s = generate_scenario(&ScenarioConfig::default()).unwrap();
        assert_eq!(Scenario::from_json(&s.to_json().unwrap()).unwrap(), s);
    }
}
