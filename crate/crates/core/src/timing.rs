//! Hardware run-time model: reset, anneal and readout per shot, totals over
//! shots, and histograms of per-invocation totals.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetMode {
    /// Wait for thermal relaxation.
    Passive,
    /// Measure, then flip excited qubits with one single-qubit gate.
    #[default]
    Active,
}

/// All durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    pub reset_mode: ResetMode,
    pub t_reset_passive: f64,
    pub t_readout_single: f64,
    /// Gate time of the conditional flip in an active reset.
    pub t_single_qubit_op: f64,
    pub parallel_readout: bool,
    pub n_qubits: usize,
    pub t_anneal: f64,
    pub shots: usize,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self {
            reset_mode: ResetMode::Active,
            t_reset_passive: 5e-3,
            t_readout_single: 1e-6,
            t_single_qubit_op: 100e-9,
            parallel_readout: true,
            n_qubits: 10,
            t_anneal: 50e-6,
            shots: 1000,
        }
    }
}

/// Which phase takes most of the time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Reset,
    Anneal,
    Readout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotTime {
    pub reset: f64,
    pub anneal: f64,
    pub readout: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeReport {
    pub per_shot: ShotTime,
    pub shots: usize,
    pub total: f64,
    pub dominant: Phase,
    /// Share of the total taken by the dominant phase.
    pub dominant_share: f64,
}

impl TimingModel {
    pub fn validate(&self) -> Result<()> {
        let durations = [self.t_reset_passive, self.t_readout_single, self.t_single_qubit_op, self.t_anneal];
        if !durations.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(Error::config("all durations must be positive"));
        }
        if self.shots == 0 {
            return Err(Error::config("shots must be at least 1"));
        }
        if self.n_qubits == 0 {
            return Err(Error::config("n_qubits must be at least 1"));
        }
        Ok(())
    }

    fn readout(&self) -> f64 {
        if self.parallel_readout {
            self.t_readout_single
        } else {
            self.n_qubits as f64 * self.t_readout_single
        }
    }
}

pub fn per_shot_time(m: &TimingModel) -> Result<ShotTime> {
    m.validate()?;
    let readout = m.readout();
    let reset = match m.reset_mode {
        ResetMode::Passive => m.t_reset_passive,
        ResetMode::Active => readout + m.t_single_qubit_op,
    };
    Ok(ShotTime { reset, anneal: m.t_anneal, readout, total: reset + m.t_anneal + readout })
}

pub fn total_runtime(m: &TimingModel) -> Result<RuntimeReport> {
    let s = per_shot_time(m)?;
    let phases = [(Phase::Reset, s.reset), (Phase::Anneal, s.anneal), (Phase::Readout, s.readout)];
    let (dominant, t) = phases.into_iter().fold((Phase::Reset, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    Ok(RuntimeReport {
        per_shot: s,
        shots: m.shots,
        total: m.shots as f64 * s.total,
        dominant,
        dominant_share: t / s.total,
    })
}

/// One bin `[low, high)`; the last bin also includes `high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Histogram of total run times of `models` over `bins` equal-width bins
/// spanning `[min, max]`.
pub fn runtime_histogram(models: &[TimingModel], bins: usize) -> Result<Vec<Bin>> {
    let totals = models.iter().map(|m| total_runtime(m).map(|r| r.total)).collect::<Result<Vec<_>>>()?;
    histogram(&totals, bins)
}

/// Equal-width histogram of arbitrary values.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<Bin>> {
    if values.is_empty() {
        return Err(Error::input("histogram needs at least one value"));
    }
    if bins == 0 {
        return Err(Error::config("histogram needs at least one bin"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(vec![Bin { low: lo, high: hi, count: values.len() }]);
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<Bin> = (0..bins)
        .map(|i| Bin {
            low: lo + width * i as f64,
            high: if i + 1 == bins { hi } else { lo + width * (i + 1) as f64 },
            count: 0,
        })
        .collect();
    for v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        out[i].count += 1;
    }
    Ok(out)
}

/// CSV with header `bin_low_s,bin_high_s,count`.
pub fn histogram_csv(bins: &[Bin]) -> String {
    let mut out = String::from("bin_low_s,bin_high_s,count\n");
    for b in bins {
        writeln!(out, "{},{},{}", b.low, b.high, b.count).expect("write to string");
    }
    out
}
