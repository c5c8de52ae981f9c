//! Phase distributions to energies.
//!
//! A bin `m` of a `p`-bit distribution is the phase `φ = m / 2^p` of the
//! step unitary `W = e^{-iHt/r}`, so `E = -(2πr/t)(φ + k) + offset` for some
//! unknown integer alias `k`. The offset is the Hamiltonian scalar the
//! Trotter engine tracked instead of applying.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpe::PhaseDistribution;

pub const DEFAULT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub m: usize,
    pub prob: f64,
    /// An adjacent bin (cyclically) is also above threshold.
    pub neighbors_merged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub energy: f64,
    pub phase: f64,
    pub alias_k: i64,
    pub resolution: f64,
}

/// Bins with probability at least `threshold`, most probable first.
pub fn find_peaks(dist: &PhaseDistribution, threshold: f64) -> Result<Vec<Peak>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!("peak threshold {threshold} not in (0, 1)")));
    }
    let len = dist.probs.len();
    let above = |m: usize| dist.probs[m] >= threshold;
    let mut peaks: Vec<Peak> = (0..len)
        .filter(|&m| above(m))
        .map(|m| {
            let left = (m + len - 1) % len;
            let right = (m + 1) % len;
            let neighbors_merged = len > 1 && ((left != m && above(left)) || (right != m && above(right)));
            Peak { m, prob: dist.probs[m], neighbors_merged }
        })
        .collect();
    peaks.sort_by(|a, b| b.prob.total_cmp(&a.prob).then(a.m.cmp(&b.m)));
    Ok(peaks)
}

/// Energy spacing between adjacent bins, `2πr / (t 2^p)`.
pub fn resolution(precision_bits: u32, r: u32, t: f64) -> f64 {
    2.0 * PI * r as f64 / (t * 2f64.powi(precision_bits as i32))
}

/// `E = -(2πr/t)(m/2^p + alias_k) + offset`.
pub fn phase_to_energy(m: usize, precision_bits: u32, r: u32, t: f64, alias_k: i64, offset: f64) -> EnergyEstimate {
    let phase = m as f64 / 2f64.powi(precision_bits as i32);
    let period = 2.0 * PI * r as f64 / t;
    EnergyEstimate {
        energy: -period * (phase + alias_k as f64) + offset,
        phase,
        alias_k,
        resolution: resolution(precision_bits, r, t),
    }
}

/// `Σ w_i E_i / Σ w_i`.
pub fn weighted_average(entries: &[(f64, f64)]) -> Result<f64> {
    if entries.is_empty() {
        return Err(Error::Config("weighted average of no entries".into()));
    }
    if let Some(&(_, w)) = entries.iter().find(|(_, w)| w.is_nan() || *w <= 0.0) {
        return Err(Error::Config(format!("weight {w} must be positive")));
    }
    let total: f64 = entries.iter().map(|(_, w)| w).sum();
    Ok(entries.iter().map(|(e, w)| e * w).sum::<f64>() / total)
}

/// Every alias of bin `m` whose energy lies in `[lo, hi]`, ascending in energy.
pub fn resolve_alias(
    m: usize,
    precision_bits: u32,
    r: u32,
    t: f64,
    window: (f64, f64),
    offset: f64,
) -> Result<Vec<EnergyEstimate>> {
    let (lo, hi) = window;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::Config(format!("energy window ({lo}, {hi}) is empty")));
    }
    let phase = m as f64 / 2f64.powi(precision_bits as i32);
    let period = 2.0 * PI * r as f64 / t;
    // lo <= -period (phase + k) + offset <= hi
    let k_min = ((offset - hi) / period - phase).ceil() as i64;
    let k_max = ((offset - lo) / period - phase).floor() as i64;
    let mut out: Vec<EnergyEstimate> = (k_min..=k_max)
        .map(|k| phase_to_energy(m, precision_bits, r, t, k, offset))
        .filter(|e| e.energy >= lo && e.energy <= hi)
        .collect();
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}
