//! Reference predictors: uniform random scores, and per-node linear
//! extrapolation of the history compared with the candidate.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::TemporalGraphSignal;
use crate::noise::Window;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Random,
    Tsr,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Random => "random",
            BaselineMethod::Tsr => "tsr",
        }
    }
}

/// One independent `U(0, 1)` draw per bucket.
pub fn random_baseline(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen::<f64>()).collect()
}

/// Ordinary least squares line through `(times, values)`; returns
/// `(slope, intercept)`.
pub fn ols_fit(times: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::contract(alloc::format!(
            "ols_fit needs at least 2 paired points, got {} times and {} values",
            times.len(),
            values.len()
        )));
    }
    let n = times.len() as f64;
    let t_mean = times.iter().sum::<f64>() / n;
    let v_mean = values.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (t, v) in times.iter().zip(values) {
        cov += (t - t_mean) * (v - v_mean);
        var += (t - t_mean) * (t - t_mean);
    }
    if var == 0.0 {
        return Err(Error::contract("ols_fit needs at least two distinct times"));
    }
    let slope = cov / var;
    Ok((slope, v_mean - slope * t_mean))
}

/// Score of one min-max normalized series: fit the first `len - 1` points
/// against `t = 0..len-2`, extrapolate to `t = len - 1` and return
/// `1 - |last - prediction|` clamped to `[0, 1]`.
pub fn tsr_series_score(normalized: &[f64]) -> Result<f64> {
    let len = normalized.len();
    if len < 3 {
        return Err(Error::contract(alloc::format!("time-series regression needs length >= 3, got {len}")));
    }
    let times: Vec<f64> = (0..len - 1).map(|t| t as f64).collect();
    let (slope, intercept) = ols_fit(&times, &normalized[..len - 1])?;
    let predicted = slope * (len - 1) as f64 + intercept;
    Ok((1.0 - libm::fabs(normalized[len - 1] - predicted)).clamp(0.0, 1.0))
}

/// Mean of per node-channel scores over a bucket. Every series is scaled
/// with its own min and max over the whole window, candidate included.
pub fn tsr_baseline<W: Window>(signal: &TemporalGraphSignal, window: &W) -> Result<f64> {
    let len = window.len();
    if len < 3 {
        return Err(Error::contract(alloc::format!("time-series regression needs buckets of length >= 3, got {len}")));
    }
    let width = signal.num_nodes() * signal.num_channels();
    let mut series = alloc::vec![0.0; len];
    let mut total = 0.0;
    for j in 0..width {
        for (i, s) in series.iter_mut().enumerate() {
            *s = window.snapshot(signal, i)[j];
        }
        let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for s in series.iter_mut() {
            *s = if hi > lo { (*s - lo) / (hi - lo) } else { 0.0 };
        }
        total += tsr_series_score(&series)?;
    }
    Ok(total / width as f64)
}
