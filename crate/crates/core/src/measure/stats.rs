use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rng::{substream, Purpose};
use crate::vec2::Vec2;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Fraction of samples with `|v| ≥ r`.
pub fn tail_mass(samples: &[Vec2], r: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|v| v.norm() >= r).count() as f64 / samples.len() as f64
}

/// Fraction of samples in the closed ball of `radius` around `center`.
pub fn ball_mass(samples: &[Vec2], center: Vec2, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(LabError::Domain(format!("ball radius must be positive, got {radius}")));
    }
    if samples.is_empty() {
        return Ok(0.0);
    }
    let inside = samples.iter().filter(|&&v| (v - center).norm() <= radius).count();
    Ok(inside as f64 / samples.len() as f64)
}

/// Bootstrap summary of a sample mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapMean {
    pub mean: f64,
    /// Standard deviation of the resampled means.
    pub se: f64,
    /// 2.5% and 97.5% percentiles of the resampled means.
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn bootstrap_mean(values: &[f64], resamples: usize, seed: u64) -> Result<BootstrapMean> {
    if values.is_empty() {
        return Err(LabError::Estimation("bootstrap needs at least one value".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut rng = substream(seed, 0, Purpose::Bootstrap);
    let mut means: Vec<f64> = (0..resamples.max(2))
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let se = (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64).sqrt();
    means.sort_by(f64::total_cmp);
    Ok(BootstrapMean {
        mean,
        se,
        ci_low: percentile_sorted(&means, 0.025),
        ci_high: percentile_sorted(&means, 0.975),
    })
}

/// Linear-interpolated percentile of already sorted data.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Radius below which a fraction `q` of the samples lies.
pub fn radius_quantile(samples: &[Vec2], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(LabError::Estimation("no samples".into()));
    }
    let mut r: Vec<f64> = samples.iter().map(|v| v.norm()).collect();
    r.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&r, q))
}

/// Sample mean of `e^{|v|^{λ'}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpMoment {
    /// May be `inf` when the mean overflows; `log_mean` stays finite.
    pub mean: f64,
    pub log_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Computed around the largest exponent (log-sum-exp), so no term overflows.
pub fn exp_moment(samples: &[Vec2], lambda_prime: f64, seed: u64) -> Result<ExpMoment> {
    if !(lambda_prime > 0.0 && lambda_prime < 2.0) {
        return Err(LabError::Domain(format!("λ' must lie in (0, 2), got {lambda_prime}")));
    }
    if samples.is_empty() {
        return Err(LabError::Estimation("exp_moment needs samples".into()));
    }
    let exps: Vec<f64> = samples.iter().map(|v| v.norm().powf(lambda_prime)).collect();
    let top = exps.iter().copied().fold(f64::MIN, f64::max);
    let scaled: Vec<f64> = exps.iter().map(|&e| (e - top).exp()).collect();
    let boot = bootstrap_mean(&scaled, BOOTSTRAP_RESAMPLES, seed)?;
    let log_mean = top + boot.mean.ln();
    Ok(ExpMoment {
        mean: log_mean.exp(),
        log_mean,
        ci_low: (top + boot.ci_low.ln()).exp(),
        ci_high: (top + boot.ci_high.ln()).exp(),
    })
}
