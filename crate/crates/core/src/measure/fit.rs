use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measure::kde::DensityEstimate;

/// Ordinary least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub r2: f64,
    /// Range of the regressor that entered the fit.
    pub window: (f64, f64),
    pub n_points: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(LabError::Estimation("fit inputs differ in length".into()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(LabError::Estimation(format!("fit needs at least 2 points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(LabError::Estimation("regressor has no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        slope,
        intercept,
        stderr,
        r2,
        window: (lo, hi),
        n_points: n,
    })
}

/// Fits `log f̂(v)` against `|v|^{λ'}` over grid nodes with
/// `r_min ≤ |v| ≤ r_max` and a positive estimate.
pub fn fit_spatial_decay(
    estimate: &DensityEstimate,
    lambda_prime: f64,
    annulus: (f64, f64),
) -> Result<FitResult> {
    if !(lambda_prime > 0.0) {
        return Err(LabError::Domain(format!("λ' must be positive, got {lambda_prime}")));
    }
    let (r_min, r_max) = annulus;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (p, v) in estimate.points() {
        let r = p.norm();
        if r >= r_min && r <= r_max && v > 0.0 && v.is_finite() {
            xs.push(r.powf(lambda_prime));
            ys.push(v.ln());
        }
    }
    if xs.len() < 5 {
        return Err(LabError::Estimation(format!(
            "annulus [{r_min}, {r_max}] holds {} usable grid points, need 5",
            xs.len()
        )));
    }
    linear_fit(&xs, &ys)
}

/// Fits `log sup f̂_t` against `log t`; `η_emp` is the negated slope.
pub fn fit_time_blowup(sup_values: &[(f64, f64)]) -> Result<FitResult> {
    if sup_values.len() < 4 {
        return Err(LabError::Estimation(format!(
            "blow-up fit needs at least 4 time points, got {}",
            sup_values.len()
        )));
    }
    let mut xs = Vec::with_capacity(sup_values.len());
    let mut ys = Vec::with_capacity(sup_values.len());
    for &(t, s) in sup_values {
        if !(t > 0.0 && t <= 1.0) {
            return Err(LabError::Estimation(format!("time {t} outside (0, 1]")));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(LabError::Estimation(format!("sup value {s} at t={t} is not positive and finite")));
        }
        xs.push(t.ln());
        ys.push(s.ln());
    }
    linear_fit(&xs, &ys)
}
