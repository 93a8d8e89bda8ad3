use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measure::fit::{linear_fit, FitResult};
use crate::measure::stats::{bootstrap_mean, BOOTSTRAP_RESAMPLES};
use crate::sim::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    pub zeta: f64,
    /// Mean of `|V^ζ − V^{ζ_ref}|` over particles and replicas.
    pub mean_error: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingCurve {
    pub t: f64,
    pub reference_zeta: f64,
    /// One point per non-reference schedule, in input order.
    pub points: Vec<CouplingPoint>,
    /// Slope of `log error` against `log ζ`, when at least two errors are positive.
    pub slope: Option<FitResult>,
}

/// `coupled[r][k]` is replica `r` run under schedule `k` with common random
/// numbers; `zetas[k]` is that schedule's angular cutoff.
pub fn coupling_error_curve(
    coupled: &[Vec<Trajectory>],
    zetas: &[f64],
    reference: usize,
    t: f64,
    seed: u64,
) -> Result<CouplingCurve> {
    if coupled.is_empty() {
        return Err(LabError::Estimation("no coupled trajectories".into()));
    }
    if reference >= zetas.len() {
        return Err(LabError::Estimation(format!("reference index {reference} out of range")));
    }
    let mut per_schedule: Vec<Vec<f64>> = vec![Vec::new(); zetas.len()];
    for (r, group) in coupled.iter().enumerate() {
        if group.len() != zetas.len() {
            return Err(LabError::Estimation(format!(
                "replica {r} has {} trajectories for {} schedules",
                group.len(),
                zetas.len()
            )));
        }
        let snap = |k: usize| {
            group[k].snapshot_at(t).ok_or_else(|| {
                LabError::Estimation(format!("replica {r}, schedule {k}: no snapshot at t={t}"))
            })
        };
        let reference_snap = snap(reference)?;
        for (k, dist) in per_schedule.iter_mut().enumerate() {
            let s = snap(k)?;
            if s.len() != reference_snap.len() {
                return Err(LabError::Estimation(format!(
                    "replica {r}, schedule {k}: ensemble size differs from the reference"
                )));
            }
            dist.extend(
                s.velocities
                    .iter()
                    .zip(&reference_snap.velocities)
                    .map(|(&a, &b)| (a - b).norm()),
            );
        }
    }
    let mut points = Vec::new();
    for (k, dist) in per_schedule.iter().enumerate() {
        if k == reference {
            continue;
        }
        let b = bootstrap_mean(dist, BOOTSTRAP_RESAMPLES, seed.wrapping_add(k as u64))?;
        points.push(CouplingPoint {
            zeta: zetas[k],
            mean_error: b.mean,
            se: b.se,
            ci_low: b.ci_low,
            ci_high: b.ci_high,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.mean_error > 0.0)
        .map(|p| (p.zeta.ln(), p.mean_error.ln()))
        .unzip();
    let slope = if xs.len() >= 2 { linear_fit(&xs, &ys).ok() } else { None };
    Ok(CouplingCurve {
        t,
        reference_zeta: zetas[reference],
        points,
        slope,
    })
}
