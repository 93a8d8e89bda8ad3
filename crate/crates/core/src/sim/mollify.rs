use rand::Rng;
use rand_distr::StandardNormal;

use super::ensemble::Ensemble;
use crate::error::{LabError, Result};
use crate::kernel::{smoothstep5, CutoffSchedule};
use crate::vec2::Vec2;

/// Gaussian-smoothed positions and confinement weights of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifiedSample {
    pub f_samples: Vec<Vec2>,
    /// In `[0, 1]`; 1 while the running maximum stays below `Γ_ε - 1`,
    /// 0 once it exceeds `Γ_ε`.
    pub g_weights: Vec<f64>,
}

/// Smooth surrogate of `1{running_max ≤ Γ_ε}`, equal to 1 up to `Γ_ε - 1`.
pub fn confinement_weight(running_max: f64, gamma_eps: f64) -> f64 {
    1.0 - smoothstep5(running_max - (gamma_eps - 1.0))
}

/// `F = V + sqrt(t ζ^{4+ν}) Z` with `Z` standard planar normal per particle.
pub fn mollify<R: Rng>(
    ensemble: &Ensemble,
    t: f64,
    schedule: &CutoffSchedule,
    rng: &mut R,
) -> Result<MollifiedSample> {
    if !(t > 0.0) {
        return Err(LabError::Domain(format!("mollification needs t > 0, got {t}")));
    }
    let sd = (t * schedule.molli_var_coeff).sqrt();
    let f_samples = ensemble
        .velocities
        .iter()
        .map(|&v| {
            let zx: f64 = rng.sample(StandardNormal);
            let zy: f64 = rng.sample(StandardNormal);
            v + Vec2::new(sd * zx, sd * zy)
        })
        .collect();
    let g_weights = ensemble
        .running_max
        .iter()
        .map(|&m| confinement_weight(m, schedule.gamma_eps))
        .collect();
    Ok(MollifiedSample {
        f_samples,
        g_weights,
    })
}
