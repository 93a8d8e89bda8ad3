//! Single jumps of the cutoff dynamics, in the fictive-shock and
//! real-shock representations.

use rand::Rng;

use super::ensemble::Ensemble;
use crate::kernel::{deflection, CutoffSchedule};
use crate::vec2::Vec2;

/// One candidate event of the fictive-shock representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventDraw {
    pub t_event: f64,
    pub particle: usize,
    pub partner: usize,
    /// Mass coordinate, uniform on `[-G(ζ)-1, G(ζ)+1]`.
    pub z: f64,
    /// Thinning variable, uniform on `[0, 2Γ_ε^γ]`.
    pub u: f64,
}

/// A real-shock arrival: only the clock and the jumping particle are
/// drawn up front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub t_event: f64,
    pub particle: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepOutcome {
    /// The candidate survived thinning (real shock: did not fall in the
    /// cemetery).
    pub accepted: bool,
    pub displacement: Vec2,
}

/// Partner index uniform among the `n - 1` particles other than `i`.
#[inline]
pub(crate) fn other_index<R: Rng>(rng: &mut R, n: usize, i: usize) -> usize {
    let j = rng.random_range(0..n - 1);
    if j >= i {
        j + 1
    } else {
        j
    }
}

#[inline]
fn apply_jump(
    ensemble: &mut Ensemble,
    i: usize,
    j: usize,
    z: f64,
    schedule: &CutoffSchedule,
    symmetric: bool,
) -> Vec2 {
    let weight = schedule.cutoff_weight(z);
    if weight == 0.0 {
        return Vec2::ZERO;
    }
    let vi = ensemble.velocities[i];
    let vj = ensemble.velocities[j];
    let jump = weight * deflection(vi, vj, schedule.angle(z));
    ensemble.velocities[i] = vi + jump;
    ensemble.track_max(i);
    if symmetric {
        ensemble.velocities[j] = vj - jump;
        ensemble.track_max(j);
    }
    jump
}

/// Fictive shock: accept when `u ≤ φ_ε^γ(|V_i - V_j|)`, then move `V_i` by
/// `𝐈_ζ(z) A(g(z)) (V_i - V_j)`. The partner is left untouched.
pub fn fictive_step(ensemble: &mut Ensemble, event: &EventDraw, schedule: &CutoffSchedule) -> StepOutcome {
    step_fictive_impl(ensemble, event, schedule, false)
}

/// Bird-style variant of [`fictive_step`]: the partner receives the
/// opposite displacement, so momentum is conserved pathwise.
pub fn fictive_step_symmetric(
    ensemble: &mut Ensemble,
    event: &EventDraw,
    schedule: &CutoffSchedule,
) -> StepOutcome {
    step_fictive_impl(ensemble, event, schedule, true)
}

#[inline]
pub(crate) fn step_fictive_impl(
    ensemble: &mut Ensemble,
    event: &EventDraw,
    schedule: &CutoffSchedule,
    symmetric: bool,
) -> StepOutcome {
    let (i, j) = (event.particle, event.partner);
    debug_assert!(i != j && i < ensemble.len() && j < ensemble.len());
    ensemble.time = ensemble.time.max(event.t_event);
    ensemble.lineage.events += 1;
    let rel = (ensemble.velocities[i] - ensemble.velocities[j]).norm();
    if event.u > schedule.collision_rate(rel) {
        return StepOutcome::default();
    }
    StepOutcome {
        accepted: true,
        displacement: apply_jump(ensemble, i, j, event.z, schedule, symmetric),
    }
}

/// Real shock: the partner and mass coordinate are drawn from the
/// position-dependent law `q_{t,w}`, realised by acceptance-rejection.
///
/// With probability `1 - φ_ε^γ(|V_i - V_j|)/(2Γ_ε^γ)` the draw lands in the
/// cemetery and nothing moves; otherwise `z` is uniform on
/// `[-G(ζ)-1, G(ζ)+1]` and the jump is applied with no further indicator.
pub fn real_step<R: Rng>(
    ensemble: &mut Ensemble,
    arrival: &Arrival,
    schedule: &CutoffSchedule,
    rng: &mut R,
) -> StepOutcome {
    real_step_impl(ensemble, arrival, schedule, rng, false)
}

#[inline]
pub(crate) fn real_step_impl<R: Rng>(
    ensemble: &mut Ensemble,
    arrival: &Arrival,
    schedule: &CutoffSchedule,
    rng: &mut R,
    symmetric: bool,
) -> StepOutcome {
    let i = arrival.particle;
    ensemble.time = ensemble.time.max(arrival.t_event);
    ensemble.lineage.events += 1;
    let j = other_index(rng, ensemble.len(), i);
    let rel = (ensemble.velocities[i] - ensemble.velocities[j]).norm();
    let p_live = schedule.collision_rate(rel) / schedule.u_max();
    if rng.random::<f64>() >= p_live {
        return StepOutcome::default();
    }
    let z = (2.0 * rng.random::<f64>() - 1.0) * schedule.z_max();
    StepOutcome {
        accepted: true,
        displacement: apply_jump(ensemble, i, j, z, schedule, symmetric),
    }
}
