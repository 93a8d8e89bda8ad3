//! Event-driven simulation of the cutoff jump dynamics.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{init_ensemble, Ensemble, InitialLaw};
use super::step::{other_index, real_step_impl, step_fictive_impl, Arrival, EventDraw};
use crate::error::{LabError, Result};
use crate::kernel::{CutoffSchedule, KernelParams};
use crate::rng::{Purpose, SeedLineage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Fictive,
    Real,
}

impl std::str::FromStr for Scheme {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fictive" => Ok(Scheme::Fictive),
            "real" => Ok(Scheme::Real),
            other => Err(LabError::config("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: KernelParams,
    pub schedule: CutoffSchedule,
    pub initial_law: InitialLaw,
    pub n: usize,
    pub t_end: f64,
    /// Strictly increasing times in `(0, t_end]`.
    pub snapshot_times: Vec<f64>,
    pub scheme: Scheme,
    pub master_seed: u64,
    pub replica: u64,
    /// Move the partner too (Bird-style); off by default.
    pub symmetric: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.initial_law.validate()?;
        if self.n < 2 {
            return Err(LabError::config("sim.n", "need at least two particles"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(LabError::config("sim.t_end", "t_end must be positive"));
        }
        if self.snapshot_times.is_empty() {
            return Err(LabError::config("sim.snapshot_times", "no snapshot times requested"));
        }
        let mut prev = 0.0;
        for &t in &self.snapshot_times {
            if !(t > prev && t <= self.t_end) {
                return Err(LabError::config(
                    "sim.snapshot_times",
                    "snapshot times must be strictly increasing in (0, t_end]",
                ));
            }
            prev = t;
        }
        Ok(())
    }

    pub fn with_replica(&self, replica: u64) -> SimConfig {
        SimConfig {
            replica,
            ..self.clone()
        }
    }
}

/// Snapshots of one replica, plus event statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: Ensemble,
    pub snapshots: Vec<Ensemble>,
    /// Candidate events drawn on `[0, t_end]`.
    pub events: u64,
    /// Events that survived thinning.
    pub accepted: u64,
}

impl Trajectory {
    pub fn snapshot_at(&self, t: f64) -> Option<&Ensemble> {
        self.snapshots.iter().find(|s| s.time == t)
    }
}

/// Common candidate-event stream for the fictive representation.
struct EventStream {
    n: usize,
    total_rate: f64,
    z_max: f64,
    u_max: f64,
    t: f64,
    arrival: ChaCha8Rng,
    particle: ChaCha8Rng,
    partner: ChaCha8Rng,
    angle: ChaCha8Rng,
    thinning: ChaCha8Rng,
}

impl EventStream {
    fn new(lineage: &SeedLineage, n: usize, z_max: f64, u_max: f64) -> Self {
        EventStream {
            n,
            total_rate: n as f64 * 2.0 * z_max * u_max,
            z_max,
            u_max,
            t: 0.0,
            arrival: lineage.stream(Purpose::Arrival),
            particle: lineage.stream(Purpose::Particle),
            partner: lineage.stream(Purpose::Partner),
            angle: lineage.stream(Purpose::AngleZ),
            thinning: lineage.stream(Purpose::ThinningU),
        }
    }

    #[inline]
    fn next_time(&mut self) -> f64 {
        let u: f64 = self.arrival.random();
        self.t += -(1.0 - u).ln() / self.total_rate;
        self.t
    }

    #[inline]
    fn next_particle(&mut self) -> usize {
        self.particle.random_range(0..self.n)
    }

    #[inline]
    fn next(&mut self) -> EventDraw {
        let t_event = self.next_time();
        let particle = self.next_particle();
        let partner = other_index(&mut self.partner, self.n, particle);
        let z = (2.0 * self.angle.random::<f64>() - 1.0) * self.z_max;
        let u = self.thinning.random::<f64>() * self.u_max;
        EventDraw {
            t_event,
            particle,
            partner,
            z,
            u,
        }
    }
}

fn snapshot(ensemble: &Ensemble, t: f64) -> Ensemble {
    let mut s = ensemble.clone();
    s.time = t;
    s
}

/// Runs one replica.
pub fn run(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    match config.scheme {
        Scheme::Fictive => Ok(drive_fictive(config, std::slice::from_ref(&config.schedule))?
            .pop()
            .expect("one variant")),
        Scheme::Real => drive_real(config),
    }
}

/// Runs replicas `first..first+count` in parallel; output is ordered by
/// replica index and independent of scheduling.
pub fn run_replicas(config: &SimConfig, first: u64, count: u64) -> Result<Vec<Trajectory>> {
    (first..first + count)
        .into_par_iter()
        .map(|r| run(&config.with_replica(r)))
        .collect()
}

/// Runs several cutoff schedules off one candidate stream (common random
/// numbers). The stream is drawn at the envelope rate `N·2(G_max+1)·2Γ_max^γ`;
/// each variant thins and weights the shared candidates with its own
/// `φ_ε` and `𝐈_ζ`.
pub fn coupled_run(config: &SimConfig, schedules: &[CutoffSchedule]) -> Result<Vec<Trajectory>> {
    config.validate()?;
    if schedules.len() < 2 {
        return Err(LabError::config("schedules", "coupling needs at least two schedules"));
    }
    if config.scheme != Scheme::Fictive {
        return Err(LabError::config(
            "sim.scheme",
            "coupled runs share thinning variables and need the fictive scheme",
        ));
    }
    let eta0 = schedules[0].eta0;
    if schedules.iter().any(|s| s.eta0 != eta0) {
        return Err(LabError::config("schedules.eta0", "coupled schedules must share η_0"));
    }
    if schedules
        .iter()
        .any(|s| s.nu != config.params.nu || s.gamma != config.params.gamma)
    {
        return Err(LabError::config(
            "schedules",
            "schedules were built for different kernel parameters",
        ));
    }
    drive_fictive(config, schedules)
}

fn drive_fictive(config: &SimConfig, schedules: &[CutoffSchedule]) -> Result<Vec<Trajectory>> {
    let initial = init_ensemble(&config.initial_law, config.n, config.master_seed, config.replica)?;
    let z_max = schedules.iter().map(|s| s.z_max()).fold(0.0, f64::max);
    let u_max = schedules.iter().map(|s| s.u_max()).fold(0.0, f64::max);
    let mut stream = EventStream::new(&initial.lineage, config.n, z_max, u_max);

    let mut states: Vec<Ensemble> = vec![initial.clone(); schedules.len()];
    let mut snaps: Vec<Vec<Ensemble>> = vec![Vec::new(); schedules.len()];
    let mut accepted = vec![0u64; schedules.len()];
    let mut events = 0u64;
    let mut next_snap = 0;
    let times = &config.snapshot_times;

    loop {
        let ev = stream.next();
        while next_snap < times.len() && times[next_snap] < ev.t_event {
            for (state, out) in states.iter().zip(snaps.iter_mut()) {
                out.push(snapshot(state, times[next_snap]));
            }
            next_snap += 1;
        }
        if next_snap == times.len() || ev.t_event > config.t_end {
            break;
        }
        events += 1;
        for ((state, schedule), acc) in states.iter_mut().zip(schedules).zip(accepted.iter_mut()) {
            let out = step_fictive_impl(state, &ev, schedule, config.symmetric);
            *acc += out.accepted as u64;
        }
    }

    Ok(snaps
        .into_iter()
        .zip(accepted)
        .map(|(snapshots, accepted)| Trajectory {
            initial: initial.clone(),
            snapshots,
            events,
            accepted,
        })
        .collect())
}

fn drive_real(config: &SimConfig) -> Result<Trajectory> {
    let initial = init_ensemble(&config.initial_law, config.n, config.master_seed, config.replica)?;
    let schedule = &config.schedule;
    let mut stream = EventStream::new(&initial.lineage, config.n, schedule.z_max(), schedule.u_max());
    let mut shock_rng = initial.lineage.stream(Purpose::RealShock);

    let mut state = initial.clone();
    let mut snapshots = Vec::with_capacity(config.snapshot_times.len());
    let (mut events, mut accepted) = (0u64, 0u64);
    let mut next_snap = 0;
    let times = &config.snapshot_times;

    loop {
        let arrival = Arrival {
            t_event: stream.next_time(),
            particle: stream.next_particle(),
        };
        while next_snap < times.len() && times[next_snap] < arrival.t_event {
            snapshots.push(snapshot(&state, times[next_snap]));
            next_snap += 1;
        }
        if next_snap == times.len() || arrival.t_event > config.t_end {
            break;
        }
        events += 1;
        let out = real_step_impl(&mut state, &arrival, schedule, &mut shock_rng, config.symmetric);
        accepted += out.accepted as u64;
    }

    Ok(Trajectory {
        initial,
        snapshots,
        events,
        accepted,
    })
}
