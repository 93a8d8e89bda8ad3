//! N-particle simulation of the cutoff jump dynamics.
//!
//! Each particle jumps against a partner drawn uniformly from the rest of
//! the ensemble (the empirical measure stands in for the unknown law
//! `f_t`). Only the jumping particle moves. Arrivals come from a single
//! exponential clock of rate `N·λ_rate`, so there is no time-step error.

pub mod ensemble;
pub mod mollify;
pub mod run;
pub mod step;

pub use ensemble::{init_ensemble, Ensemble, InitialLaw, MixtureComponent};
pub use mollify::{confinement_weight, mollify, MollifiedSample};
pub use run::{coupled_run, run, run_replicas, Scheme, SimConfig, Trajectory};
pub use step::{fictive_step, fictive_step_symmetric, real_step, Arrival, EventDraw, StepOutcome};
