//! Measure-level statistics of particle ensembles: kernel density
//! estimates, tail and ball masses, exponential moments, decay fits, KS
//! tests and coupling-error curves.

pub mod coupling;
pub mod fit;
pub mod kde;
pub mod ks;
pub mod stats;

pub use coupling::{coupling_error_curve, CouplingCurve, CouplingPoint};
pub use fit::{fit_spatial_decay, fit_time_blowup, linear_fit, FitResult};
pub use kde::{kde, silverman_bandwidth, DensityEstimate, GridSpec};
pub use ks::{ks_velocity, two_sample_ks, KsResult};
pub use stats::{
    ball_mass, bootstrap_mean, exp_moment, radius_quantile, tail_mass, BootstrapMean, ExpMoment,
};
