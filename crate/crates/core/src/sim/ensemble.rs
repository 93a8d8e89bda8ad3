use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rng::{Purpose, SeedLineage};
use crate::vec2::Vec2;

/// Law of the initial velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialLaw {
    Dirac {
        v0: [f64; 2],
    },
    /// `a` with probability `w`, `b` otherwise.
    TwoPoint {
        a: [f64; 2],
        b: [f64; 2],
        w: f64,
    },
    Gaussian {
        mean: [f64; 2],
        cov: [[f64; 2]; 2],
    },
    UniformDisc {
        r: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Mixture {
        components: Vec<MixtureComponent>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub law: InitialLaw,
}

impl InitialLaw {
    pub fn maxwellian() -> Self {
        InitialLaw::Gaussian {
            mean: [0.0, 0.0],
            cov: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialLaw::Dirac { v0 } => finite(v0, "initial_law.v0"),
            InitialLaw::TwoPoint { a, b, w } => {
                finite(a, "initial_law.a")?;
                finite(b, "initial_law.b")?;
                if !(0.0..=1.0).contains(w) {
                    return Err(LabError::config("initial_law.w", "weight must lie in [0, 1]"));
                }
                Ok(())
            }
            InitialLaw::Gaussian { mean, cov } => {
                finite(mean, "initial_law.mean")?;
                cholesky(cov).map(|_| ())
            }
            InitialLaw::UniformDisc { r, center } => {
                finite(center, "initial_law.center")?;
                if !(*r > 0.0 && r.is_finite()) {
                    return Err(LabError::config("initial_law.r", "radius must be positive"));
                }
                Ok(())
            }
            InitialLaw::Mixture { components } => {
                if components.is_empty() {
                    return Err(LabError::config("initial_law.components", "empty mixture"));
                }
                for c in components {
                    if !(c.weight > 0.0 && c.weight.is_finite()) {
                        return Err(LabError::config(
                            "initial_law.components.weight",
                            "mixture weights must be positive",
                        ));
                    }
                    c.law.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Whether the law is a single point mass.
    pub fn is_dirac(&self) -> bool {
        matches!(self, InitialLaw::Dirac { .. })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec2 {
        match self {
            InitialLaw::Dirac { v0 } => Vec2::from(*v0),
            InitialLaw::TwoPoint { a, b, w } => {
                if rng.random::<f64>() < *w {
                    Vec2::from(*a)
                } else {
                    Vec2::from(*b)
                }
            }
            InitialLaw::Gaussian { mean, cov } => {
                let l = cholesky(cov).expect("validated covariance");
                let z0: f64 = rng.sample(StandardNormal);
                let z1: f64 = rng.sample(StandardNormal);
                Vec2::new(mean[0] + l[0][0] * z0, mean[1] + l[1][0] * z0 + l[1][1] * z1)
            }
            InitialLaw::UniformDisc { r, center } => {
                let rad = r * rng.random::<f64>().sqrt();
                let ang = std::f64::consts::TAU * rng.random::<f64>();
                Vec2::from(*center) + Vec2::new(rad * ang.cos(), rad * ang.sin())
            }
            InitialLaw::Mixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                let mut pick = rng.random::<f64>() * total;
                for c in components {
                    if pick < c.weight {
                        return c.law.sample(rng);
                    }
                    pick -= c.weight;
                }
                components.last().expect("non-empty").law.sample(rng)
            }
        }
    }
}

fn finite(v: &[f64; 2], key: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(LabError::config(key, "coordinates must be finite"))
    }
}

/// Lower Cholesky factor of a 2x2 covariance (semi-definite allowed).
fn cholesky(cov: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let [[a, b], [c, d]] = *cov;
    if !(a >= 0.0 && d >= 0.0) || (b - c).abs() > 1e-12 * (1.0 + b.abs()) {
        return Err(LabError::config("initial_law.cov", "covariance must be symmetric PSD"));
    }
    let l00 = a.sqrt();
    let l10 = if l00 > 0.0 { b / l00 } else { 0.0 };
    let rem = d - l10 * l10;
    if rem < -1e-12 {
        return Err(LabError::config("initial_law.cov", "covariance is not positive semi-definite"));
    }
    Ok([[l00, 0.0], [l10, rem.max(0.0).sqrt()]])
}

/// `N` planar velocities advanced by the jump dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub velocities: Vec<Vec2>,
    pub time: f64,
    /// `sup_{s≤t} |V_s|` per particle.
    pub running_max: Vec<f64>,
    pub lineage: SeedLineage,
}

impl Ensemble {
    pub fn from_velocities(velocities: Vec<Vec2>, lineage: SeedLineage) -> Result<Self> {
        if velocities.len() < 2 {
            return Err(LabError::config("n", "an ensemble needs at least two particles"));
        }
        let running_max = velocities.iter().map(|v| v.norm()).collect();
        Ok(Ensemble {
            velocities,
            time: 0.0,
            running_max,
            lineage,
        })
    }

    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    /// Mean velocity.
    pub fn momentum(&self) -> Vec2 {
        let n = self.len() as f64;
        let sum = self
            .velocities
            .iter()
            .fold(Vec2::ZERO, |acc, &v| acc + v);
        (1.0 / n) * sum
    }

    /// Mean of `|v|²`.
    pub fn energy(&self) -> f64 {
        self.velocities.iter().map(|v| v.norm_sq()).sum::<f64>() / self.len() as f64
    }

    #[inline]
    pub(crate) fn track_max(&mut self, i: usize) {
        let s = self.velocities[i].norm();
        if s > self.running_max[i] {
            self.running_max[i] = s;
        }
    }
}

/// Draws `n` i.i.d. velocities from `law` using the `Init` substream of
/// `(seed, replica)`.
pub fn init_ensemble(law: &InitialLaw, n: usize, seed: u64, replica: u64) -> Result<Ensemble> {
    law.validate()?;
    if n < 2 {
        return Err(LabError::config("n", format!("n = {n}, need at least 2")));
    }
    let lineage = SeedLineage::new(seed, replica);
    let mut rng = lineage.stream(Purpose::Init);
    let velocities = (0..n).map(|_| law.sample(&mut rng)).collect();
    Ensemble::from_velocities(velocities, lineage)
}
