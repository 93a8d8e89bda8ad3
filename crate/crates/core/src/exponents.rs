//! Closed-form regularity exponents and the bootstrap sequences behind them.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::kernel::KernelParams;

const DEFAULT_K_MAX: usize = 64;
const EARLY_STOP: f64 = 1e-13;

/// Regularity regime, from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "NONE")]
    None,
    /// `ν < γ/(2γ+1)`: the solution has a density.
    #[serde(rename = "DENSITY")]
    Density,
    /// `ν < γ/(3γ+4)`: first-order Sobolev regularity.
    #[serde(rename = "W1P")]
    W1p,
    /// `ν < γ/(4γ+9)`: all `L^p`, `W^{2,p}` and Hölder bounds.
    #[serde(rename = "FULL")]
    Full,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::None => "NONE",
            Regime::Density => "DENSITY",
            Regime::W1p => "W1P",
            Regime::Full => "FULL",
        };
        f.write_str(s)
    }
}

pub fn density_threshold(gamma: f64) -> f64 {
    gamma / (2.0 * gamma + 1.0)
}

pub fn w1p_threshold(gamma: f64) -> f64 {
    gamma / (3.0 * gamma + 4.0)
}

pub fn full_threshold(gamma: f64) -> f64 {
    gamma / (4.0 * gamma + 9.0)
}

/// `φ(α) = (1-ν)(1+γ+α)/(1+ν(γ+α)) - 1`.
pub fn phi_alpha(alpha: f64, nu: f64, gamma: f64) -> f64 {
    (1.0 - nu) * (1.0 + gamma + alpha) / (1.0 + nu * (gamma + alpha)) - 1.0
}

/// Strict threshold classification; boundary points fall to the weaker
/// regime.
pub fn classify_regime(nu: f64, gamma: f64) -> Regime {
    if nu < full_threshold(gamma) {
        Regime::Full
    } else if nu < w1p_threshold(gamma) {
        Regime::W1p
    } else if nu < density_threshold(gamma) {
        Regime::Density
    } else {
        Regime::None
    }
}

/// Positive root of `φ(α) = α`.
///
/// At the exact density boundary the root is 0; beyond it the fixed point
/// is negative and the value is reported as inadmissible.
pub fn alpha_star(nu: f64, gamma: f64) -> Result<f64> {
    let threshold = density_threshold(gamma);
    if nu > threshold {
        return Err(LabError::Inadmissible(format!(
            "α_* ≤ 0 since ν = {nu} > γ/(2γ+1) = {threshold}"
        )));
    }
    let b = gamma + 2.0;
    let c = gamma / nu - 2.0 * gamma - 1.0;
    let disc = b * b + 4.0 * c;
    // b + sqrt(disc) never cancels, so the root is evaluated as 2c/(b+√disc)
    Ok((2.0 * c / (b + disc.sqrt())).max(0.0))
}

/// The sequences `α_{k+1} = φ(α_k)` and
/// `κ_{k+1} = κ_k - 1 + 13(2+ν)(1+α_{k+1})/ν`, started at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub alpha: Vec<f64>,
    pub kappa: Vec<f64>,
    /// `min{k : α_k ≥ 2}`; present only when `α_* > 2`.
    pub k_star: Option<usize>,
}

fn kappa_increment(nu: f64, alpha_next: f64) -> f64 {
    13.0 * (2.0 + nu) * (1.0 + alpha_next) / nu - 1.0
}

/// Runs the bootstrap up to `k_max` steps, stopping early once the
/// increments of `α_k` drop below `1e-13`.
pub fn bootstrap_sequences(nu: f64, gamma: f64, k_max: usize) -> Result<Bootstrap> {
    if k_max == 0 {
        return Err(LabError::Domain("k_max must be at least 1".into()));
    }
    if !(phi_alpha(0.0, nu, gamma) > 0.0) {
        return Err(LabError::Inadmissible(format!(
            "bootstrap needs φ(0) > 0, i.e. ν < γ/(2γ+1) = {}",
            density_threshold(gamma)
        )));
    }
    let mut alpha = vec![0.0];
    let mut kappa = vec![0.0];
    for k in 0..k_max {
        let next = phi_alpha(alpha[k], nu, gamma);
        if k >= 1 && next - alpha[k] < EARLY_STOP {
            break;
        }
        kappa.push(kappa[k] + kappa_increment(nu, next));
        alpha.push(next);
    }
    Ok(Bootstrap {
        alpha,
        kappa,
        k_star: k_star(nu, gamma),
    })
}

pub fn bootstrap_default(nu: f64, gamma: f64) -> Result<Bootstrap> {
    bootstrap_sequences(nu, gamma, DEFAULT_K_MAX)
}

/// First index with `α_k ≥ 2`, when the fixed point exceeds 2.
pub fn k_star(nu: f64, gamma: f64) -> Option<usize> {
    let phi2 = phi_alpha(2.0, nu, gamma);
    if !(phi2 > 2.0) {
        return None;
    }
    // k_* + 1 ≤ 2(φ(2)-1)/(φ(2)-2) bounds the loop
    let cap = (2.0 * (phi2 - 1.0) / (phi2 - 2.0)).ceil() as usize + 2;
    let mut a = 0.0;
    for k in 0..=cap {
        if a >= 2.0 {
            return Some(k);
        }
        a = phi_alpha(a, nu, gamma);
    }
    None
}

/// `(α_k, κ_k)` for an arbitrary index, without early stopping.
pub fn bootstrap_at(nu: f64, gamma: f64, k: usize) -> (f64, f64) {
    let (mut a, mut kap) = (0.0, 0.0);
    for _ in 0..k {
        a = phi_alpha(a, nu, gamma);
        kap += kappa_increment(nu, a);
    }
    (a, kap)
}

/// Blow-up exponent
/// `η = 2(φ(2)-1)/(φ(2)-2) · (13(1+α_*)(2+ν)/ν - 1)`, defined when
/// `φ(2) > 2`.
pub fn eta_exponent(nu: f64, gamma: f64) -> Result<f64> {
    let phi2 = phi_alpha(2.0, nu, gamma);
    if !(phi2 > 2.0) || classify_regime(nu, gamma) != Regime::Full {
        return Err(LabError::Inadmissible(format!(
            "η needs φ(2) > 2 (ν < γ/(4γ+9) = {}), got φ(2) = {phi2}",
            full_threshold(gamma)
        )));
    }
    let a = alpha_star(nu, gamma)?;
    Ok(2.0 * (phi2 - 1.0) / (phi2 - 2.0) * (13.0 * (1.0 + a) * (2.0 + nu) / nu - 1.0))
}

/// Tail exponent `κ = 13(2+ν)(1-ν)(1+γ)/(ν(1+νγ)) - 1`.
pub fn kappa_exponent(nu: f64, gamma: f64) -> Result<f64> {
    if !(nu < density_threshold(gamma)) {
        return Err(LabError::Inadmissible(format!(
            "κ needs ν < γ/(2γ+1) = {}",
            density_threshold(gamma)
        )));
    }
    Ok(13.0 * (2.0 + nu) * (1.0 - nu) * (1.0 + gamma) / (nu * (1.0 + nu * gamma)) - 1.0)
}

/// Sobolev integrability bounds and the Hölder order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevOrders {
    pub p1: f64,
    pub p2: f64,
    pub chi: f64,
}

pub fn sobolev_orders(nu: f64, gamma: f64) -> Result<SobolevOrders> {
    if classify_regime(nu, gamma) != Regime::Full {
        return Err(LabError::Inadmissible(format!(
            "p_1, p_2 need ν < γ/(4γ+9) = {}",
            full_threshold(gamma)
        )));
    }
    let num = 2.0 * (1.0 + nu * (gamma + 2.0));
    let p1 = num / (1.0 - gamma + 11.0 * nu + 5.0 * nu * gamma);
    let p2 = num / (2.0 - gamma + 13.0 * nu + 6.0 * nu * gamma);
    Ok(SobolevOrders {
        p1,
        p2,
        chi: 1.0 - 2.0 / p1,
    })
}

/// `(ν, γ)` of the two-dimensional model matching the three-dimensional
/// inverse-power potential with exponent `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimension3Map {
    pub s: f64,
    pub nu: f64,
    pub gamma: f64,
    /// `ν < γ/(2γ+1)`, equivalently `s > 9`.
    pub density_regime: bool,
    /// `ν < γ/(4γ+9)`, equivalently `s > 16 + √193`.
    pub full_regime: bool,
}

pub fn from_dimension3(s: f64) -> Result<Dimension3Map> {
    if !(s > 5.0) || !s.is_finite() {
        return Err(LabError::Domain(format!(
            "hard potentials need s > 5, got {s}"
        )));
    }
    let nu = 2.0 / (s - 1.0);
    let gamma = (s - 5.0) / (s - 1.0);
    Ok(Dimension3Map {
        s,
        nu,
        gamma,
        density_regime: nu < density_threshold(gamma),
        full_regime: nu < full_threshold(gamma),
    })
}

/// Everything the engine knows about one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub params: KernelParams,
    pub phi0: f64,
    pub phi2: f64,
    pub alpha_star: Option<f64>,
    pub alpha_seq: Vec<f64>,
    pub kappa_seq: Vec<f64>,
    pub k_star: Option<usize>,
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub chi: Option<f64>,
    pub regime: Regime,
    /// Reasons for every absent field.
    pub notes: Vec<String>,
}

impl RegimeReport {
    pub fn compute(params: &KernelParams) -> RegimeReport {
        let (nu, gamma) = (params.nu, params.gamma);
        let mut notes = Vec::new();
        let mut keep = |r: Result<f64>, name: &str| match r {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("{name}: {e}"));
                None
            }
        };
        let alpha_star = keep(alpha_star(nu, gamma), "alpha_star");
        let eta = keep(eta_exponent(nu, gamma), "eta");
        let kappa = keep(kappa_exponent(nu, gamma), "kappa");
        let (alpha_seq, kappa_seq, k_star) = match bootstrap_default(nu, gamma) {
            Ok(b) => (b.alpha, b.kappa, b.k_star),
            Err(e) => {
                notes.push(format!("bootstrap: {e}"));
                (Vec::new(), Vec::new(), None)
            }
        };
        let (p1, p2, chi) = match sobolev_orders(nu, gamma) {
            Ok(o) => (Some(o.p1), Some(o.p2), Some(o.chi)),
            Err(e) => {
                notes.push(format!("sobolev: {e}"));
                (None, None, None)
            }
        };
        RegimeReport {
            params: *params,
            phi0: phi_alpha(0.0, nu, gamma),
            phi2: phi_alpha(2.0, nu, gamma),
            alpha_star,
            alpha_seq,
            kappa_seq,
            k_star,
            eta,
            kappa,
            p1,
            p2,
            chi,
            regime: classify_regime(nu, gamma),
            notes,
        }
    }
}
