//! Deterministic collision-kernel mathematics.
//!
//! The angular cross-section is the canonical power law
//! `b(θ) = |θ|^{-(1+ν)}` on `[-π/2, π/2] \ {0}`. With that choice the tail
//! mass `G` and its inverse `g` are closed-form, so the change of variables
//! `b(θ)dθ = dz` used by the jump simulation is exact.

use std::f64::consts::{FRAC_PI_2, E};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::vec2::{Mat2, Vec2};

/// Physical and kernel exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    /// Angular singularity exponent, `0 < ν < 1/2`.
    pub nu: f64,
    /// Hard-potential exponent, `0 < γ ≤ 1`.
    pub gamma: f64,
    /// Exponential moment of the initial law, `γ < λ < 2`.
    #[serde(rename = "lambda")]
    pub lambda_moment: f64,
    /// Working exponent of the weight, `0 < λ' < λ`.
    pub lambda_prime: f64,
}

impl KernelParams {
    pub fn new(nu: f64, gamma: f64, lambda_moment: f64, lambda_prime: f64) -> Result<Self> {
        let p = KernelParams {
            nu,
            gamma,
            lambda_moment,
            lambda_prime,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `λ = (γ+2)/2` and `λ' = 2λ/3`.
    pub fn with_default_moments(nu: f64, gamma: f64) -> Result<Self> {
        let lambda = (gamma + 2.0) / 2.0;
        Self::new(nu, gamma, lambda, 2.0 * lambda / 3.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.nu, self.gamma, self.lambda_moment, self.lambda_prime]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(LabError::config("kernel", "all exponents must be finite"));
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return Err(LabError::config(
                "kernel.nu",
                format!("ν = {} violates 0<ν<1/2", self.nu),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(LabError::config(
                "kernel.gamma",
                format!("γ = {} violates 0<γ≤1", self.gamma),
            ));
        }
        if !(self.lambda_moment > self.gamma && self.lambda_moment < 2.0) {
            return Err(LabError::config(
                "kernel.lambda",
                format!("λ = {} violates γ<λ<2", self.lambda_moment),
            ));
        }
        if !(self.lambda_prime > 0.0 && self.lambda_prime < self.lambda_moment) {
            return Err(LabError::config(
                "kernel.lambda_prime",
                format!("λ' = {} violates 0<λ'<λ", self.lambda_prime),
            ));
        }
        Ok(())
    }

    /// The open interval `(1/λ, 1/(γ∨ν))` admissible for `η_0`.
    pub fn eta0_interval(&self) -> (f64, f64) {
        (1.0 / self.lambda_moment, 1.0 / self.gamma.max(self.nu))
    }

    pub fn default_eta0(&self) -> f64 {
        let (lo, hi) = self.eta0_interval();
        0.5 * (lo + hi)
    }
}

/// Regularisation scales `(ε, ζ, η_0)` and the constants derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSchedule {
    pub epsilon: f64,
    pub zeta: f64,
    pub eta0: f64,
    /// `Γ_ε = (ln 1/ε)^{η_0}`.
    pub gamma_eps: f64,
    /// Per-particle arrival rate `4(G(ζ)+1)Γ_ε^γ`.
    pub rate: f64,
    /// `ζ^{4+ν}`: mollification variance per unit time.
    pub molli_var_coeff: f64,
    /// `G(ζ)`.
    pub g_zeta: f64,
    pub nu: f64,
    pub gamma: f64,
}

impl CutoffSchedule {
    /// Builds a schedule; `eta0 = None` selects the midpoint of the
    /// admissible interval.
    pub fn new(params: &KernelParams, epsilon: f64, zeta: f64, eta0: Option<f64>) -> Result<Self> {
        params.validate()?;
        if !(zeta > 0.0 && zeta < FRAC_PI_2) {
            return Err(LabError::config(
                "zeta",
                format!("ζ = {zeta} must lie in (0, π/2)"),
            ));
        }
        let (lo, hi) = params.eta0_interval();
        let eta0 = eta0.unwrap_or_else(|| params.default_eta0());
        if !(eta0 > lo && eta0 < hi) {
            return Err(LabError::config(
                "eta0",
                format!("η_0 = {eta0} must lie in (1/λ, 1/(γ∨ν)) = ({lo}, {hi})"),
            ));
        }
        let gamma_eps = gamma_eps_of(epsilon, eta0)?;
        if gamma_eps - 1.0 <= 3.0 * epsilon {
            return Err(LabError::config(
                "epsilon",
                format!("Γ_ε - 1 = {} must exceed 3ε = {}", gamma_eps - 1.0, 3.0 * epsilon),
            ));
        }
        let g_zeta = g_tail(zeta, params.nu)?;
        Ok(CutoffSchedule {
            epsilon,
            zeta,
            eta0,
            gamma_eps,
            rate: 4.0 * (g_zeta + 1.0) * gamma_eps.powf(params.gamma),
            molli_var_coeff: zeta.powf(4.0 + params.nu),
            g_zeta,
            nu: params.nu,
            gamma: params.gamma,
        })
    }

    /// Half-width `G(ζ)+1` of the mass-coordinate window.
    #[inline]
    pub fn z_max(&self) -> f64 {
        self.g_zeta + 1.0
    }

    /// Upper end `2Γ_ε^γ` of the thinning variable.
    #[inline]
    pub fn u_max(&self) -> f64 {
        2.0 * self.gamma_eps.powf(self.gamma)
    }

    /// `φ_ε(x)^γ`, the truncated collision rate at relative speed `x`.
    #[inline]
    pub fn collision_rate(&self, relative_speed: f64) -> f64 {
        let clamped = phi_eps_unchecked(relative_speed, self.epsilon, self.gamma_eps);
        if self.gamma == 1.0 {
            clamped
        } else {
            clamped.powf(self.gamma)
        }
    }

    #[inline]
    pub fn cutoff_weight(&self, z: f64) -> f64 {
        cutoff_from_tail(z, self.g_zeta)
    }

    #[inline]
    pub fn angle(&self, z: f64) -> f64 {
        g_inverse_unchecked(z, self.nu)
    }
}

/// `ζ_α(ε) = ε^{(1+γ+α)/(1-ν)}`, the angular cutoff balancing the two
/// approximation errors.
pub fn zeta_for_alpha(epsilon: f64, gamma: f64, nu: f64, alpha: f64) -> f64 {
    epsilon.powf((1.0 + gamma + alpha) / (1.0 - nu))
}

/// Angular cross-section `b(θ) = |θ|^{-(1+ν)}`.
pub fn b_density(theta: f64, nu: f64) -> Result<f64> {
    if theta == 0.0 || !theta.is_finite() || theta.abs() > FRAC_PI_2 {
        return Err(LabError::Domain(format!(
            "b(θ) needs θ in [-π/2, π/2] \\ {{0}}, got {theta}"
        )));
    }
    Ok(theta.abs().powf(-(1.0 + nu)))
}

/// Tail mass `G(x) = ∫_x^{π/2} b(θ) dθ = (x^{-ν} - (π/2)^{-ν})/ν`.
pub fn g_tail(x: f64, nu: f64) -> Result<f64> {
    if !(x > 0.0 && x <= FRAC_PI_2) {
        return Err(LabError::Domain(format!("G(x) needs x in (0, π/2], got {x}")));
    }
    Ok((x.powf(-nu) - FRAC_PI_2.powf(-nu)) / nu)
}

/// Inverse of `G`, extended to negative arguments as an odd function.
pub fn g_inverse(z: f64, nu: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(LabError::Domain(format!("g(z) needs finite z, got {z}")));
    }
    Ok(g_inverse_unchecked(z, nu))
}

#[inline]
fn g_inverse_unchecked(z: f64, nu: f64) -> f64 {
    let theta = (nu * z.abs() + FRAC_PI_2.powf(-nu)).powf(-1.0 / nu);
    if z < 0.0 {
        -theta
    } else {
        theta
    }
}

/// Smooth version of `1{|θ| > ζ}` written in the mass coordinate: equal to
/// 1 on `|z| ≤ G(ζ)` and to 0 on `|z| ≥ G(ζ)+1`.
pub fn smooth_angle_cutoff(z: f64, zeta: f64, nu: f64) -> Result<f64> {
    let g_zeta = g_tail(zeta, nu)?;
    Ok(cutoff_from_tail(z, g_zeta))
}

#[inline]
fn cutoff_from_tail(z: f64, g_zeta: f64) -> f64 {
    1.0 - smoothstep5(z.abs() - g_zeta)
}

/// Quintic smoothstep, clamped to [0, 1] outside the unit interval.
#[inline]
pub(crate) fn smoothstep5(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// `Γ_ε = (ln 1/ε)^{η_0}`.
pub fn gamma_eps_of(epsilon: f64, eta0: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < (-1.0f64).exp()) {
        return Err(LabError::config(
            "epsilon",
            format!("ε = {epsilon} must lie in (0, 1/e) so that ln(1/ε) > 1"),
        ));
    }
    Ok((-epsilon.ln()).powf(eta0))
}

/// Smooth clamp of the identity to `[2ε, Γ_ε]`.
///
/// Equal to `2ε` on `[0, ε]`, to `x` on `[3ε, Γ_ε-1]` and to `Γ_ε` on
/// `[Γ_ε, ∞)`. The two joins are polynomial and make the map `C²` and
/// non-decreasing.
pub fn phi_eps(x: f64, epsilon: f64, gamma_eps: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !gamma_eps.is_finite() {
        return Err(LabError::config("epsilon", "ε must be positive and Γ_ε finite"));
    }
    if gamma_eps - 1.0 <= 3.0 * epsilon {
        return Err(LabError::config(
            "gamma_eps",
            format!("truncation window empty: Γ_ε - 1 = {} ≤ 3ε", gamma_eps - 1.0),
        ));
    }
    if !(x >= 0.0) {
        return Err(LabError::Domain(format!("φ_ε needs x ≥ 0, got {x}")));
    }
    Ok(phi_eps_unchecked(x, epsilon, gamma_eps))
}

#[inline]
fn phi_eps_unchecked(x: f64, epsilon: f64, gamma_eps: f64) -> f64 {
    let upper_start = gamma_eps - 1.0;
    if x <= epsilon {
        2.0 * epsilon
    } else if x < 3.0 * epsilon {
        // slope rises 0 -> 1 along a cubic smoothstep over [ε, 3ε]
        let t = (x - epsilon) / (2.0 * epsilon);
        2.0 * epsilon + 2.0 * epsilon * t * t * t * (1.0 - 0.5 * t)
    } else if x <= upper_start {
        x
    } else if x < gamma_eps {
        // slope falls 1 -> 0 while gaining exactly one unit of height
        let t = x - upper_start;
        upper_start + t + t * t * t * (4.0 + t * (-7.0 + 3.0 * t))
    } else {
        gamma_eps
    }
}

/// `A(θ) = (R_θ - I)/2`.
pub fn deflection_matrix(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2([[0.5 * (c - 1.0), -0.5 * s], [0.5 * s, 0.5 * (c - 1.0)]])
}

/// Post-collisional pair for deflection angle `theta`.
pub fn collide(v: Vec2, v_star: Vec2, theta: f64) -> (Vec2, Vec2) {
    let mid = 0.5 * (v + v_star);
    let half_rel = (0.5 * (v - v_star)).rotate(theta);
    (mid + half_rel, mid - half_rel)
}

/// Jump of a particle at `v` against a partner at `partner`:
/// `A(θ)(v - partner)`.
#[inline]
pub fn deflection(v: Vec2, partner: Vec2, theta: f64) -> Vec2 {
    let rel = v - partner;
    0.5 * (rel.rotate(theta) - rel)
}

/// The bridge `ρ` inside `Φ_{λ'}(v) = e^{ρ(|v|^{λ'})}`.
///
/// `ρ = 1` below 1 and `ρ(u) = u` from `u_hi = min(2, 2^{λ'})` on, so that
/// `Φ_{λ'}(v) = e^{|v|^{λ'}}` whenever `|v| ≥ 2`. In between a quintic
/// matches value, slope and curvature at both ends.
pub fn rho_bridge(u: f64, lambda_prime: f64) -> f64 {
    let u_hi = 2.0f64.min(2.0f64.powf(lambda_prime));
    if u <= 1.0 {
        1.0
    } else if u >= u_hi {
        u
    } else {
        let len = u_hi - 1.0;
        let t = (u - 1.0) / len;
        1.0 + len * t * t * t * (6.0 + t * (-8.0 + 3.0 * t))
    }
}

/// Weight `Φ_{λ'}(v) = e^{ρ(|v|^{λ'})}`.
pub fn weight_phi_lambda(v: Vec2, lambda_prime: f64) -> Result<f64> {
    if !(lambda_prime > 0.0 && lambda_prime < 2.0) {
        return Err(LabError::Domain(format!(
            "Φ_λ' needs λ' in (0, 2), got {lambda_prime}"
        )));
    }
    let u = v.norm().powf(lambda_prime);
    let rho = rho_bridge(u, lambda_prime);
    if rho == 1.0 {
        Ok(E)
    } else {
        Ok(rho.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    /// Adaptive Simpson quadrature, independent of the closed forms above.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, left, tol / 2.0, depth - 1) + rec(f, m, b, right, tol / 2.0, depth - 1)
            }
        }
        rec(f, a, b, simpson(f, a, b), tol, 50)
    }

    #[test]
    fn b_density_values() {
        assert_relative_eq!(b_density(FRAC_PI_2, 0.5).unwrap(), FRAC_PI_2.powf(-1.5));
        assert_relative_eq!(b_density(FRAC_PI_2, 0.5).unwrap(), 0.50795, epsilon = 1e-5);
        assert_relative_eq!(b_density(0.1, 0.25).unwrap(), 17.7828, epsilon = 1e-4);
        assert_eq!(b_density(-0.3, 0.2).unwrap(), b_density(0.3, 0.2).unwrap());
        assert!(b_density(0.0, 0.2).is_err());
        assert!(b_density(1.6, 0.2).is_err());
    }

    #[test]
    fn g_tail_matches_quadrature() {
        assert_eq!(g_tail(FRAC_PI_2, 0.3).unwrap(), 0.0);
        let quad = adaptive_simpson(&|t: f64| t.powf(-1.5), FRAC_PI_4, FRAC_PI_2, 1e-13);
        assert_relative_eq!(quad, 0.660988, epsilon = 2e-6);
        assert_relative_eq!(g_tail(FRAC_PI_4, 0.5).unwrap(), quad, epsilon = 1e-11);
        assert!(g_tail(0.1, 0.3).unwrap() > g_tail(0.2, 0.3).unwrap());
        assert!(g_tail(0.0, 0.3).is_err());
        assert!(g_tail(2.0, 0.3).is_err());
    }

    #[test]
    fn g_inverse_examples() {
        assert_relative_eq!(g_inverse(0.0, 0.3).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        let quad = adaptive_simpson(&|t: f64| t.powf(-1.5), FRAC_PI_4, FRAC_PI_2, 1e-13);
        assert_relative_eq!(g_inverse(quad, 0.5).unwrap(), FRAC_PI_4, epsilon = 1e-10);
        assert_eq!(g_inverse(-1.0, 0.2).unwrap(), -g_inverse(1.0, 0.2).unwrap());
        assert!(g_inverse(f64::NAN, 0.2).is_err());
    }

    #[test]
    fn change_of_variables_preserves_mass() {
        // ∫_{g(z2)}^{g(z1)} b dθ = z2 - z1
        let nu = 0.3;
        let (z1, z2) = (0.7, 4.2);
        let quad = adaptive_simpson(
            &|t: f64| b_density(t, nu).unwrap(),
            g_inverse(z2, nu).unwrap(),
            g_inverse(z1, nu).unwrap(),
            1e-12,
        );
        assert_relative_eq!(quad, z2 - z1, epsilon = 1e-9);
    }

    #[test]
    fn round_trip_grid() {
        for &nu in &[0.1, 0.25, 0.45] {
            for k in 0..=2000 {
                let x = 0.01 + (FRAC_PI_2 - 0.01) * k as f64 / 2000.0;
                let back = g_inverse(g_tail(x, nu).unwrap(), nu).unwrap();
                assert!((back - x).abs() <= 1e-10, "nu={nu} x={x} back={back}");
            }
        }
    }

    #[test]
    fn smooth_cutoff_plateaus() {
        let zeta = 0.1;
        let nu = 0.3;
        let gz = g_tail(zeta, nu).unwrap();
        assert_eq!(smooth_angle_cutoff(0.0, zeta, nu).unwrap(), 1.0);
        assert_eq!(smooth_angle_cutoff(gz, zeta, nu).unwrap(), 1.0);
        assert_eq!(smooth_angle_cutoff(gz + 1.0, zeta, nu).unwrap(), 0.0);
        assert_eq!(smooth_angle_cutoff(-gz - 3.0, zeta, nu).unwrap(), 0.0);
        let mid = smooth_angle_cutoff(gz + 0.5, zeta, nu).unwrap();
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(mid, smooth_angle_cutoff(-gz - 0.5, zeta, nu).unwrap());
        let mut prev = 1.0;
        for k in 0..=1000 {
            let w = smooth_angle_cutoff(gz + k as f64 / 1000.0, zeta, nu).unwrap();
            assert!(w <= prev);
            prev = w;
        }
    }

    #[test]
    fn phi_eps_regions() {
        assert_eq!(phi_eps(5.0, 0.01, 10.0).unwrap(), 5.0);
        assert_eq!(phi_eps(0.005, 0.01, 10.0).unwrap(), 0.02);
        assert_eq!(phi_eps(100.0, 0.01, 10.0).unwrap(), 10.0);
        assert_eq!(phi_eps(0.0, 0.01, 10.0).unwrap(), 0.02);
        assert!(phi_eps(1.0, 0.5, 2.4).is_err());
        assert!(phi_eps(-1.0, 0.01, 10.0).is_err());
    }

    #[test]
    fn phi_eps_is_c2_at_joins() {
        let (eps, gam) = (0.05, 4.0);
        let f = |x: f64| phi_eps(x, eps, gam).unwrap();
        let h = 1e-4;
        for &x0 in &[eps, 3.0 * eps, gam - 1.0, gam] {
            let d_left = (f(x0) - f(x0 - h)) / h;
            let d_right = (f(x0 + h) - f(x0)) / h;
            assert!((d_left - d_right).abs() < 1e-3, "slope jump at {x0}");
            let dd_left = (f(x0) - 2.0 * f(x0 - h) + f(x0 - 2.0 * h)) / (h * h);
            let dd_right = (f(x0 + 2.0 * h) - 2.0 * f(x0 + h) + f(x0)) / (h * h);
            assert!((dd_left - dd_right).abs() < 0.1, "curvature jump at {x0}");
        }
    }

    #[test]
    fn phi_eps_sandwich_and_monotone() {
        let (eps, gam) = (0.01, 3.5);
        let mut prev = 0.0;
        for k in 0..=200_000 {
            let x = 5.0 * k as f64 / 200_000.0;
            let y = phi_eps(x, eps, gam).unwrap();
            assert!(y >= 2.0 * eps && y <= gam);
            assert!(y >= prev);
            prev = y;
        }
    }

    #[test]
    fn gamma_eps_examples() {
        assert_relative_eq!(gamma_eps_of((-4.0f64).exp(), 1.5).unwrap(), 8.0, epsilon = 1e-12);
        assert_relative_eq!(gamma_eps_of((-1.0f64).exp() * (1.0 - 1e-16), 2.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(gamma_eps_of(0.01, 1.2).unwrap(), 6.250213, epsilon = 1e-6);
        assert!(gamma_eps_of(0.5, 1.0).is_err());
        assert!(gamma_eps_of(0.0, 1.0).is_err());
    }

    #[test]
    fn deflection_matrix_values() {
        assert_eq!(deflection_matrix(0.0), Mat2([[0.0, 0.0], [0.0, 0.0]]));
        let m = deflection_matrix(FRAC_PI_2).0;
        let want = [[-0.5, -0.5], [0.5, -0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(m[i][j], want[i][j], epsilon = 1e-15);
            }
        }
        let a = deflection_matrix(0.3);
        assert_relative_eq!(a.operator_norm(), (0.15f64).sin(), epsilon = 1e-14);
        assert!(a.operator_norm() <= 0.15);
    }

    #[test]
    fn deflection_norm_grid() {
        for k in 0..=1000 {
            let theta = -FRAC_PI_2 + PI * k as f64 / 1000.0;
            let a = deflection_matrix(theta);
            assert!((a.operator_norm() - (theta / 2.0).sin().abs()).abs() <= 1e-12);
        }
    }

    #[test]
    fn collide_examples() {
        let v = Vec2::new(0.3, -1.2);
        let (a, b) = collide(v, v, 0.7);
        assert!((a - v).norm() < 1e-15 && (b - v).norm() < 1e-15);
        let (a, b) = collide(Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0), FRAC_PI_2);
        assert!((a - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        assert!((b - Vec2::new(0.0, -1.0)).norm() < 1e-15);
        let w = Vec2::new(2.0, 5.0);
        let (a, b) = collide(v, w, 0.0);
        assert!((a - v).norm() < 1e-15 && (b - w).norm() < 1e-15);
    }

    #[test]
    fn deflection_agrees_with_collide_and_matrix() {
        let v = Vec2::new(0.4, 1.1);
        let w = Vec2::new(-2.0, 0.5);
        let theta = 0.9;
        let (vp, _) = collide(v, w, theta);
        let jump = deflection(v, w, theta);
        assert!((v + jump - vp).norm() < 1e-14);
        assert!((deflection_matrix(theta).apply(v - w) - jump).norm() < 1e-14);
    }

    #[test]
    fn weight_examples() {
        assert_relative_eq!(weight_phi_lambda(Vec2::new(3.0, 0.0), 1.0).unwrap(), 3.0f64.exp());
        assert_eq!(weight_phi_lambda(Vec2::ZERO, 1.0).unwrap(), E);
        assert_relative_eq!(
            weight_phi_lambda(Vec2::new(0.0, 4.0), 0.5).unwrap(),
            2.0f64.exp(),
            epsilon = 1e-12
        );
        assert!(weight_phi_lambda(Vec2::ZERO, 2.0).is_err());
    }

    #[test]
    fn weight_exact_beyond_radius_two() {
        for &lp in &[0.2, 0.5, 1.0, 1.5, 1.9] {
            for k in 0..100 {
                let r = 2.0 + 0.05 * k as f64;
                let w = weight_phi_lambda(Vec2::new(r, 0.0), lp).unwrap();
                assert_relative_eq!(w, r.powf(lp).exp(), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn rho_bridge_smooth_and_monotone() {
        for &lp in &[0.3, 1.0, 1.7] {
            let f = |u: f64| rho_bridge(u, lp);
            let u_hi = 2.0f64.min(2.0f64.powf(lp));
            let h = 1e-5;
            for &u0 in &[1.0, u_hi] {
                let dl = (f(u0) - f(u0 - h)) / h;
                let dr = (f(u0 + h) - f(u0)) / h;
                assert!((dl - dr).abs() < 1e-3);
            }
            let mut prev = 0.0;
            for k in 0..=3000 {
                let u = 3.0 * k as f64 / 3000.0;
                let r = f(u);
                assert!(r >= prev && r >= 1.0);
                prev = r;
            }
        }
    }

    #[test]
    fn weight_monotone_in_speed() {
        let mut prev = 0.0;
        for k in 0..=500 {
            let w = weight_phi_lambda(Vec2::new(0.0, 4.0 * k as f64 / 500.0), 0.7).unwrap();
            assert!(w >= prev);
            prev = w;
        }
    }

    #[test]
    fn schedule_constants() {
        let p = KernelParams::new(0.25, 1.0, 1.5, 1.0).unwrap();
        let s = CutoffSchedule::new(&p, 0.01, 0.05, None).unwrap();
        let eta0 = 0.5 * (1.0 / 1.5 + 1.0);
        assert_relative_eq!(s.eta0, eta0);
        assert_relative_eq!(s.gamma_eps, (100f64).ln().powf(eta0), max_relative = 1e-14);
        let g = (0.05f64.powf(-0.25) - FRAC_PI_2.powf(-0.25)) / 0.25;
        assert_relative_eq!(s.rate, 4.0 * (g + 1.0) * s.gamma_eps, max_relative = 1e-14);
        assert_relative_eq!(s.molli_var_coeff, 0.05f64.powf(4.25));
        assert!(CutoffSchedule::new(&p, 0.01, 0.05, Some(0.5)).is_err());
        assert!(CutoffSchedule::new(&p, 0.5, 0.05, None).is_err());
        assert!(CutoffSchedule::new(&p, 0.01, 2.0, None).is_err());
    }

    #[test]
    fn kernel_params_validation() {
        assert!(KernelParams::new(0.6, 1.0, 1.5, 1.0).is_err());
        assert!(KernelParams::new(0.2, 0.0, 1.5, 1.0).is_err());
        assert!(KernelParams::new(0.2, 1.0, 0.9, 0.5).is_err());
        assert!(KernelParams::new(0.2, 1.0, 1.5, 1.6).is_err());
        assert!(KernelParams::new(0.2, 1.0, 1.5, 1.0).is_ok());
    }

    #[test]
    fn zeta_alpha_example() {
        assert_relative_eq!(zeta_for_alpha(0.01, 1.0, 0.5, 0.0), 1e-8, max_relative = 1e-12);
    }

    /// ln(ε^a e^{C Γ_ε^γ}) with ε = e^{-x}.
    fn log_truncation_term(x: f64, a: f64, c: f64, gamma: f64, eta0: f64) -> f64 {
        -a * x + c * x.powf(gamma * eta0)
    }

    #[test]
    fn truncation_asymptotics_in_log_space() {
        // γη_0 < 1 holds for every admissible η_0 < 1/(γ∨ν)
        let (gamma, eta0) = (1.0, 0.8);
        let xs: Vec<f64> = (0..=60).map(|k| 10f64.powf(k as f64 / 6.0)).collect();
        let vals: Vec<f64> = xs
            .iter()
            .map(|&x| log_truncation_term(x, 0.1, 1.0, gamma, eta0))
            .collect();
        let first_down = vals.windows(2).position(|w| w[1] < w[0]).unwrap();
        assert!(vals[first_down..].windows(2).all(|w| w[1] < w[0]));
        assert!(*vals.last().unwrap() < (1e-6f64).ln());
    }

    #[test]
    fn dual_asymptotics() {
        let eta0 = 0.8;
        let kappa = 2.5;
        let vals: Vec<f64> = (2..=60)
            .map(|n| {
                let eps = 0.5f64.powi(n);
                let gam = gamma_eps_of(eps, eta0).unwrap();
                -5.0 * eps.ln() - gam.powf(kappa)
            })
            .collect();
        let first_down = vals.windows(2).position(|w| w[1] < w[0]).unwrap();
        assert!(vals[first_down..].windows(2).all(|w| w[1] < w[0]));
        assert!(vals.iter().any(|&v| v < (1e-6f64).ln()));
    }
}
