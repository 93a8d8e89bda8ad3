//! Built-in acceptance checks, A1 to A11.
//!
//! Every check runs at fixed seeds and fixed sample sizes, so a rerun with
//! the same profile and seed reproduces the same verdicts.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{LabError, Result};
use crate::exponents::{
    alpha_star, bootstrap_at, classify_regime, density_threshold, eta_exponent, from_dimension3,
    full_threshold, kappa_exponent, phi_alpha, sobolev_orders, Regime,
};
use crate::kernel::{collide, g_inverse, g_tail, phi_eps, zeta_for_alpha, CutoffSchedule, KernelParams};
use crate::measure::{
    bootstrap_mean, coupling_error_curve, exp_moment, fit_spatial_decay, fit_time_blowup, kde,
    ks_velocity, radius_quantile, silverman_bandwidth, tail_mass, DensityEstimate, GridSpec,
};
use crate::rng::{substream, Purpose};
use crate::sim::{coupled_run, mollify, run, run_replicas, InitialLaw, Scheme, SimConfig, Trajectory};
use crate::vec2::Vec2;

pub const CRITERIA: [&str; 11] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11"];

/// Soft budget for the quick profile, in seconds.
pub const QUICK_BUDGET_SECONDS: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Quick,
    Full,
}

impl std::str::FromStr for Profile {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Profile::Quick),
            "full" => Ok(Profile::Full),
            other => Err(LabError::config("profile", format!("unknown profile `{other}`"))),
        }
    }
}

impl Profile {
    /// Particles per replica.
    pub fn n(self) -> usize {
        match self {
            Profile::Quick => 10_000,
            Profile::Full => 100_000,
        }
    }

    pub fn replicas(self) -> u64 {
        match self {
            Profile::Quick => 8,
            Profile::Full => 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub seconds: f64,
    pub details: Value,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "{} {:<4} {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub profile: Profile,
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
    pub seconds: f64,
    /// Set when the quick profile exceeded its time budget.
    pub budget_warning: Option<String>,
}

pub fn title(id: &str) -> &'static str {
    match id {
        "A1" => "exact exponent identities",
        "A2" => "three-dimensional mapping",
        "A3" => "kernel exactness",
        "A4" => "Dirac degeneracy",
        "A5" => "mean conservation",
        "A6" => "scheme equivalence",
        "A7" => "Poisson clock",
        "A8" => "coupling envelope",
        "A9" => "tail decay",
        "A10" => "density regularization and blow-up shape",
        "A11" => "estimator self-tests",
        _ => "unknown",
    }
}

/// Runs one criterion. Internal errors are reported as a failed verdict.
pub fn run_criterion(id: &str, profile: Profile, seed: u64) -> Result<Verdict> {
    let start = Instant::now();
    let outcome = match id {
        "A1" => a1_exact_identities(),
        "A2" => a2_dimension3(),
        "A3" => a3_kernel_exactness(seed),
        "A4" => a4_dirac(seed),
        "A5" => a5_mean_conservation(profile, seed),
        "A6" => a6_scheme_equivalence(seed),
        "A7" => a7_poisson_clock(seed),
        "A8" => a8_coupling_envelope(profile, seed),
        "A9" => a9_tail_decay(seed),
        "A10" => a10_density_blowup(profile, seed),
        "A11" => a11_estimators(seed),
        other => return Err(LabError::config("criterion", format!("unknown criterion `{other}`"))),
    };
    let (passed, details) = match outcome {
        Ok(v) => v,
        Err(e) => (false, json!({ "error": e.to_string() })),
    };
    Ok(Verdict {
        id: id.to_string(),
        title: title(id).to_string(),
        passed,
        seconds: start.elapsed().as_secs_f64(),
        details,
    })
}

/// Runs all criteria in order, calling `on_verdict` as each finishes.
pub fn run_all(profile: Profile, seed: u64, mut on_verdict: impl FnMut(&Verdict)) -> Report {
    let start = Instant::now();
    let verdicts: Vec<Verdict> = CRITERIA
        .iter()
        .map(|id| {
            let v = run_criterion(id, profile, seed).expect("registered criterion");
            on_verdict(&v);
            v
        })
        .collect();
    let seconds = start.elapsed().as_secs_f64();
    let budget_warning = (profile == Profile::Quick && seconds > QUICK_BUDGET_SECONDS)
        .then(|| format!("quick profile took {seconds:.0}s, budget is {QUICK_BUDGET_SECONDS:.0}s"));
    Report {
        profile,
        seed,
        passed: verdicts.iter().all(|v| v.passed),
        verdicts,
        seconds,
        budget_warning,
    }
}

type Outcome = Result<(bool, Value)>;

/// Default lab kernel: γ=1, ν=0.05, λ=1.5, λ'=1.
pub fn lab_params() -> KernelParams {
    KernelParams::new(0.05, 1.0, 1.5, 1.0).expect("valid defaults")
}

/// Schedule at `ε` with `ζ = ζ_0(ε)` and the midpoint `η_0`.
pub fn lab_schedule(params: &KernelParams, epsilon: f64) -> Result<CutoffSchedule> {
    let zeta = zeta_for_alpha(epsilon, params.gamma, params.nu, 0.0);
    CutoffSchedule::new(params, epsilon, zeta, None)
}

fn two_point_law() -> InitialLaw {
    InitialLaw::TwoPoint {
        a: [-1.0, 0.0],
        b: [1.0, 0.0],
        w: 0.5,
    }
}

fn base_config(params: KernelParams, schedule: CutoffSchedule, law: InitialLaw, n: usize, t_end: f64, seed: u64) -> SimConfig {
    SimConfig {
        params,
        schedule,
        initial_law: law,
        n,
        t_end,
        snapshot_times: vec![t_end],
        scheme: Scheme::Fictive,
        master_seed: seed,
        replica: 0,
        symmetric: false,
    }
}

/// Fixed-point iteration of `φ` from 0, stopped once the geometric tail of
/// the remaining steps is below `1e-13`.
fn iterate_fixed_point(nu: f64, gamma: f64) -> f64 {
    let mut a = 0.0;
    let mut prev_step = f64::NAN;
    for _ in 0..10_000_000 {
        let next = phi_alpha(a, nu, gamma);
        let step = next - a;
        if step.abs() <= 1e-16 * (1.0 + next.abs()) {
            return next;
        }
        let r = step / prev_step;
        if r > 0.0 && r < 1.0 && step.abs() * r / (1.0 - r) < 1e-13 {
            return next;
        }
        prev_step = step;
        a = next;
    }
    a
}

fn a1_exact_identities() -> Outcome {
    let mut counts = [0usize; 4];
    let (mut worst_alpha, mut worst_kappa, mut worst_p) = (0.0f64, 0.0f64, 0.0f64);
    let mut sign_mismatches = 0usize;
    for i in 0..50 {
        let gamma = (i + 1) as f64 / 50.0;
        for j in 0..50 {
            let nu = (j as f64 + 0.5) / 100.0;
            let regime = classify_regime(nu, gamma);
            counts[regime as usize] += 1;
            let phi0 = phi_alpha(0.0, nu, gamma);
            let phi2 = phi_alpha(2.0, nu, gamma);
            let (dt, ft) = (density_threshold(gamma), full_threshold(gamma));
            if (nu - dt).abs() > 1e-9 && (phi0 > 0.0) != (nu < dt) {
                sign_mismatches += 1;
            }
            if (nu - ft).abs() > 1e-9 && (phi2 - 2.0 > 0.0) != (nu < ft) {
                sign_mismatches += 1;
            }
            if regime >= Regime::Density {
                let closed = alpha_star(nu, gamma)?;
                let iterate = iterate_fixed_point(nu, gamma);
                worst_alpha = worst_alpha.max((closed - iterate).abs());
                let kappa = kappa_exponent(nu, gamma)?;
                let (_, kappa1) = bootstrap_at(nu, gamma, 1);
                worst_kappa = worst_kappa.max((kappa - kappa1).abs() / kappa.abs().max(1.0));
            }
            if regime == Regime::Full {
                let o = sobolev_orders(nu, gamma)?;
                for (q, p) in [(1.0, o.p1), (2.0, o.p2)] {
                    let want = 2.0 / (q + 2.0 - phi2);
                    worst_p = worst_p.max((p - want).abs() / want.abs().max(1.0));
                }
            }
        }
    }
    let every_regime_hit = counts.iter().all(|&c| c > 0);
    let passed = every_regime_hit
        && worst_alpha <= 1e-10
        && worst_kappa <= 1e-10
        && worst_p <= 1e-10
        && sign_mismatches == 0;
    Ok((
        passed,
        json!({
            "grid": "gamma = k/50, nu = (j+0.5)/100",
            "points_per_regime": {"NONE": counts[0], "DENSITY": counts[1], "W1P": counts[2], "FULL": counts[3]},
            "max_alpha_star_error": worst_alpha,
            "max_kappa_identity_error": worst_kappa,
            "max_p_identity_error": worst_p,
            "sign_mismatches": sign_mismatches,
            "tolerance": 1e-10,
        }),
    ))
}

fn a2_dimension3() -> Outcome {
    let m9 = from_dimension3(9.0)?;
    let boundary_gap = (m9.nu - density_threshold(m9.gamma)).abs();
    let below = from_dimension3(29.892)?;
    let above = from_dimension3(29.893)?;
    // bisection for the full-regime switch
    let (mut lo, mut hi) = (20.0, 40.0);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if from_dimension3(mid)?.full_regime {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let switch = 0.5 * (lo + hi);
    let exact = 16.0 + 193f64.sqrt();
    let passed = boundary_gap <= 1e-12
        && !m9.density_regime
        && from_dimension3(9.0 + 1e-9)?.density_regime
        && !below.full_regime
        && above.full_regime
        && (switch - exact).abs() <= 1e-6;
    Ok((
        passed,
        json!({
            "s9": m9,
            "s9_boundary_gap": boundary_gap,
            "full_at_29.892": below.full_regime,
            "full_at_29.893": above.full_regime,
            "full_switch_bisected": switch,
            "full_switch_exact": exact,
        }),
    ))
}

fn a3_kernel_exactness(seed: u64) -> Outcome {
    let mut worst_round_trip = 0.0f64;
    for &nu in &[0.1, 0.25, 0.45] {
        for k in 0..=2000 {
            let x = if k <= 1000 {
                1e-6 * (FRAC_PI_2 / 1e-6).powf(k as f64 / 1000.0)
            } else {
                FRAC_PI_2 * (k - 1000) as f64 / 1000.0
            };
            if !(x > 0.0 && x <= FRAC_PI_2) {
                continue;
            }
            let back = g_inverse(g_tail(x, nu)?, nu)?;
            worst_round_trip = worst_round_trip.max((back - x).abs());
        }
    }

    let mut rng = substream(seed, 0, Purpose::Synthetic);
    let (mut worst_p, mut worst_e) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let mut draw = || Vec2::new(scale * rng.sample::<f64, _>(StandardNormal), scale * rng.sample::<f64, _>(StandardNormal));
        let (v, w) = (draw(), draw());
        let theta = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
        let (a, b) = collide(v, w, theta);
        let p_scale = v.norm() + w.norm();
        let e_scale = v.norm_sq() + w.norm_sq();
        worst_p = worst_p.max(((a + b) - (v + w)).norm() / p_scale);
        worst_e = worst_e.max((a.norm_sq() + b.norm_sq() - e_scale).abs() / e_scale);
    }

    let eps = 0.01;
    let sched = lab_schedule(&lab_params(), eps)?;
    let g = sched.gamma_eps;
    let mut region_mismatches = 0usize;
    for k in 0..=1000 {
        let f = k as f64 / 1000.0;
        let low = eps * f;
        if phi_eps(low, eps, g)? != 2.0 * eps {
            region_mismatches += 1;
        }
        let mid = 3.0 * eps + f * (g - 1.0 - 3.0 * eps);
        if phi_eps(mid, eps, g)? != mid {
            region_mismatches += 1;
        }
        let high = g + 10.0 * f;
        if phi_eps(high, eps, g)? != g {
            region_mismatches += 1;
        }
    }
    let passed = worst_round_trip <= 1e-10 && worst_p <= 1e-12 && worst_e <= 1e-12 && region_mismatches == 0;
    Ok((
        passed,
        json!({
            "max_round_trip_error": worst_round_trip,
            "max_relative_momentum_error": worst_p,
            "max_relative_energy_error": worst_e,
            "phi_eps_region_mismatches": region_mismatches,
            "gamma_eps": g,
        }),
    ))
}

fn a4_dirac(seed: u64) -> Outcome {
    let params = lab_params();
    let schedule = lab_schedule(&params, 0.01)?;
    let v0 = Vec2::new(1.0, -0.5);
    let law = InitialLaw::Dirac { v0: [v0.x, v0.y] };
    let mut moved = 0usize;
    let mut events = Vec::new();
    for scheme in [Scheme::Fictive, Scheme::Real] {
        let mut cfg = base_config(params, schedule, law.clone(), 1000, 1.0, seed);
        cfg.scheme = scheme;
        cfg.snapshot_times = vec![0.25, 0.5, 1.0];
        let tr = run(&cfg)?;
        for s in &tr.snapshots {
            moved += s.velocities.iter().filter(|&&v| v != v0).count();
            moved += s.running_max.iter().filter(|&&m| m != v0.norm()).count();
        }
        events.push(json!({"scheme": scheme, "events": tr.events, "accepted": tr.accepted}));
    }
    Ok((moved == 0, json!({ "moved": moved, "runs": events })))
}

fn a5_mean_conservation(profile: Profile, seed: u64) -> Outcome {
    let params = lab_params();
    let schedule = lab_schedule(&params, 0.01)?;
    let cfg = base_config(params, schedule, InitialLaw::maxwellian(), profile.n(), 1.0, seed);
    let trs = run_replicas(&cfg, 0, profile.replicas())?;
    let (mut dx, mut dy, mut de) = (Vec::new(), Vec::new(), Vec::new());
    for tr in &trs {
        let end = tr.snapshot_at(1.0).ok_or_else(|| LabError::Estimation("missing snapshot".into()))?;
        for (a, b) in tr.initial.velocities.iter().zip(&end.velocities) {
            dx.push(b.x - a.x);
            dy.push(b.y - a.y);
            de.push(b.norm_sq() - a.norm_sq());
        }
    }
    let mut passed = true;
    let mut out = serde_json::Map::new();
    for (name, vals, off) in [("momentum_x", &dx, 0), ("momentum_y", &dy, 1), ("energy", &de, 2)] {
        let b = bootstrap_mean(vals, 1000, seed.wrapping_add(off))?;
        let ok = b.mean.abs() <= 3.0 * b.se;
        passed &= ok;
        out.insert(name.into(), json!({"drift": b.mean, "bootstrap_se": b.se, "z": b.mean / b.se, "pass": ok}));
    }
    out.insert("n".into(), json!(profile.n()));
    out.insert("replicas".into(), json!(profile.replicas()));
    Ok((passed, Value::Object(out)))
}

fn pooled(trs: &[Trajectory], t: f64) -> Result<Vec<Vec2>> {
    let mut all = Vec::new();
    for tr in trs {
        let s = tr
            .snapshot_at(t)
            .ok_or_else(|| LabError::Estimation(format!("missing snapshot at t={t}")))?;
        all.extend_from_slice(&s.velocities);
    }
    Ok(all)
}

fn a6_scheme_equivalence(seed: u64) -> Outcome {
    let params = lab_params();
    let schedule = lab_schedule(&params, 0.01)?;
    let law = InitialLaw::UniformDisc { r: 2.0, center: [0.0, 0.0] };
    let mut cfg = base_config(params, schedule, law, 2000, 0.5, seed);
    let fictive = run_replicas(&cfg, 0, 50)?;
    cfg.scheme = Scheme::Real;
    let real = run_replicas(&cfg, 50, 50)?;
    let a = pooled(&fictive, 0.5)?;
    let b = pooled(&real, 0.5)?;
    let tests = ks_velocity(&a, &b)?;
    let level = 0.01 / 3.0;
    let passed = tests.iter().all(|t| !t.rejects_at(level));
    Ok((
        passed,
        json!({
            "bonferroni_level": level,
            "vx": tests[0], "vy": tests[1], "speed": tests[2],
            "fictive_events": fictive.iter().map(|t| t.accepted).sum::<u64>(),
            "real_events": real.iter().map(|t| t.accepted).sum::<u64>(),
        }),
    ))
}

fn a7_poisson_clock(seed: u64) -> Outcome {
    let params = lab_params();
    let schedules = [
        lab_schedule(&params, 0.01)?,
        CutoffSchedule::new(&params, 0.01, 0.1, None)?,
        lab_schedule(&params, 0.001)?,
    ];
    let (n, t) = (2000, 1.0);
    let mut passed = true;
    let mut rows = Vec::new();
    for (k, s) in schedules.iter().enumerate() {
        let mut cfg = base_config(params, *s, InitialLaw::maxwellian(), n, t, seed);
        cfg.replica = k as u64;
        let tr = run(&cfg)?;
        let expected = n as f64 * s.rate * t;
        let z = (tr.events as f64 - expected) / expected.sqrt();
        let ok = z.abs() <= 4.0;
        passed &= ok;
        rows.push(json!({"epsilon": s.epsilon, "zeta": s.zeta, "rate": s.rate, "expected": expected, "events": tr.events, "z": z, "pass": ok}));
    }
    Ok((passed, json!({ "schedules": rows })))
}

fn a8_coupling_envelope(profile: Profile, seed: u64) -> Outcome {
    let params = KernelParams::new(0.25, 1.0, 1.5, 1.0)?;
    let eps = 0.01;
    let ladder = [0.2, 0.1, 0.05, 0.025];
    let zeta_ref = 0.01;
    let mut zetas = ladder.to_vec();
    zetas.push(zeta_ref);
    let schedules: Vec<CutoffSchedule> = zetas
        .iter()
        .map(|&z| CutoffSchedule::new(&params, eps, z, None))
        .collect::<Result<_>>()?;
    let mut cfg = base_config(params, schedules[0], InitialLaw::maxwellian(), profile.n(), 1.0, seed);
    cfg.snapshot_times = vec![0.125, 1.0];
    let coupled: Vec<Vec<Trajectory>> = (0..profile.replicas())
        .into_par_iter()
        .map(|r| coupled_run(&cfg.with_replica(r), &schedules))
        .collect::<Result<_>>()?;
    let curve = coupling_error_curve(&coupled, &zetas, ladder.len(), 1.0, seed)?;
    let early = coupling_error_curve(&coupled, &zetas, ladder.len(), 0.125, seed)?;
    let pts = &curve.points;

    let monotone_violations: Vec<usize> = (1..pts.len())
        .filter(|&k| pts[k].ci_low > pts[k - 1].ci_high)
        .collect();
    let power = 1.0 - params.nu;
    let c_upper = pts[0].ci_high / pts[0].zeta.powf(power);
    let envelope: Vec<Value> = pts
        .iter()
        .map(|p| {
            let bound = c_upper * p.zeta.powf(power);
            json!({
                "zeta": p.zeta,
                "mean_error": p.mean_error,
                "ci": [p.ci_low, p.ci_high],
                "log_error_minus_power_log_zeta": p.mean_error.ln() - power * p.zeta.ln(),
                "envelope": bound,
                "within": p.ci_low <= bound,
            })
        })
        .collect();
    let within = pts.iter().all(|p| p.ci_low <= c_upper * p.zeta.powf(power));
    let positive = pts.iter().all(|p| p.mean_error > 0.0);
    Ok((
        monotone_violations.is_empty() && within && positive,
        json!({
            "zeta_ref": zeta_ref,
            "epsilon": eps,
            "fitted_c": c_upper,
            "points": envelope,
            "monotone_violations": monotone_violations,
            "loglog_slope": curve.slope,
            "short_horizon": {
                "t": early.t,
                "mean_errors": early.points.iter().map(|p| p.mean_error).collect::<Vec<_>>(),
                "loglog_slope": early.slope,
            },
            "n": profile.n(),
            "replicas": profile.replicas(),
        }),
    ))
}

fn a9_tail_decay(seed: u64) -> Outcome {
    let params = lab_params();
    let schedule = lab_schedule(&params, 0.01)?;
    let cfg = base_config(params, schedule, two_point_law(), 100_000, 1.0, seed);
    let tr = run(&cfg)?;
    let end = tr.snapshot_at(1.0).ok_or_else(|| LabError::Estimation("missing snapshot".into()))?;
    let mut passed = true;
    let mut tails = Vec::new();
    for r in [2.0, 3.0, 4.0] {
        let m = tail_mass(&end.velocities, r);
        // an empty tail is infinitely light and passes
        let ratio = if m > 0.0 { -m.ln() / r } else { f64::INFINITY };
        let ok = ratio >= 0.2;
        passed &= ok;
        tails.push(json!({"r": r, "tail_mass": m, "ratio": if ratio.is_finite() { json!(ratio) } else { json!("inf") }, "pass": ok}));
    }
    let m0 = exp_moment(&tr.initial.velocities, 1.0, seed)?;
    let m1 = exp_moment(&end.velocities, 1.0, seed)?;
    let growth = m1.mean / m0.mean;
    let moment_ok = m1.mean.is_finite() && (1.0 / 3.0..=3.0).contains(&growth);
    Ok((
        passed && moment_ok,
        json!({
            "tails": tails,
            "exp_moment_t0": m0,
            "exp_moment_t1": m1,
            "growth": growth,
            "moment_pass": moment_ok,
        }),
    ))
}

/// Weighted density estimate of the mollified ensemble.
fn weighted_estimate(samples: &[Vec2], weights: &[f64]) -> Result<DensityEstimate> {
    let h = silverman_bandwidth(samples)?;
    let reach = radius_quantile(samples, 0.999)? + 4.0 * h;
    let nodes = ((2.0 * reach / (0.5 * h)).ceil() as usize + 1).clamp(3, 201);
    kde(samples, Some(weights), h, &GridSpec::square(reach, nodes))
}

fn a10_density_blowup(profile: Profile, seed: u64) -> Outcome {
    let params = lab_params();
    let schedule = lab_schedule(&params, 0.01)?;
    let times = [0.05, 0.1, 0.2, 0.5, 1.0];
    let mut cfg = base_config(params, schedule, two_point_law(), profile.n(), 1.0, seed);
    cfg.snapshot_times = times.to_vec();
    let replicas = profile.replicas().min(8);
    let trs = run_replicas(&cfg, 0, replicas)?;
    let mut sups = Vec::new();
    let mut rows = Vec::new();
    for &t in &times {
        let (mut samples, mut weights) = (Vec::new(), Vec::new());
        for tr in &trs {
            let e = tr.snapshot_at(t).ok_or_else(|| LabError::Estimation(format!("missing snapshot at {t}")))?;
            let mut rng = substream(seed, e.lineage.replica, Purpose::Mollify);
            let m = mollify(e, t, &schedule, &mut rng)?;
            samples.extend(m.f_samples);
            weights.extend(m.g_weights);
        }
        let est = weighted_estimate(&samples, &weights)?;
        let sup = est.sup();
        sups.push((t, sup));
        rows.push(json!({"t": t, "sup": sup, "bandwidth": est.bandwidth, "finite": sup.is_finite() && sup > 0.0}));
    }
    let all_finite = sups.iter().all(|&(_, s)| s.is_finite() && s > 0.0);
    let fit = fit_time_blowup(&sups)?;
    let eta_emp = -fit.slope;
    let eta = eta_exponent(params.nu, params.gamma).ok();
    let envelope_ok = eta_emp.is_finite() && eta.is_none_or(|e| eta_emp <= e);
    Ok((
        all_finite && envelope_ok,
        json!({
            "sups": rows,
            "eta_emp": eta_emp,
            "eta": eta,
            "fit": fit,
            "note": "η is a non-sharp upper bound; this is a sanity envelope only",
        }),
    ))
}

fn a11_estimators(seed: u64) -> Outcome {
    let grid = GridSpec::square(6.0, 121);
    let planted = |f: &dyn Fn(f64) -> f64| DensityEstimate {
        grid,
        bandwidth: grid.dx(),
        values: (0..grid.len()).map(|k| f(grid.point(k).norm())).collect(),
        n_samples: 0,
        weights_used: false,
    };
    let exp_fit = fit_spatial_decay(&planted(&|r| (-r).exp() / (2.0 * PI)), 1.0, (2.0, 5.5))?;
    let gauss_fit = fit_spatial_decay(&planted(&|r| (-r * r / 2.0).exp() / (2.0 * PI)), 2.0, (2.0, 5.5))?;

    let mut rng = substream(seed, 1, Purpose::Synthetic);
    let samples: Vec<Vec2> = (0..20_000)
        .map(|_| Vec2::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let h = silverman_bandwidth(&samples)?;
    let est = kde(&samples, None, h, &GridSpec::covering(&samples, 5.0 * h, 0.5 * h)?)?;
    let mass = est.mass();

    let exp_ok = (exp_fit.slope + 1.0).abs() <= 0.05;
    let gauss_ok = (gauss_fit.slope + 0.5).abs() <= 0.05;
    let mass_ok = (mass - 1.0).abs() <= 0.02;
    Ok((
        exp_ok && gauss_ok && mass_ok,
        json!({
            "exponential_slope": exp_fit.slope,
            "gaussian_slope": gauss_fit.slope,
            "kde_mass": mass,
            "bandwidth": h,
        }),
    ))
}
