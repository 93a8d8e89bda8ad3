use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use boltzmann_lab::config::{load_config, Format, RunConfig, ScheduleSpec, SimSpec, AnalysisSpec, OutputSpec, OUT_DIR_ENV};
use boltzmann_lab::exponents::{from_dimension3, RegimeReport};
use boltzmann_lab::io::{read_snapshots_csv, write_density_csv, write_json, write_snapshots_csv, write_table_csv, Manifest, SnapshotGroup};
use boltzmann_lab::kernel::KernelParams;
use boltzmann_lab::measure::{fit_spatial_decay, fit_time_blowup, kde, radius_quantile, silverman_bandwidth, tail_mass, GridSpec};
use boltzmann_lab::rng::{substream, Purpose};
use boltzmann_lab::sim::{mollify, run_replicas, InitialLaw, Scheme};
use boltzmann_lab::verify::{run_all, Profile};
use boltzmann_lab::{LabError, Result, Vec2};

const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "boltzmann-lab", version, about = "Particle simulation and regularity diagnostics for the 2D non-cutoff Boltzmann equation")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print exponents and the regularity regime for (γ, ν) or a 3D potential exponent s.
    Exponents,
    /// Run the particle system and write snapshots plus a manifest.
    Simulate,
    /// Density estimates, tails and decay fits from a snapshot file.
    Analyze {
        /// Snapshot CSV (defaults to <out>/snapshots.csv).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Verify {
        /// Run only these criteria, e.g. A1,A3.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

#[derive(Args)]
struct Flags {
    /// JSON config file or inline JSON; flags override its values.
    #[arg(long, global = true)]
    config: Option<String>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// Three-dimensional inverse-power exponent; sets γ and ν.
    #[arg(long, global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long = "lambda-prime", global = true)]
    lambda_prime: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    zeta: Option<f64>,
    #[arg(long, global = true)]
    eta0: Option<f64>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    /// Comma-separated snapshot times in (0, t_end].
    #[arg(long = "snapshot-times", global = true, value_delimiter = ',')]
    snapshot_times: Vec<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    scheme: Option<Scheme>,
    #[arg(long, global = true)]
    replicas: Option<u64>,
    #[arg(long = "replica-offset", global = true)]
    replica_offset: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "quick")]
    profile: Profile,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Exponents => cmd_exponents(&cli.flags).map(|_| ExitCode::SUCCESS),
        Command::Simulate => cmd_simulate(&cli.flags).map(|_| ExitCode::SUCCESS),
        Command::Analyze { input } => cmd_analyze(&cli.flags, input.as_deref()).map(|_| ExitCode::SUCCESS),
        Command::Verify { only } => cmd_verify(&cli.flags, only),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn kernel_from_flags(f: &Flags, base: Option<KernelParams>) -> Result<KernelParams> {
    let (mut nu, mut gamma) = base.map_or((0.05, 1.0), |k| (k.nu, k.gamma));
    if let Some(s) = f.s {
        let m = from_dimension3(s).map_err(|e| LabError::config("s", e.to_string()))?;
        nu = m.nu;
        gamma = m.gamma;
    }
    nu = f.nu.unwrap_or(nu);
    gamma = f.gamma.unwrap_or(gamma);
    let moments_given = f.lambda.is_some() || f.lambda_prime.is_some();
    let (lambda, lambda_prime) = match base {
        Some(k) if !moments_given && k.nu == nu && k.gamma == gamma => (k.lambda_moment, k.lambda_prime),
        _ => {
            let lambda = f.lambda.unwrap_or((gamma + 2.0) / 2.0);
            (lambda, f.lambda_prime.unwrap_or(2.0 * lambda / 3.0))
        }
    };
    KernelParams::new(nu, gamma, lambda, lambda_prime)
}

/// Config from `--config` (if any) with flag overrides applied.
fn config_from_flags(f: &Flags) -> Result<RunConfig> {
    let mut c = match &f.config {
        Some(src) => load_config(src)?,
        None => RunConfig {
            kernel: KernelParams::new(0.05, 1.0, 1.5, 1.0)?,
            schedules: vec![ScheduleSpec::new(0.01)],
            sim: SimSpec {
                n: 1000,
                t_end: 1.0,
                snapshot_times: Vec::new(),
                scheme: Scheme::Fictive,
                replicas: 1,
                replica_offset: 0,
                seed: 0,
                initial_law: InitialLaw::maxwellian(),
                symmetric: false,
            },
            analysis: AnalysisSpec::default(),
            output: OutputSpec::default(),
        },
    };
    c.kernel = kernel_from_flags(f, Some(c.kernel))?;
    if f.epsilon.is_some() || f.zeta.is_some() || f.eta0.is_some() {
        for s in &mut c.schedules {
            if let Some(e) = f.epsilon {
                s.epsilon = e;
            }
            if let Some(z) = f.zeta {
                s.zeta = Some(z);
                s.alpha = None;
            }
            if f.eta0.is_some() {
                s.eta0 = f.eta0;
            }
        }
    }
    if let Some(t) = f.t_end {
        c.sim.t_end = t;
        if f.snapshot_times.is_empty() {
            c.sim.snapshot_times.clear();
        }
    }
    if !f.snapshot_times.is_empty() {
        c.sim.snapshot_times = f.snapshot_times.clone();
    }
    if let Some(n) = f.n {
        c.sim.n = n;
    }
    if let Some(s) = f.seed {
        c.sim.seed = s;
    }
    if let Some(s) = f.scheme {
        c.sim.scheme = s;
    }
    if let Some(r) = f.replicas {
        c.sim.replicas = r;
    }
    if let Some(r) = f.replica_offset {
        c.sim.replica_offset = r;
    }
    if f.out.is_some() {
        c.output.dir = f.out.clone();
    }
    for s in &mut c.schedules {
        s.derived = None;
    }
    c.materialize()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "absent".to_string(), |v| format!("{v}"))
}

fn cmd_exponents(f: &Flags) -> Result<()> {
    let params = kernel_from_flags(f, None)?;
    let report = RegimeReport::compute(&params);
    if let Some(s) = f.s {
        let m = from_dimension3(s)?;
        println!("s = {s}: nu = {}, gamma = {}", m.nu, m.gamma);
        println!("density_regime (s > 9) = {}", m.density_regime);
        println!("full_regime (s > 16+sqrt(193)) = {}", m.full_regime);
        if (s - 9.0).abs() < 1e-12 {
            println!("boundary: nu = gamma/(2 gamma + 1)");
        }
    }
    println!("nu = {}, gamma = {}, lambda = {}, lambda' = {}", params.nu, params.gamma, params.lambda_moment, params.lambda_prime);
    println!("regime = {}", report.regime);
    println!("phi(0) = {}, phi(2) = {}", report.phi0, report.phi2);
    println!("alpha_* = {}", fmt_opt(report.alpha_star));
    println!("kappa = {}", fmt_opt(report.kappa));
    println!("eta = {}", fmt_opt(report.eta));
    println!("p1 = {}", fmt_opt(report.p1));
    println!("p2 = {}", fmt_opt(report.p2));
    println!("chi = {}", fmt_opt(report.chi));
    println!("k_* = {}", report.k_star.map_or_else(|| "absent".to_string(), |k| k.to_string()));
    for note in &report.notes {
        println!("note: {note}");
    }
    let doc = json!({ "report": report, "dimension3": f.s.map(from_dimension3).transpose()? });
    println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
    if let Some(dir) = &f.out {
        write_json(&dir.join("exponents.json"), &doc)?;
    }
    Ok(())
}

fn cmd_simulate(f: &Flags) -> Result<()> {
    let c = config_from_flags(f)?;
    let dir = c.output.resolved_dir();
    let schedule = c.schedule(0)?;
    let start = Instant::now();
    let trs = run_replicas(&c.sim_config(0)?, c.sim.replica_offset, c.sim.replicas)?;
    let seconds = start.elapsed().as_secs_f64();
    if c.output.wants(Format::Csv) {
        write_snapshots_csv(&dir.join("snapshots.csv"), &trs)?;
    }
    let manifest = Manifest::new(&c, schedule, &trs, seconds);
    if c.output.wants(Format::Json) {
        write_json(&dir.join("manifest.json"), &manifest)?;
    }
    println!(
        "simulated {} replica(s) of N = {} to t = {} in {:.2}s",
        c.sim.replicas, c.sim.n, c.sim.t_end, seconds
    );
    println!("Gamma_eps = {}, lambda_rate = {}, zeta = {}", schedule.gamma_eps, schedule.rate, schedule.zeta);
    for r in &manifest.replicas {
        println!("replica {}: {} events, {} accepted", r.lineage.replica, r.events, r.accepted);
    }
    println!("output: {}", dir.display());
    Ok(())
}

/// Groups snapshot rows by time, pooling replicas.
fn by_time(groups: &[SnapshotGroup]) -> Vec<(f64, Vec<&SnapshotGroup>)> {
    let mut out: Vec<(f64, Vec<&SnapshotGroup>)> = Vec::new();
    for g in groups {
        match out.last_mut() {
            Some((t, v)) if *t == g.t => v.push(g),
            _ => out.push((g.t, vec![g])),
        }
    }
    out
}

fn cmd_analyze(f: &Flags, input: Option<&Path>) -> Result<()> {
    let c = if f.config.is_some() { Some(config_from_flags(f)?) } else { None };
    let out_dir = f
        .out
        .clone()
        .or_else(|| c.as_ref().and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| out_dir.join("snapshots.csv"));
    let groups = read_snapshots_csv(&input)?;
    if groups.is_empty() {
        return Err(LabError::Parse(format!("{}: no snapshot rows", input.display())));
    }
    let analysis = c.as_ref().map(|c| c.analysis.clone()).unwrap_or_default();
    let lambda_prime = f
        .lambda_prime
        .or(analysis.lambda_prime)
        .or(c.as_ref().map(|c| c.kernel.lambda_prime))
        .unwrap_or(1.0);
    let weighted = analysis.weighted && c.is_some();
    let seed = c.as_ref().map_or(0, |c| c.sim.seed);

    let mut fits = Vec::new();
    let mut sups = Vec::new();
    let mut tail_rows = Vec::new();
    for (idx, (t, gs)) in by_time(&groups).into_iter().enumerate() {
        let mut samples: Vec<Vec2> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for g in &gs {
            if weighted && t > 0.0 {
                let schedule = c.as_ref().expect("weighted needs config").schedule(0)?;
                let e = g.to_ensemble(seed)?;
                let mut rng = substream(seed, g.replica, Purpose::Mollify);
                let m = mollify(&e, t, &schedule, &mut rng)?;
                samples.extend(m.f_samples);
                weights.extend(m.g_weights);
            } else {
                samples.extend_from_slice(&g.velocities);
            }
        }
        let use_weights = weighted && t > 0.0;
        let r999 = radius_quantile(&samples, 0.999)?;
        let r_max = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut r = 0.0;
        while r <= r_max.ceil() {
            tail_rows.push(vec![t, r, tail_mass(&samples, r)]);
            r += 0.5;
        }
        let h = match analysis.bandwidth {
            Some(h) => h,
            None => match silverman_bandwidth(&samples) {
                Ok(h) => h,
                Err(e) => {
                    fits.push(json!({"t": t, "error": e.to_string()}));
                    continue;
                }
            },
        };
        let grid = analysis.grid.unwrap_or_else(|| {
            let reach = r999 + 4.0 * h;
            let nodes = ((2.0 * reach / (0.5 * h)).ceil() as usize + 1).clamp(3, 201);
            GridSpec::square(reach, nodes)
        });
        let est = kde(&samples, use_weights.then_some(weights.as_slice()), h, &grid)?;
        write_density_csv(&out_dir.join(format!("density_{idx:03}.csv")), &est)?;
        if t > 0.0 {
            sups.push((t, est.sup()));
        }
        let annulus = analysis.annulus.unwrap_or((2.0, r999));
        match fit_spatial_decay(&est, lambda_prime, annulus) {
            Ok(fit) => {
                println!("t = {t}: decay slope {:.4} ± {:.4} over |v| in [{:.3}, {:.3}]", fit.slope, fit.stderr, annulus.0, annulus.1);
                fits.push(json!({"t": t, "bandwidth": h, "annulus": annulus, "fit": fit, "sup": est.sup(), "mass": est.mass()}));
            }
            Err(e) => {
                eprintln!("t = {t}: fit error: {e}");
                fits.push(json!({"t": t, "bandwidth": h, "annulus": annulus, "fit_error": e.to_string(), "sup": est.sup(), "mass": est.mass()}));
            }
        }
    }
    write_table_csv(&out_dir.join("tails.csv"), &["t", "r", "tail_mass"], &tail_rows)?;
    let blowup = match fit_time_blowup(&sups) {
        Ok(fit) => json!({"fit": fit, "eta_emp": -fit.slope}),
        Err(e) => json!({"fit_error": e.to_string()}),
    };
    let summary = json!({
        "input": input,
        "lambda_prime": lambda_prime,
        "weighted": weighted,
        "spatial_fits": fits,
        "blowup": blowup,
    });
    write_json(&out_dir.join("analysis.json"), &summary)?;
    println!("output: {}", out_dir.display());
    Ok(())
}

fn cmd_verify(f: &Flags, only: &[String]) -> Result<ExitCode> {
    let seed = f.seed.unwrap_or(1);
    let report = if only.is_empty() {
        run_all(f.profile, seed, |v| println!("{}", v.line()))
    } else {
        let verdicts = only
            .iter()
            .map(|id| {
                let v = boltzmann_lab::verify::run_criterion(id, f.profile, seed)?;
                println!("{}", v.line());
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        boltzmann_lab::verify::Report {
            profile: f.profile,
            seed,
            passed: verdicts.iter().all(|v| v.passed),
            seconds: verdicts.iter().map(|v| v.seconds).sum(),
            verdicts,
            budget_warning: None,
        }
    };
    if let Some(w) = &report.budget_warning {
        eprintln!("warning: {w}");
    }
    for v in &report.verdicts {
        println!("{}", serde_json::to_string(v).expect("verdict serializes"));
    }
    if let Some(dir) = &f.out {
        write_json(&dir.join("verify.json"), &report)?;
    }
    println!(
        "{}: {}/{} criteria passed in {:.1}s",
        if report.passed { "OK" } else { "FAILED" },
        report.verdicts.iter().filter(|v| v.passed).count(),
        report.verdicts.len(),
        report.seconds
    );
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VERIFY_FAILED) })
}
