use boltzmann_lab::kernel::{CutoffSchedule, KernelParams};
use boltzmann_lab::rng::SeedLineage;
use boltzmann_lab::sim::{coupled_run, fictive_step, run, run_replicas, Ensemble, EventDraw, InitialLaw, Scheme, SimConfig};
use boltzmann_lab::Vec2;
use proptest::prelude::*;

fn params() -> KernelParams {
    KernelParams::new(0.05, 1.0, 1.5, 1.0).unwrap()
}

fn config(zeta: f64, n: usize, t_end: f64, seed: u64) -> SimConfig {
    let p = params();
    SimConfig {
        params: p,
        schedule: CutoffSchedule::new(&p, 0.01, zeta, None).unwrap(),
        initial_law: InitialLaw::maxwellian(),
        n,
        t_end,
        snapshot_times: vec![t_end / 2.0, t_end],
        scheme: Scheme::Fictive,
        master_seed: seed,
        replica: 0,
        symmetric: false,
    }
}

#[test]
fn candidate_count_matches_clock_rate() {
    let cfg = config(0.1, 500, 0.5, 21);
    let expected = cfg.n as f64 * cfg.schedule.rate * cfg.t_end;
    let trs = run_replicas(&cfg, 0, 4).unwrap();
    let total: u64 = trs.iter().map(|t| t.events).sum();
    let mean = 4.0 * expected;
    assert!(((total as f64) - mean).abs() < 5.0 * mean.sqrt(), "{total} vs {mean}");
    for t in &trs {
        assert!(t.accepted <= t.events);
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = config(0.1, 200, 0.3, 4);
    assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    assert_ne!(run(&cfg).unwrap(), run(&cfg.with_replica(1)).unwrap());
}

#[test]
fn running_max_dominates_and_grows() {
    let tr = run(&config(0.05, 300, 0.4, 8)).unwrap();
    let mut prev = tr.initial.running_max.clone();
    for s in &tr.snapshots {
        for ((v, m), p) in s.velocities.iter().zip(&s.running_max).zip(&prev) {
            assert!(*m >= v.norm());
            assert!(m >= p);
        }
        prev = s.running_max.clone();
    }
}

#[test]
fn symmetric_jumps_conserve_momentum() {
    let mut cfg = config(0.1, 400, 0.5, 13);
    cfg.symmetric = true;
    let tr = run(&cfg).unwrap();
    let p0 = tr.initial.momentum();
    for s in &tr.snapshots {
        assert!((s.momentum() - p0).norm() < 1e-12);
    }
}

#[test]
fn coupled_run_with_equal_schedules_matches_plain_run() {
    let cfg = config(0.1, 200, 0.3, 31);
    let pair = coupled_run(&cfg, &[cfg.schedule, cfg.schedule]).unwrap();
    assert_eq!(pair[0], pair[1]);
    assert_eq!(pair[0], run(&cfg).unwrap());
}

#[test]
fn coupled_run_shares_the_candidate_stream() {
    let cfg = config(0.2, 200, 0.3, 32);
    let finer = CutoffSchedule::new(&cfg.params, 0.01, 0.05, None).unwrap();
    let pair = coupled_run(&cfg, &[cfg.schedule, finer]).unwrap();
    assert_eq!(pair[0].events, pair[1].events);
    assert_eq!(pair[0].initial, pair[1].initial);
}

#[test]
fn coupled_run_rejects_real_scheme() {
    let mut cfg = config(0.1, 50, 0.1, 1);
    cfg.scheme = Scheme::Real;
    let e = coupled_run(&cfg, &[cfg.schedule, cfg.schedule]).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn real_scheme_preserves_a_dirac_ensemble() {
    let mut cfg = config(0.1, 100, 0.5, 2);
    cfg.scheme = Scheme::Real;
    cfg.initial_law = InitialLaw::Dirac { v0: [1.0, 2.0] };
    let tr = run(&cfg).unwrap();
    for s in &tr.snapshots {
        assert!(s.velocities.iter().all(|v| *v == Vec2::new(1.0, 2.0)));
    }
}

#[test]
fn bad_snapshot_times_are_config_errors() {
    let mut cfg = config(0.1, 50, 1.0, 1);
    cfg.snapshot_times = vec![0.5, 0.5];
    assert_eq!(run(&cfg).unwrap_err().exit_code(), 2);
    cfg.snapshot_times = vec![1.5];
    assert_eq!(run(&cfg).unwrap_err().exit_code(), 2);
}

fn vec2() -> impl Strategy<Value = Vec2> {
    (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fictive_step_moves_only_the_jumping_particle(
        vs in prop::collection::vec(vec2(), 3..12),
        i_raw in 0usize..100,
        j_raw in 0usize..100,
        z_frac in -1.0f64..1.0,
        u_frac in 0.0f64..1.0,
    ) {
        let p = params();
        let schedule = CutoffSchedule::new(&p, 0.01, 0.1, None).unwrap();
        let n = vs.len();
        let i = i_raw % n;
        let j = (i + 1 + j_raw % (n - 1)) % n;
        let mut e = Ensemble::from_velocities(vs.clone(), SeedLineage::new(0, 0)).unwrap();
        let ev = EventDraw {
            t_event: 0.0,
            particle: i,
            partner: j,
            z: z_frac * schedule.z_max(),
            u: u_frac * schedule.u_max(),
        };
        let out = fictive_step(&mut e, &ev, &schedule);
        for (k, (now, was)) in e.velocities.iter().zip(&vs).enumerate() {
            if k != i {
                prop_assert_eq!(now, was);
            }
        }
        prop_assert_eq!(e.velocities[i], vs[i] + out.displacement);
        if !out.accepted {
            prop_assert_eq!(out.displacement, Vec2::ZERO);
        }
        // a rotation of the relative velocity by at most π/2 about the partner
        let before = (vs[i] - vs[j]).norm();
        let after = (e.velocities[i] - vs[j]).norm();
        prop_assert!(out.displacement.norm() <= std::f64::consts::SQRT_2 * before + 1e-12);
        prop_assert!(after <= before + 1e-12);
    }
}
