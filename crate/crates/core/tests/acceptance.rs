//! Acceptance suite. Each test prints one `PASS` or `FAIL` line and fails when its criterion does.

mod common;

use std::time::{Duration, Instant};

use common::{median, oracle_channel, oracle_worst, tiny};
use merisc::beamforming::DEFAULT_RTOL;
use merisc::config::{Setup, TableConfig};
use merisc::em::{calibrate_state_table, verify_calibration};
use merisc::ga::{adaptive_rates, optimize_step, GaParams, MemoryPool};
use merisc::linalg::pseudo_inverse;
use merisc::qos::{evaluate_cost, EvalContext};
use merisc::scenario::{gen_aperiodic, rescore, run, Ground, Mobility, RunResult, Trajectory, TrajectoryKind, Variant};
use merisc::scene::{UserArea, UserSnapshot};
use merisc::{seeds, units, C64};
use nalgebra::DMatrix;
use rand::Rng;

const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!("{} criterion {id:>2} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn rel_norm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn criterion_01_zero_forcing_identity() {
    let start = Instant::now();
    let mut rng = seeds::rng(101, &[]);
    let (mut worst_offdiag, mut worst_axiom) = (0.0f64, 0.0f64);
    let mut full_rank = 0;
    for _ in 0..100 {
        let y = DMatrix::from_fn(3, 16, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let (p, rank) = pseudo_inverse(&y, DEFAULT_RTOL);
        if rank == 3 {
            full_rank += 1;
        }
        let yp = &y * &p;
        let py = &p * &y;
        let scale = y.norm();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    worst_offdiag = worst_offdiag.max(yp[(i, j)].norm() / scale);
                }
            }
        }
        worst_axiom = worst_axiom
            .max(rel_norm(&(&yp * &y), &y))
            .max(rel_norm(&(&py * &p), &p))
            .max((yp.adjoint() - &yp).norm() / yp.norm())
            .max((py.adjoint() - &py).norm() / py.norm());
    }
    let elapsed = start.elapsed();
    let pass = full_rank == 100 && worst_offdiag < 1e-9 && worst_axiom < 1e-9 && elapsed < Duration::from_secs(5);
    verdict(
        1,
        "zero-forcing identity",
        pass,
        format!(
            "{full_rank}/100 full rank, max off-diagonal {worst_offdiag:.1e}·‖Υ‖, max axiom residual {worst_axiom:.1e}, {}",
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_02_brute_force_equivalence() {
    let start = Instant::now();
    let (scene, table, snap) = tiny();
    let (power, noise) = (units::dbm_to_watts(46.0), units::dbm_to_watts(-96.0));
    let ctx = EvalContext::new(&scene, &table, &snap, power, noise).unwrap();
    let mut max_rel = 0.0f64;
    let mut best: Option<(merisc::em::RisConfiguration, f64)> = None;
    for config in common::all_configs(4, 2) {
        let fast = evaluate_cost(&config, &ctx).unwrap();
        let oracle_cost = 1.0 / oracle_worst(&oracle_channel(&scene, &table, &config, &snap.positions), power, noise);
        max_rel = max_rel.max((fast.cost - oracle_cost).abs() / oracle_cost);
        if best.as_ref().is_none_or(|(_, c)| oracle_cost < *c) {
            best = Some((config, oracle_cost));
        }
    }
    let (optimum, _) = best.unwrap();
    let params = GaParams { population_size: 20, max_iterations: 100, ..GaParams::default() };
    let hits = SEEDS
        .filter(|&seed| {
            let out = optimize_step(&ctx, &params, &mut MemoryPool::new(params.memory_capacity), 1, &mut seeds::rng(seed, &[1]))
                .unwrap();
            out.best == optimum
        })
        .count();
    let elapsed = start.elapsed();
    let pass = max_rel < 1e-10 && hits >= 9 && elapsed < Duration::from_secs(30);
    verdict(
        2,
        "brute-force equivalence",
        pass,
        format!("max relative cost error {max_rel:.1e} over 16 configurations, optimum {optimum} found in {hits}/10 seeds, {}", secs(elapsed)),
    );
}

#[test]
fn criterion_03_adaptive_rate_endpoints() {
    let p = GaParams::default();
    let high = adaptive_rates(p.sigma_max, &p);
    let low = adaptive_rates(0.0, &p);
    let pass = high == (0.02, 0.95) && low == (0.06, 0.60);
    verdict(3, "adaptive-rate endpoints", pass, format!("σ=σ_max → {high:?}, σ=0 → {low:?}"));
}

#[test]
fn criterion_04_monotone_convergence() {
    let setup = common::desk_setup(4);
    assert_eq!(setup.trajectory.num_steps(), 20);
    assert_eq!((setup.scene.num_ris(), setup.scene.num_elements(), setup.trajectory.num_users()), (64, 64, 2));
    let result = run(Variant::MeRisc, &setup.experiment(setup.config.noise_power), 4).unwrap();
    let mut violations = 0;
    for step in 1..=20 {
        let costs: Vec<f64> = result.trace.iter().filter(|r| r.step == step).map(|r| r.phi_best).collect();
        violations += costs.windows(2).filter(|w| w[1] > w[0]).count();
    }
    let iterations: usize = result.steps.iter().map(|s| s.iterations).sum();
    verdict(
        4,
        "monotone convergence",
        violations == 0,
        format!("{violations} increases of the best-so-far cost over 20 steps and {iterations} iterations"),
    );
}

fn periodic_setup(seed: u64) -> Setup {
    let text = common::desk_config_text().replace(
        "kind = \"aperiodic\"\nsteps = 20",
        "kind = \"periodic\"\nperiod = 10\nsteps = 30",
    );
    let config = merisc::config::parse_config_str(&text, &common::configs_dir()).unwrap();
    Setup::from_config(config, seed).unwrap()
}

#[test]
fn criterion_05_memory_benefit() {
    let start = Instant::now();
    let period = 10;
    let mut wins = 0;
    let (mut ds_me, mut ds_ga, mut n) = (0.0, 0.0, 0);
    let mut medians = Vec::new();
    for seed in SEEDS {
        let setup = periodic_setup(seed);
        assert_eq!(setup.trajectory.kind, TrajectoryKind::Periodic { period });
        let exp = setup.experiment(setup.config.noise_power);
        let me = run(Variant::MeRisc, &exp, seed).unwrap();
        let ga = run(Variant::GaRisc, &exp, seed).unwrap();
        let late = |r: &RunResult| -> Vec<f64> { r.steps.iter().filter(|s| s.step > period).map(|s| s.report.worst).collect() };
        let (m_me, m_ga) = (median(&mut late(&me)), median(&mut late(&ga)));
        if m_me >= m_ga {
            wins += 1;
        }
        medians.push((m_me, m_ga));
        for (a, b) in me.steps.iter().zip(&ga.steps).filter(|(a, _)| a.step > period) {
            ds_me += a.delta_s_mean.unwrap();
            ds_ga += b.delta_s_mean.unwrap();
            n += 1;
        }
    }
    let (ds_me, ds_ga) = (ds_me / n as f64, ds_ga / n as f64);
    let elapsed = start.elapsed();
    let pass = wins >= 8 && ds_me < ds_ga && elapsed < Duration::from_secs(600);
    let spread: Vec<String> = medians.iter().map(|(a, b)| format!("{:+.3}", a - b)).collect();
    verdict(
        5,
        "memory benefit",
        pass,
        format!(
            "median T_worst ME ≥ GA in {wins}/10 seeds (ME−GA: {}), mean first-iteration Δs ME {ds_me:.3} vs GA {ds_ga:.3}, {}",
            spread.join(" "),
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_06_ris_benefit() {
    let mut wins = 0;
    let mut gaps = Vec::new();
    for seed in SEEDS {
        let setup = common::desk_setup(seed);
        let exp = setup.experiment(setup.config.noise_power);
        let with = run(Variant::MeRisc, &exp, seed).unwrap().mean_worst();
        let without = run(Variant::NoRis, &exp, seed).unwrap().mean_worst();
        if with > without {
            wins += 1;
        }
        gaps.push(with - without);
    }
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        6,
        "RIS benefit",
        wins >= 9,
        format!("mean T_worst with RIS above no-RIS in {wins}/10 seeds, smallest gap {min_gap:.3} bit/s/Hz"),
    );
}

#[test]
fn criterion_07_noise_monotonicity() {
    let mut failures = Vec::new();
    let mut table = Vec::new();
    for seed in 1..=3 {
        let setup = common::desk_setup(seed);
        let levels = &setup.config.noise_sweep;
        assert_eq!(setup.config.scene.noise_sweep_dbm, vec![-96.0, -76.0, -56.0]);
        for v in Variant::ALL {
            let optimized: Vec<f64> = levels
                .iter()
                .map(|&w| run(v, &setup.experiment(w), seed).unwrap().mean_worst())
                .collect();
            if !optimized.windows(2).all(|p| p[1] < p[0]) {
                failures.push(format!("seed {seed} {v} re-optimized {optimized:?}"));
            }
            let base = run(v, &setup.experiment(levels[0]), seed).unwrap();
            let rescored: Vec<f64> = levels
                .iter()
                .map(|&w| {
                    let r = rescore(&base, &setup.experiment(w), w).unwrap();
                    r.iter().map(|x| x.worst).sum::<f64>() / r.len() as f64
                })
                .collect();
            if !rescored.windows(2).all(|p| p[1] < p[0]) {
                failures.push(format!("seed {seed} {v} fixed configurations {rescored:?}"));
            }
            if seed == 1 {
                table.push(format!("{v} {:.2}/{:.2}/{:.2}", optimized[0], optimized[1], optimized[2]));
            }
        }
    }
    verdict(
        7,
        "noise monotonicity",
        failures.is_empty(),
        format!(
            "strictly decreasing for all variants and 3 seeds at -96/-76/-56 dBm (seed 1: {}){}",
            table.join(", "),
            if failures.is_empty() { String::new() } else { format!("; violations: {}", failures.join("; ")) }
        ),
    );
}

/// Wall shifted 0.6 m along the surface so that its specular reflection of the
/// BS lands near (4.2, 4.0), where the second user walks; the first user
/// roams the left half of the area.
fn shifted_wall_setup(seed: u64) -> Setup {
    let text = common::desk_config_text().replace("min_separation_m = 0.5", "min_separation_m = 0.5\nwall_offset_m = [0.6, 0.0]");
    let config = merisc::config::parse_config_str(&text, &common::configs_dir()).unwrap();
    let mut setup = Setup::from_config(config, seed).unwrap();
    let walk = |area: UserArea, label: u64| {
        let ground = Ground { area, height: setup.scene.user_height, min_separation: 0.0 };
        gen_aperiodic(&ground, 1, 20, &Mobility { v_max: 0.3, dt: 1.0 }, &mut seeds::rng(seed, &[seeds::TRAJECTORY, label]))
            .unwrap()
    };
    let left = walk(UserArea { x_min: -5.0, x_max: 1.0, y_min: 3.0, y_max: 9.0 }, 1);
    let lobe = walk(UserArea { x_min: 3.7, x_max: 4.7, y_min: 3.5, y_max: 4.5 }, 2);
    let snapshots = left
        .snapshots
        .iter()
        .zip(&lobe.snapshots)
        .map(|(a, b)| UserSnapshot { step: a.step, positions: vec![a.positions[0], b.positions[0]] })
        .collect();
    setup.trajectory = Trajectory { kind: TrajectoryKind::Aperiodic, snapshots };
    setup
}

#[test]
fn criterion_08_environment_exploitation() {
    let mut wins = 0;
    let mut gaps = Vec::new();
    for seed in SEEDS {
        let setup = shifted_wall_setup(seed);
        let exp = setup.experiment(setup.config.noise_power);
        let with = run(Variant::MeRisc, &exp, seed).unwrap().mean_worst();
        let ris_only = run(Variant::RisOnly, &exp, seed).unwrap().mean_worst();
        if with >= ris_only {
            wins += 1;
        }
        gaps.push(with - ris_only);
    }
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        8,
        "environment exploitation",
        wins >= 8,
        format!("mean T_worst with wall and RIS ≥ RIS only in {wins}/10 seeds, smallest gap {min_gap:.3} bit/s/Hz"),
    );
}

#[test]
fn criterion_09_calibration() {
    let defaults = TableConfig::default();
    let table = calibrate_state_table(defaults.bits, defaults.amplitude, defaults.phase_law, 3.5e9, &defaults.wall).unwrap();
    let report = verify_calibration(&table, defaults.amplitude, defaults.phase_law).unwrap();
    verdict(
        9,
        "calibration",
        table.bits == 3 && report.passes(5.0, 0.02),
        format!(
            "{} states, max phase error {:.2e}°, amplitude spread {:.2e}",
            report.states.len(),
            report.max_phase_error_deg,
            report.amplitude_spread
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = common::configs_dir().join("paper_desk.toml");
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let code = merisc::cli::main_with_args([
            "merisc",
            "compare",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "7",
            "--no-timestamp",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        outputs.push(out);
    }
    let names = ["results.csv", "trace_me.csv", "trace_ga.csv"];
    let identical = names
        .iter()
        .all(|n| std::fs::read(outputs[0].join(n)).unwrap() == std::fs::read(outputs[1].join(n)).unwrap());
    let bytes: u64 = names.iter().map(|n| std::fs::metadata(outputs[0].join(n)).unwrap().len()).sum();
    verdict(10, "determinism", identical, format!("{} files, {bytes} bytes, byte-identical across two runs", names.len()));
}
