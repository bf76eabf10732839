//! Acceptance criteria, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL` line before asserting.

mod common;

use std::time::{Duration, Instant};

use common::random_instance;
use sharpe_mdp::bench::run_bench;
use sharpe_mdp::dinkelbach::{rate_diagnostics, solve_ratio, FiniteRatioProblem, RatioOptions};
use sharpe_mdp::eval::{evaluate, m2v_value, DEFAULT_BIG_M};
use sharpe_mdp::generator::SplitMix64;
use sharpe_mdp::instances::three_state;
use sharpe_mdp::m2v::extra_domination_interval;
use sharpe_mdp::mdp::DEFAULT_POLICY_CAP;
use sharpe_mdp::oracle::{kappa_interval, PolicyTable};
use sharpe_mdp::srpi::{solve, Algorithm, SolveReport, SolverConfig};
use sharpe_mdp::standard_pi::{solve_aux, AuxOptions};
use sharpe_mdp::{Policy, Setting, ValidatedMdp};

fn verdict(n: u32, pass: bool, detail: &str) {
    println!(
        "criterion {n}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn three_state_run(algorithm: Algorithm) -> (ValidatedMdp, SolveReport) {
    let mdp = three_state();
    let mut cfg = SolverConfig::new(algorithm, Setting::Average);
    cfg.initial_policy = Some(mdp.parse_policy("a1,a1,a1").unwrap());
    let report = solve(&mdp, &cfg).unwrap();
    (mdp, report)
}

/// Outer ratios strictly increase and the last M2V optimum is zero.
fn monotone_and_terminal(report: &SolveReport) -> bool {
    report.kappas().windows(2).all(|w| w[1] > w[0])
        && report.final_row().solution.best_m2v.abs() <= 1e-6
}

/// Solve with SRPI and compare to enumeration; returns whether ψ agrees and
/// the run was monotone with a zero terminal value.
fn oracle_check(mdp: &ValidatedMdp, setting: &Setting) -> (bool, bool) {
    let table = PolicyTable::build(mdp, setting, DEFAULT_BIG_M, DEFAULT_POLICY_CAP).unwrap();
    let (_, best) = table.best_sharpe();
    let report = solve(mdp, &SolverConfig::new(Algorithm::Srpi, setting.clone())).unwrap();
    let attained = evaluate(mdp, &report.optimal_policy, setting, DEFAULT_BIG_M).unwrap();
    let agree =
        near(report.sharpe_star, best.sharpe, 1e-6) && near(attained.sharpe, best.sharpe, 1e-6);
    (agree, monotone_and_terminal(&report))
}

fn average_instances() -> impl Iterator<Item = ValidatedMdp> {
    let small = (0..200u64).map(|i| random_instance(3, 1_000 + i));
    let large = (0..50u64).map(|i| random_instance(4, 5_000 + i));
    small.chain(large)
}

const ALPHAS: [f64; 3] = [0.5, 0.9, 0.99];

fn discounted_cases() -> impl Iterator<Item = (ValidatedMdp, Setting)> {
    (0..100u64).flat_map(|i| {
        let mdp = random_instance(3, 9_000 + i);
        ALPHAS.map(|a| (mdp.clone(), Setting::discounted_uniform(a, 3).unwrap()))
    })
}

#[test]
fn criterion_01_three_state_optimum() {
    let mut ok = true;
    let mut detail = String::new();
    for algorithm in [Algorithm::Srpi, Algorithm::SrpiPlus] {
        let started = Instant::now();
        let (mdp, report) = three_state_run(algorithm);
        let elapsed = started.elapsed();
        let policy = mdp.format_policy(&report.optimal_policy);
        ok &= policy == "(a1,a1,a2)"
            && near(report.kappa_star, 99.0, 1e-3)
            && near(report.sharpe_star, 98f64.sqrt(), 1e-3)
            && elapsed < Duration::from_secs(1);
        detail += &format!(
            "{} {policy} κ*={:.4} ψ*={:.4} in {elapsed:.1?}; ",
            algorithm.name(),
            report.kappa_star,
            report.sharpe_star
        );
    }
    verdict(1, ok, detail.trim_end_matches("; "));
}

#[test]
fn criterion_02_golden_traces() {
    let (_, srpi) = three_state_run(Algorithm::Srpi);
    let (_, plus) = three_state_run(Algorithm::SrpiPlus);
    let seq_near = |got: Vec<f64>, want: &[f64]| {
        got.len() == want.len() && got.iter().zip(want).all(|(g, w)| near(*g, *w, 1e-3))
    };
    let kappas_ok = seq_near(srpi.kappas(), &[0.0, 8.8910, 99.0]);
    let y0 = seq_near(
        srpi.outer_rows[0].solution.probes().collect(),
        &[4.5, 7.5826, 1.4174],
    );
    let y99 = seq_near(
        srpi.outer_rows[2].solution.probes().collect(),
        &[4.5, 6.8333, 8.6556, 5.0110, 2.1667, 3.6208, 0.7125],
    );
    let plus_rows: Vec<usize> = plus
        .outer_rows
        .iter()
        .map(|r| r.solution.aux_solve_count)
        .collect();
    let m2v0 = srpi.outer_rows[0].solution.candidates[0].m2v;
    let m2v1 = srpi.outer_rows[1].solution.candidates[0].m2v;
    let ok = kappas_ok
        && y0
        && y99
        && plus_rows == [1, 1, 7]
        && near(m2v0, 42.8257, 1e-3)
        && near(m2v1, 20.0242, 1e-3);
    verdict(
        2,
        ok,
        &format!(
            "κ {:?}, SRPI+ rows {plus_rows:?}, M2V {m2v0:.4} / {m2v1:.4}",
            srpi.kappas()
                .iter()
                .map(|k| format!("{k:.4}"))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_03_oracle_average() {
    let started = Instant::now();
    let (mut agree, mut total) = (0, 0);
    for mdp in average_instances() {
        total += 1;
        agree += oracle_check(&mdp, &Setting::Average).0 as usize;
    }
    let elapsed = started.elapsed();
    verdict(
        3,
        agree == total && total == 250 && elapsed < Duration::from_secs(60),
        &format!("{agree}/{total} instances agree in {elapsed:.1?}"),
    );
}

#[test]
fn criterion_04_oracle_discounted() {
    let (mut agree, mut total) = (0, 0);
    for (mdp, setting) in discounted_cases() {
        total += 1;
        agree += oracle_check(&mdp, &setting).0 as usize;
    }
    verdict(
        4,
        agree == total && total == 300,
        &format!("{agree}/{total} (instance, α) pairs agree"),
    );
}

#[test]
fn criterion_05_monotone_and_terminal_zero() {
    let (mut good, mut total) = (0, 0);
    for algorithm in [Algorithm::Srpi, Algorithm::SrpiPlus] {
        total += 1;
        good += monotone_and_terminal(&three_state_run(algorithm).1) as usize;
    }
    for mdp in average_instances() {
        total += 1;
        good += oracle_check(&mdp, &Setting::Average).1 as usize;
    }
    for (mdp, setting) in discounted_cases() {
        total += 1;
        good += oracle_check(&mdp, &setting).1 as usize;
    }
    verdict(5, good == total, &format!("{good}/{total} solves"));
}

#[test]
fn criterion_06_domination_soundness() {
    let mut rng = SplitMix64::new(606);
    let (mut checks, mut passed, mut band_checks, mut band_passed) = (0, 0, 0, 0);
    for i in 0..125u64 {
        let size = if i % 5 == 4 { 4 } else { 3 };
        let mdp = random_instance(size, 60_000 + i);
        let setting = if i % 2 == 0 {
            Setting::Average
        } else {
            Setting::discounted_uniform(0.9, size).unwrap()
        };
        let table = PolicyTable::build(&mdp, &setting, DEFAULT_BIG_M, DEFAULT_POLICY_CAP).unwrap();
        let kappa_star = table.best_sharpe().1.kappa();
        let (lo, hi) = mdp.reward_bounds();
        for _ in 0..4 {
            let kappa = 1.5 * kappa_star * rng.next_f64();
            let y = lo + (hi - lo) * rng.next_f64();
            let aux = solve_aux(
                &mdp,
                kappa,
                y,
                &setting,
                &mdp.first_policy(),
                &AuxOptions::default(),
            )
            .unwrap();
            checks += 1;
            passed += table.verify_domination(kappa, &aux) as usize;
            if let Some(band) = extra_domination_interval(aux.m2v, kappa) {
                band_checks += 1;
                band_passed += table.verify_extra_domination(kappa, band, aux.m2v) as usize;
            }
        }
    }
    verdict(
        6,
        checks >= 500 && passed == checks && band_checks > 0 && band_passed == band_checks,
        &format!("domination {passed}/{checks}, extra band {band_passed}/{band_checks}"),
    );
}

#[test]
fn criterion_07_frontier() {
    let mdp = three_state();
    let table =
        PolicyTable::build(&mdp, &Setting::Average, DEFAULT_BIG_M, DEFAULT_POLICY_CAP).unwrap();
    let frontier = table.frontier();
    let names: Vec<String> = frontier
        .iter()
        .map(|p| mdp.format_policy(&p.policy))
        .collect();
    let pos = |n: &str| names.iter().position(|x| x == n);
    let ordered = match (pos("(a2,a1,a2)"), pos("(a3,a1,a2)"), pos("(a1,a1,a2)")) {
        (Some(a), Some(b), Some(c)) => a < b && b < c,
        _ => false,
    };
    let descending = frontier
        .windows(2)
        .all(|w| w[0].second_moment > w[1].second_moment);
    let (kappa_low, kappa_star) = kappa_interval(&frontier).unwrap();
    let (optimal, _) = table.best_sharpe();
    let optimal: Policy = optimal.clone();
    let hits = (1..=5)
        .map(|k| kappa_low + (kappa_star - kappa_low) * k as f64 / 5.0)
        .filter(|&kappa| {
            let (d, v) = table.best_m2v(kappa);
            let opt_value = m2v_value(table.metrics(&optimal).unwrap(), kappa);
            *d == optimal || near(v, opt_value, 1e-9)
        })
        .count();
    verdict(
        7,
        ordered && descending && hits == 5,
        &format!("frontier {names:?}, κ in ({kappa_low:.4}, {kappa_star:.4}] → {hits}/5 optimal"),
    );
}

#[test]
fn criterion_08_moments_and_scaling() {
    let mut rng = SplitMix64::new(808);
    let (mut identity_ok, mut scale_ok, mut total) = (0, 0, 0);
    for i in 0..1000u64 {
        let size = 2 + (i % 3) as usize;
        let mdp = random_instance(size, 80_000 + i);
        let d = Policy::new(
            (0..size)
                .map(|_| (rng.next_u64() % size as u64) as usize)
                .collect(),
        );
        let setting = if i % 2 == 0 {
            Setting::Average
        } else {
            Setting::discounted_uniform(0.05 + 0.94 * rng.next_f64(), size).unwrap()
        };
        total += 1;
        let m = evaluate(&mdp, &d, &setting, DEFAULT_BIG_M).unwrap();
        identity_ok += ((m.second_moment - m.eta * m.eta - m.zeta).abs()
            <= 1e-8 * m.second_moment.max(1.0)) as usize;

        let base = PolicyTable::build(&mdp, &setting, DEFAULT_BIG_M, DEFAULT_POLICY_CAP).unwrap();
        let (best, best_m) = base.best_sharpe();
        let scaled_ok = [0.5, 3.0].iter().all(|&c| {
            let scaled = mdp.map_rewards(|r| c * r);
            let ms = evaluate(&scaled, &d, &setting, DEFAULT_BIG_M).unwrap();
            let t =
                PolicyTable::build(&scaled, &setting, DEFAULT_BIG_M, DEFAULT_POLICY_CAP).unwrap();
            let (best_c, best_cm) = t.best_sharpe();
            near(ms.sharpe, m.sharpe, 1e-9 * m.sharpe.abs().max(1.0))
                && (best_c == best || near(best_cm.sharpe, best_m.sharpe, 1e-9))
        });
        scale_ok += scaled_ok as usize;
    }
    verdict(
        8,
        identity_ok == total && scale_ok == total,
        &format!("moment identity {identity_ok}/{total}, scale invariance {scale_ok}/{total}"),
    );
}

#[test]
fn criterion_09_scaling_study() {
    let started = Instant::now();
    let report = run_bench(&[3, 10], 30, 2024);
    let elapsed = started.elapsed();
    let fractions_ok = report
        .rows
        .iter()
        .all(|r| r.failures == 0 && r.plus_le_fraction >= 0.9);
    let big = report.rows.iter().find(|r| r.size == 10).unwrap();
    let bound = big.bound.unwrap();
    let far_below = bound / big.srpi_mean >= 1e4 && bound / big.srpi_plus_mean >= 1e4;
    let summary: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "size {}: SRPI {:.2}±{:.2}, SRPI+ {:.2}±{:.2}, SRPI+≤SRPI {:.0}%",
                r.size,
                r.srpi_mean,
                r.srpi_sd,
                r.srpi_plus_mean,
                r.srpi_plus_sd,
                100.0 * r.plus_le_fraction
            )
        })
        .collect();
    verdict(
        9,
        fractions_ok && far_below && elapsed < Duration::from_secs(600),
        &format!("{}; bound {bound:.3e}; {elapsed:.1?}", summary.join("; ")),
    );
}

#[test]
fn criterion_10_dinkelbach_engine() {
    let hand = || FiniteRatioProblem::new([(0, 2.0, 1.0), (1, 3.0, 2.0), (2, 5.0, 4.0)]);
    let mut finite_ok = true;
    let mut solves = Vec::new();
    for kappa0 in [0.0, 1e6] {
        let mut p = hand();
        let sol = solve_ratio(&mut p, kappa0, &RatioOptions::default()).unwrap();
        finite_ok &= sol.kappa_star == 2.0 && p.solves <= 4;
        solves.push(p.solves);
    }
    let grid = (0..=10_000).map(|i| {
        let x = i as f64 / 1000.0;
        (x, x, 1.0 + x * x)
    });
    let mut toy = FiniteRatioProblem::new(grid);
    let sol = solve_ratio(&mut toy, 0.0, &RatioOptions::default()).unwrap();
    let rate = rate_diagnostics(&sol.trace.kappas, 0.5).unwrap();
    verdict(
        10,
        finite_ok && sol.kappa_star == 0.5 && rate.decreasing,
        &format!(
            "hand-set solves {solves:?}; toy error ratios {:?}",
            rate.ratios
        ),
    );
}
