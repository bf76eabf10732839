mod common;

use common::random_instance;
use proptest::prelude::*;
use sharpe_mdp::eval::{evaluate, DEFAULT_BIG_M};
use sharpe_mdp::m2v::{extra_domination_interval, solve_m2v, M2VOptions};
use sharpe_mdp::mdp::DEFAULT_POLICY_CAP;
use sharpe_mdp::oracle::{FrontierPoint, PolicyTable};
use sharpe_mdp::srpi::{solve, Algorithm, SolveReport, SolverConfig};
use sharpe_mdp::standard_pi::{solve_aux, AuxOptions};
use sharpe_mdp::Setting;

fn setting_for(discounted: bool, alpha: f64, n: usize) -> Setting {
    if discounted {
        Setting::discounted_uniform(alpha, n).unwrap()
    } else {
        Setting::Average
    }
}

fn on_frontier(frontier: &[FrontierPoint], zeta: f64, q: f64) -> bool {
    frontier.iter().any(|p| {
        (p.zeta - zeta).abs() <= 1e-9 * zeta.max(1.0)
            && (p.second_moment - q).abs() <= 1e-9 * q.max(1.0)
    })
}

fn strictly_increasing(report: &SolveReport) -> bool {
    report.kappas().windows(2).all(|w| w[1] > w[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn srpi_matches_enumeration(seed in any::<u64>(), size in 2usize..=4, discounted in any::<bool>(), alpha in 0.3f64..0.95) {
        let mdp = random_instance(size, seed);
        let setting = setting_for(discounted, alpha, size);
        let table = PolicyTable::build(&mdp, &setting, DEFAULT_BIG_M, DEFAULT_POLICY_CAP).unwrap();
        let (_, best) = table.best_sharpe();
        let frontier = table.frontier();
        for algorithm in [Algorithm::Srpi, Algorithm::SrpiPlus] {
            let report = solve(&mdp, &SolverConfig::new(algorithm, setting.clone())).unwrap();
            prop_assert!((report.sharpe_star - best.sharpe).abs() <= 1e-6);
            let attained = evaluate(&mdp, &report.optimal_policy, &setting, DEFAULT_BIG_M).unwrap();
            prop_assert!((attained.sharpe - best.sharpe).abs() <= 1e-6);
            prop_assert!(strictly_increasing(&report));
            prop_assert!(report.final_row().solution.best_m2v.abs() <= 1e-6);
            // rows that stopped early carry an improving candidate, not an M2V optimum
            for row in report.outer_rows.iter().filter(|r| !r.solution.aborted_early) {
                let m = &row.solution.best.metrics;
                prop_assert!(on_frontier(&frontier, m.zeta, m.second_moment), "outer policy off frontier at κ = {}", row.kappa);
            }
            let n = table.entries.len() as f64;
            prop_assert!((report.mdps_solved as f64) <= (n + 1.0) * (2.0 * n + 1.0));
        }
    }

    #[test]
    fn aux_solutions_dominate(seed in any::<u64>(), size in 2usize..=4, kappa in 0.0f64..60.0, t in 0.0f64..=1.0, discounted in any::<bool>()) {
        let mdp = random_instance(size, seed);
        let setting = setting_for(discounted, 0.8, size);
        let table = PolicyTable::build(&mdp, &setting, DEFAULT_BIG_M, DEFAULT_POLICY_CAP).unwrap();
        let (lo, hi) = mdp.reward_bounds();
        let y = lo + t * (hi - lo);
        let aux = solve_aux(&mdp, kappa, y, &setting, &mdp.first_policy(), &AuxOptions::default()).unwrap();
        prop_assert!(table.verify_domination(kappa, &aux));
        if let Some(band) = extra_domination_interval(aux.m2v, kappa) {
            prop_assert!(table.verify_extra_domination(kappa, band, aux.m2v));
        }
    }

    #[test]
    fn coverage_finds_global_m2v(seed in any::<u64>(), size in 2usize..=4, kappa in 0.0f64..60.0) {
        let mdp = random_instance(size, seed);
        let table = PolicyTable::build(&mdp, &Setting::Average, DEFAULT_BIG_M, DEFAULT_POLICY_CAP).unwrap();
        let sol = solve_m2v(&mdp, kappa, &Setting::Average, &mdp.first_policy(), &M2VOptions::default()).unwrap();
        let (_, best) = table.best_m2v(kappa);
        prop_assert!(sol.best_m2v >= best - 1e-8 * best.abs().max(1.0));
        prop_assert!(!sol.aborted_early);
    }

    #[test]
    fn algorithms_share_final_block(seed in any::<u64>(), size in 2usize..=4) {
        let mdp = random_instance(size, seed);
        let a = solve(&mdp, &SolverConfig::new(Algorithm::Srpi, Setting::Average)).unwrap();
        let b = solve(&mdp, &SolverConfig::new(Algorithm::SrpiPlus, Setting::Average)).unwrap();
        prop_assert!((a.kappa_star - b.kappa_star).abs() <= 1e-9 * a.kappa_star.max(1.0));
        let pa: Vec<f64> = a.final_row().solution.probes().collect();
        let pb: Vec<f64> = b.final_row().solution.probes().collect();
        prop_assert_eq!(pa, pb);
        prop_assert!(a.kappa_star >= 1.0 - 1e-12);
    }
}
