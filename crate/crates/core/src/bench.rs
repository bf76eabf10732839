//! Solve-count benchmark on seeded random instances.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::eval::Setting;
use crate::generator::{derive_seed, gen_random_mdp};
use crate::mdp::validate;
use crate::srpi::{solve, Algorithm, SolverConfig};

/// Per-trial solve counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialCounts {
    pub srpi: usize,
    pub srpi_plus: usize,
}

/// Aggregate over the trials of one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub size: usize,
    pub trials: usize,
    pub srpi_mean: f64,
    pub srpi_sd: f64,
    pub srpi_plus_mean: f64,
    pub srpi_plus_sd: f64,
    /// Fraction of successful trials where SRPI+ solved no more MDPs.
    pub plus_le_fraction: f64,
    /// `(|D|+1)(2|D|+1)` standard-MDP solves; empty when it overflows.
    pub bound: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Seed of trial `trial` at `size`.
pub fn trial_seed(seed: u64, size: usize, trial: usize) -> u64 {
    derive_seed(seed, ((size as u64) << 32) | trial as u64)
}

/// Solve one random instance with both algorithms.
pub fn run_trial(size: usize, seed: u64) -> Result<TrialCounts> {
    let mdp = validate(&gen_random_mdp(size, size, seed))?;
    let count = |algorithm| {
        solve(&mdp, &SolverConfig::new(algorithm, Setting::Average)).map(|r| r.mdps_solved)
    };
    Ok(TrialCounts {
        srpi: count(Algorithm::Srpi)?,
        srpi_plus: count(Algorithm::SrpiPlus)?,
    })
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn complexity_bound(size: usize) -> Option<f64> {
    let policies = (size as f64).powi(i32::try_from(size).ok()?);
    let b = (policies + 1.0) * (2.0 * policies + 1.0);
    b.is_finite().then_some(b)
}

/// Aggregate `trials` runs per size. Trials run in parallel; failures are
/// logged and counted.
pub fn run_bench(sizes: &[usize], trials: usize, seed: u64) -> BenchReport {
    let rows = sizes
        .iter()
        .map(|&size| {
            let results: Vec<Result<TrialCounts>> = (0..trials)
                .into_par_iter()
                .map(|t| run_trial(size, trial_seed(seed, size, t)))
                .collect();
            let mut ok = Vec::new();
            let mut failures = 0;
            for (t, r) in results.into_iter().enumerate() {
                match r {
                    Ok(c) => ok.push(c),
                    Err(e) => {
                        log::warn!("size {size} trial {t} failed: {e}");
                        failures += 1;
                    }
                }
            }
            let srpi: Vec<f64> = ok.iter().map(|c| c.srpi as f64).collect();
            let plus: Vec<f64> = ok.iter().map(|c| c.srpi_plus as f64).collect();
            let (srpi_mean, srpi_sd) = mean_sd(&srpi);
            let (srpi_plus_mean, srpi_plus_sd) = mean_sd(&plus);
            let le = ok.iter().filter(|c| c.srpi_plus <= c.srpi).count();
            BenchRow {
                size,
                trials,
                srpi_mean,
                srpi_sd,
                srpi_plus_mean,
                srpi_plus_sd,
                plus_le_fraction: if ok.is_empty() {
                    0.0
                } else {
                    le as f64 / ok.len() as f64
                },
                bound: complexity_bound(size),
                failures,
            }
        })
        .collect();
    BenchReport { rows }
}

pub fn emit_bench_csv(report: &BenchReport) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        wtr.serialize(row)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
