//! Outer level: Dinkelbach iteration on `E{Q²}/ζ`, with every linearized
//! problem solved globally by the coverage loop in [`crate::m2v`].

use std::time::{Duration, Instant};

use crate::dinkelbach::{solve_ratio, RatioError, RatioOptions, RatioProblem};
use crate::error::{Error, Result};
use crate::eval::{PolicyMetrics, Setting, DEFAULT_BIG_M};
use crate::m2v::{solve_m2v, M2VOptions, M2VSolution, DEFAULT_EPS_Y, DEFAULT_PROBE_BUDGET};
use crate::mdp::{Policy, ValidatedMdp};
use crate::standard_pi::{AuxOptions, PiOptions};

pub const DEFAULT_KAPPA_TOL: f64 = 1e-9;
pub const DEFAULT_OUTER_BUDGET: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Full coverage at every outer iteration.
    Srpi,
    /// Early exit on a better ratio plus the extra domination band.
    SrpiPlus,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Srpi => "SRPI",
            Algorithm::SrpiPlus => "SRPI+",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub setting: Setting,
    /// Warm start for the first auxiliary solve of every outer iteration;
    /// the first admissible action in each state when unset.
    pub initial_policy: Option<Policy>,
    /// Starting ratio; zero when unset.
    pub initial_kappa: Option<f64>,
    /// Relative tolerance on `|κ − κ′|`.
    pub kappa_tol: f64,
    pub big_m: f64,
    pub probe_budget: usize,
    pub outer_budget: usize,
    pub eps_y: f64,
    pub pi: PiOptions,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, setting: Setting) -> Self {
        SolverConfig {
            algorithm,
            setting,
            initial_policy: None,
            initial_kappa: None,
            kappa_tol: DEFAULT_KAPPA_TOL,
            big_m: DEFAULT_BIG_M,
            probe_budget: DEFAULT_PROBE_BUDGET,
            outer_budget: DEFAULT_OUTER_BUDGET,
            eps_y: DEFAULT_EPS_Y,
            pi: PiOptions::default(),
        }
    }

    fn check(&self, mdp: &ValidatedMdp) -> Result<()> {
        if !(self.kappa_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kappa tolerance must be positive, got {}",
                self.kappa_tol
            )));
        }
        if self.probe_budget == 0 || self.outer_budget == 0 {
            return Err(Error::InvalidArgument("budgets must be positive".into()));
        }
        if !(self.eps_y > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coverage width must be positive, got {}",
                self.eps_y
            )));
        }
        if !(self.big_m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "big-M must be positive, got {}",
                self.big_m
            )));
        }
        self.setting.check(mdp.n_states())?;
        if let Some(d) = &self.initial_policy {
            mdp.check_policy(d)?;
        }
        Ok(())
    }

    fn m2v_options(&self, pruning: bool) -> M2VOptions {
        M2VOptions {
            early_exit: pruning,
            extra_domination: pruning,
            eps_y: self.eps_y,
            probe_budget: self.probe_budget,
            kappa_tol: self.kappa_tol,
            aux: AuxOptions {
                big_m: self.big_m,
                pi: self.pi,
            },
        }
    }
}

/// Ratio used for the first outer iteration.
pub fn initial_kappa(cfg: &SolverConfig) -> Result<f64> {
    match cfg.initial_kappa {
        None => Ok(0.0),
        Some(k) if k >= 0.0 && k.is_finite() => Ok(k),
        Some(k) => Err(Error::InvalidArgument(format!(
            "initial kappa must be finite and ≥ 0, got {k}"
        ))),
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRow {
    pub kappa: f64,
    pub solution: M2VSolution,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub optimal_policy: Policy,
    pub optimal_metrics: PolicyMetrics,
    pub kappa_star: f64,
    /// `√(κ* − 1)`, clamped at zero.
    pub sharpe_star: f64,
    pub outer_rows: Vec<OuterRow>,
    /// Auxiliary MDPs solved.
    pub mdps_solved: usize,
    /// Policy-improvement sweeps over all auxiliary solves.
    pub pi_sweeps: usize,
    pub wall_time: Duration,
}

impl SolveReport {
    fn finish(
        algorithm: Algorithm,
        outer_rows: Vec<OuterRow>,
        kappa_star: f64,
        started: Instant,
    ) -> Self {
        let last = &outer_rows.last().expect("at least one outer row").solution;
        let optimal_policy = last.best.policy.clone();
        let optimal_metrics = last.best.metrics;
        let mdps_solved = outer_rows.iter().map(|r| r.solution.aux_solve_count).sum();
        let pi_sweeps = outer_rows.iter().map(|r| r.solution.pi_sweeps()).sum();
        SolveReport {
            algorithm,
            optimal_policy,
            optimal_metrics,
            kappa_star,
            sharpe_star: (kappa_star - 1.0).max(0.0).sqrt(),
            outer_rows,
            mdps_solved,
            pi_sweeps,
            wall_time: started.elapsed(),
        }
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.outer_rows.iter().map(|r| r.kappa).collect()
    }

    pub fn final_row(&self) -> &OuterRow {
        self.outer_rows.last().expect("at least one outer row")
    }
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(1.0)
}

struct FullCoverage<'a> {
    mdp: &'a ValidatedMdp,
    setting: &'a Setting,
    warm: &'a Policy,
    opts: M2VOptions,
    rows: Vec<OuterRow>,
}

impl RatioProblem for FullCoverage<'_> {
    type Candidate = M2VSolution;
    type Error = Error;

    fn numerator(&self, x: &M2VSolution) -> f64 {
        x.best.metrics.second_moment
    }

    fn denominator(&self, x: &M2VSolution) -> f64 {
        x.best.metrics.zeta
    }

    fn linearized_argmax(&mut self, kappa: f64) -> Result<M2VSolution> {
        let sol = solve_m2v(self.mdp, kappa, self.setting, self.warm, &self.opts)?;
        self.rows.push(OuterRow {
            kappa,
            solution: sol.clone(),
        });
        Ok(sol)
    }
}

/// SRPI: full coverage at every outer iteration.
pub fn srpi(mdp: &ValidatedMdp, cfg: &SolverConfig) -> Result<SolveReport> {
    let started = Instant::now();
    cfg.check(mdp)?;
    let kappa0 = initial_kappa(cfg)?;
    let warm = cfg
        .initial_policy
        .clone()
        .unwrap_or_else(|| mdp.first_policy());
    let mut problem = FullCoverage {
        mdp,
        setting: &cfg.setting,
        warm: &warm,
        opts: cfg.m2v_options(false),
        rows: Vec::new(),
    };
    let ratio_opts = RatioOptions {
        tol: cfg.kappa_tol,
        max_iterations: cfg.outer_budget,
    };
    let solved = solve_ratio(&mut problem, kappa0, &ratio_opts).map_err(|e| match e {
        RatioError::Solver(e) => e,
        RatioError::BudgetExceeded(budget) => Error::BudgetExceeded {
            what: "outer loop",
            budget,
        },
        other => Error::Numerical(other.to_string()),
    })?;
    Ok(SolveReport::finish(
        Algorithm::Srpi,
        problem.rows,
        solved.kappa_star,
        started,
    ))
}

/// SRPI+: the coverage loop stops at the first candidate with a larger ratio,
/// and bands of small means are pruned once a positive M2V value is known.
/// Termination requires a completed coverage at the final ratio.
pub fn srpi_plus(mdp: &ValidatedMdp, cfg: &SolverConfig) -> Result<SolveReport> {
    let started = Instant::now();
    cfg.check(mdp)?;
    let mut kappa = initial_kappa(cfg)?;
    let warm = cfg
        .initial_policy
        .clone()
        .unwrap_or_else(|| mdp.first_policy());
    let opts = cfg.m2v_options(true);
    let mut rows: Vec<OuterRow> = Vec::new();
    loop {
        if rows.len() >= cfg.outer_budget {
            return Err(Error::BudgetExceeded {
                what: "outer loop",
                budget: cfg.outer_budget,
            });
        }
        let sol = solve_m2v(mdp, kappa, &cfg.setting, &warm, &opts)?;
        let next = sol.kappa_prime;
        let covered = !sol.aborted_early;
        if !rows.is_empty() && next < kappa - cfg.kappa_tol * kappa.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "outer ratio decreased from {kappa} to {next}"
            )));
        }
        rows.push(OuterRow {
            kappa,
            solution: sol,
        });
        if covered && within(kappa, next, cfg.kappa_tol) {
            return Ok(SolveReport::finish(
                Algorithm::SrpiPlus,
                rows,
                next,
                started,
            ));
        }
        kappa = next;
    }
}

pub fn solve(mdp: &ValidatedMdp, cfg: &SolverConfig) -> Result<SolveReport> {
    match cfg.algorithm {
        Algorithm::Srpi => srpi(mdp, cfg),
        Algorithm::SrpiPlus => srpi_plus(mdp, cfg),
    }
}
