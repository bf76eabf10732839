//! Inner level: the auxiliary standard MDP obtained by fixing a pseudo-mean
//! `y` in the variance penalty, solved by policy iteration.
//!
//! With reward `r'(s,a) = r(s,a)² − κ (r(s,a) − y)²` the long-run objective
//! of a policy is `E{Q²} − κζ − κ(η − y)²`, so its maximizer dominates every
//! policy whose mean lies no farther from `y` than its own.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::eval::{evaluate, m2v_value, Discount, PolicyMetrics, Setting, DEFAULT_BIG_M};
use crate::intervals::Interval;
use crate::linalg;
use crate::mdp::{restrict_with, Policy, ValidatedMdp};

/// Reward table `r'` over the pairs of a base instance.
#[derive(Debug, Clone)]
pub struct ReshapedMdp<'a> {
    base: &'a ValidatedMdp,
    kappa: f64,
    y: f64,
    reward: Vec<f64>,
}

/// Build `r'(s,a) = r(s,a)² − κ (r(s,a) − y)²`.
pub fn reshape(mdp: &ValidatedMdp, kappa: f64, y: f64) -> Result<ReshapedMdp<'_>> {
    if !(kappa >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kappa must be ≥ 0, got {kappa}"
        )));
    }
    let reward: Vec<f64> = mdp
        .rewards()
        .iter()
        .map(|&r| r * r - kappa * (r - y) * (r - y))
        .collect();
    if reward.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("reshaped reward is not finite".into()));
    }
    Ok(ReshapedMdp {
        base: mdp,
        kappa,
        y,
        reward,
    })
}

impl<'a> ReshapedMdp<'a> {
    pub fn base(&self) -> &'a ValidatedMdp {
        self.base
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[self.base.pair_index(s, a)]
    }
}

/// Policy iteration knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiOptions {
    /// Lookahead values within this of the maximum count as ties.
    pub improve_tol: f64,
    /// Defaults to `10·|S|·max|A|`.
    pub max_iterations: Option<usize>,
}

impl Default for PiOptions {
    fn default() -> Self {
        PiOptions {
            improve_tol: 1e-9,
            max_iterations: None,
        }
    }
}

impl PiOptions {
    fn cap(&self, mdp: &ValidatedMdp) -> usize {
        self.max_iterations
            .unwrap_or(10 * mdp.n_states() * mdp.max_actions())
            .max(1)
    }
}

/// Result of one policy-iteration run.
#[derive(Debug, Clone, PartialEq)]
pub struct PiOutcome {
    pub policy: Policy,
    /// Bias `h` (average, `h(s₀) = 0`) or value `v'` (discounted) of `policy`.
    pub values: DVector<f64>,
    /// Gain (average) or `μ·v'` (discounted) of each evaluated policy.
    pub objectives: Vec<f64>,
    /// Visited policies, ending with the repeated fixed point.
    pub trace: Vec<Policy>,
}

impl PiOutcome {
    /// Number of improvement sweeps performed.
    pub fn sweeps(&self) -> usize {
        self.trace.len() - 1
    }

    pub fn objective(&self) -> f64 {
        *self.objectives.last().expect("at least one evaluation")
    }
}

/// Greedy step: keep the incumbent if it attains the max within `tol`,
/// otherwise take the lowest index that does.
fn improve(
    rmdp: &ReshapedMdp<'_>,
    d: &Policy,
    tol: f64,
    lookahead: impl Fn(usize, usize) -> f64,
) -> Policy {
    let mdp = rmdp.base;
    let mut next = d.clone();
    for s in 0..mdp.n_states() {
        let q: Vec<f64> = (0..mdp.n_actions(s)).map(|a| lookahead(s, a)).collect();
        let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if q[d.action(s)] >= best - tol {
            continue;
        }
        let a = q
            .iter()
            .position(|&v| v >= best - tol)
            .expect("max is attained");
        next.set(s, a);
    }
    next
}

fn expect_row(row: &[f64], values: &DVector<f64>) -> f64 {
    row.iter().zip(values.iter()).map(|(p, v)| p * v).sum()
}

fn check_monotone(objectives: &[f64]) -> Result<()> {
    if let [.., prev, last] = objectives {
        if *last < *prev - 1e-8 * prev.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "policy iteration objective decreased from {prev} to {last}"
            )));
        }
    }
    Ok(())
}

/// Average-reward policy iteration on `r'`.
pub fn policy_iteration_average(
    rmdp: &ReshapedMdp<'_>,
    d0: &Policy,
    opts: &PiOptions,
) -> Result<PiOutcome> {
    let mdp = rmdp.base;
    mdp.check_policy(d0)?;
    let n = mdp.n_states();
    let cap = opts.cap(mdp);
    let mut d = d0.clone();
    let mut trace = vec![d.clone()];
    let mut objectives = Vec::new();
    loop {
        let mrp = restrict_with(mdp, &d, &rmdp.reward);
        if !mrp.is_irreducible() {
            log::warn!("policy {} induces a reducible chain", mdp.format_policy(&d));
        }
        // unknowns: gain in slot 0, h(1..n) in the rest; h(0) = 0
        let a = DMatrix::from_fn(n, n, |s, j| {
            if j == 0 {
                1.0
            } else {
                f64::from(u8::from(s == j)) - mrp.p[(s, j)]
            }
        });
        let x = linalg::solve(a, &mrp.r, "average-reward policy evaluation")?;
        let gain = x[0];
        let mut bias = x;
        bias[0] = 0.0;
        objectives.push(gain);
        check_monotone(&objectives)?;

        let next = improve(rmdp, &d, opts.improve_tol, |s, a| {
            rmdp.reward(s, a) + expect_row(mdp.transition_row(s, a), &bias)
        });
        trace.push(next.clone());
        if next == d {
            return Ok(PiOutcome {
                policy: d,
                values: bias,
                objectives,
                trace,
            });
        }
        if trace.len() > cap {
            return Err(Error::BudgetExceeded {
                what: "average-reward policy iteration",
                budget: cap,
            });
        }
        d = next;
    }
}

/// Discounted policy iteration on `r'` with normalized values
/// `v' = (1−α)(I−αP)⁻¹ r'`.
pub fn policy_iteration_discounted(
    rmdp: &ReshapedMdp<'_>,
    d0: &Policy,
    disc: &Discount,
    opts: &PiOptions,
) -> Result<PiOutcome> {
    let mdp = rmdp.base;
    mdp.check_policy(d0)?;
    let n = mdp.n_states();
    let alpha = disc.alpha();
    let mu = DVector::from_column_slice(disc.mu());
    let cap = opts.cap(mdp);
    let mut d = d0.clone();
    let mut trace = vec![d.clone()];
    let mut objectives = Vec::new();
    loop {
        let mrp = restrict_with(mdp, &d, &rmdp.reward);
        let a = DMatrix::identity(n, n) - &mrp.p * alpha;
        let v = linalg::solve(a, &mrp.r, "discounted policy evaluation")? * (1.0 - alpha);
        objectives.push(mu.dot(&v));
        check_monotone(&objectives)?;

        let next = improve(rmdp, &d, opts.improve_tol, |s, a| {
            (1.0 - alpha) * rmdp.reward(s, a) + alpha * expect_row(mdp.transition_row(s, a), &v)
        });
        trace.push(next.clone());
        if next == d {
            return Ok(PiOutcome {
                policy: d,
                values: v,
                objectives,
                trace,
            });
        }
        if trace.len() > cap {
            return Err(Error::BudgetExceeded {
                what: "discounted policy iteration",
                budget: cap,
            });
        }
        d = next;
    }
}

/// Options shared by every auxiliary solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxOptions {
    pub big_m: f64,
    pub pi: PiOptions,
}

impl Default for AuxOptions {
    fn default() -> Self {
        AuxOptions {
            big_m: DEFAULT_BIG_M,
            pi: PiOptions::default(),
        }
    }
}

/// Solution of one auxiliary MDP together with what it dominates.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxSolution {
    pub kappa: f64,
    pub y: f64,
    pub policy: Policy,
    /// Metrics under the original reward.
    pub metrics: PolicyMetrics,
    pub m2v: f64,
    pub dominated: Interval,
    pub inner_trace: Vec<Policy>,
    pub pi_sweeps: usize,
    /// Objective of the auxiliary MDP along the trace.
    pub objectives: Vec<f64>,
}

impl AuxSolution {
    pub fn kappa_prime(&self) -> f64 {
        self.metrics.kappa()
    }
}

/// Solve the auxiliary MDP at `(κ, y)` from `warm` and evaluate the result.
pub fn solve_aux(
    mdp: &ValidatedMdp,
    kappa: f64,
    y: f64,
    setting: &Setting,
    warm: &Policy,
    opts: &AuxOptions,
) -> Result<AuxSolution> {
    let rmdp = reshape(mdp, kappa, y)?;
    let outcome = match setting {
        Setting::Average => policy_iteration_average(&rmdp, warm, &opts.pi)?,
        Setting::Discounted(disc) => policy_iteration_discounted(&rmdp, warm, disc, &opts.pi)?,
    };
    let metrics = evaluate(mdp, &outcome.policy, setting, opts.big_m)?;
    let pi_sweeps = outcome.sweeps();
    Ok(AuxSolution {
        kappa,
        y,
        m2v: m2v_value(&metrics, kappa),
        dominated: Interval::centered(y, y - metrics.eta),
        policy: outcome.policy,
        metrics,
        inner_trace: outcome.trace,
        pi_sweeps,
        objectives: outcome.objectives,
    })
}
