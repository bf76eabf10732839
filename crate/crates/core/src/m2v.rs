//! Middle level: global solution of `max E{Q²} − κζ` by covering the range of
//! attainable means `[r_min, r_max]` with domination intervals of auxiliary
//! solutions.
//!
//! Probes are placed at the midpoint of the rightmost remaining part. Two
//! optional pruning mechanisms shorten the loop: stopping as soon as a
//! candidate with a larger ratio than `κ` appears (`early_exit`), and removing
//! the band `|η| ≤ √(M2V/κ)` once a candidate with positive M2V value is known
//! (`extra_domination`).

use crate::error::{Error, Result};
use crate::eval::Setting;
use crate::mdp::{Policy, ValidatedMdp};
use crate::standard_pi::{solve_aux, AuxOptions, AuxSolution};

pub use crate::intervals::{Interval, IntervalSet};

/// Width below which leftover parts of the coverage set are dropped.
pub const DEFAULT_EPS_Y: f64 = 1e-7;

pub const DEFAULT_PROBE_BUDGET: usize = 10_000;

/// Middle-loop configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M2VOptions {
    pub early_exit: bool,
    pub extra_domination: bool,
    pub eps_y: f64,
    pub probe_budget: usize,
    /// Relative tolerance for "ratio larger than κ" in the early exit.
    pub kappa_tol: f64,
    pub aux: AuxOptions,
}

impl Default for M2VOptions {
    fn default() -> Self {
        M2VOptions {
            early_exit: false,
            extra_domination: false,
            eps_y: DEFAULT_EPS_Y,
            probe_budget: DEFAULT_PROBE_BUDGET,
            kappa_tol: 1e-9,
            aux: AuxOptions::default(),
        }
    }
}

/// Outcome of one middle loop.
#[derive(Debug, Clone, PartialEq)]
pub struct M2VSolution {
    pub kappa: f64,
    pub best: AuxSolution,
    pub best_m2v: f64,
    /// `E{Q²}/ζ` of `best`.
    pub kappa_prime: f64,
    /// Largest candidate ratio seen in this loop.
    pub max_kappa_prime: f64,
    /// Auxiliary solutions in probe order.
    pub candidates: Vec<AuxSolution>,
    /// Extra-domination band removed after each probe, if any.
    pub extra_cuts: Vec<Option<Interval>>,
    pub aborted_early: bool,
    pub aux_solve_count: usize,
}

impl M2VSolution {
    pub fn probes(&self) -> impl Iterator<Item = f64> + '_ {
        self.candidates.iter().map(|c| c.y)
    }

    pub fn best_policy(&self) -> &Policy {
        &self.best.policy
    }

    pub fn pi_sweeps(&self) -> usize {
        self.candidates.iter().map(|c| c.pi_sweeps).sum()
    }
}

/// Band of means dominated by a candidate with positive M2V value.
///
/// Returns `None` unless `κ ≥ 1` and `m2v > 0`: below `κ = 1` the bound
/// `κη² + (1−κ)E{Q²} ≤ κη²` no longer holds.
pub fn extra_domination_interval(m2v: f64, kappa: f64) -> Option<Interval> {
    (kappa >= 1.0 && m2v > 0.0).then(|| Interval::centered(0.0, (m2v / kappa).sqrt()))
}

/// Solve the M2V problem at `kappa`, warm-starting the first auxiliary solve
/// from `warm` and every later one from its predecessor.
pub fn solve_m2v(
    mdp: &ValidatedMdp,
    kappa: f64,
    setting: &Setting,
    warm: &Policy,
    opts: &M2VOptions,
) -> Result<M2VSolution> {
    if !(kappa >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kappa must be ≥ 0, got {kappa}"
        )));
    }
    setting.check(mdp.n_states())?;
    let (r_min, r_max) = mdp.reward_bounds();
    let eps = opts.eps_y;
    let mut remaining = IntervalSet::new(Interval::new(r_min, r_max));
    let mut candidates: Vec<AuxSolution> = Vec::new();
    let mut extra_cuts = Vec::new();
    let mut warm = warm.clone();
    let mut aborted_early = false;

    while !remaining.is_empty() {
        if candidates.len() >= opts.probe_budget {
            return Err(Error::BudgetExceeded {
                what: "M2V coverage loop",
                budget: opts.probe_budget,
            });
        }
        let probed = remaining.parts()[0];
        let y = probed.midpoint();
        let aux = solve_aux(mdp, kappa, y, setting, &warm, &opts.aux)?;

        let before = remaining.measure();
        // zero-radius cuts still clear a neighborhood of the probe
        let radius = (y - aux.metrics.eta).abs().max(eps / 2.0);
        remaining = remaining.subtract(Interval::centered(y, radius), eps);
        let extra = if opts.extra_domination {
            extra_domination_interval(aux.m2v, kappa)
        } else {
            None
        };
        if let Some(band) = extra {
            remaining = remaining.subtract(band, eps);
        }
        let shrink = before - remaining.measure();
        if shrink < eps.min(probed.width()) * (1.0 - 1e-6) {
            return Err(Error::Numerical(format!(
                "coverage set failed to shrink at y = {y} (removed {shrink:e})"
            )));
        }

        warm = aux.policy.clone();
        let jump =
            opts.early_exit && aux.kappa_prime() - kappa > opts.kappa_tol * kappa.abs().max(1.0);
        candidates.push(aux);
        extra_cuts.push(extra);
        if jump {
            aborted_early = true;
            break;
        }
    }

    let best_index = if aborted_early {
        candidates.len() - 1
    } else {
        let mut best = 0;
        for (i, c) in candidates.iter().enumerate() {
            if c.m2v > candidates[best].m2v {
                best = i;
            }
        }
        best
    };
    let best = candidates[best_index].clone();
    let max_kappa_prime = candidates
        .iter()
        .map(AuxSolution::kappa_prime)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(M2VSolution {
        kappa,
        best_m2v: best.m2v,
        kappa_prime: best.kappa_prime(),
        max_kappa_prime,
        aux_solve_count: candidates.len(),
        best,
        candidates,
        extra_cuts,
        aborted_early,
    })
}
