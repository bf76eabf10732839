//! Ground truth by exhaustive enumeration of deterministic policies.

use crate::error::{Error, Result};
use crate::eval::{evaluate, m2v_value, PolicyMetrics, Setting};
use crate::intervals::Interval;
use crate::mdp::{enumerate_policies, Policy, ValidatedMdp};
use crate::standard_pi::AuxSolution;

/// Slack allowed when checking a domination claim.
pub const DOMINATION_TOL: f64 = 1e-8;

/// A policy on the convex efficient frontier in the `(ζ, E{Q²})` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub policy: Policy,
    pub zeta: f64,
    pub second_moment: f64,
    pub eta: f64,
    pub sharpe: f64,
}

/// Metrics of every deterministic policy, in lexicographic policy order.
#[derive(Debug, Clone)]
pub struct PolicyTable {
    pub entries: Vec<(Policy, PolicyMetrics)>,
}

impl PolicyTable {
    pub fn build(mdp: &ValidatedMdp, setting: &Setting, big_m: f64, cap: u64) -> Result<Self> {
        setting.check(mdp.n_states())?;
        let entries = enumerate_policies(mdp, cap)?
            .map(|d| evaluate(mdp, &d, setting, big_m).map(|m| (d, m)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolicyTable { entries })
    }

    /// Sharpe argmax; ties go to the lexicographically smallest policy.
    pub fn best_sharpe(&self) -> (&Policy, &PolicyMetrics) {
        let mut best = &self.entries[0];
        for e in &self.entries[1..] {
            if e.1.sharpe > best.1.sharpe + 1e-12 * best.1.sharpe.abs().max(1.0) {
                best = e;
            }
        }
        (&best.0, &best.1)
    }

    /// M2V argmax at `kappa`; ties go to the lexicographically smallest policy.
    pub fn best_m2v(&self, kappa: f64) -> (&Policy, f64) {
        let mut best = (&self.entries[0].0, m2v_value(&self.entries[0].1, kappa));
        for (d, m) in &self.entries[1..] {
            let v = m2v_value(m, kappa);
            if v > best.1 + 1e-12 * best.1.abs().max(1.0) {
                best = (d, v);
            }
        }
        best
    }

    pub fn metrics(&self, d: &Policy) -> Option<&PolicyMetrics> {
        self.entries.iter().find(|(p, _)| p == d).map(|(_, m)| m)
    }

    pub fn frontier(&self) -> Vec<FrontierPoint> {
        frontier_of(&self.entries)
    }

    /// Every policy with mean inside `aux.dominated` is no better than
    /// `aux` in M2V value at `kappa`.
    pub fn verify_domination(&self, kappa: f64, aux: &AuxSolution) -> bool {
        self.verify_band(kappa, aux.dominated, aux.m2v, |m| m.eta)
    }

    /// Every policy with `|η|` inside `band` is no better than `m2v` at
    /// `kappa`.
    pub fn verify_extra_domination(&self, kappa: f64, band: Interval, m2v: f64) -> bool {
        self.verify_band(kappa, band, m2v, |m| m.eta.abs())
    }

    fn verify_band(
        &self,
        kappa: f64,
        band: Interval,
        m2v: f64,
        key: impl Fn(&PolicyMetrics) -> f64,
    ) -> bool {
        self.entries
            .iter()
            .filter(|(_, m)| band.contains(key(m)))
            .all(|(_, m)| m2v_value(m, kappa) <= m2v + DOMINATION_TOL)
    }
}

/// Optimal policy by enumeration.
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub policy: Policy,
    pub sharpe: f64,
    pub metrics: PolicyMetrics,
    pub table: PolicyTable,
}

/// Evaluate every policy and return the Sharpe argmax.
pub fn brute_force_optimum(
    mdp: &ValidatedMdp,
    setting: &Setting,
    big_m: f64,
    cap: u64,
) -> Result<BruteForce> {
    let table = PolicyTable::build(mdp, setting, big_m, cap)?;
    let (policy, metrics) = table.best_sharpe();
    let (policy, metrics) = (policy.clone(), *metrics);
    Ok(BruteForce {
        sharpe: metrics.sharpe,
        policy,
        metrics,
        table,
    })
}

/// Convex efficient frontier of an instance.
pub fn frontier(
    mdp: &ValidatedMdp,
    setting: &Setting,
    big_m: f64,
    cap: u64,
) -> Result<Vec<FrontierPoint>> {
    Ok(PolicyTable::build(mdp, setting, big_m, cap)?.frontier())
}

type HullVertex<'a> = (Option<&'a (Policy, PolicyMetrics)>, (f64, f64));

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper hull of the points and the origin, cut at the point with the largest
/// second moment, listed from that point toward the origin. Points sharing
/// coordinates keep the lexicographically smallest policy. Zero-variance
/// policies sit at the big-M placeholder and never qualify.
pub fn frontier_of(entries: &[(Policy, PolicyMetrics)]) -> Vec<FrontierPoint> {
    let mut pts: Vec<&(Policy, PolicyMetrics)> =
        entries.iter().filter(|(_, m)| !m.zero_variance).collect();
    pts.sort_by(|a, b| {
        a.1.zeta
            .total_cmp(&b.1.zeta)
            .then(b.1.second_moment.total_cmp(&a.1.second_moment))
            .then(a.0.cmp(&b.0))
    });
    pts.dedup_by(|b, a| a.1.zeta == b.1.zeta && a.1.second_moment == b.1.second_moment);

    // hull[0] is the origin; None marks it
    let mut hull: Vec<HullVertex> = vec![(None, (0.0, 0.0))];
    for p in pts {
        let xy = (p.1.zeta, p.1.second_moment);
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2].1;
            let a = hull[hull.len() - 1].1;
            let scale = ((a.0 - o.0).hypot(a.1 - o.1) * (xy.0 - o.0).hypot(xy.1 - o.1)).max(1e-300);
            // drop `a` unless o → a → p turns clockwise
            if cross(o, a, xy) >= -1e-12 * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((Some(p), xy));
    }

    let top =
        hull.iter()
            .enumerate()
            .skip(1)
            .fold(None::<(usize, f64)>, |best, (i, h)| match best {
                Some((_, q)) if h.1 .1 <= q => best,
                _ => Some((i, h.1 .1)),
            });
    let Some((top, _)) = top else {
        return Vec::new();
    };
    hull[1..=top]
        .iter()
        .rev()
        .map(|(e, _)| {
            let (policy, m) = e.expect("origin is excluded");
            FrontierPoint {
                policy: policy.clone(),
                zeta: m.zeta,
                second_moment: m.second_moment,
                eta: m.eta,
                sharpe: m.sharpe,
            }
        })
        .collect()
}

/// `(κ_low, κ*)`: the ratio of the frontier point nearest the origin and the
/// slope of the frontier edge joining it to its neighbor with larger second
/// moment (0 when there is none).
pub fn kappa_interval(frontier: &[FrontierPoint]) -> Result<(f64, f64)> {
    let (i, opt) = frontier
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1.second_moment / a.1.zeta).total_cmp(&(b.1.second_moment / b.1.zeta)))
        .ok_or_else(|| Error::InvalidArgument("empty frontier".into()))?;
    let kappa_star = opt.second_moment / opt.zeta;
    if i == 0 {
        return Ok((0.0, kappa_star));
    }
    let prev = &frontier[i - 1];
    let dz = prev.zeta - opt.zeta;
    if dz == 0.0 {
        return Err(Error::Numerical(
            "frontier neighbors share a variance".into(),
        ));
    }
    Ok(((prev.second_moment - opt.second_moment) / dz, kappa_star))
}

/// Check `aux` against every policy of the instance.
pub fn verify_domination(
    mdp: &ValidatedMdp,
    setting: &Setting,
    kappa: f64,
    aux: &AuxSolution,
    big_m: f64,
    cap: u64,
) -> Result<bool> {
    Ok(PolicyTable::build(mdp, setting, big_m, cap)?.verify_domination(kappa, aux))
}
