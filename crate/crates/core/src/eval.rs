//! Exact evaluation of a deterministic policy: mean, steady-state variance,
//! second moment and Sharpe ratio, in the average-reward and discounted
//! settings.
//!
//! Both settings reduce to a distribution over states (stationary or
//! normalized occupation) and moments of the instantaneous reward under it,
//! so `second_moment = eta² + zeta` holds in both. A policy whose variance
//! falls below [`ZERO_VARIANCE_TOL`] is assigned the configured big-M
//! variance so that its ratio stays defined and small.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::mdp::{restrict, MarkovRewardProcess, Policy, ValidatedMdp};

/// Variances below this are treated as zero.
pub const ZERO_VARIANCE_TOL: f64 = 1e-10;

/// Default variance substituted for zero-variance policies.
pub const DEFAULT_BIG_M: f64 = 1e12;

const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;
const MU_SUM_TOL: f64 = 1e-12;

/// Discount factor and initial distribution of the discounted setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Discount {
    alpha: f64,
    mu: Vec<f64>,
}

impl Discount {
    pub fn new(alpha: f64, mu: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidSetting(format!(
                "discount factor {alpha} must lie strictly inside (0, 1)"
            )));
        }
        if mu.is_empty() || mu.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidSetting(
                "initial distribution must be a nonempty nonnegative vector".into(),
            ));
        }
        let sum: f64 = mu.iter().sum();
        if (sum - 1.0).abs() > MU_SUM_TOL + mu.len() as f64 * f64::EPSILON {
            return Err(Error::InvalidSetting(format!(
                "initial distribution sums to {sum}"
            )));
        }
        Ok(Discount { alpha, mu })
    }

    pub fn uniform(alpha: f64, n_states: usize) -> Result<Self> {
        Self::new(alpha, vec![1.0 / n_states as f64; n_states])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
}

/// Which long-run criterion the moments are taken under.
#[derive(Debug, Clone, PartialEq)]
pub enum Setting {
    Average,
    Discounted(Discount),
}

impl Setting {
    pub fn discounted(alpha: f64, mu: Vec<f64>) -> Result<Self> {
        Discount::new(alpha, mu).map(Setting::Discounted)
    }

    pub fn discounted_uniform(alpha: f64, n_states: usize) -> Result<Self> {
        Discount::uniform(alpha, n_states).map(Setting::Discounted)
    }

    /// Check that the setting fits an instance with `n_states` states.
    pub fn check(&self, n_states: usize) -> Result<()> {
        match self {
            Setting::Average => Ok(()),
            Setting::Discounted(disc) if disc.mu.len() == n_states => Ok(()),
            Setting::Discounted(disc) => Err(Error::InvalidSetting(format!(
                "initial distribution has {} entries, instance has {n_states} states",
                disc.mu.len()
            ))),
        }
    }
}

/// Moments of one policy under one setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyMetrics {
    pub eta: f64,
    /// Steady-state variance, or big-M when `zero_variance`.
    pub zeta: f64,
    pub second_moment: f64,
    pub sharpe: f64,
    /// Coefficient of variation `1/ψ`; `None` when `ψ` is (numerically) zero.
    pub cv: Option<f64>,
    pub zero_variance: bool,
}

impl PolicyMetrics {
    fn from_moments(eta: f64, zeta: f64, second_moment: f64, big_m: f64) -> Result<Self> {
        if zeta < -ZERO_VARIANCE_TOL || !zeta.is_finite() {
            return Err(Error::Numerical(format!("negative variance {zeta}")));
        }
        let zero_variance = zeta < ZERO_VARIANCE_TOL;
        let zeta = if zero_variance { big_m } else { zeta };
        let sharpe = eta / zeta.sqrt();
        let cv = (sharpe.abs() > 1e-12).then(|| 1.0 / sharpe);
        Ok(PolicyMetrics {
            eta,
            zeta,
            second_moment,
            sharpe,
            cv,
            zero_variance,
        })
    }

    /// `E{Q²}/ζ`, which equals `1 + ψ²` for a policy with positive variance.
    pub fn kappa(&self) -> f64 {
        self.second_moment / self.zeta
    }
}

/// Discounted value functions of a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunctions {
    /// Normalized discounted mean value.
    pub v: DVector<f64>,
    /// Normalized discounted variance value, centered at `μ·v`.
    pub w: DVector<f64>,
}

/// `πP = π`, `Σπ = 1`, from the dense system with one balance equation
/// replaced by the normalization.
pub fn stationary_distribution(mrp: &MarkovRewardProcess) -> Result<DVector<f64>> {
    let n = mrp.n_states();
    let mut a = mrp.p.transpose() - DMatrix::<f64>::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let mut pi = linalg::solve(a, &b, "stationary distribution")?;
    if pi.iter().any(|&x| x < -1e-12) {
        return Err(Error::Numerical(
            "stationary distribution has negative mass".into(),
        ));
    }
    pi.iter_mut().for_each(|x| *x = x.max(0.0));
    let residual = (mrp.p.tr_mul(&pi) - &pi).amax();
    if residual > STATIONARY_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "stationary residual {residual:e} exceeds {STATIONARY_RESIDUAL_TOL:e}"
        )));
    }
    Ok(pi)
}

fn squared_deviation(r: &DVector<f64>, center: f64) -> DVector<f64> {
    r.map(|x| (x - center) * (x - center))
}

/// Metrics in the average-reward setting.
pub fn evaluate_average(mdp: &ValidatedMdp, d: &Policy, big_m: f64) -> Result<PolicyMetrics> {
    let mrp = restrict(mdp, d);
    if !mrp.is_irreducible() {
        log::warn!(
            "policy {} induces a reducible chain; stationary statistics may be ill-defined",
            mdp.format_policy(d)
        );
    }
    let pi = stationary_distribution(&mrp)?;
    let eta = pi.dot(&mrp.r);
    let zeta = pi.dot(&squared_deviation(&mrp.r, eta));
    let second_moment = pi.dot(&mrp.r.component_mul(&mrp.r));
    PolicyMetrics::from_moments(eta, zeta, second_moment, big_m)
}

fn resolvent(mrp: &MarkovRewardProcess, alpha: f64, transpose: bool) -> Result<linalg::Factored> {
    let n = mrp.n_states();
    let p = if transpose {
        mrp.p.transpose()
    } else {
        mrp.p.clone()
    };
    linalg::factor(DMatrix::identity(n, n) - p * alpha, "discounted resolvent")
}

/// `v = (1−α)(I−αP)⁻¹r` and `w = (1−α)(I−αP)⁻¹(r − η_c e)²`.
pub fn discounted_values(
    mdp: &ValidatedMdp,
    d: &Policy,
    disc: &Discount,
) -> Result<ValueFunctions> {
    let mrp = restrict(mdp, d);
    discounted_values_of(&mrp, disc)
}

fn discounted_values_of(mrp: &MarkovRewardProcess, disc: &Discount) -> Result<ValueFunctions> {
    let alpha = disc.alpha;
    let lu = resolvent(mrp, alpha, false)?;
    let v = lu.solve(&mrp.r)? * (1.0 - alpha);
    let eta = DVector::from_column_slice(&disc.mu).dot(&v);
    let w = lu.solve(&squared_deviation(&mrp.r, eta))? * (1.0 - alpha);
    Ok(ValueFunctions { v, w })
}

/// Normalized occupation measure `(1−α) μ (I−αP)⁻¹`.
pub fn occupation_measure(mrp: &MarkovRewardProcess, disc: &Discount) -> Result<DVector<f64>> {
    let lu = resolvent(mrp, disc.alpha, true)?;
    Ok(lu.solve(&DVector::from_column_slice(&disc.mu))? * (1.0 - disc.alpha))
}

/// Metrics in the discounted setting.
pub fn evaluate_discounted(
    mdp: &ValidatedMdp,
    d: &Policy,
    disc: &Discount,
    big_m: f64,
) -> Result<PolicyMetrics> {
    let mrp = restrict(mdp, d);
    let values = discounted_values_of(&mrp, disc)?;
    let mu = DVector::from_column_slice(&disc.mu);
    let eta = mu.dot(&values.v);
    let zeta = mu.dot(&values.w);
    let occupation = occupation_measure(&mrp, disc)?;
    let second_moment = occupation.dot(&mrp.r.component_mul(&mrp.r));
    PolicyMetrics::from_moments(eta, zeta, second_moment, big_m)
}

/// Dispatch on the setting.
pub fn evaluate(
    mdp: &ValidatedMdp,
    d: &Policy,
    setting: &Setting,
    big_m: f64,
) -> Result<PolicyMetrics> {
    match setting {
        Setting::Average => evaluate_average(mdp, d, big_m),
        Setting::Discounted(disc) => evaluate_discounted(mdp, d, disc, big_m),
    }
}

/// Mean-squared-variance objective `E{Q²} − κζ`.
pub fn m2v_value(m: &PolicyMetrics, kappa: f64) -> f64 {
    m.second_moment - kappa * m.zeta
}
