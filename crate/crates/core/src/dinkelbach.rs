//! Dinkelbach iteration for `max f(x)/g(x)` over an abstract candidate space.
//!
//! Each step solves the linearized problem `max sign(g(x))·(f(x) − κ g(x))`
//! and moves `κ` to the ratio of its solution. From any `κ ≤ κ*` the ratios
//! increase strictly until the fixed point `κ = κ*`; a start above `κ*`
//! falls below it after one step.

use std::fmt;

/// Sign of the denominator across the candidate space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenominatorSign {
    Positive,
    Negative,
    /// Varies across candidates; only valid for solvers that optimize the
    /// sign-weighted objective exactly (e.g. by enumeration).
    Mixed,
}

/// A ratio problem given by its linearized solver.
pub trait RatioProblem {
    type Candidate: Clone;
    type Error;

    fn numerator(&self, x: &Self::Candidate) -> f64;
    fn denominator(&self, x: &Self::Candidate) -> f64;

    /// A maximizer of `sign(g(x))·(f(x) − κ g(x))`.
    fn linearized_argmax(&mut self, kappa: f64) -> Result<Self::Candidate, Self::Error>;

    fn denominator_sign(&self) -> DenominatorSign {
        DenominatorSign::Positive
    }
}

/// `sign(g)·(f − κg)`.
pub fn linearized_objective(f: f64, g: f64, kappa: f64) -> f64 {
    g.signum() * (f - kappa * g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOptions {
    /// Stop when `|κ − κ'| ≤ tol·max(1, |κ|)`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for RatioOptions {
    fn default() -> Self {
        RatioOptions {
            tol: 1e-9,
            max_iterations: 1000,
        }
    }
}

/// Iterates of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTrace<C> {
    /// `κ` at which each linearized problem was solved, starting with `κ₀`.
    pub kappas: Vec<f64>,
    /// Solution of each linearized problem.
    pub solutions: Vec<C>,
    /// `f/g` of each solution.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSolution<C> {
    pub candidate: C,
    pub kappa_star: f64,
    pub trace: RatioTrace<C>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RatioError<E> {
    Solver(E),
    /// The solver returned a candidate whose denominator is zero or has the
    /// wrong declared sign.
    BadDenominator {
        iteration: usize,
        value: f64,
    },
    BudgetExceeded(usize),
    /// Ratios decreased after the first step, so the solver is not exact.
    NotMonotone {
        iteration: usize,
        from: f64,
        to: f64,
    },
}

impl<E: fmt::Display> fmt::Display for RatioError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioError::Solver(e) => write!(f, "{e}"),
            RatioError::BadDenominator { iteration, value } => {
                write!(f, "denominator {value} at iteration {iteration}")
            }
            RatioError::BudgetExceeded(n) => write!(f, "no fixed point within {n} iterations"),
            RatioError::NotMonotone {
                iteration,
                from,
                to,
            } => {
                write!(f, "ratio fell from {from} to {to} at iteration {iteration}")
            }
        }
    }
}

impl<E: fmt::Debug + fmt::Display> std::error::Error for RatioError<E> {}

fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(1.0)
}

/// Run the iteration from `kappa0`.
pub fn solve_ratio<P: RatioProblem>(
    problem: &mut P,
    kappa0: f64,
    opts: &RatioOptions,
) -> Result<RatioSolution<P::Candidate>, RatioError<P::Error>> {
    let sign = problem.denominator_sign();
    let mut kappa = kappa0;
    let mut trace = RatioTrace {
        kappas: Vec::new(),
        solutions: Vec::new(),
        ratios: Vec::new(),
    };
    for iteration in 0..opts.max_iterations {
        let x = problem
            .linearized_argmax(kappa)
            .map_err(RatioError::Solver)?;
        let f = problem.numerator(&x);
        let g = problem.denominator(&x);
        let sign_ok = match sign {
            DenominatorSign::Positive => g > 0.0,
            DenominatorSign::Negative => g < 0.0,
            DenominatorSign::Mixed => g != 0.0,
        };
        if !sign_ok || !g.is_finite() {
            return Err(RatioError::BadDenominator {
                iteration,
                value: g,
            });
        }
        let next = f / g;
        // after the first step κ is an attained ratio, hence ≤ κ*
        if iteration > 0 && next < kappa - opts.tol * kappa.abs().max(1.0) {
            return Err(RatioError::NotMonotone {
                iteration,
                from: kappa,
                to: next,
            });
        }
        trace.kappas.push(kappa);
        trace.solutions.push(x.clone());
        trace.ratios.push(next);
        if within(kappa, next, opts.tol) {
            return Ok(RatioSolution {
                candidate: x,
                kappa_star: next,
                trace,
            });
        }
        kappa = next;
    }
    Err(RatioError::BudgetExceeded(opts.max_iterations))
}

/// Successive error ratios `|κ_{t+1} − κ*| / |κ_t − κ*|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateDiagnostics {
    pub ratios: Vec<f64>,
    /// Whether the ratios strictly decrease.
    pub decreasing: bool,
}

/// Error ratios of a `κ` sequence against a known optimum. Once an iterate
/// hits `κ*` exactly the ratio is reported as 0 and the sequence ends.
pub fn rate_diagnostics(kappas: &[f64], kappa_star: f64) -> Option<RateDiagnostics> {
    if kappas.len() < 2 {
        return None;
    }
    let mut ratios = Vec::with_capacity(kappas.len() - 1);
    for w in kappas.windows(2) {
        let before = (w[0] - kappa_star).abs();
        if before == 0.0 {
            break;
        }
        let after = (w[1] - kappa_star).abs();
        ratios.push(after / before);
        if after == 0.0 {
            break;
        }
    }
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    Some(RateDiagnostics { ratios, decreasing })
}

/// A candidate together with its numerator and denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored<C> {
    pub value: C,
    pub f: f64,
    pub g: f64,
}

/// A finite candidate list with precomputed `(f, g)`, solved by enumeration.
#[derive(Debug, Clone)]
pub struct FiniteRatioProblem<C> {
    items: Vec<Scored<C>>,
    sign: DenominatorSign,
    /// Number of linearized solves performed so far.
    pub solves: usize,
}

impl<C: Clone> FiniteRatioProblem<C> {
    /// Items are `(candidate, f, g)`.
    pub fn new(items: impl IntoIterator<Item = (C, f64, f64)>) -> Self {
        let items: Vec<Scored<C>> = items
            .into_iter()
            .map(|(value, f, g)| Scored { value, f, g })
            .collect();
        let sign = if items.iter().all(|i| i.g > 0.0) {
            DenominatorSign::Positive
        } else if items.iter().all(|i| i.g < 0.0) {
            DenominatorSign::Negative
        } else {
            DenominatorSign::Mixed
        };
        FiniteRatioProblem {
            items,
            sign,
            solves: 0,
        }
    }
}

/// The candidate list was empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyCandidates;

impl fmt::Display for EmptyCandidates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("empty candidate set")
    }
}

impl<C: Clone> RatioProblem for FiniteRatioProblem<C> {
    type Candidate = Scored<C>;
    type Error = EmptyCandidates;

    fn numerator(&self, x: &Scored<C>) -> f64 {
        x.f
    }

    fn denominator(&self, x: &Scored<C>) -> f64 {
        x.g
    }

    /// First maximizer in list order.
    fn linearized_argmax(&mut self, kappa: f64) -> Result<Scored<C>, EmptyCandidates> {
        self.solves += 1;
        let mut best: Option<(&Scored<C>, f64)> = None;
        for item in &self.items {
            let value = linearized_objective(item.f, item.g, kappa);
            if best.is_none_or(|(_, b)| value > b) {
                best = Some((item, value));
            }
        }
        best.map(|(item, _)| item.clone()).ok_or(EmptyCandidates)
    }

    fn denominator_sign(&self) -> DenominatorSign {
        self.sign
    }
}
