use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};

/// Pivots below this fraction of the largest pivot are treated as zero.
const PIVOT_RTOL: f64 = 1e-12;

/// Dense LU factorization with partial pivoting.
pub(crate) struct Factored {
    lu: LU<f64, Dyn, Dyn>,
    context: &'static str,
}

/// Factor `a`, rejecting numerically rank-deficient matrices.
pub(crate) fn factor(a: DMatrix<f64>, context: &'static str) -> Result<Factored> {
    let lu = a.lu();
    let u = lu.u();
    let diag = u.diagonal();
    let largest = diag.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if largest == 0.0 || diag.iter().any(|x| x.abs() <= PIVOT_RTOL * largest) {
        return Err(Error::Singular(context));
    }
    Ok(Factored { lu, context })
}

impl Factored {
    pub(crate) fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let x = self.lu.solve(b).ok_or(Error::Singular(self.context))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite solution while computing {}",
                self.context
            )));
        }
        Ok(x)
    }
}

pub(crate) fn solve(
    a: DMatrix<f64>,
    b: &DVector<f64>,
    context: &'static str,
) -> Result<DVector<f64>> {
    factor(a, context)?.solve(b)
}
