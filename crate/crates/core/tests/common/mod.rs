//! Reference implementations used only by the integration tests. They share
//! no code with the library beyond instance access.
#![allow(dead_code)]

use sharpe_mdp::generator::gen_random_mdp;
use sharpe_mdp::mdp::validate;
use sharpe_mdp::{Policy, ValidatedMdp};

/// Gaussian elimination with partial pivoting on a dense row-major system.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        assert!(a[piv][col].abs() > 1e-14, "singular reference system");
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

pub fn chain(mdp: &ValidatedMdp, d: &Policy) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = mdp.n_states();
    let p = (0..n)
        .map(|s| mdp.transition_row(s, d.action(s)).to_vec())
        .collect();
    let r = (0..n).map(|s| mdp.reward(s, d.action(s))).collect();
    (p, r)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// (mean, variance, second moment) in the average setting.
pub fn reference_average(mdp: &ValidatedMdp, d: &Policy) -> (f64, f64, f64) {
    let (p, r) = chain(mdp, d);
    let n = r.len();
    // (Pᵀ − I)π = 0 with the last equation replaced by Σπ = 1
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = dense_solve(a, b);
    let eta = dot(&pi, &r);
    let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
    let dev: Vec<f64> = r.iter().map(|x| (x - eta).powi(2)).collect();
    (eta, dot(&pi, &dev), dot(&pi, &sq))
}

/// `(1−α)(I − αP)⁻¹ f`.
pub fn discounted_value(p: &[Vec<f64>], f: &[f64], alpha: f64) -> Vec<f64> {
    let n = f.len();
    let a = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } - alpha * p[i][j])
                .collect()
        })
        .collect();
    let b = f.iter().map(|x| (1.0 - alpha) * x).collect();
    dense_solve(a, b)
}

/// (mean, variance, second moment) in the discounted setting.
pub fn reference_discounted(
    mdp: &ValidatedMdp,
    d: &Policy,
    alpha: f64,
    mu: &[f64],
) -> (f64, f64, f64) {
    let (p, r) = chain(mdp, d);
    let n = r.len();
    let v = discounted_value(&p, &r, alpha);
    let eta = dot(mu, &v);
    let dev: Vec<f64> = r.iter().map(|x| (x - eta).powi(2)).collect();
    let zeta = dot(mu, &discounted_value(&p, &dev, alpha));
    // occupation measure: (I − αPᵀ) x = (1−α) μ
    let pt: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| p[j][i]).collect()).collect();
    let occ = discounted_value(&pt, mu, alpha);
    let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
    (eta, zeta, dot(&occ, &sq))
}

pub fn random_instance(size: usize, seed: u64) -> ValidatedMdp {
    validate(&gen_random_mdp(size, size, seed)).expect("generated instances are valid")
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}
