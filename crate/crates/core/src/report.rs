//! CSV output for solve traces and frontiers.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::eval::PolicyMetrics;
use crate::mdp::{Policy, ValidatedMdp};
use crate::oracle::FrontierPoint;
use crate::srpi::SolveReport;

/// Round-trip safe float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn into_string(wtr: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// One row per auxiliary solve, grouped by outer iteration, followed by a
/// `#` summary line.
pub fn emit_trace_csv(report: &SolveReport, mdp: &ValidatedMdp) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["kappa", "y", "policy_sequence", "m2v", "kappa_prime"])?;
    for row in &report.outer_rows {
        for c in &row.solution.candidates {
            let seq: Vec<String> = c.inner_trace.iter().map(|d| mdp.format_policy(d)).collect();
            wtr.write_record([
                fmt_f64(row.kappa),
                fmt_f64(c.y),
                seq.join(";"),
                fmt_f64(c.m2v),
                fmt_f64(c.kappa_prime()),
            ])?;
        }
    }
    let mut out = into_string(wtr)?;
    out.push_str(&format!(
        "# optimal_policy={} kappa_star={} sharpe_star={}\n",
        mdp.format_policy(&report.optimal_policy),
        fmt_f64(report.kappa_star),
        fmt_f64(report.sharpe_star)
    ));
    Ok(out)
}

/// Every policy with its moments, flagged when it lies on the frontier.
pub fn emit_frontier_csv(
    mdp: &ValidatedMdp,
    points: &[FrontierPoint],
    all: &[(Policy, PolicyMetrics)],
) -> Result<String> {
    let on: HashSet<&Policy> = points.iter().map(|p| &p.policy).collect();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "policy",
        "zeta",
        "second_moment",
        "eta",
        "sharpe",
        "on_frontier",
    ])?;
    for (d, m) in all {
        wtr.write_record([
            mdp.format_policy(d),
            fmt_f64(m.zeta),
            fmt_f64(m.second_moment),
            fmt_f64(m.eta),
            fmt_f64(m.sharpe),
            on.contains(d).to_string(),
        ])?;
    }
    into_string(wtr)
}
