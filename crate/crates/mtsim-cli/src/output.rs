//! Text and CSV rendering for the command-line tools.
//!
//! Estimated quantities are printed with 17 significant digits (`{:.16e}`),
//! enough to round-trip an `f64` exactly, so re-running a command and
//! diffing the bytes is a meaningful regression check. Grid coordinates are
//! printed with the shortest exact representation instead, to keep the
//! tables readable.

use std::fmt::Write as _;

use mtsim::estimators::SweepRow;
use mtsim::limits::{LimitBand, LimitResult};
use mtsim::procedures::RejectionSet;

/// Column order for `estimate` and `sweep` output.
pub const CSV_HEADER: &str = "procedure,metric,n,rho,alpha,n_false,mu,replicates,seed,\
estimate,std_error,ci_low,ci_high,reference_limit,class_bound,error";

/// Exact 17-significant-digit rendering for derived quantities.
pub fn derived(x: f64) -> String {
    format!("{x:.16e}")
}

fn band(b: LimitBand) -> String {
    match b {
        LimitBand::Point(v) => derived(v),
        LimitBand::Interval(lo, hi) => format!("{}..{}", derived(lo), derived(hi)),
    }
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

/// Renders one sweep (or single-cell estimate) row, without the newline.
pub fn csv_row(row: &SweepRow) -> String {
    let mut line = String::new();
    let _ = write!(
        line,
        "{},{},{},{},{},{},{},{},{}",
        row.procedure, row.metric, row.n, row.rho, row.alpha, row.n_false, row.mu,
        row.replicates, row.seed,
    );
    match &row.outcome {
        Ok(est) => {
            let _ = write!(
                line,
                ",{},{},{},{}",
                derived(est.estimate),
                derived(est.std_error),
                derived(est.ci_low),
                derived(est.ci_high),
            );
        }
        Err(_) => line.push_str(",,,,"),
    }
    let _ = write!(
        line,
        ",{},{}",
        row.reference_limit.map(band).unwrap_or_default(),
        row.class_bound.map(derived).unwrap_or_default(),
    );
    match &row.outcome {
        Ok(_) => line.push(','),
        Err(message) => {
            let _ = write!(line, ",{}", csv_escape(message));
        }
    }
    line
}

/// Renders a limit computation: the value alone on the first line, then one
/// labeled diagnostic per line.
pub fn limit_report(r: &LimitResult) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_owned(), derived);
    format!(
        "{}\nminimizer_t: {}\nobjective_at_minimizer: {}\ngrid_points: {}\nrefinement_tolerance: {:e}\n",
        r.value,
        opt(r.minimizer_t),
        opt(r.objective_at_minimizer),
        r.grid_points,
        r.refinement_tolerance,
    )
}

/// Renders a decision as a one-line summary with 1-based hypothesis indices.
pub fn decision_report(set: &RejectionSet) -> String {
    let rejected: Vec<String> = (0..set.len())
        .filter(|&i| set.is_rejected(i))
        .map(|i| (i + 1).to_string())
        .collect();
    if rejected.is_empty() {
        "no rejections\n".to_owned()
    } else {
        format!(
            "rejected {} of {}: {}\n",
            rejected.len(),
            set.len(),
            rejected.join(" ")
        )
    }
}

/// Renders a critical-value table: one `index<TAB>value` row per cutoff.
/// Values use the shortest representation that parses back to the same
/// `f64`, so the table is readable and still exact.
pub fn cutoff_table(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{}\t{v}", i + 1);
    }
    out
}
