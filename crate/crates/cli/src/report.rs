//! Text artifacts: `key=value` records and CSV tables, written atomically.

use std::fmt::Write as _;
use std::path::Path;

use neurohom::io::{atomic_write, write_field, FieldData};
use neurohom::SolveReport;

use crate::CliError;

/// Float formatting that round-trips exactly.
pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    atomic_write(path, text.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_dump(path: &Path, field: FieldData, meta: &[(&str, String)]) -> Result<(), CliError> {
    let meta: Vec<(String, String)> = meta.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    write_field(path, &field, &meta).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `key=value` record of a solve, without wall-clock time so that reruns are byte-identical.
pub fn solve_record(report: &SolveReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "integrator={}", report.integrator);
    let _ = writeln!(out, "outputs={}", report.times.len());
    let _ = writeln!(out, "final_time={}", num(*report.times.last().unwrap_or(&0.0)));
    let _ = writeln!(out, "rhs_evaluations={}", report.rhs_evaluations);
    let _ = writeln!(out, "sup_l1_l2={}", num(report.sup_l1_l2()));
    let _ = writeln!(out, "min_value={}", num(report.min_value));
    if !report.subintervals.is_empty() {
        let _ = writeln!(out, "subintervals={}", report.subintervals.len());
        let _ = writeln!(out, "total_sweeps={}", report.total_sweeps());
        let _ = writeln!(
            out,
            "max_contraction_ratio={}",
            report.max_ratio().map_or("none".to_string(), num)
        );
        let worst = report.subintervals.iter().map(|s| s.residual).fold(0.0, f64::max);
        let _ = writeln!(out, "max_final_residual={}", num(worst));
    }
    out
}

/// `t,l1,l2` table of a solve.
pub fn norms_csv(report: &SolveReport) -> String {
    let mut out = String::from("t,l1,l2\n");
    for i in 0..report.times.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            num(report.times[i]),
            num(report.l1[i]),
            num(report.l2[i])
        );
    }
    out
}

/// `start,end,sweeps,residual,max_ratio` table of Picard subintervals.
pub fn subintervals_csv(report: &SolveReport) -> String {
    let mut out = String::from("start,end,sweeps,residual,max_ratio\n");
    for s in &report.subintervals {
        let r = s.ratios.iter().copied().reduce(f64::max);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(s.start),
            num(s.end),
            s.sweeps,
            num(s.residual),
            r.map_or("nan".to_string(), num)
        );
    }
    out
}

/// File-name safe version of a label.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
