//! CSV and JSON emission for count reports.

use std::fmt::Write as _;

use super::CountReport;

pub const CSV_HEADER: &str = "bin_id,lo,hi,observed,predicted,ratio";

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";")
}

pub fn to_csv(report: &CountReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.bin.id, join(&r.bin.lo), join(&r.bin.hi), r.observed, r.predicted, r.ratio);
    }
    out
}

/// CSV with an extra `tail_bound` column (one value per row).
pub fn to_csv_with_tail(report: &CountReport, tails: &[f64]) -> String {
    let mut out = format!("{CSV_HEADER},tail_bound\n");
    for (r, tb) in report.rows.iter().zip(tails) {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", r.bin.id, join(&r.bin.lo), join(&r.bin.hi), r.observed, r.predicted, r.ratio, tb);
    }
    out
}
