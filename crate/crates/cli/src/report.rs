//! Report files. Contents depend only on the numbers in the report, so a
//! rerun with the same configuration produces identical bytes.

use crate::convergence::ConvergenceReport;
use crate::error::Result;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use viscoshell::geometry::fitted_slope;
use viscoshell::io::write_file;

pub const CONVERGENCE_HEADER: &str = "kind,eps,distance,d3_norm,k0";

/// Data rows `row,eps,distance,d3_norm,k0`, then ratio rows
/// `ratio,eps_to,distance_ratio,d3_ratio,` for each consecutive pair.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(s, "row,{:e},{:e},{:e},{:e}", r.eps, r.distance, r.d3_norm, r.k0);
    }
    for r in report.ratios() {
        let _ = writeln!(s, "ratio,{:e},{:e},{:e},", r.eps_to, r.distance_ratio, r.d3_ratio);
    }
    s
}

/// Fixed-width table with the kernel diagnostic, rows, ratios and fitted
/// log-log slopes.
pub fn convergence_table(report: &ConvergenceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", report.scenario);
    if let Some(k) = &report.kernel {
        let _ = writeln!(
            s,
            "membrane kernel: {:?} (sigma_min {:.3e}, |K_a| {:.3e})",
            k.kind, k.sigma_min, k.norm
        );
    }
    let _ = writeln!(s, "|xi_h|_(T,omega): {:.6e}", report.reference_norm);
    let _ = writeln!(s);
    let _ = writeln!(s, "{:>10} {:>14} {:>14} {:>14}", "eps", "distance", "d3_norm", "k0");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{:>10.4e} {:>14.6e} {:>14.6e} {:>14.6e}",
            r.eps, r.distance, r.d3_norm, r.k0
        );
    }
    let ratios = report.ratios();
    if !ratios.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "{:>21} {:>14} {:>14}", "eps step", "dist ratio", "d3 ratio");
        for r in &ratios {
            let step = format!("{} -> {}", r.eps_from, r.eps_to);
            let _ = writeln!(s, "{:>21} {:>14.4} {:>14.4}", step, r.distance_ratio, r.d3_ratio);
        }
        let eps: Vec<f64> = report.rows.iter().map(|r| r.eps).collect();
        let dist: Vec<f64> = report.rows.iter().map(|r| r.distance).collect();
        let d3: Vec<f64> = report.rows.iter().map(|r| r.d3_norm).collect();
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "fitted slope vs eps: distance {:.4}, d3_norm {:.4}",
            fitted_slope(&eps, &dist),
            fitted_slope(&eps, &d3)
        );
    }
    s
}

/// Writes `convergence.csv` and `convergence.txt` into `dir`.
pub fn emit_report(report: &ConvergenceReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let csv = dir.join("convergence.csv");
    let txt = dir.join("convergence.txt");
    write_file(&csv, &convergence_csv(report))?;
    write_file(&txt, &convergence_table(report))?;
    Ok(vec![csv, txt])
}
