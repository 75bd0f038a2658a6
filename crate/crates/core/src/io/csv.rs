//! CSV tables: header row, `.` decimals in shortest round-trip exponent form,
//! `\n` line endings.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::coupling::{ConvergenceReport, TraceHistory};
use crate::error::Result;
use crate::fem::Discretization;
use crate::verification::SweepResult;

pub const SWEEP_HEADER: [&str; 6] = ["alpha", "n_iterations", "w_dist_to_continuity", "jump_l2", "energy_residual", "converged"];

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

/// Writes `header` and `rows` to `out`; an empty `rows` gives a header-only table.
pub fn write_csv_to<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    write_csv_to(File::create(path)?, header, rows)
}

/// Sweep table. `n_iterations` is the number of iterations performed, which is
/// the cap when `converged = 0`.
pub fn sweep_rows(result: &SweepResult) -> Vec<Vec<String>> {
    result
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.alpha),
                r.n_iterations.unwrap_or(r.iterations_run).to_string(),
                fmt_f64(r.w_dist_to_continuity),
                fmt_f64(r.jump_l2),
                fmt_f64(r.energy_residual),
                u8::from(r.converged()).to_string(),
            ]
        })
        .collect()
}

pub fn write_sweep_csv(path: &Path, result: &SweepResult) -> Result<()> {
    write_csv(path, &SWEEP_HEADER, sweep_rows(result))
}

pub const HISTORY_HEADER: [&str; 4] = ["iteration", "increment_l2", "jump_l2", "energy_residual"];

pub fn history_rows(report: &ConvergenceReport) -> Vec<Vec<String>> {
    report
        .iterations
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                fmt_f64(r.increment_l2),
                fmt_f64(r.jump_l2),
                fmt_f64(r.energy_residual),
            ]
        })
        .collect()
}

pub const TRACE_HEADER: [&str; 4] = ["step", "subdomain", "x", "u"];

pub fn trace_rows(history: &TraceHistory, disc: &Discretization) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (step, (trace, sub)) in history.traces.iter().zip(&history.solved).enumerate() {
        for (x, u) in disc.trace_x.iter().zip(trace) {
            rows.push(vec![(step + 1).to_string(), sub.name().to_string(), fmt_f64(*x), fmt_f64(*u)]);
        }
    }
    rows
}
