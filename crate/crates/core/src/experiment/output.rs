//! CSV rendering.
//!
//! Sweep files carry one row per trial followed by one summary row per
//! (scheme, algorithm, budget) cell. Summary rows are marked `summary` in the
//! `trial` column; their `seed` is the base seed, `throughput` and
//! `residual_power` hold means over the trials, and `groups_assigned` holds
//! the sample standard deviation of throughput.

use std::io::Write;

use super::SweepOutput;
use crate::Result;

pub const SWEEP_HEADER: [&str; 8] = [
    "scheme",
    "algorithm",
    "pmax_dbw",
    "trial",
    "seed",
    "throughput",
    "residual_power",
    "groups_assigned",
];

/// Nine significant digits in scientific notation.
pub fn format_real(x: f64) -> String {
    format!("{x:.8e}")
}

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_sweep_csv<W: Write>(w: W, out: &SweepOutput) -> Result<()> {
    let mut csv = csv_writer(w);
    csv.write_record(SWEEP_HEADER)?;
    for r in &out.records {
        csv.write_record([
            r.scheme.label().to_owned(),
            r.algorithm.label().to_owned(),
            format_real(r.pmax_dbw),
            r.trial.to_string(),
            r.seed.to_string(),
            r.throughput.to_string(),
            format_real(r.residual_power),
            r.groups_assigned.to_string(),
        ])?;
    }
    for s in &out.summaries {
        csv.write_record([
            s.scheme.label().to_owned(),
            s.algorithm.label().to_owned(),
            format_real(s.pmax_dbw),
            "summary".to_owned(),
            out.base_seed.to_string(),
            format_real(s.mean_throughput),
            format_real(s.mean_residual_power),
            format_real(s.std_throughput),
        ])?;
    }
    csv.flush().map_err(csv::Error::from)?;
    Ok(())
}
