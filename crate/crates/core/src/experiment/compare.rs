use std::fmt::Write as _;
use std::io::Write;

use super::output::{csv_writer, format_real};
use super::{dbw_to_watts, run_sweep, ExperimentConfig, SweepOutput};
use crate::allocation::{allocate, Algorithm};
use crate::model::{CombiningScheme, PowerMatrix};
use crate::Result;

/// Original against improved at one (scheme, budget) point.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub scheme: CombiningScheme,
    pub pmax_dbw: f64,
    pub trials: usize,
    pub mean_original: f64,
    pub mean_improved: f64,
    /// Mean of per-trial `improved - original`.
    pub mean_gap: f64,
    /// Share of trials where improved is at least as good as original.
    pub frac_improved_ge_original: f64,
}

pub const COMPARE_HEADER: [&str; 7] = [
    "scheme",
    "pmax_dbw",
    "trials",
    "mean_original",
    "mean_improved",
    "mean_gap",
    "frac_improved_ge_original",
];

impl CompareRow {
    /// Builds a row from paired `(original, improved)` throughputs.
    pub fn from_pairs(scheme: CombiningScheme, pmax_dbw: f64, pairs: &[(usize, usize)]) -> Self {
        let n = pairs.len() as f64;
        let mean = |f: &dyn Fn(&(usize, usize)) -> f64| pairs.iter().map(f).sum::<f64>() / n;
        CompareRow {
            scheme,
            pmax_dbw,
            trials: pairs.len(),
            mean_original: mean(&|p| p.0 as f64),
            mean_improved: mean(&|p| p.1 as f64),
            mean_gap: mean(&|p| p.1 as f64 - p.0 as f64),
            frac_improved_ge_original: mean(&|p| if p.1 >= p.0 { 1.0 } else { 0.0 }),
        }
    }

    pub fn regressed(&self) -> bool {
        self.mean_improved < self.mean_original
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    /// True when improved loses to original on average at any point.
    pub fn regression(&self) -> bool {
        self.rows.iter().any(CompareRow::regressed)
    }

    pub fn render_text(&self) -> String {
        let mut text = String::new();
        let _ = writeln!(
            text,
            "{:<6} {:>10} {:>7} {:>10} {:>10} {:>9} {:>8}",
            "scheme", "pmax_dBW", "trials", "original", "improved", "gap", "imp>=org"
        );
        for r in &self.rows {
            let _ = writeln!(
                text,
                "{:<6} {:>10.3} {:>7} {:>10.3} {:>10.3} {:>9.3} {:>8.3}{}",
                r.scheme.label(),
                r.pmax_dbw,
                r.trials,
                r.mean_original,
                r.mean_improved,
                r.mean_gap,
                r.frac_improved_ge_original,
                if r.regressed() { "  REGRESSION" } else { "" }
            );
        }
        let worst = self
            .rows
            .iter()
            .map(|r| r.mean_gap)
            .fold(f64::INFINITY, f64::min);
        let _ = writeln!(
            text,
            "{} points, smallest mean gap {:.3}: {}",
            self.rows.len(),
            worst,
            if self.regression() { "improved fell behind original" } else { "improved never behind original on average" }
        );
        text
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv_writer(w);
        csv.write_record(COMPARE_HEADER)?;
        for r in &self.rows {
            csv.write_record([
                r.scheme.label().to_owned(),
                format_real(r.pmax_dbw),
                r.trials.to_string(),
                format_real(r.mean_original),
                format_real(r.mean_improved),
                format_real(r.mean_gap),
                format_real(r.frac_improved_ge_original),
            ])?;
        }
        csv.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Pairs original and improved rows of a sweep by (scheme, budget, trial).
    pub fn from_sweep(cfg: &ExperimentConfig, sweep: &SweepOutput) -> Self {
        let cell = cfg.trials;
        let per_alg = cfg.pmax_dbw.len() * cell;
        let mut rows = Vec::new();
        // records are ordered scheme, algorithm (original then improved), budget, trial
        for (si, &scheme) in cfg.schemes.iter().enumerate() {
            let base = si * 2 * per_alg;
            for (pi, &dbw) in cfg.pmax_dbw.iter().enumerate() {
                let orig = &sweep.records[base + pi * cell..base + (pi + 1) * cell];
                let imp = &sweep.records[base + per_alg + pi * cell..base + per_alg + (pi + 1) * cell];
                let pairs: Vec<(usize, usize)> = orig
                    .iter()
                    .zip(imp)
                    .map(|(o, i)| {
                        debug_assert_eq!((o.seed, o.algorithm, i.algorithm), (i.seed, Algorithm::Original, Algorithm::Improved));
                        (o.throughput, i.throughput)
                    })
                    .collect();
                rows.push(CompareRow::from_pairs(scheme, dbw, &pairs));
            }
        }
        CompareReport { rows }
    }
}

/// Runs both algorithms on the configured sweep and pairs their trials.
pub fn compare_report(cfg: &ExperimentConfig) -> Result<(CompareReport, SweepOutput)> {
    let cfg = ExperimentConfig {
        algorithms: Algorithm::BOTH.to_vec(),
        ..cfg.clone()
    };
    let sweep = run_sweep(&cfg)?;
    Ok((CompareReport::from_sweep(&cfg, &sweep), sweep))
}

/// Comparison row over explicit power matrices, all at one budget.
pub fn compare_matrices(
    scheme: CombiningScheme,
    pmax_dbw: f64,
    matrices: &[PowerMatrix],
    s: usize,
) -> Result<CompareRow> {
    let watts = dbw_to_watts(pmax_dbw);
    let pairs = matrices
        .iter()
        .map(|pm| {
            Ok((
                allocate(pm, Algorithm::Original, watts, s)?.throughput,
                allocate(pm, Algorithm::Improved, watts, s)?.throughput,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareRow::from_pairs(scheme, pmax_dbw, &pairs))
}
