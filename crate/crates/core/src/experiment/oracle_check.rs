use std::io::Write;

use rayon::prelude::*;

use super::output::{csv_writer, format_real};
use super::{dbw_to_watts, trial_seed, ExperimentConfig};
use crate::allocation::validate_allocation;
use crate::fading::{sample_channel_gains, SeededGenerator};
use crate::model::{build_power_matrix, CombiningScheme};
use crate::oracle::{exhaustive_optimal_in, Family};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckRow {
    pub scheme: CombiningScheme,
    pub pmax_dbw: f64,
    pub trial: usize,
    pub seed: u64,
    pub original: usize,
    pub improved: usize,
    pub oracle: usize,
    pub enumerated: usize,
}

impl OracleCheckRow {
    /// Oracle at least as good as both greedy algorithms.
    pub fn dominates(&self) -> bool {
        self.oracle >= self.original && self.oracle >= self.improved
    }
}

pub const ORACLE_HEADER: [&str; 9] = [
    "scheme",
    "pmax_dbw",
    "trial",
    "seed",
    "original",
    "improved",
    "oracle",
    "gap_original",
    "gap_improved",
];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckReport {
    pub family: Family,
    pub rows: Vec<OracleCheckRow>,
}

impl OracleCheckReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.dominates()).count()
    }

    pub fn render_text(&self) -> String {
        let n = self.rows.len().max(1) as f64;
        let gap = |f: fn(&OracleCheckRow) -> usize| {
            self.rows.iter().map(|r| (r.oracle - f(r).min(r.oracle)) as f64).sum::<f64>() / n
        };
        let optimal = |f: fn(&OracleCheckRow) -> usize| {
            self.rows.iter().filter(|r| f(r) == r.oracle).count()
        };
        format!(
            "{} instances ({:?} family)\n\
             original: optimal on {}, mean gap {:.4}\n\
             improved: optimal on {}, mean gap {:.4}\n\
             dominance violations: {}\n",
            self.rows.len(),
            self.family,
            optimal(|r| r.original),
            gap(|r| r.original),
            optimal(|r| r.improved),
            gap(|r| r.improved),
            self.violations()
        )
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv_writer(w);
        csv.write_record(ORACLE_HEADER)?;
        for r in &self.rows {
            csv.write_record([
                r.scheme.label().to_owned(),
                format_real(r.pmax_dbw),
                r.trial.to_string(),
                r.seed.to_string(),
                r.original.to_string(),
                r.improved.to_string(),
                r.oracle.to_string(),
                (r.oracle as i64 - r.original as i64).to_string(),
                (r.oracle as i64 - r.improved as i64).to_string(),
            ])?;
        }
        csv.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Runs the exhaustive oracle next to both greedy algorithms on every
/// (scheme, budget, trial) cell of `cfg`.
pub fn oracle_check(cfg: &ExperimentConfig) -> Result<OracleCheckReport> {
    cfg.validate()?;
    let sim = &cfg.sim;
    let beta = sim.beta()?;
    let s = sim.subcarriers_per_group();
    let cells: Vec<(usize, usize, usize)> = (0..cfg.schemes.len())
        .flat_map(|si| {
            (0..cfg.pmax_dbw.len()).flat_map(move |pi| (0..cfg.trials).map(move |t| (si, pi, t)))
        })
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(si, pi, trial)| {
            let scheme = cfg.schemes[si];
            let dbw = cfg.pmax_dbw[pi];
            let watts = dbw_to_watts(dbw);
            let seed = trial_seed(cfg.seed, pi, trial, cfg.common_random_numbers);
            let gains = sample_channel_gains(sim, &mut SeededGenerator::new(seed))?;
            let pm = build_power_matrix(&gains, scheme, beta, sim.noise_psd)?;
            let rep = exhaustive_optimal_in(&pm, watts, s, cfg.oracle_family)?;
            for r in [&rep.best, &rep.original, &rep.improved] {
                let check = validate_allocation(r, &pm, watts, s)?;
                if !check.passes() {
                    return Err(Error::Validation(format!(
                        "{} allocation, {scheme} trial {trial} at {dbw} dBW:\n{check}",
                        r.solver
                    )));
                }
            }
            Ok(OracleCheckRow {
                scheme,
                pmax_dbw: dbw,
                trial,
                seed,
                original: rep.original.throughput,
                improved: rep.improved.throughput,
                oracle: rep.best.throughput,
                enumerated: rep.n_assignments_enumerated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleCheckReport {
        family: cfg.oracle_family,
        rows,
    })
}
