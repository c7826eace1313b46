//! Monte Carlo harness: budget sweeps, algorithm comparison and oracle checks.
//!
//! Each (sweep point, trial) pair owns one channel realization drawn from a
//! seed derived from the base seed. All schemes and algorithms at that pair
//! see the same realization, so their rows are directly comparable. With
//! common random numbers the realization depends on the trial only and is
//! reused along the whole budget grid.
//!
//! Trials run in parallel; rows are always emitted in
//! (scheme, algorithm, budget, trial) order.

mod compare;
mod config;
mod output;
mod oracle_check;

use rayon::prelude::*;

use crate::allocation::{
    allocate, assign_groups_improved, assign_groups_original, fill_channels, validate_allocation,
    Algorithm, AllocationResult, Assignment,
};
use crate::fading::{derive_seed, sample_channel_gains, SeededGenerator};
use crate::model::{build_power_matrix, CombiningScheme, PowerMatrix, SimConfig};
use crate::{Error, Result};

pub use compare::{compare_matrices, compare_report, CompareReport, CompareRow};
pub use config::{
    budget_grid, default_config_text, parse_algorithm_set, parse_config, parse_scheme_set,
    ExperimentConfig,
};
pub use oracle_check::{oracle_check, OracleCheckReport, OracleCheckRow};
pub use output::{format_real, write_sweep_csv, SWEEP_HEADER};
pub use compare::COMPARE_HEADER;
pub use oracle_check::ORACLE_HEADER;

/// `10^(x/10)`; `-inf` maps to zero.
pub fn dbw_to_watts(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}

/// Seed of the realization behind one (budget point, trial) cell.
pub fn trial_seed(base: u64, point: usize, trial: usize, common_random_numbers: bool) -> u64 {
    if common_random_numbers {
        derive_seed(base, &[trial as u64])
    } else {
        derive_seed(base, &[point as u64, trial as u64])
    }
}

/// One allocation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scheme: CombiningScheme,
    pub algorithm: Algorithm,
    pub pmax_dbw: f64,
    pub pmax_watts: f64,
    pub trial: usize,
    /// Seed of the channel realization, reproducible via [`run_trial`].
    pub seed: u64,
    pub throughput: usize,
    pub residual_power: f64,
    /// Groups that received at least one channel.
    pub groups_assigned: usize,
}

/// Mean and spread of one (scheme, algorithm, budget) cell across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: CombiningScheme,
    pub algorithm: Algorithm,
    pub pmax_dbw: f64,
    pub trials: usize,
    pub mean_throughput: f64,
    /// Sample standard deviation (zero for a single trial).
    pub std_throughput: f64,
    pub mean_residual_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub base_seed: u64,
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SummaryRow>,
}

#[allow(clippy::too_many_arguments)]
fn checked_record(
    scheme: CombiningScheme,
    algorithm: Algorithm,
    (pmax_dbw, pmax_watts): (f64, f64),
    trial: usize,
    seed: u64,
    pm: &PowerMatrix,
    result: &AllocationResult,
    s: usize,
) -> Result<TrialRecord> {
    let report = validate_allocation(result, pm, pmax_watts, s)?;
    if !report.passes() {
        return Err(Error::Validation(format!(
            "{scheme}/{algorithm} trial {trial} (seed {seed}) at {pmax_dbw} dBW violates constraints:\n{report}"
        )));
    }
    Ok(TrialRecord {
        scheme,
        algorithm,
        pmax_dbw,
        pmax_watts,
        trial,
        seed,
        throughput: result.throughput,
        residual_power: result.residual_power,
        groups_assigned: result.groups_in_use(),
    })
}

/// `10 log10(x)`; zero maps to `-inf`.
pub fn watts_to_dbw(watts: f64) -> f64 {
    10.0 * watts.log10()
}

/// Samples a realization from `seed`, allocates under a budget of
/// `pmax_watts`, validates.
pub fn run_trial(
    sim: &SimConfig,
    trial: usize,
    seed: u64,
    scheme: CombiningScheme,
    algorithm: Algorithm,
    pmax_watts: f64,
) -> Result<TrialRecord> {
    sim.validate()?;
    let beta = sim.beta()?;
    let s = sim.subcarriers_per_group();
    let gains = sample_channel_gains(sim, &mut SeededGenerator::new(seed))?;
    let pm = build_power_matrix(&gains, scheme, beta, sim.noise_psd)?;
    let result = allocate(&pm, algorithm, pmax_watts, s)?;
    let budget = (watts_to_dbw(pmax_watts), pmax_watts);
    checked_record(scheme, algorithm, budget, trial, seed, &pm, &result, s)
}

type Keyed = ((usize, usize, usize, usize), TrialRecord);

/// One realization evaluated at the given budget points for every scheme and
/// algorithm in `cfg`.
fn evaluate_realization(
    cfg: &ExperimentConfig,
    beta: f64,
    trial: usize,
    seed: u64,
    points: &[usize],
) -> Result<Vec<Keyed>> {
    let sim = &cfg.sim;
    let s = sim.subcarriers_per_group();
    let gains = sample_channel_gains(sim, &mut SeededGenerator::new(seed))?;
    let mut out = Vec::with_capacity(cfg.schemes.len() * cfg.algorithms.len() * points.len());
    for (si, &scheme) in cfg.schemes.iter().enumerate() {
        let pm = build_power_matrix(&gains, scheme, beta, sim.noise_psd)?;
        for (ai, &algorithm) in cfg.algorithms.iter().enumerate() {
            // assignment never looks at the budget
            let assignment: Assignment = match algorithm {
                Algorithm::Original => assign_groups_original(&pm),
                Algorithm::Improved => assign_groups_improved(&pm),
            };
            for &pi in points {
                let dbw = cfg.pmax_dbw[pi];
                let watts = dbw_to_watts(dbw);
                let result = fill_channels(&assignment, &pm, watts, s, algorithm.into())?;
                let record =
                    checked_record(scheme, algorithm, (dbw, watts), trial, seed, &pm, &result, s)?;
                out.push(((si, ai, pi, trial), record));
            }
        }
    }
    Ok(out)
}

/// Runs every (scheme, algorithm, budget, trial) cell of `cfg`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let beta = cfg.sim.beta()?;
    let n_points = cfg.pmax_dbw.len();

    let units: Vec<(usize, u64, Vec<usize>)> = if cfg.common_random_numbers {
        (0..cfg.trials)
            .map(|t| (t, trial_seed(cfg.seed, 0, t, true), (0..n_points).collect()))
            .collect()
    } else {
        (0..n_points)
            .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
            .map(|(p, t)| (t, trial_seed(cfg.seed, p, t, false), vec![p]))
            .collect()
    };

    let chunks: Vec<Vec<Keyed>> = units
        .par_iter()
        .map(|(trial, seed, points)| evaluate_realization(cfg, beta, *trial, *seed, points))
        .collect::<Result<_>>()?;
    let mut keyed: Vec<Keyed> = chunks.into_iter().flatten().collect();
    keyed.sort_unstable_by_key(|(k, _)| *k);
    let records: Vec<TrialRecord> = keyed.into_iter().map(|(_, r)| r).collect();

    let summaries = records
        .chunks(cfg.trials)
        .map(summarize)
        .collect();
    Ok(SweepOutput {
        base_seed: cfg.seed,
        records,
        summaries,
    })
}

/// Summary of records sharing one (scheme, algorithm, budget) cell.
fn summarize(cell: &[TrialRecord]) -> SummaryRow {
    let n = cell.len() as f64;
    let mean = cell.iter().map(|r| r.throughput as f64).sum::<f64>() / n;
    let var = if cell.len() > 1 {
        cell.iter()
            .map(|r| (r.throughput as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let first = &cell[0];
    SummaryRow {
        scheme: first.scheme,
        algorithm: first.algorithm,
        pmax_dbw: first.pmax_dbw,
        trials: cell.len(),
        mean_throughput: mean,
        std_throughput: var.sqrt(),
        mean_residual_power: cell.iter().map(|r| r.residual_power).sum::<f64>() / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            sim: SimConfig {
                n_channels: 12,
                n_groups: 3,
                n_users: 3,
                ..SimConfig::default()
            },
            pmax_dbw: vec![-10.0, 0.0, 10.0],
            trials: 4,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn dbw_conversion() {
        assert_eq!(dbw_to_watts(0.0), 1.0);
        assert!((dbw_to_watts(30.0) - 1000.0).abs() < 1e-9);
        assert_eq!(dbw_to_watts(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn row_count_and_order() {
        let cfg = ExperimentConfig {
            schemes: vec![CombiningScheme::Mrc],
            pmax_dbw: vec![0.0],
            trials: 1,
            ..small_cfg()
        };
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.summaries.len(), 2);
        assert_eq!(out.records[0].algorithm, Algorithm::Original);
        assert_eq!(out.records[1].algorithm, Algorithm::Improved);

        let out = run_sweep(&small_cfg()).unwrap();
        assert_eq!(out.records.len(), 3 * 2 * 3 * 4);
        let keys: Vec<_> = out
            .records
            .iter()
            .map(|r| (r.scheme, r.algorithm, (r.pmax_dbw * 10.0) as i64, r.trial))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn sweep_rows_reproduce_with_run_trial() {
        for crn in [false, true] {
            let cfg = ExperimentConfig {
                common_random_numbers: crn,
                ..small_cfg()
            };
            let out = run_sweep(&cfg).unwrap();
            for r in &out.records {
                let again =
                    run_trial(&cfg.sim, r.trial, r.seed, r.scheme, r.algorithm, r.pmax_watts)
                        .unwrap();
                assert!((again.pmax_dbw - r.pmax_dbw).abs() < 1e-12);
                assert_eq!(TrialRecord { pmax_dbw: r.pmax_dbw, ..again }, *r);
            }
        }
    }

    #[test]
    fn realizations_shared_across_schemes_and_algorithms() {
        let out = run_sweep(&small_cfg()).unwrap();
        let seed_of = |r: &TrialRecord| {
            out.records
                .iter()
                .filter(|o| o.trial == r.trial && o.pmax_dbw == r.pmax_dbw)
                .all(|o| o.seed == r.seed)
        };
        assert!(out.records.iter().all(seed_of));
    }

    #[test]
    fn crn_reuses_realization_along_grid() {
        let cfg = ExperimentConfig {
            common_random_numbers: true,
            ..small_cfg()
        };
        let out = run_sweep(&cfg).unwrap();
        for t in 0..cfg.trials {
            let seeds: std::collections::HashSet<u64> =
                out.records.iter().filter(|r| r.trial == t).map(|r| r.seed).collect();
            assert_eq!(seeds.len(), 1);
        }
        let fresh = run_sweep(&small_cfg()).unwrap();
        let seeds: std::collections::HashSet<u64> =
            fresh.records.iter().filter(|r| r.trial == 0).map(|r| r.seed).collect();
        assert_eq!(seeds.len(), 3);
    }

    #[test]
    fn zero_budget_trial() {
        let sim = SimConfig::default();
        let r = run_trial(&sim, 0, 7, CombiningScheme::Mrc, Algorithm::Improved, 0.0).unwrap();
        assert_eq!(r.throughput, 0);
        assert_eq!(r.pmax_dbw, f64::NEG_INFINITY);
        assert_eq!(r.groups_assigned, 0);
    }

    #[test]
    fn flat_channel_trial_buys_ten_channels() {
        let sim = SimConfig {
            fading_db_min: 0.0,
            fading_db_max: 0.0,
            ..SimConfig::default()
        };
        let budget = 10.0 * sim.beta().unwrap() * sim.noise_psd;
        for scheme in CombiningScheme::ALL {
            for alg in Algorithm::BOTH {
                let r = run_trial(&sim, 0, 1, scheme, alg, budget).unwrap();
                assert_eq!(r.throughput, 10, "{scheme}/{alg}");
                assert_eq!(r.groups_assigned, 1);
            }
        }
    }

    #[test]
    fn egc_and_zfc_records_differ_only_in_label() {
        let sim = SimConfig::default();
        for seed in 0..10 {
            for alg in Algorithm::BOTH {
                let e = run_trial(&sim, 0, seed, CombiningScheme::Egc, alg, 20.0).unwrap();
                let z = run_trial(&sim, 0, seed, CombiningScheme::Zfc, alg, 20.0).unwrap();
                assert_eq!(TrialRecord { scheme: CombiningScheme::Egc, ..z }, e);
            }
        }
    }

    #[test]
    fn summary_statistics() {
        let out = run_sweep(&small_cfg()).unwrap();
        for (cell, summary) in out.records.chunks(4).zip(&out.summaries) {
            let mean = cell.iter().map(|r| r.throughput as f64).sum::<f64>() / 4.0;
            assert_eq!(summary.mean_throughput, mean);
            assert_eq!(summary.trials, 4);
            assert_eq!(summary.pmax_dbw, cell[0].pmax_dbw);
        }
    }

    #[test]
    fn invalid_config_is_rejected_before_running() {
        let cfg = ExperimentConfig {
            trials: 0,
            ..small_cfg()
        };
        assert!(run_sweep(&cfg).is_err());
    }
}
