//! Exhaustive ground truth for small instances.
//!
//! For a fixed group-to-user map every code channel is worth the same, so the
//! cheapest-first capped fill maximizes the channel count under the budget
//! (exchange argument). The optimum is therefore the best fill over all maps.

use crate::allocation::{allocate, fill_channels, Algorithm, AllocationResult, Assignment, Solver};
use crate::model::PowerMatrix;
use crate::{Error, Result};

/// Largest group or user count the enumeration accepts.
pub const MAX_DIM: usize = 6;
/// Largest group size the oracle accepts.
pub const MAX_GROUP_SIZE: usize = 16;

/// Which maps the oracle searches over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Family {
    /// Each user owns at most one group, as in both greedy algorithms.
    #[default]
    Matching,
    /// A user may own several groups; each group still has one owner.
    Relaxed,
}

fn guard(groups: usize, users: usize) -> Result<()> {
    if groups > MAX_DIM || users > MAX_DIM {
        return Err(Error::usage(format!(
            "exhaustive enumeration limited to G, U <= {MAX_DIM} (got G = {groups}, U = {users})"
        )));
    }
    Ok(())
}

/// Every injective partial map from groups to users, empty map first.
///
/// Maps are produced in lexicographic order of the owner table, where
/// "unassigned" sorts before user 0 and group 0 is the most significant digit.
pub fn enumerate_assignments(groups: usize, users: usize) -> Result<Vec<Assignment>> {
    enumerate(groups, users, Family::Matching)
}

/// Like [`enumerate_assignments`], over the chosen family.
pub fn enumerate(groups: usize, users: usize, family: Family) -> Result<Vec<Assignment>> {
    guard(groups, users)?;
    let mut out = Vec::new();
    let mut owner = vec![None; groups];
    let mut used = vec![false; users];
    visit(0, &mut owner, &mut used, family, &mut out);
    Ok(out)
}

fn visit(
    group: usize,
    owner: &mut Vec<Option<usize>>,
    used: &mut [bool],
    family: Family,
    out: &mut Vec<Assignment>,
) {
    if group == owner.len() {
        out.push(Assignment::from_owners_unchecked(owner.clone()));
        return;
    }
    owner[group] = None;
    visit(group + 1, owner, used, family, out);
    for user in 0..used.len() {
        if family == Family::Matching && used[user] {
            continue;
        }
        owner[group] = Some(user);
        let was_used = std::mem::replace(&mut used[user], true);
        visit(group + 1, owner, used, family, out);
        used[user] = was_used;
    }
    owner[group] = None;
}

/// Optimum together with how far each greedy algorithm falls short of it.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub best: AllocationResult,
    pub best_assignment: Assignment,
    pub n_assignments_enumerated: usize,
    pub original: AllocationResult,
    pub improved: AllocationResult,
    /// Oracle throughput minus original throughput.
    pub gap_vs_original: i64,
    /// Oracle throughput minus improved throughput.
    pub gap_vs_improved: i64,
    pub family: Family,
}

/// Best allocation over all injective maps.
pub fn exhaustive_optimal(pm: &PowerMatrix, p_max: f64, s: usize) -> Result<OracleReport> {
    exhaustive_optimal_in(pm, p_max, s, Family::Matching)
}

/// Best allocation over the given family.
///
/// Ties in throughput go to the larger residual, then to the earlier map.
pub fn exhaustive_optimal_in(
    pm: &PowerMatrix,
    p_max: f64,
    s: usize,
    family: Family,
) -> Result<OracleReport> {
    guard(pm.groups(), pm.users())?;
    if s > MAX_GROUP_SIZE {
        return Err(Error::usage(format!(
            "exhaustive search limited to group size <= {MAX_GROUP_SIZE} (got {s})"
        )));
    }
    let maps = enumerate(pm.groups(), pm.users(), family)?;
    let n = maps.len();
    let mut best: Option<(AllocationResult, Assignment)> = None;
    for map in maps {
        let r = fill_channels(&map, pm, p_max, s, Solver::Oracle)?;
        let better = match &best {
            None => true,
            Some((b, _)) => {
                r.throughput > b.throughput
                    || (r.throughput == b.throughput && r.residual_power > b.residual_power)
            }
        };
        if better {
            best = Some((r, map));
        }
    }
    let (best, best_assignment) = best.expect("enumeration always yields the empty map");
    let original = allocate(pm, Algorithm::Original, p_max, s)?;
    let improved = allocate(pm, Algorithm::Improved, p_max, s)?;
    Ok(OracleReport {
        gap_vs_original: best.throughput as i64 - original.throughput as i64,
        gap_vs_improved: best.throughput as i64 - improved.throughput as i64,
        best,
        best_assignment,
        n_assignments_enumerated: n,
        original,
        improved,
        family,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// sum_k C(g,k) C(u,k) k!
    fn partial_injections(g: u64, u: u64) -> u64 {
        fn choose(n: u64, k: u64) -> u64 {
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        (0..=g.min(u))
            .map(|k| choose(g, k) * choose(u, k) * (1..=k).product::<u64>())
            .sum()
    }

    #[test]
    fn counts_match_closed_form() {
        assert_eq!(enumerate_assignments(1, 1).unwrap().len(), 2);
        assert_eq!(enumerate_assignments(2, 2).unwrap().len(), 7);
        assert_eq!(enumerate_assignments(4, 4).unwrap().len(), 209);
        for g in 0..=4u64 {
            for u in 0..=4u64 {
                let n = enumerate_assignments(g as usize, u as usize).unwrap().len() as u64;
                assert_eq!(n, partial_injections(g, u), "g = {g}, u = {u}");
            }
        }
    }

    #[test]
    fn maps_are_distinct_injective_and_start_empty() {
        let maps = enumerate_assignments(3, 3).unwrap();
        assert!(maps[0].owners().iter().all(Option::is_none));
        let distinct: HashSet<Vec<Option<usize>>> =
            maps.iter().map(|m| m.owners().to_vec()).collect();
        assert_eq!(distinct.len(), maps.len());
        assert!(maps.iter().all(Assignment::is_injective));
    }

    #[test]
    fn relaxed_family_is_every_owner_table() {
        assert_eq!(enumerate(3, 2, Family::Relaxed).unwrap().len(), 27);
    }

    #[test]
    fn guard_rejects_large_instances() {
        assert!(matches!(enumerate_assignments(7, 2), Err(Error::Usage(_))));
        let pm = PowerMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(exhaustive_optimal(&pm, 1.0, 17).is_err());
    }

    #[test]
    fn fixture_optimum() {
        let pm = PowerMatrix::from_rows(&[vec![10.0, 11.0], vec![1.0, 100.0]]).unwrap();
        let rep = exhaustive_optimal(&pm, 12.0, 4).unwrap();
        assert_eq!(rep.best.throughput, 4);
        assert_eq!(rep.n_assignments_enumerated, 7);
        assert_eq!(rep.gap_vs_original, 3);
        assert_eq!(rep.gap_vs_improved, 0);
        assert_eq!(rep.best.solver, Solver::Oracle);
    }

    #[test]
    fn empty_budget_optimum() {
        let pm = PowerMatrix::from_rows(&[vec![10.0, 11.0], vec![1.0, 100.0]]).unwrap();
        assert_eq!(exhaustive_optimal(&pm, 0.0, 4).unwrap().best.throughput, 0);
    }

    #[test]
    fn single_cell_optimum() {
        let pm = PowerMatrix::from_rows(&[vec![2.0]]).unwrap();
        let rep = exhaustive_optimal(&pm, 7.0, 4).unwrap();
        assert_eq!(rep.best.throughput, 3);
        assert_eq!(rep.best.residual_power, 1.0);
        assert_eq!(rep.original.throughput, 3);
        assert_eq!(rep.improved.throughput, 3);
    }

    #[test]
    fn relaxed_family_can_beat_matching() {
        // user 0 is cheapest everywhere; letting it own both groups doubles throughput
        let pm = PowerMatrix::from_rows(&[vec![1.0, 50.0], vec![1.0, 50.0]]).unwrap();
        let matching = exhaustive_optimal(&pm, 8.0, 4).unwrap();
        let relaxed = exhaustive_optimal_in(&pm, 8.0, 4, Family::Relaxed).unwrap();
        assert_eq!(matching.best.throughput, 4);
        assert_eq!(relaxed.best.throughput, 8);
        assert_eq!(relaxed.n_assignments_enumerated, 9);
    }
}
