//! Group assignment and budgeted channel fill.
//!
//! Allocation runs in two phases. First each group is handed to at most one
//! user, and each user receives at most one group. Then the assigned groups are
//! visited from the cheapest per-channel power upwards and given as many code
//! channels as the remaining budget buys, capped at the group size. The fill
//! stops at the first group that cannot afford a single channel.
//!
//! Every argmin in this module breaks ties towards the lowest group index and
//! then the lowest user index.

use std::fmt;
use std::str::FromStr;

use crate::model::PowerMatrix;
use crate::{Error, Result};

/// Absolute tolerance, in watts, for the budget and residual checks.
pub const POWER_TOLERANCE: f64 = 1e-9;

/// Greedy group-assignment strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Groups in index order, each taking the cheapest remaining user.
    Original,
    /// Repeatedly takes the cheapest remaining (group, user) pair overall.
    Improved,
}

impl Algorithm {
    pub const BOTH: [Algorithm; 2] = [Self::Original, Self::Improved];

    pub fn label(self) -> &'static str {
        match self {
            Self::Original => "original",
            Self::Improved => "improved",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Ok(Self::Original),
            "improved" => Ok(Self::Improved),
            other => Err(Error::usage(format!(
                "unknown algorithm `{other}` (expected original or improved)"
            ))),
        }
    }
}

/// Which procedure produced an [`AllocationResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Original,
    Improved,
    Oracle,
}

impl From<Algorithm> for Solver {
    fn from(a: Algorithm) -> Self {
        match a {
            Algorithm::Original => Solver::Original,
            Algorithm::Improved => Solver::Improved,
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Original => "original",
            Solver::Improved => "improved",
            Solver::Oracle => "oracle",
        })
    }
}

/// Which user, if any, owns each group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    owner: Vec<Option<usize>>,
    events: Vec<(usize, usize)>,
}

impl Assignment {
    /// No group owned by anyone.
    pub fn empty(groups: usize) -> Self {
        Assignment {
            owner: vec![None; groups],
            events: Vec::new(),
        }
    }

    /// Builds an assignment from `(group, user)` pairs in event order.
    ///
    /// Fails if a group or a user appears twice.
    pub fn from_pairs(groups: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty(groups);
        for &(g, u) in pairs {
            if g >= groups {
                return Err(Error::usage(format!("group {g} out of range (G = {groups})")));
            }
            if a.owner[g].is_some() {
                return Err(Error::usage(format!("group {g} assigned twice")));
            }
            if a.owner.contains(&Some(u)) {
                return Err(Error::usage(format!("user {u} already owns a group")));
            }
            a.push(g, u);
        }
        Ok(a)
    }

    /// Owner table without the injectivity check; only the oracle's relaxed
    /// family needs this.
    pub(crate) fn from_owners_unchecked(owner: Vec<Option<usize>>) -> Self {
        let events = owner
            .iter()
            .enumerate()
            .filter_map(|(g, u)| u.map(|u| (g, u)))
            .collect();
        Assignment { owner, events }
    }

    fn push(&mut self, group: usize, user: usize) {
        self.owner[group] = Some(user);
        self.events.push((group, user));
    }

    pub fn groups(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self, group: usize) -> Option<usize> {
        self.owner[group]
    }

    pub fn owners(&self) -> &[Option<usize>] {
        &self.owner
    }

    /// `(group, user)` pairs in the order they were assigned.
    pub fn events(&self) -> &[(usize, usize)] {
        &self.events
    }

    pub fn assigned_count(&self) -> usize {
        self.events.len()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.owner.iter().flatten().all(|u| seen.insert(*u))
    }
}

/// Sequential scan: group 0 takes its cheapest user, group 1 the cheapest
/// of the rest, and so on until users run out.
pub fn assign_groups_original(pm: &PowerMatrix) -> Assignment {
    let mut assignment = Assignment::empty(pm.groups());
    let mut taken = vec![false; pm.users()];
    for group in 0..pm.groups() {
        let best = pm
            .row(group)
            .iter()
            .enumerate()
            .filter(|(u, _)| !taken[*u])
            .fold(None::<(usize, f64)>, |best, (u, &p)| match best {
                Some((_, bp)) if bp <= p => best,
                _ => Some((u, p)),
            });
        let Some((user, _)) = best else { break };
        taken[user] = true;
        assignment.push(group, user);
    }
    assignment
}

/// Global scan: the cheapest entry over all unassigned groups and users is
/// assigned, both leave their pools, repeat until a pool is empty.
pub fn assign_groups_improved(pm: &PowerMatrix) -> Assignment {
    let mut assignment = Assignment::empty(pm.groups());
    let mut group_free = vec![true; pm.groups()];
    let mut user_free = vec![true; pm.users()];
    for _ in 0..pm.groups().min(pm.users()) {
        let mut best: Option<(usize, usize, f64)> = None;
        for group in (0..pm.groups()).filter(|&g| group_free[g]) {
            for (user, &p) in pm.row(group).iter().enumerate() {
                if user_free[user] && best.is_none_or(|(_, _, bp)| p < bp) {
                    best = Some((group, user, p));
                }
            }
        }
        let Some((group, user, _)) = best else { break };
        group_free[group] = false;
        user_free[user] = false;
        assignment.push(group, user);
    }
    assignment
}

/// Channel counts `c[g][u]` plus what is left of the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub groups: usize,
    pub users: usize,
    /// Row-major `[group][user]` code-channel counts.
    pub counts: Vec<usize>,
    /// Budget left after the fill, in watts.
    pub residual_power: f64,
    /// Total number of allocated code channels.
    pub throughput: usize,
    pub solver: Solver,
}

impl AllocationResult {
    pub fn count(&self, group: usize, user: usize) -> usize {
        self.counts[group * self.users + user]
    }

    /// Number of groups carrying at least one channel.
    pub fn groups_in_use(&self) -> usize {
        self.counts
            .chunks(self.users)
            .filter(|row| row.iter().any(|&c| c > 0))
            .count()
    }

    /// Power spent, summed in `[group][user]` order.
    pub fn spent_power(&self, pm: &PowerMatrix) -> f64 {
        self.counts
            .iter()
            .zip(pm.as_slice())
            .map(|(&c, &p)| c as f64 * p)
            .sum()
    }
}

fn check_budget(p_max: f64, s: usize) -> Result<()> {
    if !(p_max >= 0.0 && p_max.is_finite()) {
        return Err(Error::usage(format!("budget {p_max} W must be finite and non-negative")));
    }
    if s == 0 {
        return Err(Error::usage("group size must be at least 1"));
    }
    Ok(())
}

/// Cheapest-first capped fill of the assigned groups.
pub fn fill_channels(
    assignment: &Assignment,
    pm: &PowerMatrix,
    p_max: f64,
    s: usize,
    solver: Solver,
) -> Result<AllocationResult> {
    check_budget(p_max, s)?;
    if assignment.groups() != pm.groups() {
        return Err(Error::usage(format!(
            "assignment covers {} groups, power matrix has {}",
            assignment.groups(),
            pm.groups()
        )));
    }
    let mut order: Vec<(usize, usize, f64)> = Vec::with_capacity(assignment.assigned_count());
    for (group, owner) in assignment.owners().iter().enumerate() {
        if let Some(user) = *owner {
            if user >= pm.users() {
                return Err(Error::usage(format!(
                    "group {group} owned by user {user}, but U = {}",
                    pm.users()
                )));
            }
            order.push((group, user, pm.get(group, user)));
        }
    }
    // stable: equal costs keep ascending group order
    order.sort_by(|a, b| a.2.total_cmp(&b.2));

    let mut counts = vec![0; pm.groups() * pm.users()];
    let mut residual = p_max;
    let mut throughput = 0;
    for (group, user, p) in order {
        let fit = (residual / p).floor();
        let mut c = if fit >= s as f64 { s } else { fit as usize };
        // rounding in residual / p may overshoot by one
        while c > 0 && c as f64 * p > residual {
            c -= 1;
        }
        if c == 0 {
            break;
        }
        residual -= c as f64 * p;
        counts[group * pm.users() + user] = c;
        throughput += c;
    }
    Ok(AllocationResult {
        groups: pm.groups(),
        users: pm.users(),
        counts,
        residual_power: residual,
        throughput,
        solver,
    })
}

/// Assignment followed by fill.
pub fn allocate(
    pm: &PowerMatrix,
    algorithm: Algorithm,
    p_max: f64,
    s: usize,
) -> Result<AllocationResult> {
    check_budget(p_max, s)?;
    let assignment = match algorithm {
        Algorithm::Original => assign_groups_original(pm),
        Algorithm::Improved => assign_groups_improved(pm),
    };
    fill_channels(&assignment, pm, p_max, s, algorithm.into())
}

/// A group with more than one user holding channels on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedGroup {
    pub group: usize,
    pub users: Vec<usize>,
}

/// A count outside `0..=s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountViolation {
    pub group: usize,
    pub user: usize,
    pub count: usize,
}

/// Outcome of checking an allocation against the problem constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    /// Groups shared by several users.
    pub shared_groups: Vec<SharedGroup>,
    /// Power actually consumed by the counts.
    pub spent_power: f64,
    pub p_max: f64,
    /// Spent power stays within the budget (plus tolerance).
    pub within_budget: bool,
    /// Reported residual is non-negative and equals budget minus spend.
    pub residual_consistent: bool,
    /// Counts outside `0..=s`.
    pub count_violations: Vec<CountViolation>,
    /// Reported throughput equals the sum of counts.
    pub throughput_consistent: bool,
}

impl ConstraintReport {
    pub fn exclusivity_ok(&self) -> bool {
        self.shared_groups.is_empty()
    }

    pub fn budget_ok(&self) -> bool {
        self.within_budget && self.residual_consistent
    }

    pub fn counts_ok(&self) -> bool {
        self.count_violations.is_empty()
    }

    pub fn passes(&self) -> bool {
        self.exclusivity_ok() && self.budget_ok() && self.counts_ok() && self.throughput_consistent
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
        writeln!(f, "one user per group: {}", verdict(self.exclusivity_ok()))?;
        for v in &self.shared_groups {
            writeln!(f, "  group {} shared by users {:?}", v.group, v.users)?;
        }
        writeln!(
            f,
            "power budget: {} (spent {:.9} W of {:.9} W)",
            verdict(self.budget_ok()),
            self.spent_power,
            self.p_max
        )?;
        writeln!(f, "channel counts in range: {}", verdict(self.counts_ok()))?;
        for v in &self.count_violations {
            writeln!(f, "  c[{}][{}] = {}", v.group, v.user, v.count)?;
        }
        write!(f, "throughput matches counts: {}", verdict(self.throughput_consistent))
    }
}

/// Checks an allocation against the exclusivity, budget and count constraints.
pub fn validate_allocation(
    r: &AllocationResult,
    pm: &PowerMatrix,
    p_max: f64,
    s: usize,
) -> Result<ConstraintReport> {
    if r.groups != pm.groups() || r.users != pm.users() || r.counts.len() != r.groups * r.users {
        return Err(Error::usage(format!(
            "allocation is {}x{} ({} counts), power matrix is {}x{}",
            r.groups,
            r.users,
            r.counts.len(),
            pm.groups(),
            pm.users()
        )));
    }
    let shared_groups = (0..r.groups)
        .filter_map(|g| {
            let users: Vec<usize> = (0..r.users).filter(|&u| r.count(g, u) > 0).collect();
            (users.len() > 1).then_some(SharedGroup { group: g, users })
        })
        .collect();
    let count_violations = (0..r.groups)
        .flat_map(|g| (0..r.users).map(move |u| (g, u)))
        .filter(|&(g, u)| r.count(g, u) > s)
        .map(|(g, u)| CountViolation {
            group: g,
            user: u,
            count: r.count(g, u),
        })
        .collect();
    let spent = r.spent_power(pm);
    let within_budget = spent <= p_max + POWER_TOLERANCE;
    let residual_consistent = r.residual_power >= 0.0
        && (r.residual_power - (p_max - spent)).abs() <= POWER_TOLERANCE;
    Ok(ConstraintReport {
        shared_groups,
        spent_power: spent,
        p_max,
        within_budget,
        residual_consistent,
        count_violations,
        throughput_consistent: r.throughput == r.counts.iter().sum::<usize>(),
    })
}
