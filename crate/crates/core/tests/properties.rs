use mccdma::allocation::{fill_channels, Solver};
use mccdma::model::required_power_general;
use mccdma::oracle::{exhaustive_optimal_in, Family};
use mccdma::{
    allocate, assign_groups_improved, assign_groups_original, build_power_matrix,
    combining_weights, exhaustive_optimal, required_power, validate_allocation, Algorithm,
    ChannelGains, CombiningScheme, PowerMatrix,
};
use proptest::prelude::*;

const BETA: f64 = 5.991464547107982;
const N0: f64 = 0.16;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn scheme() -> impl Strategy<Value = CombiningScheme> {
    prop_oneof![
        Just(CombiningScheme::Mrc),
        Just(CombiningScheme::Egc),
        Just(CombiningScheme::Zfc)
    ]
}

fn gain_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..20.0, 1..24)
}

fn power_matrix(max_dim: usize) -> impl Strategy<Value = PowerMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(g, u)| {
        prop::collection::vec(prop::collection::vec(0.01f64..10.0, u), g)
            .prop_map(|rows| PowerMatrix::from_rows(&rows).unwrap())
    })
}

/// Independent improved-assignment reference: sort every entry by
/// (power, group, user) and accept each pair whose group and user are free.
fn sorted_scan_assignment(pm: &PowerMatrix) -> Vec<Option<usize>> {
    let mut cells: Vec<(f64, usize, usize)> = (0..pm.groups())
        .flat_map(|g| (0..pm.users()).map(move |u| (g, u)))
        .map(|(g, u)| (pm.get(g, u), g, u))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut owner = vec![None; pm.groups()];
    let mut user_taken = vec![false; pm.users()];
    for (_, g, u) in cells {
        if owner[g].is_none() && !user_taken[u] {
            owner[g] = Some(u);
            user_taken[u] = true;
        }
    }
    owner
}

/// Best channel total over every count vector with `0 <= c <= s` on the
/// assigned groups that fits the budget.
fn brute_force_fill(costs: &[f64], p_max: f64, s: usize) -> usize {
    let mut best = 0;
    let mut counts = vec![0usize; costs.len()];
    loop {
        let spent: f64 = counts.iter().zip(costs).map(|(&c, &p)| c as f64 * p).sum();
        if spent <= p_max {
            best = best.max(counts.iter().sum());
        }
        let mut i = 0;
        loop {
            if i == counts.len() {
                return best;
            }
            counts[i] += 1;
            if counts[i] <= s {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

proptest! {
    #[test]
    fn general_form_matches_reduced_form(gains in gain_vec(), scheme in scheme()) {
        let w = combining_weights(&gains, scheme).unwrap();
        let general = required_power_general(&gains, &w, BETA, N0).unwrap();
        let reduced = required_power(&gains, scheme, BETA, N0).unwrap();
        prop_assert!(rel(general, reduced) <= 1e-12, "{general} vs {reduced}");
        prop_assert!(reduced > 0.0);
    }

    #[test]
    fn power_scales_with_inverse_square_gain(gains in gain_vec(), scheme in scheme(), alpha in 0.1f64..10.0) {
        let scaled: Vec<f64> = gains.iter().map(|g| g * alpha).collect();
        let p = required_power(&gains, scheme, BETA, N0).unwrap();
        let q = required_power(&scaled, scheme, BETA, N0).unwrap();
        prop_assert!(rel(q, p / (alpha * alpha)) <= 1e-12);
    }

    #[test]
    fn flat_channels_agree_across_schemes(c in 0.1f64..10.0, s in 1usize..32) {
        let gains = vec![c; s];
        for scheme in CombiningScheme::ALL {
            let p = required_power(&gains, scheme, BETA, N0).unwrap();
            prop_assert!(rel(p, BETA * N0 / (c * c)) <= 1e-12);
        }
    }

    #[test]
    fn egc_and_zfc_are_bit_identical(gains in gain_vec()) {
        let e = required_power(&gains, CombiningScheme::Egc, BETA, N0).unwrap();
        let z = required_power(&gains, CombiningScheme::Zfc, BETA, N0).unwrap();
        prop_assert_eq!(e.to_bits(), z.to_bits());
    }

    #[test]
    fn improved_matches_sorted_scan(pm in power_matrix(7)) {
        let a = assign_groups_improved(&pm);
        let reference = sorted_scan_assignment(&pm);
        prop_assert_eq!(a.owners(), reference.as_slice());
    }

    #[test]
    fn assignments_are_injective_and_complete(pm in power_matrix(7)) {
        for a in [assign_groups_original(&pm), assign_groups_improved(&pm)] {
            prop_assert!(a.is_injective());
            prop_assert_eq!(a.assigned_count(), pm.groups().min(pm.users()));
        }
    }

    #[test]
    fn allocations_are_feasible(pm in power_matrix(6), p_max in 0.0f64..200.0, s in 1usize..9) {
        for alg in Algorithm::BOTH {
            let r = allocate(&pm, alg, p_max, s).unwrap();
            let report = validate_allocation(&r, &pm, p_max, s).unwrap();
            prop_assert!(report.passes(), "{}", report);
            prop_assert!(r.throughput <= pm.groups() * s);
        }
    }

    #[test]
    fn throughput_non_decreasing_in_budget(
        pm in power_matrix(6),
        mut budgets in prop::collection::vec(0.0f64..150.0, 2..12),
        s in 1usize..9,
    ) {
        budgets.sort_by(f64::total_cmp);
        for alg in Algorithm::BOTH {
            let t: Vec<usize> = budgets.iter().map(|&b| allocate(&pm, alg, b, s).unwrap().throughput).collect();
            prop_assert!(t.windows(2).all(|w| w[0] <= w[1]), "{:?}", t);
        }
    }

    #[test]
    fn saturation_at_large_budget(pm in power_matrix(6), s in 1usize..9) {
        let max_p = pm.as_slice().iter().copied().fold(0.0, f64::max);
        let budget = (pm.groups() * s) as f64 * max_p * 1.01;
        for alg in Algorithm::BOTH {
            let r = allocate(&pm, alg, budget, s).unwrap();
            prop_assert_eq!(r.throughput, pm.groups().min(pm.users()) * s);
        }
    }

    #[test]
    fn oracle_dominates_greedy(pm in power_matrix(4), p_max in 0.0f64..80.0, s in 1usize..6) {
        let rep = exhaustive_optimal(&pm, p_max, s).unwrap();
        prop_assert!(rep.gap_vs_original >= 0 && rep.gap_vs_improved >= 0);
        prop_assert!(validate_allocation(&rep.best, &pm, p_max, s).unwrap().passes());
        let relaxed = exhaustive_optimal_in(&pm, p_max, s, Family::Relaxed).unwrap();
        prop_assert!(relaxed.best.throughput >= rep.best.throughput);
    }

    #[test]
    fn cheapest_first_fill_is_optimal_for_fixed_assignment(
        pm in power_matrix(3),
        p_max in 0.0f64..40.0,
        s in 1usize..=3,
    ) {
        for a in [assign_groups_original(&pm), assign_groups_improved(&pm)] {
            let costs: Vec<f64> = a.events().iter().map(|&(g, u)| pm.get(g, u)).collect();
            let filled = fill_channels(&a, &pm, p_max, s, Solver::Original).unwrap();
            prop_assert_eq!(filled.throughput, brute_force_fill(&costs, p_max, s));
        }
    }

    #[test]
    fn scaling_gains_keeps_assignments(
        data in prop::collection::vec(0.5f64..4.0, 3 * 3 * 4),
        alpha in prop_oneof![Just(0.5), Just(2.0), Just(10.0)],
        scheme in scheme(),
    ) {
        let gains = ChannelGains::new(3, 3, 4, data).unwrap();
        let pm = build_power_matrix(&gains, scheme, BETA, N0).unwrap();
        let spm = build_power_matrix(&gains.scaled(alpha).unwrap(), scheme, BETA, N0).unwrap();
        for (p, q) in pm.as_slice().iter().zip(spm.as_slice()) {
            prop_assert!(rel(*q, p / (alpha * alpha)) <= 1e-12);
        }
        prop_assert_eq!(assign_groups_original(&pm), assign_groups_original(&spm));
        prop_assert_eq!(assign_groups_improved(&pm), assign_groups_improved(&spm));
    }
}

#[test]
fn degenerate_single_cell_agreement() {
    for (p, budget) in [(2.0, 7.0), (0.3, 0.3), (5.0, 4.9), (1.0, 100.0)] {
        let pm = PowerMatrix::from_rows(&[vec![p]]).unwrap();
        let o = allocate(&pm, Algorithm::Original, budget, 4).unwrap();
        let i = allocate(&pm, Algorithm::Improved, budget, 4).unwrap();
        let best = exhaustive_optimal(&pm, budget, 4).unwrap().best;
        assert_eq!(o.counts, i.counts);
        assert_eq!(o.counts, best.counts);
        assert_eq!(o.residual_power, best.residual_power);
    }
}

#[test]
fn fixture_matches_brute_force() {
    // every injective map with every count vector, independent of the fill routine
    let rows = [[10.0, 11.0], [1.0, 100.0]];
    let mut best = 0;
    for owners in [[None, None], [Some(0), None], [Some(1), None], [None, Some(0)], [None, Some(1)], [Some(0), Some(1)], [Some(1), Some(0)]] {
        for c0 in 0..=4usize {
            for c1 in 0..=4usize {
                let cost = |g: usize, c: usize| owners[g].map_or(if c == 0 { 0.0 } else { f64::INFINITY }, |u: usize| c as f64 * rows[g][u]);
                if cost(0, c0) + cost(1, c1) <= 12.0 {
                    best = best.max(c0 + c1);
                }
            }
        }
    }
    assert_eq!(best, 4);
    let pm = PowerMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).unwrap();
    assert_eq!(exhaustive_optimal(&pm, 12.0, 4).unwrap().best.throughput, best);
    assert_eq!(allocate(&pm, Algorithm::Improved, 12.0, 4).unwrap().throughput, best);
    assert_eq!(allocate(&pm, Algorithm::Original, 12.0, 4).unwrap().throughput, 1);
}
