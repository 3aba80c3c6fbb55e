//! Solver outputs checked against brute force on hand-sized instances.

use nswopt_core::conflp::solve_weighted;
use nswopt_core::flow::min_cost_flow;
use nswopt_core::generate::{random_one_sided, random_two_sided, GenConfig, ValueFamily};
use nswopt_core::model::{nsw_one_sided, TwoSidedInstance, WeightedInstance};
use nswopt_core::onesided::{local_search, max_product_matching, solve_one_sided, to_exact_capacitated};
use nswopt_core::oracle::{
    exact_one_sided, exact_two_sided, exact_two_sided_ordered, exact_weighted, verify_flow_optimal,
    verify_no_improving_swap, EnumerationBudget, Order,
};
use nswopt_core::rational::{int, Rational};
use nswopt_core::twosided::{build_network, solve_two_sided, solve_two_sided_ptas, PtasBranch};
use nswopt_core::{OneSidedInstance, Valuation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn additive(row: &[i64]) -> Valuation {
    Valuation::additive(row.iter().map(|&v| int(v)).collect()).unwrap()
}

fn ones(workers: usize, firms: usize) -> Vec<Vec<Rational>> {
    vec![vec![int(1); firms]; workers]
}

#[test]
fn two_agent_frozen_optimum() {
    // b takes item 1 and a keeps {0, 2}: 6 · 3 = 18 beats 5 · 3 and 3 · 1
    let inst = OneSidedInstance::new(vec![additive(&[4, 1, 2]), additive(&[1, 3, 3])], vec![2, 1]).unwrap();
    let best = exact_one_sided(&inst, EnumerationBudget::default()).unwrap();
    assert_eq!(best.product, int(18));
    assert_eq!(best.allocation.bundles, vec![vec![0, 2], vec![1]]);
    let sol = solve_one_sided(&inst, 0.1).unwrap();
    assert!((nsw_one_sided(&inst, &sol.allocation) - 18f64.sqrt()).abs() < 1e-12);
}

#[test]
fn one_firm_two_workers() {
    let inst = TwoSidedInstance::new(vec![additive(&[3, 1])], ones(2, 1), vec![2]).unwrap();
    let best = exact_two_sided(&inst, EnumerationBudget::default()).unwrap();
    assert!((best.nsw - 4f64.cbrt()).abs() < 1e-12);
    let sol = solve_two_sided(&inst).unwrap();
    assert!((sol.diagnostics.nsw - best.nsw).abs() < 1e-12);
    let uniform = WeightedInstance::uniform(inst).unwrap();
    let weighted = exact_weighted(&uniform, EnumerationBudget::default()).unwrap();
    assert!((weighted.nsw - 4f64.cbrt()).abs() < 1e-12);
}

#[test]
fn diagonal_markets_match_diagonally() {
    for n in 1..=4 {
        let valuations = (0..n)
            .map(|i| additive(&(0..n).map(|j| if i == j { 5 } else { 1 }).collect::<Vec<_>>()))
            .collect();
        let workers = (0..n)
            .map(|j| (0..n).map(|i| int(if i == j { 3 } else { 1 })).collect())
            .collect();
        let inst = TwoSidedInstance::new(valuations, workers, vec![1; n]).unwrap();
        let sol = solve_two_sided(&inst).unwrap();
        let diagonal: Vec<Option<usize>> = (0..n).map(Some).collect();
        assert_eq!(sol.matching.assignment, diagonal);
        assert_eq!(exact_two_sided(&inst, EnumerationBudget::default()).unwrap().matching.assignment, diagonal);
    }
}

#[test]
fn single_firm_takes_top_surrogate_workers() {
    // with one firm every worker joins it; the surrogate ranks by v·w
    let inst = TwoSidedInstance::new(
        vec![additive(&[2, 7, 1, 4])],
        vec![vec![int(1)], vec![int(2)], vec![int(5)], vec![int(1)]],
        vec![4],
    )
    .unwrap();
    let sol = solve_two_sided(&inst).unwrap();
    assert_eq!(sol.main_workers, vec![Some(1)]);
    let best = exact_two_sided(&inst, EnumerationBudget::default()).unwrap();
    assert!((sol.diagnostics.nsw - best.nsw).abs() < 1e-12);
}

#[test]
fn two_firm_enumeration_agrees_with_brute_force() {
    for seed in 0..10 {
        let cfg = GenConfig::new(2, 3, ValueFamily::Additive).capacities(1, 3);
        let inst = random_two_sided(&mut ChaCha8Rng::seed_from_u64(seed), &cfg).unwrap();
        let ptas = solve_two_sided_ptas(&inst, 0.1).unwrap();
        assert!(matches!(ptas.branch, PtasBranch::Enumeration { .. }));
        let forward = exact_two_sided(&inst, EnumerationBudget::default()).unwrap();
        let reverse = exact_two_sided_ordered(&inst, EnumerationBudget::default(), Order::Reverse).unwrap();
        assert_eq!(forward.product, reverse.product);
        assert!((ptas.nsw - forward.nsw).abs() <= 1e-9 * forward.nsw.max(1.0));
    }
}

#[test]
fn zero_worker_weights_reduce_to_one_sided() {
    let market = TwoSidedInstance::new(
        vec![additive(&[3, 1, 2]), additive(&[1, 4, 1])],
        ones(3, 2),
        vec![2, 2],
    )
    .unwrap();
    let half = Rational::new(1.into(), 2.into());
    let inst = WeightedInstance::new(market.clone(), vec![half.clone(), half], vec![int(0); 3]).unwrap();
    let sol = solve_weighted(&inst, 0.1, 50, 5).unwrap();
    assert!(sol.matching.is_feasible(&market));
    let best = exact_one_sided(&market.firm_side(), EnumerationBudget::default()).unwrap();
    assert!(sol.nsw <= best.nsw * (1.0 + 1e-9));
    assert!(sol.nsw * std::f64::consts::E.powf(1.0 / std::f64::consts::E + 0.1) >= best.nsw);
}

#[test]
fn solver_outputs_pass_the_checkers() {
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = GenConfig::new(3, 5, ValueFamily::Coverage).capacities(1, 3);
        let one = random_one_sided(&mut rng, &cfg).unwrap();
        let (padded, _) = to_exact_capacitated(&one);
        let weights: Vec<Vec<Rational>> = (0..padded.n())
            .map(|i| (0..padded.m()).map(|k| padded.valuation(i).singleton(k).unwrap()).collect())
            .collect();
        let first = max_product_matching(&weights).unwrap();
        if !first.zero_product {
            let pool: Vec<usize> = (0..padded.m()).filter(|k| !first.assignment.contains(k)).collect();
            let state = local_search(&padded, &pool, 0.1).unwrap();
            assert_eq!(verify_no_improving_swap(&padded, &state, 0.1), Ok(()), "seed {seed}");
        }
        let two = random_two_sided(&mut rng, &cfg).unwrap();
        let sol = solve_two_sided(&two).unwrap();
        if !sol.diagnostics.zero_optimum {
            let net = build_network(&two).unwrap();
            let flow = min_cost_flow(&net.network).unwrap();
            assert_eq!(verify_flow_optimal(&net.network, &flow.flow), Ok(()), "seed {seed}");
        }
    }
}
