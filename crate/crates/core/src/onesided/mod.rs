//! Capacitated one-sided NSW: max-product matching, endowed local search and
//! a final rematching step.

mod local_search;
mod matching;
mod prices;

use alloc::vec;
use alloc::vec::Vec;

pub use local_search::{iterations_bound, local_search, LocalSearchState, Swap};
pub use matching::{hungarian, max_product_matching, ProductMatching};
pub use prices::{compute_prices, PriceTable};

use crate::clock::{Clock, NoClock};
use crate::error::{Error, Result};
use crate::model::{ln_nsw_one_sided, Allocation, OneSidedInstance, Valuation};

/// Records which items of a padded instance are real.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DummyMap {
    /// Items `0..original` are real; the rest are zero-value padding.
    pub original: usize,
    pub padded: usize,
}

impl DummyMap {
    pub fn dummies(&self) -> usize {
        self.padded - self.original
    }

    pub fn is_dummy(&self, item: usize) -> bool {
        item >= self.original
    }

    /// Drops padding items from every bundle.
    pub fn strip(&self, alloc: &Allocation) -> Allocation {
        Allocation::new(
            alloc
                .bundles
                .iter()
                .map(|b| b.iter().copied().filter(|&k| !self.is_dummy(k)).collect())
                .collect(),
        )
    }
}

/// Pads the item set with zero-value items until there are at least `Σ c_i`.
pub fn to_exact_capacitated(inst: &OneSidedInstance) -> (OneSidedInstance, DummyMap) {
    let m = inst.m();
    let padded = m.max(inst.total_capacity());
    let map = DummyMap {
        original: m,
        padded,
    };
    if padded == m {
        return (inst.clone(), map);
    }
    let valuations: Vec<Valuation> = inst
        .valuations()
        .iter()
        .map(|v| v.with_universe(padded))
        .collect();
    let padded_inst = OneSidedInstance::new(valuations, inst.capacities().to_vec())
        .expect("padding keeps the instance valid");
    (padded_inst, map)
}

/// Adds one item of `extra` to every bundle, choosing the assignment that
/// maximizes `Π v_i(R_i + δ(i))`.
pub fn rematch(inst: &OneSidedInstance, bundles: &[Vec<usize>], extra: &[usize]) -> Result<Allocation> {
    if extra.len() != inst.n() || bundles.len() != inst.n() {
        return Err(Error::invalid(alloc::format!(
            "rematching needs {} bundles and items, got {} and {}",
            inst.n(),
            bundles.len(),
            extra.len()
        )));
    }
    let mut weights = Vec::with_capacity(inst.n());
    for (i, bundle) in bundles.iter().enumerate() {
        let mut row = Vec::with_capacity(extra.len());
        for &h in extra {
            let mut set = bundle.clone();
            set.push(h);
            row.push(inst.valuation(i).value(&set)?);
        }
        weights.push(row);
    }
    let matching = max_product_matching(&weights)?;
    let mut result = bundles.to_vec();
    for (i, &col) in matching.assignment.iter().enumerate() {
        result[i].push(extra[col]);
        result[i].sort_unstable();
    }
    Ok(Allocation::new(result))
}

/// Wall-clock time spent in each phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTimes {
    pub matching: f64,
    pub local_search: f64,
    pub rematch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneSidedDiagnostics {
    pub swaps: usize,
    pub iterations_bound: u64,
    pub queries: u64,
    pub phase_ms: PhaseTimes,
    pub nsw: f64,
    /// No allocation has positive NSW; the output is an arbitrary feasible
    /// allocation.
    pub zero_optimum: bool,
    /// Largest `γ` for which the output is `γ`-EF1, when small enough to
    /// compute.
    pub ef1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneSidedSolution {
    pub allocation: Allocation,
    pub diagnostics: OneSidedDiagnostics,
}

/// Fills capacities in agent order with items in index order.
fn fill_in_order(inst: &OneSidedInstance) -> Allocation {
    let mut bundles = vec![Vec::new(); inst.n()];
    let mut next = 0;
    for (i, bundle) in bundles.iter_mut().enumerate() {
        while bundle.len() < inst.capacity(i) && next < inst.m() {
            bundle.push(next);
            next += 1;
        }
    }
    Allocation::new(bundles)
}

/// Approximate max-NSW allocation with ratio `6+ε` for submodular valuations.
pub fn solve_one_sided(inst: &OneSidedInstance, eps: f64) -> Result<OneSidedSolution> {
    solve_one_sided_with_clock(inst, eps, &NoClock)
}

pub fn solve_one_sided_with_clock(
    inst: &OneSidedInstance,
    eps: f64,
    clock: &dyn Clock,
) -> Result<OneSidedSolution> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid("accuracy must be positive and finite"));
    }
    let (padded, map) = to_exact_capacitated(inst);
    let queries_before = padded.queries();
    let n = padded.n();
    let m = padded.m();
    let inner_eps = eps / 6.0;
    let mut phase_ms = PhaseTimes::default();

    let t0 = clock.now_ms();
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let row = (0..m)
            .map(|k| padded.valuation(i).singleton(k))
            .collect::<Result<Vec<_>>>()?;
        weights.push(row);
    }
    let first = max_product_matching(&weights)?;
    let t1 = clock.now_ms();
    phase_ms.matching = t1 - t0;

    if first.zero_product {
        let allocation = fill_in_order(inst);
        let diagnostics = OneSidedDiagnostics {
            swaps: 0,
            iterations_bound: iterations_bound(m, inner_eps),
            queries: padded.queries() - queries_before,
            phase_ms,
            nsw: 0.0,
            zero_optimum: true,
            ef1: None,
        };
        return Ok(OneSidedSolution {
            allocation,
            diagnostics,
        });
    }

    let reserved: Vec<usize> = first.assignment.clone();
    let mut in_reserved = vec![false; m];
    for &k in &reserved {
        in_reserved[k] = true;
    }
    let pool: Vec<usize> = (0..m).filter(|&k| !in_reserved[k]).collect();
    let state = local_search(&padded, &pool, inner_eps)?;
    let t2 = clock.now_ms();
    phase_ms.local_search = t2 - t1;

    let full = rematch(&padded, &state.bundles, &reserved)?;
    let t3 = clock.now_ms();
    phase_ms.rematch = t3 - t2;

    let allocation = map.strip(&full);
    let queries = padded.queries() - queries_before;
    let ln = ln_nsw_one_sided(inst, &allocation);
    let nsw = if ln == f64::NEG_INFINITY { 0.0 } else { libm::exp(ln) };
    let ef1 = ef1_factor(inst, &allocation);
    Ok(OneSidedSolution {
        allocation,
        diagnostics: OneSidedDiagnostics {
            swaps: state.swaps,
            iterations_bound: state.iterations_bound,
            queries,
            phase_ms,
            nsw,
            zero_optimum: false,
            ef1,
        },
    })
}

/// Bundles larger than this skip the EF1 diagnostic.
const EF1_MAX_BUNDLE: usize = 12;

/// Largest `γ` with `v_i(A_i) ≥ γ · min_{g∈S} v_i(S − g)` for every pair of
/// agents `i ≠ k` and every nonempty `S ⊆ A_k` with `|S| ≤ c_i`.
///
/// `None` when no pair constrains `γ` or a bundle is too large to enumerate.
pub fn ef1_factor(inst: &OneSidedInstance, alloc: &Allocation) -> Option<f64> {
    if alloc.bundles.iter().any(|b| b.len() > EF1_MAX_BUNDLE) {
        return None;
    }
    let mut gamma: Option<f64> = None;
    for i in 0..inst.n() {
        let own = crate::rational::to_f64(&inst.valuation(i).value(&alloc.bundles[i]).ok()?);
        for (k, other) in alloc.bundles.iter().enumerate() {
            if k == i {
                continue;
            }
            for mask in 1usize..(1 << other.len()) {
                if mask.count_ones() as usize > inst.capacity(i) {
                    continue;
                }
                let subset: Vec<usize> = (0..other.len())
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| other[b])
                    .collect();
                let mut envy = f64::INFINITY;
                for g in 0..subset.len() {
                    let rest: Vec<usize> = subset
                        .iter()
                        .enumerate()
                        .filter(|(x, _)| *x != g)
                        .map(|(_, &item)| item)
                        .collect();
                    let v = crate::rational::to_f64(&inst.valuation(i).value(&rest).ok()?);
                    envy = envy.min(v);
                }
                if envy > 0.0 {
                    let ratio = own / envy;
                    gamma = Some(gamma.map_or(ratio, |g| g.min(ratio)));
                }
            }
        }
    }
    gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use alloc::vec;

    fn additive(rows: &[&[i64]], caps: &[usize]) -> OneSidedInstance {
        OneSidedInstance::new(
            rows.iter()
                .map(|r| Valuation::additive(r.iter().map(|&x| int(x)).collect()).unwrap())
                .collect(),
            caps.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn padding_adds_dummies() {
        let inst = additive(&[&[1], &[1]], &[2, 1]);
        let (padded, map) = to_exact_capacitated(&inst);
        assert_eq!(padded.m(), 3);
        assert_eq!(map.dummies(), 2);
        assert_eq!(
            padded.valuation(0).value(&[0, 1, 2]).unwrap(),
            inst.valuation(0).value(&[0]).unwrap()
        );
    }

    #[test]
    fn padding_is_identity_when_enough_items() {
        let inst = additive(&[&[1, 2], &[3, 4]], &[1, 1]);
        let (padded, map) = to_exact_capacitated(&inst);
        assert_eq!(padded, inst);
        assert_eq!(map.dummies(), 0);
    }

    #[test]
    fn rematch_single_agent() {
        let inst = additive(&[&[1, 2, 3]], &[3]);
        let alloc = rematch(&inst, &[vec![0, 1]], &[2]).unwrap();
        assert_eq!(alloc.bundles, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn rematch_by_marginal_products() {
        // bundles: agent 0 holds {0} worth 10, agent 1 holds {1} worth 1.
        // extras 2 and 3: agent 0 values (1, 2), agent 1 values (1, 4).
        // δ = (2,3): 11 * 5 = 55; δ = (3,2): 12 * 2 = 24
        let inst = additive(&[&[10, 0, 1, 2], &[0, 1, 1, 4]], &[2, 2]);
        let alloc = rematch(&inst, &[vec![0], vec![1]], &[2, 3]).unwrap();
        assert_eq!(alloc.bundles, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn single_agent_picks_best_pair() {
        let inst = additive(&[&[3, 2, 1]], &[2]);
        let sol = solve_one_sided(&inst, 0.1).unwrap();
        assert_eq!(sol.allocation.bundles, vec![vec![0, 1]]);
        assert!((sol.diagnostics.nsw - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_instance_is_feasible() {
        let inst = additive(&[&[0, 0, 0], &[0, 0, 0]], &[2, 2]);
        let sol = solve_one_sided(&inst, 0.1).unwrap();
        assert!(sol.allocation.is_feasible(&inst));
        assert!(sol.diagnostics.zero_optimum);
        assert_eq!(sol.diagnostics.nsw, 0.0);
    }

    #[test]
    fn rejects_nonpositive_accuracy() {
        let inst = additive(&[&[1]], &[1]);
        assert!(solve_one_sided(&inst, 0.0).is_err());
    }

    #[test]
    fn ef1_of_envy_free_split() {
        let inst = additive(&[&[1, 1, 0, 0], &[0, 0, 1, 1]], &[2, 2]);
        let alloc = Allocation::new(vec![vec![0, 1], vec![2, 3]]);
        // agent 0 values agent 1's items at 0: no constraint, same for agent 1
        assert_eq!(ef1_factor(&inst, &alloc), None);
        let crossed = Allocation::new(vec![vec![2, 3], vec![0, 1]]);
        assert_eq!(ef1_factor(&inst, &crossed), Some(0.0));
    }
}
