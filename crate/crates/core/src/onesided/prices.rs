//! Item-pair prices read off a terminated local search.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Zero;

use super::local_search::{exchange, LocalSearchState};
use crate::error::Result;
use crate::model::OneSidedInstance;
use crate::rational::{self, Rational};

/// Sparse prices `p_jk`; absent pairs are zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PriceTable {
    pub prices: BTreeMap<(usize, usize), Rational>,
}

impl PriceTable {
    pub fn get(&self, j: usize, k: usize) -> Rational {
        self.prices.get(&(j, k)).cloned().unwrap_or_else(rational::zero)
    }

    /// Largest price over all pairs.
    pub fn max_price(&self) -> Rational {
        self.prices.values().cloned().max().unwrap_or_else(rational::zero)
    }

    /// `max_k p_jk` for a fixed `j`.
    pub fn row_max(&self, j: usize) -> Rational {
        self.prices
            .range((j, 0)..=(j, usize::MAX))
            .map(|(_, p)| p.clone())
            .max()
            .unwrap_or_else(rational::zero)
    }
}

/// `p_jk = max(0, v̄_i(R_i) − v̄_i(R_i−j+k)) / v̄_i(R_i−j+k)` for `j ∈ R_i`
/// and `k ∈ R_{i'}` with both owners active, zero otherwise.
pub fn compute_prices(inst: &OneSidedInstance, state: &LocalSearchState) -> Result<PriceTable> {
    let mut table = PriceTable::default();
    let held: Vec<usize> = (0..inst.n())
        .filter(|&i| state.active[i])
        .flat_map(|i| state.bundles[i].iter().copied())
        .collect();
    for i in (0..inst.n()).filter(|&i| state.active[i]) {
        let bundle = &state.bundles[i];
        let current = state.endowed_value(inst, i, bundle)?;
        for &j in bundle {
            for &k in &held {
                if k == j {
                    continue;
                }
                let swapped = state.endowed_value(inst, i, &exchange(bundle, j, k))?;
                let drop = &current - &swapped;
                if drop > rational::zero() && !swapped.is_zero() {
                    table.prices.insert((j, k), drop / swapped);
                }
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Valuation;
    use crate::rational::{int, ratio};
    use alloc::vec;

    #[test]
    fn two_agent_state() {
        // agent 0 values (5, 1, 2, 0), agent 1 values (0, 3, 1, 4); both c = 2
        let inst = OneSidedInstance::new(
            vec![
                Valuation::additive(vec![int(5), int(1), int(2), int(0)]).unwrap(),
                Valuation::additive(vec![int(0), int(3), int(1), int(4)]).unwrap(),
            ],
            vec![2, 2],
        )
        .unwrap();
        let state =
            LocalSearchState::with_bundles(&inst, &[0, 1, 2, 3], 0.5, vec![vec![2], vec![1]])
                .unwrap();
        let prices = compute_prices(&inst, &state).unwrap();
        // agent 0: v̄({2}) = 2 + 5 = 7, v̄({1}) = 1 + 5 = 6 → p_21 = 1/6
        assert_eq!(prices.get(2, 1), ratio(1, 6));
        // agent 1: v̄({1}) = 3 + 4 = 7, v̄({2}) = 1 + 4 = 5 → p_12 = 2/5
        assert_eq!(prices.get(1, 2), ratio(2, 5));
        // unallocated items carry no price
        assert_eq!(prices.get(0, 1), rational::zero());
        assert_eq!(prices.get(2, 0), rational::zero());
        assert_eq!(prices.get(3, 1), rational::zero());
    }

    #[test]
    fn improving_replacement_costs_nothing() {
        let inst = OneSidedInstance::new(
            vec![
                Valuation::additive(vec![int(1), int(0), int(1)]).unwrap(),
                Valuation::additive(vec![int(1), int(9), int(0)]).unwrap(),
            ],
            vec![2, 2],
        )
        .unwrap();
        let state =
            LocalSearchState::with_bundles(&inst, &[0, 1, 2], 0.5, vec![vec![0], vec![2]]).unwrap();
        let prices = compute_prices(&inst, &state).unwrap();
        // agent 1 gets {0} for {2}: 1 + 9 ≥ 0 + 9
        assert_eq!(prices.get(2, 0), rational::zero());
    }
}
