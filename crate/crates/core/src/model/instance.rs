use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use super::{Matching, Valuation};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Items to be divided among capacitated agents.
#[derive(Debug, Clone, PartialEq)]
pub struct OneSidedInstance {
    valuations: Vec<Valuation>,
    capacities: Vec<usize>,
    items: usize,
}

impl OneSidedInstance {
    pub fn new(valuations: Vec<Valuation>, capacities: Vec<usize>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::invalid("need at least one agent"));
        }
        if valuations.len() != capacities.len() {
            return Err(Error::invalid(alloc::format!(
                "{} valuations but {} capacities",
                valuations.len(),
                capacities.len()
            )));
        }
        if let Some(i) = capacities.iter().position(|&c| c < 1) {
            return Err(Error::invalid(alloc::format!("capacity of agent {i} must be at least 1")));
        }
        let items = valuations[0].universe();
        if let Some(i) = valuations.iter().position(|v| v.universe() != items) {
            return Err(Error::invalid(alloc::format!(
                "valuation {i} covers {} items, expected {items}",
                valuations[i].universe()
            )));
        }
        Ok(OneSidedInstance {
            valuations,
            capacities,
            items,
        })
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    /// Number of items.
    pub fn m(&self) -> usize {
        self.items
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn capacity(&self, agent: usize) -> usize {
        self.capacities[agent]
    }

    pub fn total_capacity(&self) -> usize {
        self.capacities.iter().sum()
    }

    /// Value queries answered so far, summed over agents.
    pub fn queries(&self) -> u64 {
        self.valuations.iter().map(Valuation::queries).sum()
    }

    pub fn reset_queries(&self) {
        self.valuations.iter().for_each(Valuation::reset_queries);
    }
}

/// Workers to be matched to capacitated firms; both sides have values.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedInstance {
    firm_valuations: Vec<Valuation>,
    /// `worker_values[j][i]` is worker `j`'s value for firm `i`.
    worker_values: Vec<Vec<Rational>>,
    capacities: Vec<usize>,
}

impl TwoSidedInstance {
    pub fn new(
        firm_valuations: Vec<Valuation>,
        worker_values: Vec<Vec<Rational>>,
        capacities: Vec<usize>,
    ) -> Result<Self> {
        let n = firm_valuations.len();
        if n == 0 {
            return Err(Error::invalid("need at least one firm"));
        }
        if capacities.len() != n {
            return Err(Error::invalid(alloc::format!(
                "{n} firm valuations but {} capacities",
                capacities.len()
            )));
        }
        if let Some(i) = capacities.iter().position(|&c| c < 1) {
            return Err(Error::invalid(alloc::format!("capacity of firm {i} must be at least 1")));
        }
        let m = worker_values.len();
        if let Some(i) = firm_valuations.iter().position(|v| v.universe() != m) {
            return Err(Error::invalid(alloc::format!(
                "firm valuation {i} covers {} workers, expected {m}",
                firm_valuations[i].universe()
            )));
        }
        for (j, row) in worker_values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(alloc::format!(
                    "worker {j} has {} firm values, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|w| w.is_negative()) {
                return Err(Error::invalid(alloc::format!("worker {j} has a negative value")));
            }
        }
        let total: usize = capacities.iter().sum();
        if total < m {
            return Err(Error::infeasible(alloc::format!(
                "total capacity {total} is below the number of workers {m}"
            )));
        }
        Ok(TwoSidedInstance {
            firm_valuations,
            worker_values,
            capacities,
        })
    }

    /// Number of firms.
    pub fn n(&self) -> usize {
        self.firm_valuations.len()
    }

    /// Number of workers.
    pub fn m(&self) -> usize {
        self.worker_values.len()
    }

    pub fn firm_valuations(&self) -> &[Valuation] {
        &self.firm_valuations
    }

    pub fn firm_valuation(&self, firm: usize) -> &Valuation {
        &self.firm_valuations[firm]
    }

    pub fn worker_values(&self) -> &[Vec<Rational>] {
        &self.worker_values
    }

    pub fn worker_value(&self, worker: usize, firm: usize) -> &Rational {
        &self.worker_values[worker][firm]
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn capacity(&self, firm: usize) -> usize {
        self.capacities[firm]
    }

    pub fn queries(&self) -> u64 {
        self.firm_valuations.iter().map(Valuation::queries).sum()
    }

    /// The firms' side alone, as a one-sided instance over the workers.
    pub fn firm_side(&self) -> OneSidedInstance {
        OneSidedInstance::new(self.firm_valuations.clone(), self.capacities.clone())
            .expect("validated two-sided instance")
    }

    /// Worker `j`'s utility under `matching` (zero when unmatched).
    pub fn worker_utility(&self, matching: &Matching, worker: usize) -> Rational {
        match matching.firm_of(worker) {
            Some(i) => self.worker_values[worker][i].clone(),
            None => rational::zero(),
        }
    }
}

/// Two-sided instance with per-party weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedInstance {
    market: TwoSidedInstance,
    firm_weights: Vec<Rational>,
    worker_weights: Vec<Rational>,
}

impl WeightedInstance {
    /// Weighted instances require additive firm valuations.
    pub fn new(
        market: TwoSidedInstance,
        firm_weights: Vec<Rational>,
        worker_weights: Vec<Rational>,
    ) -> Result<Self> {
        if let Some(i) = market.firm_valuations().iter().position(|v| !v.is_additive()) {
            return Err(Error::invalid(alloc::format!(
                "weighted instances need additive firm valuations (firm {i} is {})",
                market.firm_valuation(i).kind().name()
            )));
        }
        Self::with_any_valuations(market, firm_weights, worker_weights)
    }

    /// Same checks as [`WeightedInstance::new`] except the additivity
    /// requirement; usable with the exact oracle but not the LP pipeline.
    pub fn with_any_valuations(
        market: TwoSidedInstance,
        firm_weights: Vec<Rational>,
        worker_weights: Vec<Rational>,
    ) -> Result<Self> {
        check_weights(
            market.n(),
            market.m(),
            &firm_weights.iter().map(rational::to_f64).collect::<Vec<_>>(),
            &worker_weights.iter().map(rational::to_f64).collect::<Vec<_>>(),
        )?;
        Ok(WeightedInstance {
            market,
            firm_weights,
            worker_weights,
        })
    }

    /// Weights `1/(m+n)` for every party.
    pub fn uniform(market: TwoSidedInstance) -> Result<Self> {
        let total = (market.n() + market.m()) as i64;
        let w = rational::ratio(1, total);
        let firms = alloc::vec![w.clone(); market.n()];
        let workers = alloc::vec![w; market.m()];
        Self::new(market, firms, workers)
    }

    pub fn market(&self) -> &TwoSidedInstance {
        &self.market
    }

    pub fn firm_weights(&self) -> &[Rational] {
        &self.firm_weights
    }

    pub fn worker_weights(&self) -> &[Rational] {
        &self.worker_weights
    }

    pub fn firm_weight(&self, firm: usize) -> f64 {
        rational::to_f64(&self.firm_weights[firm])
    }

    pub fn worker_weight(&self, worker: usize) -> f64 {
        rational::to_f64(&self.worker_weights[worker])
    }

    pub fn firm_weights_f64(&self) -> Vec<f64> {
        self.firm_weights.iter().map(rational::to_f64).collect()
    }

    pub fn worker_weights_f64(&self) -> Vec<f64> {
        self.worker_weights.iter().map(rational::to_f64).collect()
    }

    /// Sum of firm weights.
    pub fn firm_weight_total(&self) -> f64 {
        self.firm_weights_f64().iter().sum()
    }
}

pub(crate) fn check_weights(n: usize, m: usize, firm: &[f64], worker: &[f64]) -> Result<()> {
    if firm.len() != n || worker.len() != m {
        return Err(Error::invalid(alloc::format!(
            "expected {n} firm weights and {m} worker weights, got {} and {}",
            firm.len(),
            worker.len()
        )));
    }
    if firm.iter().chain(worker).any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let sum: f64 = firm.iter().chain(worker).sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(alloc::format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

pub(crate) fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}
