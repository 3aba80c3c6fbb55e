//! Instances, valuations, allocations and Nash social welfare.

mod instance;
mod nsw;
mod valuation;

use alloc::vec::Vec;

pub use instance::{OneSidedInstance, TwoSidedInstance, WeightedInstance};
pub(crate) use instance::{check_weights, is_zero};
pub use nsw::{
    ln_nsw_one_sided, ln_nsw_two_sided, ln_nsw_weighted, nsw_one_sided, nsw_two_sided,
    nsw_weighted,
};
pub use valuation::{Valuation, ValuationKind, MAX_EXHAUSTIVE_ITEMS, MAX_TABLE_ITEMS};

use crate::error::{Error, Result};

/// Disjoint bundles, one per agent; items may be left out.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Allocation {
    pub bundles: Vec<Vec<usize>>,
}

impl Allocation {
    pub fn new(bundles: Vec<Vec<usize>>) -> Self {
        Allocation { bundles }
    }

    pub fn empty(agents: usize) -> Self {
        Allocation {
            bundles: alloc::vec![Vec::new(); agents],
        }
    }

    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    /// Checks shape, item range and pairwise disjointness.
    pub fn validate(&self, agents: usize, items: usize) -> Result<()> {
        if self.bundles.len() != agents {
            return Err(Error::invalid(alloc::format!(
                "allocation has {} bundles, expected {agents}",
                self.bundles.len()
            )));
        }
        let mut owner = alloc::vec![None; items];
        for (i, bundle) in self.bundles.iter().enumerate() {
            for &j in bundle {
                if j >= items {
                    return Err(Error::ItemOutOfRange {
                        item: j,
                        universe: items,
                    });
                }
                if let Some(k) = owner[j] {
                    return Err(Error::invalid(alloc::format!(
                        "item {j} given to both agent {k} and agent {i}"
                    )));
                }
                owner[j] = Some(i);
            }
        }
        Ok(())
    }

    /// `|A_i| ≤ c_i` for every agent (plus the structural checks).
    pub fn is_feasible(&self, inst: &OneSidedInstance) -> bool {
        self.validate(inst.n(), inst.m()).is_ok()
            && self
                .bundles
                .iter()
                .zip(inst.capacities())
                .all(|(b, &c)| b.len() <= c)
    }
}

/// Many-to-one assignment of workers to firms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// Firm of each worker, `None` when unmatched.
    pub assignment: Vec<Option<usize>>,
}

impl Matching {
    pub fn new(assignment: Vec<Option<usize>>) -> Self {
        Matching { assignment }
    }

    pub fn unmatched(workers: usize) -> Self {
        Matching {
            assignment: alloc::vec![None; workers],
        }
    }

    pub fn firm_of(&self, worker: usize) -> Option<usize> {
        self.assignment[worker]
    }

    /// Workers of every firm, in increasing worker order.
    pub fn bundles(&self, firms: usize) -> Vec<Vec<usize>> {
        let mut bundles = alloc::vec![Vec::new(); firms];
        for (j, f) in self.assignment.iter().enumerate() {
            if let Some(i) = *f {
                bundles[i].push(j);
            }
        }
        bundles
    }

    pub fn loads(&self, firms: usize) -> Vec<usize> {
        let mut loads = alloc::vec![0; firms];
        for i in self.assignment.iter().flatten() {
            loads[*i] += 1;
        }
        loads
    }

    pub fn to_allocation(&self, firms: usize) -> Allocation {
        Allocation::new(self.bundles(firms))
    }

    /// Shape, firm range and `|μ_i| ≤ c_i`.
    pub fn validate(&self, capacities: &[usize], workers: usize) -> Result<()> {
        if self.assignment.len() != workers {
            return Err(Error::invalid(alloc::format!(
                "matching covers {} workers, expected {workers}",
                self.assignment.len()
            )));
        }
        if let Some(i) = self.assignment.iter().flatten().find(|&&i| i >= capacities.len()) {
            return Err(Error::invalid(alloc::format!("firm {i} does not exist")));
        }
        for (i, (&load, &cap)) in self.loads(capacities.len()).iter().zip(capacities).enumerate() {
            if load > cap {
                return Err(Error::invalid(alloc::format!(
                    "firm {i} has {load} workers but capacity {cap}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, inst: &TwoSidedInstance) -> bool {
        self.validate(inst.capacities(), inst.m()).is_ok()
    }
}
