//! Weighted two-sided NSW with additive firms: a configuration LP solved by
//! column generation, then dependent rounding of its marginals.

mod lp;
mod rounding;
mod separation;
pub mod simplex;
mod weighted;

use alloc::vec;
use alloc::vec::Vec;

pub use lp::{solve_conf_lp, ConfLpSolution, MAX_COLUMNS};
pub use rounding::dependent_rounding;
pub use separation::{
    knapsack_table, relaxed_margin, separation_oracle, KnapsackTable, Violation,
};
pub use weighted::{
    combined_bound, solve_unweighted_best, solve_weighted, CombinedBranch, CombinedSolution,
    TrialRecord, WeightedDiagnostics, WeightedSolution,
};

use crate::error::{Error, Result};
use crate::model::{is_zero, WeightedInstance};
use crate::rational;

/// Dual point `(α, β)` queried against the dual constraints
/// `Σ_{j∈S} α_j + β_i ≥ coef(i, S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Budget `o` the point is meant to respect.
    pub budget: f64,
}

impl DualPoint {
    /// Point whose budget is its own objective `Σα + Σβ`.
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        let budget = alpha.iter().sum::<f64>() + beta.iter().sum::<f64>();
        DualPoint {
            alpha,
            beta,
            budget,
        }
    }

    pub fn objective(&self) -> f64 {
        self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>()
    }
}

/// A firm-bundle pair of the configuration LP.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub firm: usize,
    /// Sorted workers.
    pub set: Vec<usize>,
    pub coefficient: f64,
    pub weight: f64,
}

/// `η_i ln v_i(S) + Σ_{j∈S} ζ_j ln w_j(i)`, or `None` when a factor with
/// positive weight is zero. A term with weight zero contributes nothing.
pub fn column_coefficient(inst: &WeightedInstance, firm: usize, set: &[usize]) -> Result<Option<f64>> {
    let market = inst.market();
    if set.len() > market.capacity(firm) {
        return Err(Error::invalid(alloc::format!(
            "bundle of {} workers exceeds capacity {}",
            set.len(),
            market.capacity(firm)
        )));
    }
    let eta = inst.firm_weight(firm);
    let mut total = 0.0;
    if eta > 0.0 {
        let v = market.firm_valuation(firm).value(set)?;
        if is_zero(&v) {
            return Ok(None);
        }
        total += eta * rational::ln(&v);
    }
    for &j in set {
        let zeta = inst.worker_weight(j);
        if zeta > 0.0 {
            let w = market.worker_value(j, firm);
            if is_zero(w) {
                return Ok(None);
            }
            total += zeta * rational::ln(w);
        }
    }
    Ok(Some(total))
}

/// Marginals `x_ij = Σ_{S∋j} y_{i,S}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAssignment {
    /// `x[i][j]` for firm `i` and worker `j`.
    pub x: Vec<Vec<f64>>,
}

impl FractionalAssignment {
    pub fn new(x: Vec<Vec<f64>>) -> Self {
        FractionalAssignment { x }
    }

    pub fn from_columns(firms: usize, workers: usize, columns: &[Column]) -> Self {
        let mut x = vec![vec![0.0; workers]; firms];
        for c in columns {
            for &j in &c.set {
                x[c.firm][j] += c.weight;
            }
        }
        for row in &mut x {
            for v in row.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        }
        FractionalAssignment { x }
    }

    pub fn firms(&self) -> usize {
        self.x.len()
    }

    pub fn workers(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn firm_load(&self, firm: usize) -> f64 {
        self.x[firm].iter().sum()
    }

    pub fn worker_total(&self, worker: usize) -> f64 {
        self.x.iter().map(|row| row[worker]).sum()
    }

    /// Entries in `[0,1]`, worker totals at most one, firm loads at most the
    /// capacities (all within `tol`).
    pub fn validate(&self, capacities: &[usize], tol: f64) -> Result<()> {
        if self.firms() != capacities.len() || self.x.iter().any(|r| r.len() != self.workers()) {
            return Err(Error::invalid("marginal matrix has the wrong shape"));
        }
        if self.x.iter().flatten().any(|&v| !(-tol..=1.0 + tol).contains(&v)) {
            return Err(Error::invalid("marginals must lie in [0, 1]"));
        }
        if let Some(j) = (0..self.workers()).find(|&j| self.worker_total(j) > 1.0 + tol) {
            return Err(Error::invalid(alloc::format!("worker {j} is assigned more than once")));
        }
        if let Some(i) = (0..self.firms()).find(|&i| self.firm_load(i) > capacities[i] as f64 + tol) {
            return Err(Error::invalid(alloc::format!("firm {i} exceeds its capacity")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TwoSidedInstance, Valuation};
    use crate::rational::{int, ratio};

    fn weighted() -> WeightedInstance {
        let market = TwoSidedInstance::new(
            vec![Valuation::additive(vec![int(3), int(0)]).unwrap()],
            vec![vec![int(2)], vec![int(0)]],
            vec![2],
        )
        .unwrap();
        WeightedInstance::new(market, vec![ratio(1, 2)], vec![ratio(1, 2), int(0)]).unwrap()
    }

    #[test]
    fn coefficients() {
        let inst = weighted();
        let c = column_coefficient(&inst, 0, &[0]).unwrap().unwrap();
        assert!((c - 0.5 * libm::log(3.0) - 0.5 * libm::log(2.0)).abs() < 1e-12);
        // worker 1 has weight zero, so its zero value does not matter
        let c = column_coefficient(&inst, 0, &[0, 1]).unwrap().unwrap();
        assert!((c - 0.5 * libm::log(3.0) - 0.5 * libm::log(2.0)).abs() < 1e-12);
        // firm value zero with positive firm weight
        assert_eq!(column_coefficient(&inst, 0, &[1]).unwrap(), None);
        assert_eq!(column_coefficient(&inst, 0, &[]).unwrap(), None);
    }

    #[test]
    fn marginals_from_columns() {
        let columns = vec![
            Column {
                firm: 0,
                set: vec![0, 1],
                coefficient: 0.0,
                weight: 0.25,
            },
            Column {
                firm: 0,
                set: vec![1],
                coefficient: 0.0,
                weight: 0.75,
            },
        ];
        let x = FractionalAssignment::from_columns(1, 2, &columns);
        assert_eq!(x.x, vec![vec![0.25, 1.0]]);
        assert!((x.firm_load(0) - 1.25).abs() < 1e-15);
        x.validate(&[2], 1e-9).unwrap();
        assert!(x.validate(&[1], 1e-9).is_err());
    }
}
