//! Dense tableau simplex for the restricted master LP.
//!
//! ```text
//! max  Σ c_k y_k
//! s.t. Σ_{k ∋ j} y_k ≤ 1      for every worker j
//!      Σ_{k of firm i} y_k = 1 for every firm i
//!      y ≥ 0
//! ```
//!
//! Worker rows start on their slacks and firm rows on big-M artificials, so
//! the initial basis is the identity and the basis inverse can be read off
//! those columns at any time. Columns can be appended between solves.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const PIVOT_TOLERANCE: f64 = 1e-11;
const REDUCED_TOLERANCE: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// Penalty per unit of artificial mass.
pub const BIG_M: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct MasterLp {
    workers: usize,
    firms: usize,
    /// `B⁻¹A`, one row per constraint.
    tableau: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    basis: Vec<usize>,
}

impl MasterLp {
    pub fn new(workers: usize, firms: usize) -> Self {
        let rows = workers + firms;
        let mut tableau = vec![vec![0.0; rows]; rows];
        for (r, row) in tableau.iter_mut().enumerate() {
            row[r] = 1.0;
        }
        let mut cost = vec![0.0; workers];
        cost.extend(core::iter::repeat(-BIG_M).take(firms));
        MasterLp {
            workers,
            firms,
            tableau,
            rhs: vec![1.0; rows],
            reduced: vec![0.0; rows],
            cost,
            basis: (0..rows).collect(),
        }
    }

    fn rows(&self) -> usize {
        self.workers + self.firms
    }

    /// Index of the first structural column.
    pub fn first_column(&self) -> usize {
        self.rows()
    }

    pub fn structural_columns(&self) -> usize {
        self.cost.len() - self.rows()
    }

    /// Row duals `π = c_B B⁻¹`: workers first, then firms.
    pub fn duals(&self) -> Vec<f64> {
        (0..self.rows()).map(|r| self.cost[r] - self.reduced[r]).collect()
    }

    /// Appends the column of `firm` covering `workers`; returns its index.
    pub fn add_column(&mut self, firm: usize, workers: &[usize], coefficient: f64) -> usize {
        let rows = self.rows();
        let pi = self.duals();
        let mut column = vec![0.0; rows];
        let mut price = pi[self.workers + firm];
        let identity_rows = workers.iter().copied().chain(core::iter::once(self.workers + firm));
        for r in identity_rows {
            for (t, row) in column.iter_mut().zip(&self.tableau) {
                *t += row[r];
            }
        }
        for &j in workers {
            price += pi[j];
        }
        for (row, t) in self.tableau.iter_mut().zip(column) {
            row.push(t);
        }
        self.cost.push(coefficient);
        self.reduced.push(coefficient - price);
        self.cost.len() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.tableau[row][col];
        for v in self.tableau[row].iter_mut() {
            *v /= p;
        }
        self.rhs[row] /= p;
        let pivot_row = self.tableau[row].clone();
        let pivot_rhs = self.rhs[row];
        for r in 0..self.rows() {
            if r == row {
                continue;
            }
            let f = self.tableau[r][col];
            if f != 0.0 {
                for (v, &pv) in self.tableau[r].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.rhs[r] -= f * pivot_rhs;
                if self.rhs[r].abs() < 1e-13 {
                    self.rhs[r] = 0.0;
                }
            }
        }
        let f = self.reduced[col];
        for (v, &pv) in self.reduced.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        self.basis[row] = col;
    }

    /// Optimizes with Bland's rule.
    pub fn solve(&mut self) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let Some(col) = (0..self.cost.len()).find(|&c| self.reduced[c] > REDUCED_TOLERANCE) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows() {
                let a = self.tableau[r][col];
                if a > PIVOT_TOLERANCE {
                    let ratio = self.rhs[r] / a;
                    let better = match leave {
                        None => true,
                        Some((best, best_ratio)) => {
                            ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[r] < self.basis[best])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::invalid("master LP is unbounded"));
            };
            self.pivot(row, col);
        }
        Err(Error::resource("master LP pivot limit reached"))
    }

    /// Current value of every column (slacks, artificials, structurals).
    pub fn primal(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.cost.len()];
        for (r, &b) in self.basis.iter().enumerate() {
            y[b] = self.rhs[r].max(0.0);
        }
        y
    }

    /// Total weight on artificial columns.
    pub fn artificial_mass(&self) -> f64 {
        let y = self.primal();
        y[self.workers..self.rows()].iter().sum()
    }

    /// `Σ c_k y_k` over structural columns only.
    pub fn structural_objective(&self) -> f64 {
        let y = self.primal();
        (self.rows()..self.cost.len()).map(|k| self.cost[k] * y[k]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_best_column_per_firm() {
        let mut lp = MasterLp::new(2, 1);
        lp.add_column(0, &[0], 1.0);
        lp.add_column(0, &[1], 2.0);
        lp.add_column(0, &[0, 1], 2.5);
        lp.solve().unwrap();
        let y = lp.primal();
        assert!((y[lp.first_column() + 2] - 1.0).abs() < 1e-12);
        assert!(lp.artificial_mass() < 1e-12);
        assert!((lp.structural_objective() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn shared_worker_splits_fractionally() {
        // both firms want worker 0 alone (value 2) or fall back to nothing
        // useful; the worker row forces a split
        let mut lp = MasterLp::new(1, 2);
        lp.add_column(0, &[0], 2.0);
        lp.add_column(0, &[], 0.0);
        lp.add_column(1, &[0], 2.0);
        lp.add_column(1, &[], 1.0);
        lp.solve().unwrap();
        assert!((lp.structural_objective() - 3.0).abs() < 1e-12);
        let pi = lp.duals();
        // strong duality: Σα + Σβ equals the objective
        assert!((pi.iter().sum::<f64>() - 3.0).abs() < 1e-9);
        assert!(pi[0] >= -1e-12);
    }

    #[test]
    fn columns_added_after_a_solve() {
        let mut lp = MasterLp::new(2, 1);
        lp.add_column(0, &[0], 1.0);
        lp.solve().unwrap();
        assert!((lp.structural_objective() - 1.0).abs() < 1e-12);
        lp.add_column(0, &[0, 1], 4.0);
        lp.solve().unwrap();
        assert!((lp.structural_objective() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_master_keeps_artificial_mass() {
        let mut lp = MasterLp::new(1, 2);
        lp.add_column(0, &[0], 1.0);
        lp.add_column(1, &[0], 1.0);
        lp.solve().unwrap();
        assert!(lp.artificial_mass() > 0.5);
    }
}
