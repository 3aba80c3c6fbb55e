//! Column generation for the configuration LP.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::simplex::MasterLp;
use super::{column_coefficient, separation_oracle, Column, DualPoint, FractionalAssignment};
use crate::error::{Error, Result};
use crate::model::{ln_nsw_weighted, WeightedInstance};
use crate::twosided::solve_two_sided;

/// Column-generation stops with a resource error past this many columns.
pub const MAX_COLUMNS: usize = 10_000;

/// Artificial mass above this means the configuration LP is infeasible.
const ARTIFICIAL_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfLpSolution {
    /// Columns with positive weight.
    pub columns: Vec<Column>,
    /// `Σ coef · y` with the unscaled coefficients.
    pub objective: f64,
    /// Dual objective at the last oracle call; an upper bound on the LP
    /// optimum when `certified`.
    pub dual_bound: f64,
    pub x: FractionalAssignment,
    /// Columns generated in total, seeds included.
    pub generated: usize,
    /// Budget guesses tried by the bracket search.
    pub guesses: usize,
    /// The oracle reported no violated constraint at the final duals.
    pub certified: bool,
    /// Final search interval for the optimum.
    pub bracket: (f64, f64),
}

enum Outcome {
    Above,
    Certified,
    Stalled,
}

struct ColumnGeneration<'a> {
    inst: &'a WeightedInstance,
    eps: f64,
    lp: MasterLp,
    columns: Vec<Column>,
    seen: BTreeSet<(usize, Vec<usize>)>,
    shift: Vec<f64>,
    dual_bound: f64,
}

impl<'a> ColumnGeneration<'a> {
    fn new(inst: &'a WeightedInstance, eps: f64) -> Self {
        let market = inst.market();
        let ln_slack = libm::log1p(eps / 2.0);
        ColumnGeneration {
            inst,
            eps,
            lp: MasterLp::new(market.m(), market.n()),
            columns: Vec::new(),
            seen: BTreeSet::new(),
            shift: (0..market.n()).map(|i| inst.firm_weight(i) * ln_slack).collect(),
            dual_bound: f64::INFINITY,
        }
    }

    /// Adds the column if it is new and has a finite coefficient.
    fn add(&mut self, firm: usize, mut set: Vec<usize>) -> Result<bool> {
        set.sort_unstable();
        if set.len() > self.inst.market().capacity(firm) || self.seen.contains(&(firm, set.clone())) {
            return Ok(false);
        }
        let Some(coefficient) = column_coefficient(self.inst, firm, &set)? else {
            return Ok(false);
        };
        if self.columns.len() >= MAX_COLUMNS {
            return Err(Error::resource(alloc::format!(
                "column generation exceeded {MAX_COLUMNS} columns"
            )));
        }
        // the master works with firm values scaled by 1+ε/2
        self.lp.add_column(firm, &set, coefficient + self.shift[firm]);
        self.seen.insert((firm, set.clone()));
        self.columns.push(Column {
            firm,
            set,
            coefficient,
            weight: 0.0,
        });
        Ok(true)
    }

    fn shifted_objective(&self) -> f64 {
        self.lp.structural_objective()
    }

    /// Prices columns until the master exceeds `stop_above` or the oracle
    /// finds nothing.
    fn run(&mut self, stop_above: f64) -> Result<Outcome> {
        let m = self.inst.market().m();
        loop {
            self.lp.solve()?;
            let feasible = self.lp.artificial_mass() <= ARTIFICIAL_TOLERANCE;
            if feasible && self.shifted_objective() > stop_above {
                return Ok(Outcome::Above);
            }
            let pi = self.lp.duals();
            let dual = DualPoint::new(pi[..m].to_vec(), pi[m..].to_vec());
            match separation_oracle(self.inst, &dual, self.eps)? {
                None => {
                    self.dual_bound = dual.objective();
                    return Ok(Outcome::Certified);
                }
                Some(v) => {
                    if !self.add(v.firm, v.set)? {
                        return Ok(Outcome::Stalled);
                    }
                }
            }
        }
    }
}

/// Solves the configuration LP to within `ln(1+ε)` of its optimum.
///
/// The master LP scores firm values scaled by `1+ε/2`, so every column the
/// separation oracle returns prices out positively. Once the oracle finds no
/// violated constraint, the unscaled objective of the master solution is
/// within `Σ η_i ln(1+ε/2)` of the optimum. A bracket around the optimum,
/// seeded from the flow solution, is halved until narrower than `ε/3`;
/// columns carry over between guesses.
pub fn solve_conf_lp(inst: &WeightedInstance, eps: f64) -> Result<ConfLpSolution> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid("accuracy must be positive and finite"));
    }
    let market = inst.market();
    if market.firm_valuations().iter().any(|v| !v.is_additive()) {
        return Err(Error::Unsupported(
            "the configuration LP needs additive firm valuations",
        ));
    }
    let (n, m) = (market.n(), market.m());
    let mut cg = ColumnGeneration::new(inst, eps);

    let flow = solve_two_sided(market)?;
    let mut seed_ln = f64::NEG_INFINITY;
    if !flow.diagnostics.zero_optimum {
        for (i, bundle) in flow.matching.bundles(n).into_iter().enumerate() {
            cg.add(i, bundle)?;
        }
        seed_ln = ln_nsw_weighted(
            market,
            &flow.matching,
            &inst.firm_weights_f64(),
            &inst.worker_weights_f64(),
        )?;
    }
    for i in 0..n {
        cg.add(i, Vec::new())?;
        for j in 0..m {
            cg.add(i, vec![j])?;
        }
    }

    let mut guesses = 0;
    let mut certified = false;
    let mut stalled = false;
    let (mut lo, mut hi) = if seed_ln.is_finite() {
        (seed_ln, seed_ln + libm::log(m.max(2) as f64) + 1.0 / core::f64::consts::E)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    while lo.is_finite() && hi - lo > eps / 3.0 {
        let guess = 0.5 * (lo + hi);
        guesses += 1;
        match cg.run(guess)? {
            Outcome::Above => lo = guess,
            Outcome::Certified => {
                certified = true;
                hi = hi.min(cg.dual_bound);
                break;
            }
            Outcome::Stalled => {
                stalled = true;
                break;
            }
        }
    }
    if !certified && !stalled {
        match cg.run(f64::INFINITY)? {
            Outcome::Certified => {
                certified = true;
                hi = hi.min(cg.dual_bound);
            }
            Outcome::Stalled => {}
            Outcome::Above => unreachable!("nothing exceeds an infinite budget"),
        }
    }
    if cg.lp.artificial_mass() > ARTIFICIAL_TOLERANCE {
        return Err(Error::infeasible("the configuration LP has no feasible solution"));
    }

    let y = cg.lp.primal();
    let first = cg.lp.first_column();
    let mut columns = Vec::new();
    let mut objective = 0.0;
    for (k, column) in cg.columns.iter().enumerate() {
        let weight = y[first + k];
        if weight > 1e-12 {
            objective += column.coefficient * weight;
            columns.push(Column {
                weight,
                ..column.clone()
            });
        }
    }
    let x = FractionalAssignment::from_columns(n, m, &columns);
    lo = if lo.is_finite() { lo.min(objective) } else { objective };
    Ok(ConfLpSolution {
        columns,
        objective,
        dual_bound: cg.dual_bound,
        x,
        generated: cg.columns.len(),
        guesses,
        certified,
        bracket: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TwoSidedInstance, Valuation};
    use crate::rational::{int, ratio};

    #[test]
    fn single_pair() {
        let market = TwoSidedInstance::new(
            vec![Valuation::additive(vec![int(3)]).unwrap()],
            vec![vec![int(2)]],
            vec![1],
        )
        .unwrap();
        let inst = WeightedInstance::new(market, vec![ratio(1, 2)], vec![ratio(1, 2)]).unwrap();
        let sol = solve_conf_lp(&inst, 0.1).unwrap();
        assert!(sol.certified);
        assert_eq!(sol.columns.len(), 1);
        assert_eq!(sol.columns[0].set, vec![0]);
        assert!((sol.columns[0].weight - 1.0).abs() < 1e-12);
        let expected = 0.5 * libm::log(3.0) + 0.5 * libm::log(2.0);
        assert!((sol.objective - expected).abs() < 1e-12);
    }

    #[test]
    fn one_firm_takes_everyone() {
        let market = TwoSidedInstance::new(
            vec![Valuation::additive(vec![int(1), int(2), int(3)]).unwrap()],
            vec![vec![int(1)], vec![int(1)], vec![int(1)]],
            vec![3],
        )
        .unwrap();
        let inst = WeightedInstance::new(market, vec![int(1)], vec![int(0), int(0), int(0)]).unwrap();
        let sol = solve_conf_lp(&inst, 0.1).unwrap();
        assert!(sol.certified);
        assert!((sol.objective - libm::log(6.0)).abs() < 1e-9);
        let full: f64 = sol.columns.iter().filter(|c| c.set == vec![0, 1, 2]).map(|c| c.weight).sum();
        assert!((full - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonadditive() {
        let market = TwoSidedInstance::new(
            vec![Valuation::capped(vec![int(1), int(2)], 1).unwrap()],
            vec![vec![int(1)], vec![int(1)]],
            vec![2],
        )
        .unwrap();
        let inst = WeightedInstance::with_any_valuations(
            market,
            vec![ratio(1, 3)],
            vec![ratio(1, 3), ratio(1, 3)],
        )
        .unwrap();
        assert!(matches!(solve_conf_lp(&inst, 0.1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn contested_worker_is_infeasible() {
        let market = TwoSidedInstance::new(
            vec![
                Valuation::additive(vec![int(1), int(0)]).unwrap(),
                Valuation::additive(vec![int(1), int(0)]).unwrap(),
            ],
            vec![vec![int(1), int(1)], vec![int(1), int(1)]],
            vec![1, 1],
        )
        .unwrap();
        let inst = WeightedInstance::uniform(market).unwrap();
        assert!(matches!(solve_conf_lp(&inst, 0.1), Err(Error::Infeasible(_))));
    }
}
