use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{fill_capacities, solve_two_sided, TwoSidedDiagnostics};
use crate::error::{Error, Result};
use crate::model::{is_zero, ln_nsw_two_sided, Matching, TwoSidedInstance};
use crate::rational;

/// Largest `n^m` the exhaustive branch will enumerate.
pub const PTAS_ENUMERATION_CAP: f64 = 1e8;

/// Masks of at most this many workers are memoized in a dense table.
const DENSE_MEMO_WORKERS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum PtasBranch {
    Flow(TwoSidedDiagnostics),
    Enumeration { leaves: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtasSolution {
    pub matching: Matching,
    pub nsw: f64,
    pub branch: PtasBranch,
}

enum Memo {
    Dense(Vec<Vec<f64>>),
    Sparse(Vec<BTreeMap<u64, f64>>),
}

struct Search<'a> {
    inst: &'a TwoSidedInstance,
    memo: Memo,
    ln_worker: Vec<Vec<f64>>,
    assignment: Vec<usize>,
    masks: Vec<u64>,
    loads: Vec<usize>,
    best: f64,
    best_assignment: Option<Vec<usize>>,
    leaves: u64,
}

impl Search<'_> {
    fn ln_value(&mut self, firm: usize) -> f64 {
        let mask = self.masks[firm];
        let cached = match &self.memo {
            Memo::Dense(t) => t[firm][mask as usize],
            Memo::Sparse(t) => t[firm].get(&mask).copied().unwrap_or(f64::NAN),
        };
        if !cached.is_nan() {
            return cached;
        }
        let items: Vec<usize> = (0..self.inst.m()).filter(|j| mask >> j & 1 == 1).collect();
        let v = self
            .inst
            .firm_valuation(firm)
            .value(&items)
            .expect("workers are in range");
        let ln = rational::ln(&v);
        match &mut self.memo {
            Memo::Dense(t) => t[firm][mask as usize] = ln,
            Memo::Sparse(t) => {
                t[firm].insert(mask, ln);
            }
        }
        ln
    }

    fn visit(&mut self, worker: usize, ln_workers: f64) {
        let (n, m) = (self.inst.n(), self.inst.m());
        if worker == m {
            self.leaves += 1;
            let mut total = ln_workers;
            for i in 0..n {
                total += self.ln_value(i);
                if total == f64::NEG_INFINITY {
                    return;
                }
            }
            if total > self.best {
                self.best = total;
                self.best_assignment = Some(self.assignment.clone());
            }
            return;
        }
        let empty = self.loads.iter().filter(|&&l| l == 0).count();
        if empty > m - worker {
            return;
        }
        for i in 0..n {
            let ln_w = self.ln_worker[worker][i];
            if self.loads[i] >= self.inst.capacity(i) || ln_w == f64::NEG_INFINITY {
                continue;
            }
            self.assignment[worker] = i;
            self.loads[i] += 1;
            self.masks[i] |= 1 << worker;
            self.visit(worker + 1, ln_workers + ln_w);
            self.masks[i] &= !(1 << worker);
            self.loads[i] -= 1;
        }
    }
}

/// `(1+ε)`-approximate matching: the flow algorithm when its guarantee is
/// already within `1+ε`, exhaustive search over all full matchings otherwise.
pub fn solve_two_sided_ptas(inst: &TwoSidedInstance, eps: f64) -> Result<PtasSolution> {
    if !(eps > 0.0) {
        return Err(Error::invalid("accuracy must be positive"));
    }
    let (n, m) = (inst.n(), inst.m());
    if eps >= 0.33 || m as f64 >= n as f64 / (eps * eps) {
        let sol = solve_two_sided(inst)?;
        return Ok(PtasSolution {
            nsw: sol.diagnostics.nsw,
            matching: sol.matching,
            branch: PtasBranch::Flow(sol.diagnostics),
        });
    }
    if m as f64 * libm::log(n as f64) > libm::log(PTAS_ENUMERATION_CAP) {
        return Err(Error::resource(alloc::format!(
            "{n}^{m} matchings exceed the enumeration cap"
        )));
    }
    if m > 64 {
        // n = 1: the only full matching sends everyone to firm 0
        let matching = Matching::new(vec![Some(0); m]);
        let matching = if matching.is_feasible(inst) {
            matching
        } else {
            fill_capacities(inst)
        };
        let ln = ln_nsw_two_sided(inst, &matching);
        return Ok(PtasSolution {
            nsw: if ln == f64::NEG_INFINITY { 0.0 } else { libm::exp(ln) },
            matching,
            branch: PtasBranch::Enumeration { leaves: 1 },
        });
    }
    let memo = if m <= DENSE_MEMO_WORKERS {
        Memo::Dense(vec![vec![f64::NAN; 1 << m]; n])
    } else {
        Memo::Sparse(vec![BTreeMap::new(); n])
    };
    let ln_worker = (0..m)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let w = inst.worker_value(j, i);
                    if is_zero(w) {
                        f64::NEG_INFINITY
                    } else {
                        rational::ln(w)
                    }
                })
                .collect()
        })
        .collect();
    let mut search = Search {
        inst,
        memo,
        ln_worker,
        assignment: vec![0; m],
        masks: vec![0; n],
        loads: vec![0; n],
        best: f64::NEG_INFINITY,
        best_assignment: None,
        leaves: 0,
    };
    search.visit(0, 0.0);
    let leaves = search.leaves;
    let (matching, ln) = match search.best_assignment {
        Some(a) => (
            Matching::new(a.into_iter().map(Some).collect()),
            search.best / (n + m) as f64,
        ),
        None => (fill_capacities(inst), f64::NEG_INFINITY),
    };
    Ok(PtasSolution {
        nsw: if ln == f64::NEG_INFINITY { 0.0 } else { libm::exp(ln) },
        matching,
        branch: PtasBranch::Enumeration { leaves },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{nsw_two_sided, Valuation};
    use crate::rational::{int, Rational};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn large_eps_uses_flow() {
        let inst = TwoSidedInstance::new(
            vec![Valuation::additive(ints(&[3, 1])).unwrap()],
            vec![ints(&[1]), ints(&[1])],
            vec![2],
        )
        .unwrap();
        let sol = solve_two_sided_ptas(&inst, 0.5).unwrap();
        assert!(matches!(sol.branch, PtasBranch::Flow(_)));
    }

    #[test]
    fn enumeration_finds_optimum() {
        let inst = TwoSidedInstance::new(
            vec![
                Valuation::additive(ints(&[5, 1, 2])).unwrap(),
                Valuation::additive(ints(&[1, 4, 3])).unwrap(),
            ],
            vec![ints(&[1, 2]), ints(&[3, 1]), ints(&[2, 2])],
            vec![2, 2],
        )
        .unwrap();
        let sol = solve_two_sided_ptas(&inst, 0.1).unwrap();
        assert!(matches!(sol.branch, PtasBranch::Enumeration { .. }));
        let mut best = 0.0f64;
        for code in 0..8usize {
            let m = Matching::new((0..3).map(|j| Some(code >> j & 1)).collect());
            if m.is_feasible(&inst) {
                best = best.max(nsw_two_sided(&inst, &m));
            }
        }
        assert!((sol.nsw - best).abs() < 1e-12);
        assert!((nsw_two_sided(&inst, &sol.matching) - best).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let firms = (0..10).map(|_| Valuation::additive(ints(&[1; 9])).unwrap()).collect();
        let inst = TwoSidedInstance::new(firms, vec![ints(&[1; 10]); 9], vec![1; 10]).unwrap();
        assert!(matches!(solve_two_sided_ptas(&inst, 0.01), Err(Error::ResourceLimit(_))));
    }
}
