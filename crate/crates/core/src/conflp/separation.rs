//! Approximate separation for the dual of the configuration LP.

use alloc::vec;
use alloc::vec::Vec;

use super::DualPoint;
use crate::error::{Error, Result};
use crate::model::{is_zero, WeightedInstance};
use crate::rational;
use crate::LOG_TOLERANCE;

/// Largest worker count the knapsack reconstruction supports.
pub const MAX_WORKERS: usize = 128;

/// A dual constraint violated with `(1+ε/2)` slack on the firm's value.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub firm: usize,
    pub set: Vec<usize>,
    /// `η ln(v(S)(1+ε/2)) + Σ ζ_j ln w_j(i) − Σ α_j − β_i`, positive.
    pub margin: f64,
}

/// `η_i ln(v_i(S)(1+ε/2)) + Σ_{j∈S} ζ_j ln w_j(i) − Σ_{j∈S} α_j − β_i`.
///
/// `-inf` when a factor with positive weight is zero.
pub fn relaxed_margin(inst: &WeightedInstance, dual: &DualPoint, eps: f64, firm: usize, set: &[usize]) -> Result<f64> {
    let market = inst.market();
    let eta = inst.firm_weight(firm);
    let mut margin = -dual.beta[firm];
    if eta > 0.0 {
        let v = market.firm_valuation(firm).value(set)?;
        if is_zero(&v) {
            return Ok(f64::NEG_INFINITY);
        }
        margin += eta * (rational::ln(&v) + libm::log1p(eps / 2.0));
    }
    for &j in set {
        let zeta = inst.worker_weight(j);
        if zeta > 0.0 {
            let w = market.worker_value(j, firm);
            if is_zero(w) {
                return Ok(f64::NEG_INFINITY);
            }
            margin += zeta * rational::ln(w);
        }
        margin -= dual.alpha[j];
    }
    Ok(margin)
}

/// `α_j − ζ_j ln w_j(i)`; `+inf` when `ζ_j > 0` and `w_j(i) = 0`.
fn adjusted_alpha(inst: &WeightedInstance, dual: &DualPoint, firm: usize, worker: usize) -> f64 {
    let zeta = inst.worker_weight(worker);
    if zeta == 0.0 {
        return dual.alpha[worker];
    }
    let w = inst.market().worker_value(worker, firm);
    if is_zero(w) {
        f64::INFINITY
    } else {
        dual.alpha[worker] - zeta * rational::ln(w)
    }
}

/// Min-cost knapsack table for one firm and one forced top worker `j⋆`.
///
/// `cost[x][y]` is the least `Σ α'_j` over sets `S ∋ j⋆` of workers valued
/// at most `v(j⋆)` with `|S| = x` and `Σ v̂_j = y`, where
/// `v̂_j = ⌊2m v(j) / (ε v(j⋆))⌋` and `α'_j = (α_j − ζ_j ln w_j(i)) / η_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackTable {
    pub firm: usize,
    pub top: usize,
    /// `v̂_j` per worker; `None` for workers excluded from the table.
    pub scaled: Vec<Option<u64>>,
    /// `α'_j` per worker.
    pub alpha: Vec<f64>,
    pub cost: Vec<Vec<f64>>,
    sets: Vec<Vec<u128>>,
}

impl KnapsackTable {
    /// Workers of the set attaining `cost[x][y]`, if the cell is reachable.
    pub fn set(&self, x: usize, y: usize) -> Option<Vec<usize>> {
        if self.cost[x][y] == f64::INFINITY {
            return None;
        }
        let mask = self.sets[x][y];
        Some((0..self.scaled.len()).filter(|&j| mask >> j & 1 == 1).collect())
    }

    pub fn max_size(&self) -> usize {
        self.cost.len() - 1
    }

    pub fn max_scaled(&self) -> usize {
        self.cost[0].len() - 1
    }
}

/// Builds the knapsack table of `firm` with `top` forced in. Requires
/// `η_i > 0`, `v_i(top) > 0` and a finite `α'_top`.
pub fn knapsack_table(
    inst: &WeightedInstance,
    dual: &DualPoint,
    eps: f64,
    firm: usize,
    top: usize,
) -> Result<KnapsackTable> {
    let market = inst.market();
    let m = market.m();
    if m > MAX_WORKERS {
        return Err(Error::resource(alloc::format!(
            "separation supports at most {MAX_WORKERS} workers"
        )));
    }
    let eta = inst.firm_weight(firm);
    if !(eta > 0.0) {
        return Err(Error::invalid("knapsack separation needs a positive firm weight"));
    }
    let valuation = market.firm_valuation(firm);
    let values: Vec<_> = (0..m).map(|j| valuation.singleton(j)).collect::<Result<_>>()?;
    let top_value = values[top].clone();
    if is_zero(&top_value) {
        return Err(Error::invalid("top worker must have positive value"));
    }
    let alpha: Vec<f64> = (0..m)
        .map(|j| adjusted_alpha(inst, dual, firm, j) / eta)
        .collect();
    if alpha[top] == f64::INFINITY {
        return Err(Error::invalid("top worker cannot join this firm"));
    }
    let scale = 2.0 * m as f64 / eps;
    let scaled: Vec<Option<u64>> = (0..m)
        .map(|j| {
            let eligible = j == top || (values[j] <= top_value && alpha[j] < f64::INFINITY);
            eligible.then(|| libm::floor(scale * rational::to_f64(&(&values[j] / &top_value))) as u64)
        })
        .collect();
    let max_size = market.capacity(firm).min(m);
    let max_scaled: u64 = scaled.iter().flatten().sum();
    let width = max_scaled as usize + 1;
    let mut cost = vec![vec![f64::INFINITY; width]; max_size + 1];
    let mut sets = vec![vec![0u128; width]; max_size + 1];
    let top_scaled = scaled[top].expect("top is eligible") as usize;
    cost[1][top_scaled] = alpha[top];
    sets[1][top_scaled] = 1u128 << top;
    for j in (0..m).filter(|&j| j != top) {
        let Some(s) = scaled[j] else { continue };
        let s = s as usize;
        for x in (1..max_size).rev() {
            for y in (0..width - s).rev() {
                let base = cost[x][y];
                if base == f64::INFINITY {
                    continue;
                }
                let next = base + alpha[j];
                if next < cost[x + 1][y + s] {
                    cost[x + 1][y + s] = next;
                    sets[x + 1][y + s] = sets[x][y] | 1u128 << j;
                }
            }
        }
    }
    Ok(KnapsackTable {
        firm,
        top,
        scaled,
        alpha,
        cost,
        sets,
    })
}

fn consider(best: &mut Option<Violation>, firm: usize, set: Vec<usize>, margin: f64) {
    if margin > LOG_TOLERANCE && best.as_ref().map_or(true, |b| margin > b.margin) {
        *best = Some(Violation { firm, set, margin });
    }
}

/// Searches every firm for a dual constraint violated with `(1+ε/2)` slack
/// and returns the one with the largest margin. `None` certifies that no
/// constraint is violated exactly (up to the knapsack rounding).
pub fn separation_oracle(inst: &WeightedInstance, dual: &DualPoint, eps: f64) -> Result<Option<Violation>> {
    if !(eps > 0.0) {
        return Err(Error::invalid("accuracy must be positive"));
    }
    let market = inst.market();
    let (n, m) = (market.n(), market.m());
    if dual.alpha.len() != m || dual.beta.len() != n {
        return Err(Error::invalid("dual point does not match the instance"));
    }
    let mut best = None;
    let slack = libm::log1p(eps / 2.0);
    for firm in 0..n {
        let eta = inst.firm_weight(firm);
        let cap = market.capacity(firm);
        if eta == 0.0 {
            let mut keys: Vec<(f64, usize)> = (0..m)
                .map(|j| (adjusted_alpha(inst, dual, firm, j), j))
                .filter(|(k, _)| *k < f64::INFINITY)
                .collect();
            keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut prefix = Vec::new();
            let mut margin = -dual.beta[firm];
            consider(&mut best, firm, prefix.clone(), margin);
            for &(key, j) in keys.iter().take(cap) {
                prefix.push(j);
                margin -= key;
                let mut set = prefix.clone();
                set.sort_unstable();
                consider(&mut best, firm, set, margin);
            }
            continue;
        }
        let valuation = market.firm_valuation(firm);
        let unit = eps / (2.0 * m as f64);
        for top in 0..m {
            let top_value = valuation.singleton(top)?;
            if is_zero(&top_value) || adjusted_alpha(inst, dual, firm, top) == f64::INFINITY {
                continue;
            }
            let ln_unit = libm::log(unit * rational::to_f64(&top_value));
            let table = knapsack_table(inst, dual, eps, firm, top)?;
            for x in 1..=table.max_size() {
                for y in 0..=table.max_scaled() {
                    let c = table.cost[x][y];
                    if c == f64::INFINITY {
                        continue;
                    }
                    // v(S) < (y + x)·unit·v(j⋆) bounds the achievable margin
                    let bound = ln_unit + libm::log((y + x) as f64) + slack - c - dual.beta[firm] / eta;
                    if eta * bound <= LOG_TOLERANCE {
                        continue;
                    }
                    let set = table.set(x, y).expect("reachable cell");
                    let margin = relaxed_margin(inst, dual, eps, firm, &set)?;
                    consider(&mut best, firm, set, margin);
                }
            }
        }
    }
    Ok(best)
}
