//! Exhaustive optimizers and independent re-checks of solver outputs.
//!
//! Nothing here calls into the solver modules; only the shared data types
//! are used.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::conflp::DualPoint;
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::model::{Allocation, Matching, OneSidedInstance, TwoSidedInstance, WeightedInstance};
use crate::onesided::LocalSearchState;
use crate::rational::{self, Rational};

/// Default cap on enumerated assignments.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Largest item or worker count the exact solvers accept.
pub const MAX_ORACLE_ITEMS: usize = 20;

/// Relative closeness below which log values are compared exactly.
const LN_TIE: f64 = 1e-6;

/// Counts enumerated assignments and fails once the cap is passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_states: u64,
    pub visited: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self::new(DEFAULT_BUDGET)
    }
}

impl EnumerationBudget {
    pub fn new(max_states: u64) -> Self {
        EnumerationBudget {
            max_states,
            visited: 0,
        }
    }

    pub fn charge(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > self.max_states {
            return Err(Error::resource(alloc::format!(
                "enumeration exceeded {} states",
                self.max_states
            )));
        }
        Ok(())
    }
}

/// Order in which each item's (or worker's) choices are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    /// Leave out first, then owners by increasing index.
    #[default]
    Forward,
    /// Owners by decreasing index, leave out last.
    Reverse,
}

/// Lazily filled values of `v_i(mask)`.
struct ValueTable<'a> {
    valuations: &'a [crate::model::Valuation],
    items: usize,
    ln: Vec<f64>,
    exact: Vec<Option<Rational>>,
}

impl<'a> ValueTable<'a> {
    fn new(valuations: &'a [crate::model::Valuation], items: usize) -> Self {
        let size = valuations.len() << items;
        ValueTable {
            valuations,
            items,
            ln: vec![f64::NAN; size],
            exact: vec![None; size],
        }
    }

    fn slot(&self, agent: usize, mask: usize) -> usize {
        (agent << self.items) | mask
    }

    fn exact(&mut self, agent: usize, mask: usize) -> Rational {
        let slot = self.slot(agent, mask);
        if self.exact[slot].is_none() {
            let set: Vec<usize> = (0..self.items).filter(|k| mask >> k & 1 == 1).collect();
            let v = self.valuations[agent]
                .value(&set)
                .expect("items are in range");
            self.exact[slot] = Some(v);
        }
        self.exact[slot].clone().expect("filled above")
    }

    fn ln(&mut self, agent: usize, mask: usize) -> f64 {
        let slot = self.slot(agent, mask);
        if self.ln[slot].is_nan() {
            let v = self.exact(agent, mask);
            self.ln[slot] = rational::ln(&v);
        }
        self.ln[slot]
    }
}

fn check_size(items: usize) -> Result<()> {
    if items > MAX_ORACLE_ITEMS {
        return Err(Error::resource(alloc::format!(
            "exact solvers handle at most {MAX_ORACLE_ITEMS} items"
        )));
    }
    Ok(())
}

/// Optimal one-sided allocation with its NSW.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOneSided {
    pub allocation: Allocation,
    /// `Π v_i(A_i)`.
    pub product: Rational,
    pub ln_nsw: f64,
    pub nsw: f64,
    pub states: u64,
}

struct OneSidedSearch<'a> {
    inst: &'a OneSidedInstance,
    table: ValueTable<'a>,
    budget: EnumerationBudget,
    order: Order,
    masks: Vec<usize>,
    loads: Vec<usize>,
    left_out: usize,
    max_left_out: usize,
    best: Option<(f64, Rational, Vec<usize>)>,
}

impl OneSidedSearch<'_> {
    fn choices(&self) -> Vec<Option<usize>> {
        let n = self.inst.n();
        let mut c: Vec<Option<usize>> = core::iter::once(None).chain((0..n).map(Some)).collect();
        if self.order == Order::Reverse {
            c.reverse();
        }
        c
    }

    fn leaf(&mut self) -> Result<()> {
        self.budget.charge()?;
        let n = self.inst.n();
        let mut ln = 0.0;
        for i in 0..n {
            ln += self.table.ln(i, self.masks[i]);
        }
        let replace = match &self.best {
            None => true,
            Some((best_ln, best_product, _)) => {
                if ln == f64::NEG_INFINITY {
                    false
                } else if *best_ln == f64::NEG_INFINITY || ln > best_ln + LN_TIE {
                    true
                } else if ln < best_ln - LN_TIE {
                    false
                } else {
                    let mut product = rational::one();
                    for i in 0..n {
                        product *= self.table.exact(i, self.masks[i]);
                    }
                    product > *best_product
                }
            }
        };
        if replace {
            let mut product = rational::one();
            for i in 0..n {
                product *= self.table.exact(i, self.masks[i]);
            }
            self.best = Some((ln, product, self.masks.clone()));
        }
        Ok(())
    }

    fn visit(&mut self, item: usize) -> Result<()> {
        if item == self.inst.m() {
            return self.leaf();
        }
        for choice in self.choices() {
            match choice {
                None => {
                    if self.left_out == self.max_left_out {
                        continue;
                    }
                    self.left_out += 1;
                    self.visit(item + 1)?;
                    self.left_out -= 1;
                }
                Some(i) => {
                    if self.loads[i] == self.inst.capacity(i) {
                        continue;
                    }
                    self.loads[i] += 1;
                    self.masks[i] |= 1 << item;
                    self.visit(item + 1)?;
                    self.masks[i] &= !(1 << item);
                    self.loads[i] -= 1;
                }
            }
        }
        Ok(())
    }
}

/// Exhaustive maximum-NSW allocation.
///
/// Values are monotone, so some optimum leaves out only the items that do
/// not fit: at most `max(0, m − Σ c_i)` items are left out.
pub fn exact_one_sided(inst: &OneSidedInstance, budget: EnumerationBudget) -> Result<ExactOneSided> {
    exact_one_sided_ordered(inst, budget, Order::Forward)
}

pub fn exact_one_sided_ordered(
    inst: &OneSidedInstance,
    budget: EnumerationBudget,
    order: Order,
) -> Result<ExactOneSided> {
    let m = inst.m();
    check_size(m)?;
    let n = inst.n();
    let mut search = OneSidedSearch {
        inst,
        table: ValueTable::new(inst.valuations(), m),
        budget,
        order,
        masks: vec![0; n],
        loads: vec![0; n],
        left_out: 0,
        max_left_out: m.saturating_sub(inst.total_capacity()),
        best: None,
    };
    search.visit(0)?;
    let (ln, product, masks) = search.best.expect("some allocation fits");
    let bundles = masks
        .iter()
        .map(|&mask| (0..m).filter(|k| mask >> k & 1 == 1).collect())
        .collect();
    let ln_nsw = ln / n as f64;
    Ok(ExactOneSided {
        allocation: Allocation::new(bundles),
        nsw: if product.is_zero() { 0.0 } else { libm::exp(ln_nsw) },
        ln_nsw,
        product,
        states: search.budget.visited,
    })
}

/// Optimal two-sided matching.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTwoSided {
    pub matching: Matching,
    /// `Π v_i(μ_i) Π w_j(μ_j)`.
    pub product: Rational,
    pub ln_nsw: f64,
    pub nsw: f64,
    pub states: u64,
}

/// Visits every capacity-feasible assignment of all workers to firms.
fn for_each_full_assignment(
    inst: &TwoSidedInstance,
    budget: &mut EnumerationBudget,
    order: Order,
    mut leaf: impl FnMut(&[usize], &[usize]) -> Result<()>,
) -> Result<()> {
    fn go(
        inst: &TwoSidedInstance,
        budget: &mut EnumerationBudget,
        order: Order,
        worker: usize,
        firm_of: &mut Vec<usize>,
        masks: &mut Vec<usize>,
        loads: &mut Vec<usize>,
        leaf: &mut dyn FnMut(&[usize], &[usize]) -> Result<()>,
    ) -> Result<()> {
        let n = inst.n();
        if worker == inst.m() {
            budget.charge()?;
            return leaf(firm_of, masks);
        }
        for step in 0..n {
            let i = if order == Order::Forward { step } else { n - 1 - step };
            if loads[i] == inst.capacity(i) {
                continue;
            }
            loads[i] += 1;
            masks[i] |= 1 << worker;
            firm_of[worker] = i;
            go(inst, budget, order, worker + 1, firm_of, masks, loads, leaf)?;
            masks[i] &= !(1 << worker);
            loads[i] -= 1;
        }
        Ok(())
    }
    let (n, m) = (inst.n(), inst.m());
    go(
        inst,
        budget,
        order,
        0,
        &mut vec![0; m],
        &mut vec![0; n],
        &mut vec![0; n],
        &mut leaf,
    )
}

fn worker_ln(inst: &TwoSidedInstance) -> Vec<Vec<f64>> {
    (0..inst.m())
        .map(|j| (0..inst.n()).map(|i| rational::ln(inst.worker_value(j, i))).collect())
        .collect()
}

/// Exhaustive maximum-NSW matching over assignments of every worker.
pub fn exact_two_sided(inst: &TwoSidedInstance, budget: EnumerationBudget) -> Result<ExactTwoSided> {
    exact_two_sided_ordered(inst, budget, Order::Forward)
}

pub fn exact_two_sided_ordered(
    inst: &TwoSidedInstance,
    mut budget: EnumerationBudget,
    order: Order,
) -> Result<ExactTwoSided> {
    let (n, m) = (inst.n(), inst.m());
    check_size(m)?;
    let mut table = ValueTable::new(inst.firm_valuations(), m);
    let w_ln = worker_ln(inst);
    let mut best: Option<(f64, Rational, Vec<usize>)> = None;
    let exact_product = |table: &mut ValueTable, firm_of: &[usize], masks: &[usize]| {
        let mut p = rational::one();
        for (i, &mask) in masks.iter().enumerate() {
            p *= table.exact(i, mask);
        }
        for (j, &i) in firm_of.iter().enumerate() {
            p *= inst.worker_value(j, i);
        }
        p
    };
    for_each_full_assignment(inst, &mut budget, order, |firm_of, masks| {
        let mut ln: f64 = (0..n).map(|i| table.ln(i, masks[i])).sum();
        ln += firm_of.iter().enumerate().map(|(j, &i)| w_ln[j][i]).sum::<f64>();
        let replace = match &best {
            None => true,
            Some((best_ln, best_p, _)) => {
                if ln == f64::NEG_INFINITY {
                    false
                } else if *best_ln == f64::NEG_INFINITY || ln > best_ln + LN_TIE {
                    true
                } else if ln < best_ln - LN_TIE {
                    false
                } else {
                    exact_product(&mut table, firm_of, masks) > *best_p
                }
            }
        };
        if replace {
            let p = exact_product(&mut table, firm_of, masks);
            best = Some((ln, p, firm_of.to_vec()));
        }
        Ok(())
    })?;
    let (ln, product, firm_of) = best.ok_or_else(|| Error::infeasible("no full assignment fits"))?;
    let ln_nsw = ln / (n + m) as f64;
    Ok(ExactTwoSided {
        matching: Matching::new(firm_of.into_iter().map(Some).collect()),
        nsw: if product.is_zero() { 0.0 } else { libm::exp(ln_nsw) },
        ln_nsw,
        product,
        states: budget.visited,
    })
}

/// Optimal weighted matching.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactWeighted {
    pub matching: Matching,
    /// `Σ η_i ln v_i(μ_i) + Σ ζ_j ln w_j(μ_j)`.
    pub ln_nsw: f64,
    pub nsw: f64,
    pub states: u64,
}

/// Exhaustive maximum weighted NSW, compared in the log domain with a
/// `1e-12` tie tolerance (the first assignment found wins ties).
pub fn exact_weighted(inst: &WeightedInstance, budget: EnumerationBudget) -> Result<ExactWeighted> {
    exact_weighted_ordered(inst, budget, Order::Forward)
}

pub fn exact_weighted_ordered(
    inst: &WeightedInstance,
    mut budget: EnumerationBudget,
    order: Order,
) -> Result<ExactWeighted> {
    let market = inst.market();
    let (n, m) = (market.n(), market.m());
    check_size(m)?;
    let eta = inst.firm_weights_f64();
    let zeta = inst.worker_weights_f64();
    let mut table = ValueTable::new(market.firm_valuations(), m);
    let w_ln = worker_ln(market);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_full_assignment(market, &mut budget, order, |firm_of, masks| {
        let mut ln = 0.0;
        for i in (0..n).filter(|&i| eta[i] > 0.0) {
            ln += eta[i] * table.ln(i, masks[i]);
        }
        for (j, &i) in firm_of.iter().enumerate() {
            if zeta[j] > 0.0 {
                ln += zeta[j] * w_ln[j][i];
            }
        }
        if ln.is_nan() {
            ln = f64::NEG_INFINITY;
        }
        if best.as_ref().map_or(true, |(b, _)| ln > b + 1e-12) {
            best = Some((ln, firm_of.to_vec()));
        }
        Ok(())
    })?;
    let (ln, firm_of) = best.ok_or_else(|| Error::infeasible("no full assignment fits"))?;
    Ok(ExactWeighted {
        matching: Matching::new(firm_of.into_iter().map(Some).collect()),
        nsw: if ln == f64::NEG_INFINITY { 0.0 } else { libm::exp(ln) },
        ln_nsw: ln,
        states: budget.visited,
    })
}

/// An improving swap found by [`verify_no_improving_swap`].
#[derive(Debug, Clone, PartialEq)]
pub struct SwapWitness {
    pub agent: usize,
    pub item: usize,
    /// Partner agent of a full swap; `None` for a partial swap.
    pub other: Option<usize>,
    pub other_item: usize,
    /// `ln` of the endowed-product ratio.
    pub ln_ratio: f64,
}

/// Re-derives the active agents and endowments of a finished local search
/// and checks that no full or partial swap raises the endowed product by
/// more than `(1+ε)^{n/m}`.
pub fn verify_no_improving_swap(
    inst: &OneSidedInstance,
    state: &LocalSearchState,
    eps: f64,
) -> core::result::Result<(), SwapWitness> {
    let n = inst.n();
    let pool = &state.items;
    let value = |i: usize, set: &[usize]| inst.valuation(i).value(set).expect("pool items in range");
    let active: Vec<bool> = (0..n).map(|i| !value(i, pool).is_zero()).collect();
    let endowment: Vec<Rational> = (0..n)
        .map(|i| {
            pool.iter()
                .map(|&k| value(i, &[k]))
                .max()
                .unwrap_or_else(rational::zero)
        })
        .collect();
    let endowed = |i: usize, set: &[usize]| value(i, set) + &endowment[i];
    let threshold = n as f64 * libm::log1p(eps) / inst.m() as f64 + crate::LOG_TOLERANCE;
    let replace = |set: &[usize], out: usize, inc: usize| -> Vec<usize> {
        let mut s: Vec<usize> = set.iter().copied().filter(|&x| x != out).collect();
        if !s.contains(&inc) {
            s.push(inc);
        }
        s
    };
    let owned_by_active = |k: usize| {
        (0..n).any(|i| active[i] && state.bundles[i].contains(&k))
    };
    let free: Vec<usize> = pool.iter().copied().filter(|&k| !owned_by_active(k)).collect();
    for i in (0..n).filter(|&i| active[i]) {
        let current = endowed(i, &state.bundles[i]);
        for &j in &state.bundles[i] {
            for &k in &free {
                let ratio = endowed(i, &replace(&state.bundles[i], j, k)) / &current;
                let ln_ratio = rational::ln(&ratio);
                if ln_ratio > threshold {
                    return Err(SwapWitness {
                        agent: i,
                        item: j,
                        other: None,
                        other_item: k,
                        ln_ratio,
                    });
                }
            }
        }
    }
    for i in (0..n).filter(|&i| active[i]) {
        for i2 in (i + 1..n).filter(|&x| active[x]) {
            let before = endowed(i, &state.bundles[i]) * endowed(i2, &state.bundles[i2]);
            for &j in &state.bundles[i] {
                for &k in &state.bundles[i2] {
                    let after = endowed(i, &replace(&state.bundles[i], j, k))
                        * endowed(i2, &replace(&state.bundles[i2], k, j));
                    let ln_ratio = rational::ln(&(after / &before));
                    if ln_ratio > threshold {
                        return Err(SwapWitness {
                            agent: i,
                            item: j,
                            other: Some(i2),
                            other_item: k,
                            ln_ratio,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Why a flow failed verification.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowWitness {
    Bounds { edge: usize },
    Conservation { node: usize },
    /// Residual cycle as `(edge, forward)` pairs, with its total cost.
    NegativeCycle { arcs: Vec<(usize, bool)>, cost: f64 },
}

/// Residual cycles must cost at least this much.
const CYCLE_TOLERANCE: f64 = 1e-7;

/// Checks bounds, conservation, and that the residual graph has no cycle of
/// cost below `-1e-7` (Bellman–Ford from a virtual root).
pub fn verify_flow_optimal(net: &FlowNetwork, flow: &[i64]) -> core::result::Result<(), FlowWitness> {
    let mut balance = net.supply.clone();
    for (idx, e) in net.edges.iter().enumerate() {
        let f = flow[idx];
        if f < e.lower || f > e.upper {
            return Err(FlowWitness::Bounds { edge: idx });
        }
        balance[e.from] -= f;
        balance[e.to] += f;
    }
    if let Some(node) = balance.iter().position(|&b| b != 0) {
        return Err(FlowWitness::Conservation { node });
    }
    // (from, to, cost, edge, forward)
    let mut arcs = Vec::new();
    for (idx, e) in net.edges.iter().enumerate() {
        if flow[idx] < e.upper {
            arcs.push((e.from, e.to, e.cost, idx, true));
        }
        if flow[idx] > e.lower {
            arcs.push((e.to, e.from, -e.cost, idx, false));
        }
    }
    let v = net.nodes;
    let step = CYCLE_TOLERANCE / (v as f64 + 1.0);
    let mut dist = vec![0.0f64; v];
    let mut parent: Vec<Option<usize>> = vec![None; v];
    let mut last = None;
    for _ in 0..=v {
        last = None;
        for (a, &(from, to, cost, _, _)) in arcs.iter().enumerate() {
            if dist[from] + cost < dist[to] - step {
                dist[to] = dist[from] + cost;
                parent[to] = Some(a);
                last = Some(to);
            }
        }
        if last.is_none() {
            return Ok(());
        }
    }
    let mut node = last.expect("relaxed in the final round");
    for _ in 0..v {
        node = arcs[parent[node].expect("relaxed nodes have parents")].0;
    }
    let start = node;
    let mut cycle = Vec::new();
    let mut cost = 0.0;
    loop {
        let a = parent[node].expect("cycle nodes have parents");
        let (from, _, c, idx, forward) = arcs[a];
        cycle.push((idx, forward));
        cost += c;
        node = from;
        if node == start {
            break;
        }
    }
    cycle.reverse();
    if cost < -CYCLE_TOLERANCE {
        Err(FlowWitness::NegativeCycle { arcs: cycle, cost })
    } else {
        Ok(())
    }
}

/// A dual constraint violated beyond the allowed slack.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWitness {
    pub firm: usize,
    pub set: Vec<usize>,
    /// `coef(i,S) − Σ α_j − β_i − η_i ln(1+ε/2)`.
    pub excess: f64,
}

/// Checks `Σ_{j∈S} α_j + β_i ≥ η_i ln(v_i(S)(1+ε/2)) − η_i ln(1+ε/2) ... ` in
/// the form `coef(i,S) − Σ α − β ≤ η_i ln(1+ε/2)` for every firm and every
/// `S` with `|S| ≤ c_i`, by enumeration. `ε = 0` checks exact feasibility.
pub fn verify_dual_feasible(
    inst: &WeightedInstance,
    dual: &DualPoint,
    eps: f64,
) -> core::result::Result<(), DualWitness> {
    let market = inst.market();
    let (n, m) = (market.n(), market.m());
    assert!(m <= MAX_ORACLE_ITEMS, "dual check enumerates all worker subsets");
    for i in 0..n {
        let eta = rational::to_f64(&inst.firm_weights()[i]);
        let slack = eta * libm::log1p(eps / 2.0);
        for mask in 0usize..1 << m {
            if mask.count_ones() as usize > market.capacity(i) {
                continue;
            }
            let set: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
            let mut coef = 0.0;
            if eta > 0.0 {
                let v = market.firm_valuation(i).value(&set).expect("workers in range");
                if v.is_zero() {
                    continue;
                }
                coef += eta * rational::ln(&v);
            }
            let mut feasible_column = true;
            for &j in &set {
                let zeta = rational::to_f64(&inst.worker_weights()[j]);
                if zeta > 0.0 {
                    let w = market.worker_value(j, i);
                    if w.is_zero() {
                        feasible_column = false;
                        break;
                    }
                    coef += zeta * rational::ln(w);
                }
            }
            if !feasible_column {
                continue;
            }
            let paid: f64 = set.iter().map(|&j| dual.alpha[j]).sum::<f64>() + dual.beta[i];
            let excess = coef - paid - slack;
            if excess > crate::LOG_TOLERANCE {
                return Err(DualWitness {
                    firm: i,
                    set,
                    excess,
                });
            }
        }
    }
    Ok(())
}
