//! Swap-based local search over endowed valuations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{is_zero, OneSidedInstance};
use crate::rational::{self, Rational};
use crate::LOG_TOLERANCE;

/// A two-way exchange considered by the local search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Swap {
    /// `agent` gives `item` to `other` and receives `other_item` in return.
    Full {
        agent: usize,
        item: usize,
        other: usize,
        other_item: usize,
    },
    /// `agent` drops `item` and takes the free `replacement`.
    Partial {
        agent: usize,
        item: usize,
        replacement: usize,
    },
}

/// Local search bookkeeping over the item pool `J`.
///
/// Active agents (positive value for the pool) are scored by the endowed
/// valuation `v̄_i(S) = v_i(S) + v_i(ℓ(i))`, where `ℓ(i)` is the agent's
/// favourite pool item. Every agent holds exactly `c_i − 1` items, and swaps
/// keep it that way.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearchState {
    /// The pool `J`, sorted.
    pub items: Vec<usize>,
    pub active: Vec<bool>,
    pub favorite: Vec<Option<usize>>,
    /// `v_i(ℓ(i))`, zero for inactive agents.
    pub offsets: Vec<Rational>,
    /// Current bundles, each kept sorted.
    pub bundles: Vec<Vec<usize>>,
    /// Pool items held by nobody.
    pub unallocated: Vec<usize>,
    /// Per-swap accuracy `(1+ε)^{1/m} − 1`.
    pub eps_bar: f64,
    /// `ln(1+ε̂) = n·ln(1+ε̄)`: a swap must raise the log of the endowed
    /// product by more than this.
    pub ln_threshold: f64,
    pub swaps: usize,
    /// `⌈log_{1+ε̄} m⌉`.
    pub iterations_bound: u64,
    ln_current: Vec<f64>,
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    let pos = v.binary_search(&x).unwrap_or_else(|p| p);
    v.insert(pos, x);
}

fn remove_item(v: &mut Vec<usize>, x: usize) {
    let pos = v.binary_search(&x).expect("item present");
    v.remove(pos);
}

/// `set − out + inc` as a new sorted vector (set semantics).
pub(crate) fn exchange(set: &[usize], out: usize, inc: usize) -> Vec<usize> {
    let mut next: Vec<usize> = set.iter().copied().filter(|&x| x != out).collect();
    if let Err(pos) = next.binary_search(&inc) {
        next.insert(pos, inc);
    }
    next
}

/// Iteration bound `⌈m ln m / ln(1+ε)⌉ = ⌈log_{1+ε̄} m⌉`.
pub fn iterations_bound(items: usize, eps: f64) -> u64 {
    if items <= 1 {
        return 0;
    }
    let m = items as f64;
    libm::ceil(m * libm::log(m) / libm::log1p(eps)) as u64
}

impl LocalSearchState {
    /// Computes the active agents, favourites and a greedy round-robin start.
    pub fn new(inst: &OneSidedInstance, items: &[usize], eps: f64) -> Result<Self> {
        let mut state = Self::skeleton(inst, items, eps)?;
        let n = inst.n();
        let mut singles = vec![Vec::new(); n];
        for i in (0..n).filter(|&i| state.active[i]) {
            singles[i] = state
                .items
                .iter()
                .map(|&k| inst.valuation(i).singleton(k))
                .collect::<Result<Vec<_>>>()?;
        }
        let mut taken = vec![false; state.items.len()];
        loop {
            let mut progressed = false;
            for i in 0..n {
                if !state.active[i] || state.bundles[i].len() + 1 >= inst.capacity(i) {
                    continue;
                }
                let mut best: Option<usize> = None;
                for (pos, v) in singles[i].iter().enumerate() {
                    if !taken[pos] && best.map_or(true, |b| *v > singles[i][b]) {
                        best = Some(pos);
                    }
                }
                let pos = best.ok_or_else(|| {
                    Error::infeasible("item pool too small for the active agents' capacities")
                })?;
                taken[pos] = true;
                insert_sorted(&mut state.bundles[i], state.items[pos]);
                progressed = true;
            }
            if !progressed {
                break;
            }
        }
        state.unallocated = state
            .items
            .iter()
            .zip(&taken)
            .filter(|(_, t)| !**t)
            .map(|(k, _)| *k)
            .collect();
        state.refresh(inst)?;
        Ok(state)
    }

    /// Starts from caller-provided bundles for the active agents. Bundles of
    /// inactive agents must be empty.
    pub fn with_bundles(
        inst: &OneSidedInstance,
        items: &[usize],
        eps: f64,
        bundles: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let mut state = Self::skeleton(inst, items, eps)?;
        if bundles.len() != inst.n() {
            return Err(Error::invalid("need one starting bundle per agent"));
        }
        let mut used = vec![false; inst.m()];
        for (i, mut bundle) in bundles.into_iter().enumerate() {
            bundle.sort_unstable();
            let expected = if state.active[i] { inst.capacity(i) - 1 } else { 0 };
            if bundle.len() != expected {
                return Err(Error::invalid(alloc::format!(
                    "agent {i} must start with {expected} items"
                )));
            }
            for &k in &bundle {
                if state.items.binary_search(&k).is_err() || used[k] {
                    return Err(Error::invalid(alloc::format!(
                        "item {k} is not a free pool item"
                    )));
                }
                used[k] = true;
            }
            state.bundles[i] = bundle;
        }
        state.unallocated = state.items.iter().copied().filter(|&k| !used[k]).collect();
        state.refresh(inst)?;
        Ok(state)
    }

    fn skeleton(inst: &OneSidedInstance, items: &[usize], eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::invalid("accuracy must be positive"));
        }
        let mut pool = items.to_vec();
        pool.sort_unstable();
        pool.dedup();
        if pool.len() != items.len() {
            return Err(Error::invalid("item pool contains duplicates"));
        }
        let n = inst.n();
        let m = inst.m();
        let mut active = vec![false; n];
        let mut favorite = vec![None; n];
        let mut offsets = vec![rational::zero(); n];
        for i in 0..n {
            let valuation = inst.valuation(i);
            if is_zero(&valuation.value(&pool)?) {
                continue;
            }
            active[i] = true;
            let mut best: Option<(usize, Rational)> = None;
            for &k in &pool {
                let v = valuation.singleton(k)?;
                if best.as_ref().map_or(true, |(_, b)| v > *b) {
                    best = Some((k, v));
                }
            }
            let (k, v) = best.expect("nonempty pool");
            favorite[i] = Some(k);
            offsets[i] = v;
        }
        let needed: usize = (0..n)
            .filter(|&i| active[i])
            .map(|i| inst.capacity(i) - 1)
            .sum();
        if pool.len() < needed {
            return Err(Error::infeasible(alloc::format!(
                "pool of {} items cannot fill {needed} slots",
                pool.len()
            )));
        }
        let ln_step = if m == 0 { 0.0 } else { libm::log1p(eps) / m as f64 };
        Ok(LocalSearchState {
            items: pool,
            active,
            favorite,
            offsets,
            bundles: vec![Vec::new(); n],
            unallocated: Vec::new(),
            eps_bar: libm::expm1(ln_step),
            ln_threshold: n as f64 * ln_step,
            swaps: 0,
            iterations_bound: iterations_bound(m, eps),
            ln_current: vec![0.0; n],
        })
    }

    fn refresh(&mut self, inst: &OneSidedInstance) -> Result<()> {
        for i in 0..inst.n() {
            self.ln_current[i] = if self.active[i] {
                rational::ln(&self.endowed_value(inst, i, &self.bundles[i])?)
            } else {
                0.0
            };
        }
        Ok(())
    }

    /// `v̄_i(set)`.
    pub fn endowed_value(&self, inst: &OneSidedInstance, agent: usize, set: &[usize]) -> Result<Rational> {
        Ok(inst.valuation(agent).value(set)? + &self.offsets[agent])
    }

    fn ln_endowed(&self, inst: &OneSidedInstance, agent: usize, set: &[usize]) -> f64 {
        let v = self
            .endowed_value(inst, agent, set)
            .expect("local search sets stay in range");
        rational::ln(&v)
    }

    /// Owner of `item` among all agents, if any.
    pub fn owner(&self, item: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.binary_search(&item).is_ok())
    }

    /// Pool items not held by an active agent: the candidates for partial
    /// swaps.
    pub fn free_items(&self) -> Vec<usize> {
        self.items
            .iter()
            .copied()
            .filter(|&k| self.owner(k).map_or(true, |o| !self.active[o]))
            .collect()
    }

    /// Log of the endowed-product ratio the swap would produce.
    pub fn ln_gain(&self, inst: &OneSidedInstance, swap: Swap) -> f64 {
        match swap {
            Swap::Partial {
                agent,
                item,
                replacement,
            } => {
                let next = exchange(&self.bundles[agent], item, replacement);
                self.ln_endowed(inst, agent, &next) - self.ln_current[agent]
            }
            Swap::Full {
                agent,
                item,
                other,
                other_item,
            } => {
                let mine = exchange(&self.bundles[agent], item, other_item);
                let theirs = exchange(&self.bundles[other], other_item, item);
                self.ln_endowed(inst, agent, &mine) + self.ln_endowed(inst, other, &theirs)
                    - self.ln_current[agent]
                    - self.ln_current[other]
            }
        }
    }

    /// Whether the swap raises the endowed product by more than `1+ε̂`.
    /// Swaps involving inactive agents never qualify.
    pub fn swap_gain(&self, inst: &OneSidedInstance, swap: Swap) -> bool {
        let agents_active = match swap {
            Swap::Partial { agent, .. } => self.active[agent],
            Swap::Full { agent, other, .. } => {
                agent != other && self.active[agent] && self.active[other]
            }
        };
        agents_active && self.ln_gain(inst, swap) > self.ln_threshold + LOG_TOLERANCE
    }

    /// First improving swap: partial swaps first, then full swaps, each in
    /// lexicographic order.
    pub fn find_improving_swap(&self, inst: &OneSidedInstance) -> Option<Swap> {
        let n = inst.n();
        let free = self.free_items();
        for agent in (0..n).filter(|&i| self.active[i]) {
            for &item in &self.bundles[agent] {
                for &replacement in &free {
                    let swap = Swap::Partial {
                        agent,
                        item,
                        replacement,
                    };
                    if self.swap_gain(inst, swap) {
                        return Some(swap);
                    }
                }
            }
        }
        for agent in (0..n).filter(|&i| self.active[i]) {
            for &item in &self.bundles[agent] {
                for other in (agent + 1..n).filter(|&i| self.active[i]) {
                    for &other_item in &self.bundles[other] {
                        let swap = Swap::Full {
                            agent,
                            item,
                            other,
                            other_item,
                        };
                        if self.swap_gain(inst, swap) {
                            return Some(swap);
                        }
                    }
                }
            }
        }
        None
    }

    pub fn apply(&mut self, inst: &OneSidedInstance, swap: Swap) {
        match swap {
            Swap::Partial {
                agent,
                item,
                replacement,
            } => {
                remove_item(&mut self.bundles[agent], item);
                insert_sorted(&mut self.bundles[agent], replacement);
                if let Ok(pos) = self.unallocated.binary_search(&replacement) {
                    self.unallocated.remove(pos);
                } else if let Some(o) = self.owner_other_than(replacement, agent) {
                    remove_item(&mut self.bundles[o], replacement);
                }
                insert_sorted(&mut self.unallocated, item);
                self.ln_current[agent] = self.ln_endowed(inst, agent, &self.bundles[agent]);
            }
            Swap::Full {
                agent,
                item,
                other,
                other_item,
            } => {
                remove_item(&mut self.bundles[agent], item);
                insert_sorted(&mut self.bundles[agent], other_item);
                remove_item(&mut self.bundles[other], other_item);
                insert_sorted(&mut self.bundles[other], item);
                self.ln_current[agent] = self.ln_endowed(inst, agent, &self.bundles[agent]);
                self.ln_current[other] = self.ln_endowed(inst, other, &self.bundles[other]);
            }
        }
        self.swaps += 1;
    }

    fn owner_other_than(&self, item: usize, agent: usize) -> Option<usize> {
        self.bundles
            .iter()
            .enumerate()
            .find(|(i, b)| *i != agent && b.binary_search(&item).is_ok())
            .map(|(i, _)| i)
    }

    /// Applies improving swaps until none is left.
    pub fn run(&mut self, inst: &OneSidedInstance) {
        while let Some(swap) = self.find_improving_swap(inst) {
            self.apply(inst, swap);
        }
    }

    /// Hands free items to inactive agents, in index order, until each
    /// holds `c_i − 1` items.
    pub fn finish(&mut self, inst: &OneSidedInstance) -> Result<()> {
        for i in 0..inst.n() {
            if self.active[i] {
                continue;
            }
            while self.bundles[i].len() + 1 < inst.capacity(i) {
                if self.unallocated.is_empty() {
                    return Err(Error::infeasible("item pool exhausted while filling inactive agents"));
                }
                let k = self.unallocated.remove(0);
                insert_sorted(&mut self.bundles[i], k);
            }
        }
        Ok(())
    }

    /// `ln Π_{i active} v̄_i(R_i)`.
    pub fn ln_endowed_product(&self) -> f64 {
        (0..self.active.len())
            .filter(|&i| self.active[i])
            .map(|i| self.ln_current[i])
            .sum()
    }
}

/// Runs the local search on the pool `items`: greedy start, improving swaps
/// to a local optimum, then filling the inactive agents.
pub fn local_search(inst: &OneSidedInstance, items: &[usize], eps: f64) -> Result<LocalSearchState> {
    let mut state = LocalSearchState::new(inst, items, eps)?;
    state.run(inst);
    state.finish(inst)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Valuation;
    use crate::rational::int;

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
    fn single_partial_swap() {
        // items a=0 (value 2), b=1 (value 1); favourite a gives offset 2.
        // R={b}: v̄ = 3, R={a}: v̄ = 4; 4/3 > 1.1^{1/2}
        let inst = additive(&[&[2, 1]], &[2]);
        let mut state = LocalSearchState::with_bundles(&inst, &[0, 1], 0.1, vec![vec![1]]).unwrap();
        let swap = Swap::Partial {
            agent: 0,
            item: 1,
            replacement: 0,
        };
        assert!(state.swap_gain(&inst, swap));
        assert!((state.ln_gain(&inst, swap) - libm::log(4.0 / 3.0)).abs() < 1e-12);
        assert!((libm::exp(state.ln_threshold) - libm::sqrt(1.1)).abs() < 1e-12);
        state.run(&inst);
        assert_eq!(state.bundles, vec![vec![0]]);
        assert_eq!(state.swaps, 1);
        assert_eq!(state.unallocated, vec![1]);
    }

    #[test]
    fn full_swap_uncrosses() {
        let inst = additive(&[&[1, 0], &[0, 1]], &[2, 2]);
        let mut state =
            LocalSearchState::with_bundles(&inst, &[0, 1], 0.1, vec![vec![1], vec![0]]).unwrap();
        let swap = state.find_improving_swap(&inst).unwrap();
        assert_eq!(
            swap,
            Swap::Full {
                agent: 0,
                item: 1,
                other: 1,
                other_item: 0
            }
        );
        state.apply(&inst, swap);
        assert_eq!(state.bundles, vec![vec![0], vec![1]]);
        assert!(state.find_improving_swap(&inst).is_none());
    }

    #[test]
    fn unit_capacities_do_nothing() {
        let inst = additive(&[&[1, 2, 3], &[3, 2, 1]], &[1, 1]);
        let state = local_search(&inst, &[0, 1, 2], 0.1).unwrap();
        assert_eq!(state.bundles, vec![Vec::<usize>::new(), Vec::new()]);
        assert_eq!(state.swaps, 0);
    }

    #[test]
    fn identical_item_swap_has_no_gain() {
        let inst = additive(&[&[2, 1, 1]], &[2]);
        let state = LocalSearchState::with_bundles(&inst, &[0, 1, 2], 0.1, vec![vec![1]]).unwrap();
        let same = Swap::Partial {
            agent: 0,
            item: 1,
            replacement: 1,
        };
        assert!(!state.swap_gain(&inst, same));
        // items 1 and 2 are worth the same: ratio exactly 1
        let equal = Swap::Partial {
            agent: 0,
            item: 1,
            replacement: 2,
        };
        assert!(!state.swap_gain(&inst, equal));
    }

    #[test]
    fn threshold_boundary_is_not_improving() {
        // one agent, m = 2 items, ε chosen so that 1+ε̂ = (1+ε)^{1/2} = 4/3 exactly
        let inst = additive(&[&[2, 1]], &[2]);
        let eps = 16.0 / 9.0 - 1.0;
        let state = LocalSearchState::with_bundles(&inst, &[0, 1], eps, vec![vec![1]]).unwrap();
        let swap = Swap::Partial {
            agent: 0,
            item: 1,
            replacement: 0,
        };
        assert!((state.ln_gain(&inst, swap) - state.ln_threshold).abs() < 1e-12);
        assert!(!state.swap_gain(&inst, swap));
    }

    #[test]
    fn inactive_agents_are_filled_in_index_order() {
        let inst = additive(&[&[0, 0, 0, 0], &[1, 1, 1, 1]], &[3, 2]);
        let state = local_search(&inst, &[0, 1, 2, 3], 0.1).unwrap();
        assert!(!state.active[0]);
        assert_eq!(state.bundles[1].len(), 1);
        assert_eq!(state.bundles[0].len(), 2);
        assert!(state.bundles[0].iter().all(|k| !state.bundles[1].contains(k)));
    }

    #[test]
    fn pool_too_small_is_infeasible() {
        let inst = additive(&[&[1, 1]], &[4]);
        assert!(matches!(local_search(&inst, &[0, 1], 0.1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn bound_formula() {
        assert_eq!(iterations_bound(1, 0.1), 0);
        let m = 5.0f64;
        let expected = libm::ceil(libm::log(m) / libm::log(libm::pow(1.1, 1.0 / m)));
        assert_eq!(iterations_bound(5, 0.1), expected as u64);
    }
}
