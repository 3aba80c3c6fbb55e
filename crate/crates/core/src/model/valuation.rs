use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};

/// Largest item count supported by [`ValuationKind::Table`].
pub const MAX_TABLE_ITEMS: usize = 16;

/// Largest set searched exhaustively by [`Valuation::best_subset_value`].
pub const MAX_EXHAUSTIVE_ITEMS: usize = 20;

/// How a valuation computes the value of a set of items.
#[derive(Debug, Clone, PartialEq)]
pub enum ValuationKind {
    /// Sum of per-item values.
    Additive { values: Vec<Rational> },
    /// Sum of the `cap` largest per-item values in the set.
    Capped { values: Vec<Rational>, cap: usize },
    /// Each item covers a set of elements; the value is the total weight of
    /// the covered elements.
    Coverage {
        weights: Vec<Rational>,
        sets: Vec<Vec<usize>>,
    },
    /// One value per subset, indexed by bitmask.
    Table { items: usize, values: Vec<Rational> },
}

impl ValuationKind {
    /// Number of items the kind itself describes.
    pub fn items(&self) -> usize {
        match self {
            ValuationKind::Additive { values } | ValuationKind::Capped { values, .. } => {
                values.len()
            }
            ValuationKind::Coverage { sets, .. } => sets.len(),
            ValuationKind::Table { items, .. } => *items,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ValuationKind::Additive { .. } => "additive",
            ValuationKind::Capped { .. } => "capped",
            ValuationKind::Coverage { .. } => "coverage",
            ValuationKind::Table { .. } => "table",
        }
    }

    /// Value of a set of distinct, in-range items of the kind.
    fn eval(&self, set: &[usize]) -> Rational {
        match self {
            ValuationKind::Additive { values } => set.iter().map(|&j| &values[j]).sum(),
            ValuationKind::Capped { values, cap } => {
                let mut picked: Vec<&Rational> = set.iter().map(|&j| &values[j]).collect();
                picked.sort_unstable_by(|a, b| b.cmp(a));
                picked.into_iter().take(*cap).sum()
            }
            ValuationKind::Coverage { weights, sets } => {
                let mut covered = alloc::vec![false; weights.len()];
                for &j in set {
                    for &e in &sets[j] {
                        covered[e] = true;
                    }
                }
                weights
                    .iter()
                    .zip(covered)
                    .filter(|(_, c)| *c)
                    .map(|(w, _)| w)
                    .sum()
            }
            ValuationKind::Table { values, .. } => values[mask_of(set)].clone(),
        }
    }
}

pub(crate) fn mask_of(set: &[usize]) -> usize {
    set.iter().fold(0usize, |m, &j| m | (1 << j))
}

pub(crate) fn items_of(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize)
        .filter(|&j| mask >> j & 1 == 1)
        .collect()
}

/// A monotone, normalized valuation over `universe` items, answering value
/// queries with exact rationals and counting them.
///
/// Items at or beyond [`ValuationKind::items`] (but below `universe`) are
/// zero-value padding items: they never change the value of a set.
#[derive(Debug)]
pub struct Valuation {
    kind: ValuationKind,
    universe: usize,
    queries: AtomicU64,
}

impl Clone for Valuation {
    fn clone(&self) -> Self {
        Valuation {
            kind: self.kind.clone(),
            universe: self.universe,
            queries: AtomicU64::new(self.queries()),
        }
    }
}

impl PartialEq for Valuation {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.universe == other.universe
    }
}

fn check_nonnegative(values: &[Rational], what: &str) -> Result<()> {
    if values.iter().any(|v| v.is_negative()) {
        return Err(Error::invalid(alloc::format!("{what} must be nonnegative")));
    }
    Ok(())
}

impl Valuation {
    pub fn new(kind: ValuationKind) -> Result<Self> {
        match &kind {
            ValuationKind::Additive { values } => check_nonnegative(values, "item values")?,
            ValuationKind::Capped { values, cap } => {
                check_nonnegative(values, "item values")?;
                if *cap < 1 {
                    return Err(Error::invalid("cap must be at least 1"));
                }
            }
            ValuationKind::Coverage { weights, sets } => {
                check_nonnegative(weights, "element weights")?;
                for s in sets {
                    if let Some(&e) = s.iter().find(|&&e| e >= weights.len()) {
                        return Err(Error::invalid(alloc::format!(
                            "coverage element {e} outside universe of {}",
                            weights.len()
                        )));
                    }
                }
            }
            ValuationKind::Table { items, values } => {
                if *items > MAX_TABLE_ITEMS {
                    return Err(Error::invalid(alloc::format!(
                        "table valuations support at most {MAX_TABLE_ITEMS} items"
                    )));
                }
                if values.len() != 1 << items {
                    return Err(Error::invalid(alloc::format!(
                        "table over {items} items needs {} entries, got {}",
                        1usize << items,
                        values.len()
                    )));
                }
                check_nonnegative(values, "table values")?;
                if !values[0].is_zero() {
                    return Err(Error::invalid("table value of the empty set must be 0"));
                }
                for mask in 0..values.len() {
                    for j in 0..*items {
                        if mask >> j & 1 == 0 && values[mask] > values[mask | 1 << j] {
                            return Err(Error::invalid(alloc::format!(
                                "table is not monotone at subset {mask:#b} plus item {j}"
                            )));
                        }
                    }
                }
            }
        }
        let universe = kind.items();
        Ok(Valuation {
            kind,
            universe,
            queries: AtomicU64::new(0),
        })
    }

    pub fn additive(values: Vec<Rational>) -> Result<Self> {
        Self::new(ValuationKind::Additive { values })
    }

    pub fn capped(values: Vec<Rational>, cap: usize) -> Result<Self> {
        Self::new(ValuationKind::Capped { values, cap })
    }

    pub fn coverage(weights: Vec<Rational>, sets: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(ValuationKind::Coverage { weights, sets })
    }

    pub fn table(items: usize, values: Vec<Rational>) -> Result<Self> {
        Self::new(ValuationKind::Table { items, values })
    }

    /// Builds a table valuation from a function of the subset bitmask.
    pub fn table_from_fn(items: usize, mut f: impl FnMut(usize) -> Rational) -> Result<Self> {
        if items > MAX_TABLE_ITEMS {
            return Err(Error::invalid("too many items for a table valuation"));
        }
        Self::table(items, (0..1usize << items).map(&mut f).collect())
    }

    pub fn kind(&self) -> &ValuationKind {
        &self.kind
    }

    /// Number of items queries may refer to, padding items included.
    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn is_additive(&self) -> bool {
        matches!(self.kind, ValuationKind::Additive { .. })
    }

    /// Copy of this valuation over a larger universe; the extra items are
    /// worth nothing in every set.
    pub fn with_universe(&self, universe: usize) -> Self {
        assert!(universe >= self.kind.items(), "cannot shrink a valuation");
        Valuation {
            kind: self.kind.clone(),
            universe,
            queries: AtomicU64::new(0),
        }
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_queries(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }

    fn check_set(&self, set: &[usize]) -> Result<()> {
        for (pos, &j) in set.iter().enumerate() {
            if j >= self.universe {
                return Err(Error::ItemOutOfRange {
                    item: j,
                    universe: self.universe,
                });
            }
            if set[..pos].contains(&j) {
                return Err(Error::DuplicateItem(j));
            }
        }
        Ok(())
    }

    fn eval_unchecked(&self, set: &[usize]) -> Rational {
        let real = self.kind.items();
        if set.iter().all(|&j| j < real) {
            self.kind.eval(set)
        } else {
            let kept: Vec<usize> = set.iter().copied().filter(|&j| j < real).collect();
            self.kind.eval(&kept)
        }
    }

    /// Value query: `v(set)`. Counts one query.
    pub fn value(&self, set: &[usize]) -> Result<Rational> {
        self.check_set(set)?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(self.eval_unchecked(set))
    }

    /// Value of a single item. Counts one query.
    pub fn singleton(&self, item: usize) -> Result<Rational> {
        self.value(&[item])
    }

    /// `ln v(set)`, `-inf` when the value is zero. Counts one query.
    pub fn ln_value(&self, set: &[usize]) -> Result<f64> {
        self.value(set).map(|v| rational::ln(&v))
    }

    /// `max { v(S') : S' ⊆ set, |S'| ≤ cap }`.
    ///
    /// Additive and capped kinds use the top-`cap` closed form; other kinds
    /// are searched exhaustively and need `|set| ≤ 20`.
    pub fn best_subset_value(&self, set: &[usize], cap: usize) -> Result<Rational> {
        self.check_set(set)?;
        match &self.kind {
            ValuationKind::Additive { values } | ValuationKind::Capped { values, .. } => {
                let limit = match self.kind {
                    ValuationKind::Capped { cap: inner, .. } => cap.min(inner),
                    _ => cap,
                };
                let real = values.len();
                let mut picked: Vec<&Rational> = set
                    .iter()
                    .filter(|&&j| j < real)
                    .map(|&j| &values[j])
                    .collect();
                picked.sort_unstable_by(|a, b| b.cmp(a));
                self.queries.fetch_add(1, Ordering::Relaxed);
                Ok(picked.into_iter().take(limit).sum())
            }
            _ => {
                if set.len() > MAX_EXHAUSTIVE_ITEMS {
                    return Err(Error::invalid(alloc::format!(
                        "exhaustive subset search limited to {MAX_EXHAUSTIVE_ITEMS} items"
                    )));
                }
                let mut best = rational::zero();
                let mut chosen = Vec::with_capacity(cap);
                for sub in 0u32..1 << set.len() {
                    if sub.count_ones() as usize > cap {
                        continue;
                    }
                    chosen.clear();
                    chosen.extend((0..set.len()).filter(|&b| sub >> b & 1 == 1).map(|b| set[b]));
                    let v = self.value(&chosen)?;
                    if v > best {
                        best = v;
                    }
                }
                Ok(best)
            }
        }
    }

    /// Additive valuation turned into "sum of the `cap` most valuable items".
    pub fn capped_transform(&self, cap: usize) -> Result<Self> {
        match &self.kind {
            ValuationKind::Additive { values } => Self::capped(values.clone(), cap),
            _ => Err(Error::Unsupported("capped transform needs an additive valuation")),
        }
    }

    /// Table of `S ↦ best_subset_value(S, cap)`; requires a universe of at
    /// most 16 items.
    pub fn best_subset_table(&self, cap: usize) -> Result<Self> {
        if self.universe > MAX_TABLE_ITEMS {
            return Err(Error::invalid("too many items for a table valuation"));
        }
        let mut values = Vec::with_capacity(1 << self.universe);
        for mask in 0..1usize << self.universe {
            values.push(self.best_subset_value(&items_of(mask), cap)?);
        }
        Self::table(self.universe, values)
    }

    fn table_values(&self) -> Result<(&[Rational], usize)> {
        match &self.kind {
            ValuationKind::Table { items, values } if self.universe == *items => {
                Ok((values, *items))
            }
            ValuationKind::Table { .. } => {
                Err(Error::Unsupported("table checks do not support padding items"))
            }
            _ => Err(Error::Unsupported(
                "property checks need a table valuation; other kinds are submodular by construction",
            )),
        }
    }

    /// Exhaustive diminishing-marginals check over all `S ⊆ T`, `j ∉ T`.
    pub fn is_submodular(&self) -> Result<bool> {
        let (values, items) = self.table_values()?;
        let full = (1usize << items) - 1;
        for t in 0..=full {
            // iterate over all submasks s of t
            let mut s = t;
            loop {
                for j in 0..items {
                    if t >> j & 1 == 0 {
                        let gain_s = &values[s | 1 << j] - &values[s];
                        let gain_t = &values[t | 1 << j] - &values[t];
                        if gain_s < gain_t {
                            return Ok(false);
                        }
                    }
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & t;
            }
        }
        Ok(true)
    }

    /// Exhaustive `v(S ∪ T) ≤ v(S) + v(T)` check.
    pub fn is_subadditive(&self) -> Result<bool> {
        let (values, items) = self.table_values()?;
        let size = 1usize << items;
        for s in 0..size {
            for t in s..size {
                if values[s | t] > &values[s] + &values[t] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use alloc::vec;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn example_one() -> Valuation {
        Valuation::table_from_fn(4, |mask| match mask {
            0 => int(0),
            0b1010 => int(4),
            0b1101 => int(3),
            m => int((m.count_ones() as i64 + 1).min(4)),
        })
        .unwrap()
    }

    #[test]
    fn additive_query() {
        let v = Valuation::additive(ints(&[2, 1])).unwrap();
        assert_eq!(v.value(&[0, 1]).unwrap(), int(3));
        assert_eq!(v.value(&[]).unwrap(), int(0));
        assert_eq!(v.queries(), 2);
    }

    #[test]
    fn query_range_and_duplicates() {
        let v = Valuation::additive(ints(&[2, 1])).unwrap();
        assert_eq!(
            v.value(&[2]),
            Err(Error::ItemOutOfRange {
                item: 2,
                universe: 2
            })
        );
        assert_eq!(v.value(&[1, 1]), Err(Error::DuplicateItem(1)));
    }

    #[test]
    fn example_one_values() {
        let v = example_one();
        assert_eq!(v.value(&[1, 3]).unwrap(), int(4));
        assert_eq!(v.value(&[]).unwrap(), int(0));
        assert!(v.is_submodular().unwrap());
        assert_eq!(v.best_subset_value(&[0, 2, 3], 2).unwrap(), int(3));
        assert_eq!(v.best_subset_value(&[0, 1, 2, 3], 2).unwrap(), int(4));
        assert_eq!(v.best_subset_value(&[], 2).unwrap(), int(0));
        let transformed = v.best_subset_table(2).unwrap();
        assert_eq!(transformed.value(&[0, 2]).unwrap(), int(3));
        assert_eq!(transformed.value(&[0, 1, 2]).unwrap(), int(3));
        assert!(!transformed.is_submodular().unwrap());
    }

    #[test]
    fn capped_transform_values() {
        let v = Valuation::additive(ints(&[3, 2, 1])).unwrap();
        assert_eq!(v.capped_transform(2).unwrap().value(&[0, 1, 2]).unwrap(), int(5));
        assert_eq!(v.capped_transform(3).unwrap().value(&[0, 1, 2]).unwrap(), int(6));
        let single = Valuation::additive(ints(&[5])).unwrap();
        assert_eq!(single.capped_transform(1).unwrap().value(&[0]).unwrap(), int(5));
        assert!(matches!(v.capped_transform(0), Err(Error::InvalidInput(_))));
        let table = example_one();
        assert!(matches!(table.capped_transform(1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn additive_table_is_submodular() {
        let v = Valuation::table_from_fn(3, |mask| int(mask.count_ones() as i64 * 2)).unwrap();
        assert!(v.is_submodular().unwrap());
        assert!(v.is_subadditive().unwrap());
    }

    #[test]
    fn non_table_property_check_is_unsupported() {
        let v = Valuation::additive(ints(&[1])).unwrap();
        assert!(matches!(v.is_submodular(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn table_validation() {
        assert!(Valuation::table(1, ints(&[1, 2])).is_err());
        assert!(Valuation::table(1, ints(&[0])).is_err());
        assert!(Valuation::table(2, ints(&[0, 2, 1, 1])).is_err());
        assert!(Valuation::additive(vec![crate::rational::ratio(-1, 2)]).is_err());
    }

    #[test]
    fn coverage_counts_union_once() {
        let v = Valuation::coverage(ints(&[1, 2, 4]), vec![vec![0, 1], vec![1, 2], vec![]]).unwrap();
        assert_eq!(v.value(&[0, 1]).unwrap(), int(7));
        assert_eq!(v.value(&[0]).unwrap(), int(3));
        assert_eq!(v.value(&[2]).unwrap(), int(0));
    }

    #[test]
    fn padding_items_are_worthless() {
        let v = Valuation::additive(ints(&[4, 1])).unwrap().with_universe(4);
        assert_eq!(v.value(&[0, 3]).unwrap(), v.value(&[0]).unwrap());
        assert_eq!(v.value(&[2, 3]).unwrap(), int(0));
        assert!(v.value(&[4]).is_err());
    }
}
