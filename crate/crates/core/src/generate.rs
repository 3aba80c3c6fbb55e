//! Random instance families and fixed presets.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{OneSidedInstance, TwoSidedInstance, Valuation, WeightedInstance};
use crate::rational::{int, ratio, Rational};

/// Largest denominator any generated rational may have.
pub const MAX_DENOMINATOR: i64 = 1000;

/// Clauses in a generated max-of-additive table valuation.
const XOS_CLAUSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueFamily {
    Additive,
    /// Additive with a random cardinality cap.
    Capped,
    Coverage,
    /// Maximum over a few additive clauses, stored as a table (at most 16
    /// items). Subadditive but usually not submodular.
    Xos,
}

impl ValueFamily {
    pub fn name(self) -> &'static str {
        match self {
            ValueFamily::Additive => "additive",
            ValueFamily::Capped => "capped",
            ValueFamily::Coverage => "coverage",
            ValueFamily::Xos => "xos",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "additive" => Some(ValueFamily::Additive),
            "capped" => Some(ValueFamily::Capped),
            "coverage" => Some(ValueFamily::Coverage),
            "xos" => Some(ValueFamily::Xos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n: usize,
    pub m: usize,
    pub min_capacity: usize,
    pub max_capacity: usize,
    pub family: ValueFamily,
    /// Denominators are drawn from `1..=denominator`.
    pub denominator: i64,
    /// Chance that a single item (or worker preference) is worth zero.
    pub zero_probability: f64,
}

impl GenConfig {
    pub fn new(n: usize, m: usize, family: ValueFamily) -> Self {
        GenConfig {
            n,
            m,
            min_capacity: 1,
            max_capacity: m.max(1),
            family,
            denominator: 10,
            zero_probability: 0.1,
        }
    }

    pub fn capacities(mut self, min: usize, max: usize) -> Self {
        self.min_capacity = min;
        self.max_capacity = max;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("need at least one agent"));
        }
        if self.min_capacity == 0 || self.min_capacity > self.max_capacity {
            return Err(Error::invalid("capacity range must satisfy 1 ≤ min ≤ max"));
        }
        if !(1..=MAX_DENOMINATOR).contains(&self.denominator) {
            return Err(Error::invalid(alloc::format!(
                "denominator must lie in 1..={MAX_DENOMINATOR}"
            )));
        }
        if !(0.0..1.0).contains(&self.zero_probability) {
            return Err(Error::invalid("zero probability must lie in [0, 1)"));
        }
        if self.family == ValueFamily::Xos && self.m > crate::model::MAX_TABLE_ITEMS {
            return Err(Error::invalid("table valuations support at most 16 items"));
        }
        Ok(())
    }
}

/// A value in `[1/d, 10]` with denominator `d ≤ cfg.denominator`, or zero.
fn value<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Rational {
    if rng.gen_bool(cfg.zero_probability) {
        return int(0);
    }
    let d = rng.gen_range(1..=cfg.denominator);
    ratio(rng.gen_range(1..=10 * d), d)
}

fn values<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig, len: usize) -> Vec<Rational> {
    (0..len).map(|_| value(rng, cfg)).collect()
}

pub fn random_valuation<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Result<Valuation> {
    let m = cfg.m;
    match cfg.family {
        ValueFamily::Additive => Valuation::additive(values(rng, cfg, m)),
        ValueFamily::Capped => {
            let cap = rng.gen_range(1..=m.max(1));
            Valuation::capped(values(rng, cfg, m), cap)
        }
        ValueFamily::Coverage => {
            let elements = m + 2;
            let weights = values(rng, cfg, elements);
            let sets = (0..m)
                .map(|_| (0..elements).filter(|_| rng.gen_bool(0.4)).collect())
                .collect();
            Valuation::coverage(weights, sets)
        }
        ValueFamily::Xos => {
            let clauses: Vec<Vec<Rational>> =
                (0..XOS_CLAUSES).map(|_| values(rng, cfg, m)).collect();
            Valuation::table_from_fn(m, |mask| {
                clauses
                    .iter()
                    .map(|c| {
                        (0..m)
                            .filter(|j| mask >> j & 1 == 1)
                            .map(|j| &c[j])
                            .sum::<Rational>()
                    })
                    .max()
                    .unwrap_or_else(crate::rational::zero)
            })
        }
    }
}

fn random_capacities<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Vec<usize> {
    (0..cfg.n)
        .map(|_| rng.gen_range(cfg.min_capacity..=cfg.max_capacity))
        .collect()
}

pub fn random_one_sided<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Result<OneSidedInstance> {
    cfg.check()?;
    let valuations = (0..cfg.n)
        .map(|_| random_valuation(rng, cfg))
        .collect::<Result<Vec<_>>>()?;
    OneSidedInstance::new(valuations, random_capacities(rng, cfg))
}

/// Firms drawn like one-sided agents; capacities are then raised round-robin
/// until every worker fits.
pub fn random_two_sided<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Result<TwoSidedInstance> {
    cfg.check()?;
    let valuations = (0..cfg.n)
        .map(|_| random_valuation(rng, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut capacities = random_capacities(rng, cfg);
    let mut i = 0;
    while capacities.iter().sum::<usize>() < cfg.m {
        capacities[i % cfg.n] += 1;
        i += 1;
    }
    let worker_values = (0..cfg.m).map(|_| values(rng, cfg, cfg.n)).collect();
    TwoSidedInstance::new(valuations, worker_values, capacities)
}

/// Two-sided market with additive firms and random weights summing to one.
/// Each worker weight is zero with probability `zero_probability`.
pub fn random_weighted<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Result<WeightedInstance> {
    let cfg = GenConfig {
        family: ValueFamily::Additive,
        ..cfg.clone()
    };
    let market = random_two_sided(rng, &cfg)?;
    let firm: Vec<i64> = (0..cfg.n).map(|_| rng.gen_range(1..=5)).collect();
    let worker: Vec<i64> = (0..cfg.m)
        .map(|_| {
            if rng.gen_bool(cfg.zero_probability) {
                0
            } else {
                rng.gen_range(1..=5)
            }
        })
        .collect();
    let total: i64 = firm.iter().chain(&worker).sum();
    WeightedInstance::new(
        market,
        firm.iter().map(|&a| ratio(a, total)).collect(),
        worker.iter().map(|&a| ratio(a, total)).collect(),
    )
}

/// `n` agents and `k·n` items, every item worth `c` to everyone, every agent
/// with the given capacity.
pub fn footnote(n: usize, k: usize, c: i64, capacity: usize) -> Result<OneSidedInstance> {
    if n == 0 || k == 0 || c <= 0 || capacity == 0 {
        return Err(Error::invalid("footnote preset needs positive n, k, c and capacity"));
    }
    let valuations = (0..n)
        .map(|_| Valuation::additive(vec![int(c); n * k]))
        .collect::<Result<Vec<_>>>()?;
    OneSidedInstance::new(valuations, vec![capacity; n])
}

/// The four-item submodular table whose best-two-subset transform is not
/// submodular: `v(∅) = 0`, `v({1,3}) = 4`, `v({0,2,3}) = 3`, otherwise
/// `min(|S| + 1, 4)`.
pub fn example1() -> Valuation {
    Valuation::table_from_fn(4, |mask| match mask {
        0 => int(0),
        0b1010 => int(4),
        0b1101 => int(3),
        m => int((m.count_ones() as i64 + 1).min(4)),
    })
    .expect("four items fit a table")
}

/// Single agent with capacity 2 holding the [`example1`] valuation.
pub fn example1_instance() -> OneSidedInstance {
    OneSidedInstance::new(vec![example1()], vec![2]).expect("valid preset")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_per_seed() {
        let cfg = GenConfig::new(3, 5, ValueFamily::Coverage).capacities(1, 3);
        let a = random_one_sided(&mut ChaCha8Rng::seed_from_u64(9), &cfg).unwrap();
        let b = random_one_sided(&mut ChaCha8Rng::seed_from_u64(9), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_sided_capacity_covers_workers() {
        let cfg = GenConfig::new(2, 7, ValueFamily::Xos).capacities(1, 1);
        for seed in 0..20 {
            let inst = random_two_sided(&mut ChaCha8Rng::seed_from_u64(seed), &cfg).unwrap();
            assert!(inst.capacities().iter().sum::<usize>() >= 7);
        }
    }

    #[test]
    fn weighted_weights_sum_to_one() {
        let cfg = GenConfig::new(2, 3, ValueFamily::Capped);
        let inst = random_weighted(&mut ChaCha8Rng::seed_from_u64(4), &cfg).unwrap();
        let total: Rational = inst.firm_weights().iter().chain(inst.worker_weights()).sum();
        assert_eq!(total, int(1));
        assert!(inst.market().firm_valuations().iter().all(Valuation::is_additive));
    }

    #[test]
    fn denominators_bounded() {
        let cfg = GenConfig {
            denominator: MAX_DENOMINATOR,
            ..GenConfig::new(2, 4, ValueFamily::Additive)
        };
        let inst = random_one_sided(&mut ChaCha8Rng::seed_from_u64(1), &cfg).unwrap();
        for v in inst.valuations() {
            for j in 0..4 {
                let r = v.singleton(j).unwrap();
                assert!(*r.denom() <= num_bigint::BigInt::from(MAX_DENOMINATOR));
            }
        }
    }

    #[test]
    fn footnote_shape() {
        let inst = footnote(3, 2, 5, 1).unwrap();
        assert_eq!((inst.n(), inst.m()), (3, 6));
        assert!(inst.valuations().iter().all(|v| v.value(&[0, 5]).unwrap() == int(10)));
        assert!(footnote(0, 2, 5, 1).is_err());
    }

    #[test]
    fn example1_transform_not_submodular() {
        let v = example1();
        assert!(v.is_submodular().unwrap());
        assert_eq!(v.value(&[1, 3]).unwrap(), int(4));
        assert!(!v.best_subset_table(2).unwrap().is_submodular().unwrap());
    }
}
