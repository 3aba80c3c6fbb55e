use super::{check_weights, Allocation, Matching, OneSidedInstance, TwoSidedInstance};
use crate::error::Result;
use crate::rational;

fn from_ln(ln: f64) -> f64 {
    if ln == f64::NEG_INFINITY {
        0.0
    } else {
        libm::exp(ln)
    }
}

/// `ln` of the one-sided Nash social welfare; `-inf` when some agent has
/// zero utility.
///
/// # Panics
/// If the allocation does not fit the instance.
pub fn ln_nsw_one_sided(inst: &OneSidedInstance, alloc: &Allocation) -> f64 {
    assert_eq!(alloc.bundles.len(), inst.n(), "allocation does not match instance");
    let mut total = 0.0;
    for (i, bundle) in alloc.bundles.iter().enumerate() {
        let v = inst
            .valuation(i)
            .value(bundle)
            .expect("allocation does not match instance");
        if super::is_zero(&v) {
            return f64::NEG_INFINITY;
        }
        total += rational::ln(&v);
    }
    total / inst.n() as f64
}

/// Geometric mean of the agents' utilities.
pub fn nsw_one_sided(inst: &OneSidedInstance, alloc: &Allocation) -> f64 {
    from_ln(ln_nsw_one_sided(inst, alloc))
}

/// `ln` of the two-sided Nash social welfare; an unmatched worker has
/// utility zero.
pub fn ln_nsw_two_sided(inst: &TwoSidedInstance, matching: &Matching) -> f64 {
    assert_eq!(matching.assignment.len(), inst.m(), "matching does not match instance");
    let mut total = 0.0;
    for (i, bundle) in matching.bundles(inst.n()).iter().enumerate() {
        let v = inst
            .firm_valuation(i)
            .value(bundle)
            .expect("matching does not match instance");
        if super::is_zero(&v) {
            return f64::NEG_INFINITY;
        }
        total += rational::ln(&v);
    }
    for j in 0..inst.m() {
        let w = inst.worker_utility(matching, j);
        if super::is_zero(&w) {
            return f64::NEG_INFINITY;
        }
        total += rational::ln(&w);
    }
    total / (inst.n() + inst.m()) as f64
}

/// Geometric mean over all firms and workers.
pub fn nsw_two_sided(inst: &TwoSidedInstance, matching: &Matching) -> f64 {
    from_ln(ln_nsw_two_sided(inst, matching))
}

/// `Σ η_i ln v_i(μ_i) + Σ ζ_j ln w_j(μ_j)` with the convention that a factor
/// of weight zero contributes nothing, even when its utility is zero.
pub fn ln_nsw_weighted(
    inst: &TwoSidedInstance,
    matching: &Matching,
    firm_weights: &[f64],
    worker_weights: &[f64],
) -> Result<f64> {
    check_weights(inst.n(), inst.m(), firm_weights, worker_weights)?;
    let mut total = 0.0;
    for (i, bundle) in matching.bundles(inst.n()).iter().enumerate() {
        if firm_weights[i] == 0.0 {
            continue;
        }
        let v = inst.firm_valuation(i).value(bundle)?;
        if super::is_zero(&v) {
            return Ok(f64::NEG_INFINITY);
        }
        total += firm_weights[i] * rational::ln(&v);
    }
    for (j, &zeta) in worker_weights.iter().enumerate() {
        if zeta == 0.0 {
            continue;
        }
        let w = inst.worker_utility(matching, j);
        if super::is_zero(&w) {
            return Ok(f64::NEG_INFINITY);
        }
        total += zeta * rational::ln(&w);
    }
    Ok(total)
}

/// Weighted Nash social welfare `Π v_i(μ_i)^{η_i} Π w_j(μ_j)^{ζ_j}`.
pub fn nsw_weighted(
    inst: &TwoSidedInstance,
    matching: &Matching,
    firm_weights: &[f64],
    worker_weights: &[f64],
) -> Result<f64> {
    ln_nsw_weighted(inst, matching, firm_weights, worker_weights).map(from_ln)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Valuation;
    use crate::rational::{int, Rational};
    use crate::Error;
    use alloc::vec;
    use alloc::vec::Vec;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn one_sided(values: &[&[i64]], caps: &[usize]) -> OneSidedInstance {
        OneSidedInstance::new(
            values.iter().map(|v| Valuation::additive(ints(v)).unwrap()).collect(),
            caps.to_vec(),
        )
        .unwrap()
    }

    fn small_market() -> TwoSidedInstance {
        TwoSidedInstance::new(
            vec![Valuation::additive(ints(&[3, 1])).unwrap()],
            vec![ints(&[1]), ints(&[1])],
            vec![2],
        )
        .unwrap()
    }

    #[test]
    fn one_sided_geometric_mean() {
        let inst = one_sided(&[&[4, 0, 0], &[0, 1, 0], &[0, 0, 1]], &[1, 1, 1]);
        let alloc = Allocation::new(vec![vec![0], vec![1], vec![2]]);
        assert!((nsw_one_sided(&inst, &alloc) - libm::cbrt(4.0)).abs() < 1e-12);
        let empty = Allocation::new(vec![vec![0], vec![1], vec![]]);
        assert_eq!(nsw_one_sided(&inst, &empty), 0.0);
    }

    #[test]
    fn footnote_balanced_allocation() {
        let (n, k, c) = (3usize, 2usize, 5i64);
        let values = vec![c; n * k];
        let rows: Vec<&[i64]> = (0..n).map(|_| values.as_slice()).collect();
        let inst = one_sided(&rows, &vec![n * k; n]);
        let alloc = Allocation::new((0..n).map(|i| (i * k..(i + 1) * k).collect()).collect());
        let nsw = nsw_one_sided(&inst, &alloc);
        assert!((nsw - (k as f64 * c as f64)).abs() < 1e-12);
    }

    #[test]
    fn two_sided_small_market() {
        let inst = small_market();
        let both = Matching::new(vec![Some(0), Some(0)]);
        assert!((nsw_two_sided(&inst, &both) - libm::cbrt(4.0)).abs() < 1e-12);
        let partial = Matching::new(vec![Some(0), None]);
        assert_eq!(nsw_two_sided(&inst, &partial), 0.0);
    }

    #[test]
    fn two_sided_all_ones() {
        let inst = TwoSidedInstance::new(
            vec![Valuation::additive(ints(&[1, 0])).unwrap(), Valuation::additive(ints(&[0, 1])).unwrap()],
            vec![ints(&[1, 1]), ints(&[1, 1])],
            vec![1, 1],
        )
        .unwrap();
        let m = Matching::new(vec![Some(0), Some(1)]);
        assert!((nsw_two_sided(&inst, &m) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_reductions() {
        let inst = small_market();
        let both = Matching::new(vec![Some(0), Some(0)]);
        let third = 1.0 / 3.0;
        let w = nsw_weighted(&inst, &both, &[third], &[third, third]).unwrap();
        assert!((w - nsw_two_sided(&inst, &both)).abs() < 1e-12);

        // zero worker weights reduce to the one-sided objective
        let w = nsw_weighted(&inst, &both, &[1.0], &[0.0, 0.0]).unwrap();
        let alloc = both.to_allocation(1);
        assert!((w - nsw_one_sided(&inst.firm_side(), &alloc)).abs() < 1e-12);

        // 0^0 = 1: an unmatched worker with zero weight does not zero the product
        let partial = Matching::new(vec![Some(0), None]);
        let w = nsw_weighted(&inst, &partial, &[1.0], &[0.0, 0.0]).unwrap();
        assert!((w - 3.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_degenerate_and_errors() {
        let inst = TwoSidedInstance::new(
            vec![Valuation::additive(ints(&[7])).unwrap()],
            vec![ints(&[2])],
            vec![1],
        )
        .unwrap();
        let m = Matching::new(vec![Some(0)]);
        assert!((nsw_weighted(&inst, &m, &[1.0], &[0.0]).unwrap() - 7.0).abs() < 1e-12);
        assert!(matches!(
            nsw_weighted(&inst, &m, &[0.5], &[0.4]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn scaling_an_agent_scales_nsw() {
        let inst = one_sided(&[&[2, 3], &[5, 1]], &[1, 1]);
        let scaled = one_sided(&[&[6, 9], &[5, 1]], &[1, 1]);
        let a = Allocation::new(vec![vec![0], vec![1]]);
        let b = Allocation::new(vec![vec![1], vec![0]]);
        let factor = libm::sqrt(3.0);
        assert!((nsw_one_sided(&scaled, &a) - factor * nsw_one_sided(&inst, &a)).abs() < 1e-12);
        assert_eq!(
            nsw_one_sided(&inst, &a) < nsw_one_sided(&inst, &b),
            nsw_one_sided(&scaled, &a) < nsw_one_sided(&scaled, &b)
        );
    }
}
