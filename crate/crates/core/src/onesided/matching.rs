//! Max-product one-to-one matchings via the Hungarian method on log weights.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Rectangular min-cost assignment (rows ≤ columns). Returns the column of
/// every row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let rows = cost.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = cost[0].len();
    assert!(rows <= cols, "hungarian needs rows <= columns");
    let inf = f64::INFINITY;
    // 1-based potentials and matching, column 0 is a virtual root
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut row_of = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=cols {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; rows];
    for j in 1..=cols {
        if row_of[j] != 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Result of [`max_product_matching`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMatching {
    /// Column matched to each row.
    pub assignment: Vec<usize>,
    /// Every row-perfect matching contains a zero weight.
    pub zero_product: bool,
    /// `ln` of the matched product (`-inf` when zero).
    pub ln_product: f64,
}

/// Row-perfect matching maximizing the product of matched weights.
///
/// Zero weights are excluded combinatorially: they receive a penalty larger
/// than the spread of all log weights, so a positive-product matching is
/// preferred whenever one exists. When none exists the returned matching
/// uses as many positive edges as possible and is flagged `zero_product`.
pub fn max_product_matching(weights: &[Vec<Rational>]) -> Result<ProductMatching> {
    let rows = weights.len();
    if rows == 0 {
        return Ok(ProductMatching {
            assignment: Vec::new(),
            zero_product: false,
            ln_product: 0.0,
        });
    }
    let cols = weights[0].len();
    if weights.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid("weight matrix rows differ in length"));
    }
    if cols < rows {
        return Err(Error::invalid(alloc::format!(
            "cannot match {rows} rows into {cols} columns"
        )));
    }
    let logs: Vec<Vec<f64>> = weights
        .iter()
        .map(|r| r.iter().map(rational::ln).collect())
        .collect();
    let finite = logs.iter().flatten().copied().filter(|x| x.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    let penalty = if lo.is_finite() {
        -lo + (hi - lo + 1.0) * (rows as f64 + 1.0)
    } else {
        1.0
    };
    let cost: Vec<Vec<f64>> = logs
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| if x.is_finite() { -x } else { penalty })
                .collect()
        })
        .collect();
    let assignment = hungarian(&cost);
    let ln_product: f64 = assignment.iter().enumerate().map(|(i, &j)| logs[i][j]).sum();
    Ok(ProductMatching {
        zero_product: ln_product == f64::NEG_INFINITY,
        assignment,
        ln_product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn two_by_two_product() {
        // products: identity 2*2 = 4, swapped 1*1 = 1
        let m = max_product_matching(&mat(&[&[2, 1], &[1, 2]])).unwrap();
        assert_eq!(m.assignment, vec![0, 1]);
        assert!(!m.zero_product);
        assert!((m.ln_product - libm::log(4.0)).abs() < 1e-12);
    }

    #[test]
    fn product_not_sum() {
        // max-sum picks 10+1 = 11 over 5+5, max-product picks 5*5 = 25 over 10*1
        let m = max_product_matching(&mat(&[&[10, 5], &[5, 1]])).unwrap();
        assert_eq!(m.assignment, vec![1, 0]);
    }

    #[test]
    fn diagonal_with_zeros() {
        let m = max_product_matching(&mat(&[&[3, 0, 0], &[0, 5, 0], &[0, 0, 100]])).unwrap();
        assert_eq!(m.assignment, vec![0, 1, 2]);
    }

    #[test]
    fn all_zero_is_flagged() {
        let m = max_product_matching(&mat(&[&[0, 0], &[0, 0]])).unwrap();
        assert!(m.zero_product);
        let mut cols = m.assignment.clone();
        cols.sort();
        assert_eq!(cols, vec![0, 1]);
    }

    #[test]
    fn too_few_columns() {
        assert!(max_product_matching(&mat(&[&[1], &[1]])).is_err());
    }

    #[test]
    fn rectangular_matches_brute_force() {
        let w = mat(&[&[1, 7, 3, 2], &[4, 6, 0, 1], &[2, 2, 9, 8]]);
        let m = max_product_matching(&w).unwrap();
        let mut best = 0i64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    if a != b && b != c && a != c {
                        let p = [(0, a), (1, b), (2, c)]
                            .iter()
                            .map(|&(i, j)| w[i][j].to_integer().try_into().unwrap_or(0i64))
                            .product::<i64>();
                        best = best.max(p);
                    }
                }
            }
        }
        assert!((m.ln_product - libm::log(best as f64)).abs() < 1e-12);
    }
}
