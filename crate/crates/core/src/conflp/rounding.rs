//! Marginal-preserving dependent rounding on the bipartite support.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::FractionalAssignment;
use crate::model::Matching;

const SNAP: f64 = 1e-12;

fn snap(v: f64) -> f64 {
    if v < SNAP {
        0.0
    } else if v > 1.0 - SNAP {
        1.0
    } else {
        v
    }
}

fn fractional(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

/// Vertices `0..n` are firms, `n..n+m` workers; an edge is `(firm, worker)`.
fn neighbours(x: &[Vec<f64>], vertex: usize, firms: usize) -> Vec<(usize, usize)> {
    if vertex < firms {
        (0..x[vertex].len())
            .filter(|&j| fractional(x[vertex][j]))
            .map(|j| (vertex, j))
            .collect()
    } else {
        let j = vertex - firms;
        (0..firms).filter(|&i| fractional(x[i][j])).map(|i| (i, j)).collect()
    }
}

fn other_end(edge: (usize, usize), vertex: usize, firms: usize) -> usize {
    if vertex < firms {
        firms + edge.1
    } else {
        edge.0
    }
}

/// A cycle or a maximal path of fractional edges.
fn find_walk(x: &[Vec<f64>], firms: usize) -> Option<Vec<(usize, usize)>> {
    let vertices = firms + x.first().map_or(0, Vec::len);
    let degree: Vec<usize> = (0..vertices).map(|v| neighbours(x, v, firms).len()).collect();
    let start = (0..vertices)
        .find(|&v| degree[v] == 1)
        .or_else(|| (0..vertices).find(|&v| degree[v] > 0))?;
    let mut position = vec![usize::MAX; vertices];
    let mut path_vertices = vec![start];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    position[start] = 0;
    let mut current = start;
    loop {
        let last = edges.last().copied();
        let next = neighbours(x, current, firms).into_iter().find(|&e| Some(e) != last);
        let Some(edge) = next else {
            return Some(edges);
        };
        let v = other_end(edge, current, firms);
        edges.push(edge);
        if position[v] != usize::MAX {
            return Some(edges[position[v]..].to_vec());
        }
        position[v] = path_vertices.len();
        path_vertices.push(v);
        current = v;
    }
}

/// Rounds `x` to a matching so that worker `j` goes to firm `i` with
/// probability exactly `x_ij`, every firm receives at most `⌈Σ_j x_ij⌉`
/// workers, and every worker at most one firm.
///
/// Each step picks a cycle or maximal path of fractional edges, splits it
/// into alternate edge classes and shifts mass between them in one of two
/// directions, with probabilities that keep every marginal unchanged in
/// expectation. At least one edge becomes integral per step.
pub fn dependent_rounding<R: Rng + ?Sized>(x: &FractionalAssignment, rng: &mut R) -> Matching {
    let firms = x.firms();
    let workers = x.workers();
    let mut y: Vec<Vec<f64>> = x.x.iter().map(|r| r.iter().map(|&v| snap(v)).collect()).collect();
    while let Some(walk) = find_walk(&y, firms) {
        let mut up = f64::INFINITY;
        let mut down = f64::INFINITY;
        for (k, &(i, j)) in walk.iter().enumerate() {
            let v = y[i][j];
            if k % 2 == 0 {
                up = up.min(1.0 - v);
                down = down.min(v);
            } else {
                up = up.min(v);
                down = down.min(1.0 - v);
            }
        }
        let delta = if rng.gen::<f64>() * (up + down) < down {
            up
        } else {
            -down
        };
        for (k, &(i, j)) in walk.iter().enumerate() {
            let signed = if k % 2 == 0 { delta } else { -delta };
            y[i][j] = snap(y[i][j] + signed);
        }
    }
    let mut matching = Matching::unmatched(workers);
    for (i, row) in y.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v == 1.0 {
                matching.assignment[j] = Some(i);
            }
        }
    }
    matching
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn integral_input_is_fixed() {
        let x = FractionalAssignment::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = dependent_rounding(&x, &mut rng);
        assert_eq!(m.assignment, vec![Some(0), Some(1)]);
    }

    #[test]
    fn split_worker_is_fair() {
        let x = FractionalAssignment::new(vec![vec![0.5], vec![0.5]]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 10_000;
        let mut first = 0;
        for _ in 0..trials {
            let m = dependent_rounding(&x, &mut rng);
            assert!(m.assignment[0].is_some());
            if m.assignment[0] == Some(0) {
                first += 1;
            }
        }
        let sigma = (0.25f64 / trials as f64).sqrt() * trials as f64;
        assert!((first as f64 - 5000.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn load_respects_ceiling() {
        let x = FractionalAssignment::new(vec![vec![0.5, 0.5, 0.5], vec![0.5, 0.5, 0.5]]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let m = dependent_rounding(&x, &mut rng);
            for load in m.loads(2) {
                assert!(load <= 2);
            }
        }
    }
}
