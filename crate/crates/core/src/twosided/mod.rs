//! Capacitated two-sided NSW via a min-cost flow on log costs, plus exhaustive
//! search for few firms.

mod ptas;

use alloc::vec;
use alloc::vec::Vec;

pub use ptas::{solve_two_sided_ptas, PtasBranch, PtasSolution, PTAS_ENUMERATION_CAP};

use crate::error::{Error, Result};
use crate::flow::{min_cost_flow, FlowNetwork, IntegralFlow};
use crate::model::{is_zero, ln_nsw_two_sided, Matching, TwoSidedInstance};
use crate::rational;

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

/// Node of worker `j`.
pub fn worker_node(j: usize) -> usize {
    2 + j
}

/// Main copy `y¹_i` of firm `i`.
pub fn main_node(m: usize, i: usize) -> usize {
    2 + m + i
}

/// Secondary copy `y²_i` of firm `i`.
pub fn secondary_node(m: usize, n: usize, i: usize) -> usize {
    2 + m + n + i
}

/// A worker-to-firm edge of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkerEdge {
    pub worker: usize,
    pub firm: usize,
    pub main: bool,
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedNetwork {
    pub network: FlowNetwork,
    pub worker_edges: Vec<WorkerEdge>,
    pub workers: usize,
    pub firms: usize,
}

/// Each firm takes exactly one worker through its main copy, costed by
/// `−ln(v_i(j) w_j(i))`, and up to `c_i − 1` more through its secondary copy,
/// costed by `−ln w_j(i)`.
pub fn build_network(inst: &TwoSidedInstance) -> Result<TwoSidedNetwork> {
    let (n, m) = (inst.n(), inst.m());
    let total: usize = inst.capacities().iter().sum();
    if total < m {
        return Err(Error::infeasible(alloc::format!(
            "total capacity {total} is below the number of workers {m}"
        )));
    }
    let mut net = FlowNetwork::new(2 + m + 2 * n);
    net.supply[SOURCE] = m as i64;
    net.supply[SINK] = -(m as i64);
    for j in 0..m {
        net.add_edge(SOURCE, worker_node(j), 1, 1, 0.0);
    }
    let mut worker_edges = Vec::new();
    for j in 0..m {
        for i in 0..n {
            let w = inst.worker_value(j, i);
            if is_zero(w) {
                continue;
            }
            let v = inst.firm_valuation(i).singleton(j)?;
            if !is_zero(&v) {
                let cost = -(rational::ln(&v) + rational::ln(w));
                let edge = net.add_edge(worker_node(j), main_node(m, i), 0, 1, cost);
                worker_edges.push(WorkerEdge {
                    worker: j,
                    firm: i,
                    main: true,
                    edge,
                });
            }
            let edge = net.add_edge(worker_node(j), secondary_node(m, n, i), 0, 1, -rational::ln(w));
            worker_edges.push(WorkerEdge {
                worker: j,
                firm: i,
                main: false,
                edge,
            });
        }
    }
    for i in 0..n {
        net.add_edge(main_node(m, i), SINK, 1, 1, 0.0);
    }
    for i in 0..n {
        let spare = inst.capacity(i) as i64 - 1;
        net.add_edge(secondary_node(m, n, i), SINK, 0, spare, 0.0);
    }
    Ok(TwoSidedNetwork {
        network: net,
        worker_edges,
        workers: m,
        firms: n,
    })
}

/// Reads the matching off an integral flow, together with each firm's main
/// worker.
pub fn extract_matching(net: &TwoSidedNetwork, flow: &IntegralFlow) -> (Matching, Vec<Option<usize>>) {
    let mut matching = Matching::unmatched(net.workers);
    let mut main = vec![None; net.firms];
    for e in &net.worker_edges {
        if flow.flow[e.edge] > 0 {
            matching.assignment[e.worker] = Some(e.firm);
            if e.main {
                main[e.firm] = Some(e.worker);
            }
        }
    }
    (matching, main)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedDiagnostics {
    /// `Π v_i(j̄_i) Π w_j(μ_j)` over main workers `j̄_i`.
    pub surrogate: f64,
    pub ln_surrogate: f64,
    pub nsw: f64,
    /// `x = m/n`.
    pub x_ratio: f64,
    /// Guaranteed ratio `x^{1/(1+x)}`.
    pub bound: f64,
    pub flow_cost: f64,
    pub augmentations: usize,
    /// The flow passed its residual negative-cycle check.
    pub certified: bool,
    /// Every matching has zero NSW; the output is an arbitrary feasible one.
    pub zero_optimum: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedSolution {
    pub matching: Matching,
    /// Main worker of each firm, when the flow ran.
    pub main_workers: Vec<Option<usize>>,
    pub diagnostics: TwoSidedDiagnostics,
}

/// `x^{1/(1+x)}`, the ratio guaranteed when `m = x·n`.
pub fn ratio_bound(x: f64) -> f64 {
    libm::pow(x, 1.0 / (1.0 + x))
}

/// Assigns workers in index order to the first firm with room left.
pub(crate) fn fill_capacities(inst: &TwoSidedInstance) -> Matching {
    let mut loads = vec![0; inst.n()];
    let mut matching = Matching::unmatched(inst.m());
    for j in 0..inst.m() {
        if let Some(i) = (0..inst.n()).find(|&i| loads[i] < inst.capacity(i)) {
            loads[i] += 1;
            matching.assignment[j] = Some(i);
        }
    }
    matching
}

fn from_ln(ln: f64) -> f64 {
    if ln == f64::NEG_INFINITY {
        0.0
    } else {
        libm::exp(ln)
    }
}

/// Matching within `x^{1/(1+x)} ≤ 1.33` of the optimal NSW for subadditive
/// firm valuations.
pub fn solve_two_sided(inst: &TwoSidedInstance) -> Result<TwoSidedSolution> {
    let (n, m) = (inst.n(), inst.m());
    let x = m as f64 / n as f64;
    let zero = |matching: Matching| {
        let ln = ln_nsw_two_sided(inst, &matching);
        TwoSidedSolution {
            main_workers: vec![None; n],
            diagnostics: TwoSidedDiagnostics {
                surrogate: 0.0,
                ln_surrogate: f64::NEG_INFINITY,
                nsw: from_ln(ln),
                x_ratio: x,
                bound: ratio_bound(x),
                flow_cost: f64::INFINITY,
                augmentations: 0,
                certified: false,
                zero_optimum: true,
            },
            matching,
        }
    };
    let net = build_network(inst)?;
    let hopeless = m < n
        || (0..m).any(|j| (0..n).all(|i| is_zero(inst.worker_value(j, i))));
    if hopeless {
        return Ok(zero(fill_capacities(inst)));
    }
    let flow = match min_cost_flow(&net.network) {
        Ok(flow) => flow,
        Err(Error::Infeasible(_)) => return Ok(zero(fill_capacities(inst))),
        Err(e) => return Err(e),
    };
    let (matching, main_workers) = extract_matching(&net, &flow);
    let mut ln_surrogate = 0.0;
    for (i, main) in main_workers.iter().enumerate() {
        let j = main.expect("every firm has a main worker");
        ln_surrogate += rational::ln(&inst.firm_valuation(i).singleton(j)?);
    }
    for j in 0..m {
        ln_surrogate += rational::ln(&inst.worker_utility(&matching, j));
    }
    let ln = ln_nsw_two_sided(inst, &matching);
    Ok(TwoSidedSolution {
        diagnostics: TwoSidedDiagnostics {
            surrogate: libm::exp(ln_surrogate),
            ln_surrogate,
            nsw: from_ln(ln),
            x_ratio: x,
            bound: ratio_bound(x),
            flow_cost: flow.cost,
            augmentations: flow.augmentations,
            certified: flow.certified,
            zero_optimum: false,
        },
        matching,
        main_workers,
    })
}
