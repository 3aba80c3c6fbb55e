//! Integral min-cost flow with lower bounds.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Slack allowed when checking reduced costs and residual cycles.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    pub upper: i64,
    pub cost: f64,
}

/// Directed network with per-node supplies (positive at sources).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    pub supply: Vec<i64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            nodes,
            edges: Vec::new(),
            supply: vec![0; nodes],
        }
    }

    /// Adds an edge and returns its index.
    pub fn add_edge(&mut self, from: usize, to: usize, lower: i64, upper: i64, cost: f64) -> usize {
        self.edges.push(Edge {
            from,
            to,
            lower,
            upper,
            cost,
        });
        self.edges.len() - 1
    }

    /// Checks bounds and conservation for a flow on this network.
    pub fn check_flow(&self, flow: &[i64]) -> Result<()> {
        if flow.len() != self.edges.len() {
            return Err(Error::invalid("flow has the wrong number of edges"));
        }
        let mut balance = self.supply.clone();
        for (e, &f) in self.edges.iter().zip(flow) {
            if f < e.lower || f > e.upper {
                return Err(Error::infeasible(alloc::format!(
                    "flow {f} on edge {}→{} violates bounds [{}, {}]",
                    e.from,
                    e.to,
                    e.lower,
                    e.upper
                )));
            }
            balance[e.from] -= f;
            balance[e.to] += f;
        }
        if let Some(v) = balance.iter().position(|&b| b != 0) {
            return Err(Error::infeasible(alloc::format!("conservation fails at node {v}")));
        }
        Ok(())
    }

    pub fn cost(&self, flow: &[i64]) -> f64 {
        self.edges.iter().zip(flow).map(|(e, &f)| e.cost * f as f64).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralFlow {
    /// Units on each edge of the network, in edge order.
    pub flow: Vec<i64>,
    pub cost: f64,
    pub augmentations: usize,
    /// The residual graph passed the negative-cycle check.
    pub certified: bool,
}

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

/// Residual graph with paired arcs: arc `2e` is forward, `2e+1` backward.
struct Residual {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Residual {
    fn new(nodes: usize) -> Self {
        Residual {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.out[from].push(id);
        self.out[to].push(id + 1);
        id
    }

    fn from(&self, arc: usize) -> usize {
        self.arcs[arc ^ 1].to
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties by lower node index
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bellman–Ford distances from `source` over arcs with positive capacity.
/// Unreachable nodes get `+inf`; a negative cycle is an error.
fn bellman_ford(res: &Residual, source: usize) -> Result<Vec<f64>> {
    let n = res.out.len();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    for round in 0..=n {
        let mut changed = false;
        for u in 0..n {
            if dist[u] == f64::INFINITY {
                continue;
            }
            for &a in &res.out[u] {
                let arc = &res.arcs[a];
                if arc.cap > 0 && dist[u] + arc.cost < dist[arc.to] - 1e-12 {
                    dist[arc.to] = dist[u] + arc.cost;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(dist);
        }
        if round == n {
            break;
        }
    }
    Err(Error::invalid("network contains a negative-cost cycle"))
}

/// No residual cycle has cost below `-tolerance`: all-zero start, repeated
/// relaxation, then a reduced-cost check on every arc.
fn residual_certificate(res: &Residual) -> bool {
    let n = res.out.len();
    let mut dist = vec![0.0; n];
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            for &a in &res.out[u] {
                let arc = &res.arcs[a];
                if arc.cap > 0 && dist[u] + arc.cost < dist[arc.to] - 1e-12 {
                    dist[arc.to] = dist[u] + arc.cost;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).all(|u| {
        res.out[u].iter().all(|&a| {
            let arc = &res.arcs[a];
            arc.cap <= 0 || dist[arc.to] <= dist[u] + arc.cost + CERTIFICATE_TOLERANCE
        })
    })
}

/// Min-cost flow meeting every supply, by successive shortest paths with
/// node potentials. Lower bounds are moved into the supplies first.
pub fn min_cost_flow(net: &FlowNetwork) -> Result<IntegralFlow> {
    if net.supply.len() != net.nodes {
        return Err(Error::invalid("supply vector does not match the node count"));
    }
    if net.supply.iter().sum::<i64>() != 0 {
        return Err(Error::infeasible("supplies do not balance"));
    }
    let mut balance = net.supply.clone();
    for (idx, e) in net.edges.iter().enumerate() {
        if e.from >= net.nodes || e.to >= net.nodes {
            return Err(Error::invalid(alloc::format!("edge {idx} leaves the network")));
        }
        if e.lower < 0 || e.lower > e.upper {
            return Err(Error::infeasible(alloc::format!("edge {idx} has empty bounds")));
        }
        if !e.cost.is_finite() {
            return Err(Error::invalid(alloc::format!("edge {idx} has a non-finite cost")));
        }
        balance[e.from] -= e.lower;
        balance[e.to] += e.lower;
    }
    let source = net.nodes;
    let sink = net.nodes + 1;
    let mut res = Residual::new(net.nodes + 2);
    let edge_arcs: Vec<usize> = net
        .edges
        .iter()
        .map(|e| res.add(e.from, e.to, e.upper - e.lower, e.cost))
        .collect();
    let mut required = 0;
    for (v, &b) in balance.iter().enumerate() {
        if b > 0 {
            res.add(source, v, b, 0.0);
            required += b;
        } else if b < 0 {
            res.add(v, sink, -b, 0.0);
        }
    }

    let mut potential = bellman_ford(&res, source)?;
    let total = res.out.len();
    let mut sent = 0;
    let mut augmentations = 0;
    while sent < required {
        let mut dist = vec![f64::INFINITY; total];
        let mut parent = vec![usize::MAX; total];
        let mut done = vec![false; total];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry {
            dist: 0.0,
            node: source,
        });
        while let Some(Entry { dist: d, node: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &a in &res.out[u] {
                let arc = &res.arcs[a];
                if arc.cap <= 0 || potential[arc.to] == f64::INFINITY {
                    continue;
                }
                let reduced = (arc.cost + potential[u] - potential[arc.to]).max(0.0);
                let next = d + reduced;
                if next < dist[arc.to] {
                    dist[arc.to] = next;
                    parent[arc.to] = a;
                    heap.push(Entry {
                        dist: next,
                        node: arc.to,
                    });
                }
            }
        }
        if dist[sink] == f64::INFINITY {
            break;
        }
        for v in 0..total {
            if dist[v] < f64::INFINITY {
                potential[v] += dist[v];
            }
        }
        let mut bottleneck = required - sent;
        let mut v = sink;
        while v != source {
            let a = parent[v];
            bottleneck = bottleneck.min(res.arcs[a].cap);
            v = res.from(a);
        }
        let mut v = sink;
        while v != source {
            let a = parent[v];
            res.arcs[a].cap -= bottleneck;
            res.arcs[a ^ 1].cap += bottleneck;
            v = res.from(a);
        }
        sent += bottleneck;
        augmentations += 1;
    }
    if sent < required {
        return Err(Error::infeasible("no flow satisfies the bounds and supplies"));
    }
    let flow: Vec<i64> = net
        .edges
        .iter()
        .zip(&edge_arcs)
        .map(|(e, &a)| e.lower + res.arcs[a ^ 1].cap)
        .collect();
    Ok(IntegralFlow {
        cost: net.cost(&flow),
        certified: residual_certificate(&res),
        flow,
        augmentations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_cheaper_parallel_path() {
        let mut net = FlowNetwork::new(4);
        net.add_edge(0, 1, 0, 1, 1.0);
        net.add_edge(0, 2, 0, 1, 3.0);
        net.add_edge(1, 3, 0, 1, 1.0);
        net.add_edge(2, 3, 0, 1, 0.0);
        net.supply[0] = 1;
        net.supply[3] = -1;
        let flow = min_cost_flow(&net).unwrap();
        assert_eq!(flow.flow, vec![1, 0, 1, 0]);
        assert!((flow.cost - 2.0).abs() < 1e-12);
        assert!(flow.certified);
        net.check_flow(&flow.flow).unwrap();
    }

    #[test]
    fn lower_bound_forces_expensive_edge() {
        let mut net = FlowNetwork::new(2);
        net.add_edge(0, 1, 0, 2, 1.0);
        net.add_edge(0, 1, 1, 1, 5.0);
        net.supply[0] = 2;
        net.supply[1] = -2;
        let flow = min_cost_flow(&net).unwrap();
        assert_eq!(flow.flow, vec![1, 1]);
        assert!((flow.cost - 6.0).abs() < 1e-12);
    }

    #[test]
    fn negative_costs_are_handled() {
        let mut net = FlowNetwork::new(3);
        net.add_edge(0, 1, 0, 1, -2.0);
        net.add_edge(1, 2, 0, 1, -1.0);
        net.add_edge(0, 2, 0, 1, -2.5);
        net.supply[0] = 1;
        net.supply[2] = -1;
        let flow = min_cost_flow(&net).unwrap();
        assert_eq!(flow.flow, vec![1, 1, 0]);
        assert!(flow.certified);
    }

    #[test]
    fn infeasible_bounds() {
        let mut net = FlowNetwork::new(2);
        net.add_edge(0, 1, 0, 1, 0.0);
        net.supply[0] = 2;
        net.supply[1] = -2;
        assert!(matches!(min_cost_flow(&net), Err(Error::Infeasible(_))));
        let mut net = FlowNetwork::new(2);
        net.add_edge(0, 1, 2, 1, 0.0);
        assert!(matches!(min_cost_flow(&net), Err(Error::Infeasible(_))));
    }

    #[test]
    fn check_flow_catches_violations() {
        let mut net = FlowNetwork::new(2);
        net.add_edge(0, 1, 0, 1, 0.0);
        net.supply[0] = 1;
        net.supply[1] = -1;
        assert!(net.check_flow(&[1]).is_ok());
        assert!(net.check_flow(&[0]).is_err());
        assert!(net.check_flow(&[2]).is_err());
    }
}
