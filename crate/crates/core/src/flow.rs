//! Exact network-flow kernel.
//!
//! `max_flow` is Edmonds-Karp (shortest augmenting paths), which terminates
//! for any exact capacity type. `max_cost_flow` runs successive shortest paths
//! on negated costs: Bellman-Ford for the first potentials, Dijkstra on reduced
//! costs afterwards. Costs are arbitrary-precision integers.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Debug;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{FlgError, Result};

/// Capacity / flow values: exact, totally ordered, additive.
pub trait FlowValue: Clone + Ord + Debug + Zero + Add<Output = Self> + Sub<Output = Self> {}

impl<T> FlowValue for T where T: Clone + Ord + Debug + Zero + Add<Output = T> + Sub<Output = T> {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowArc<C> {
    pub from: usize,
    pub to: usize,
    pub cap: C,
    pub cost: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowNetwork<C> {
    pub nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<FlowArc<C>>,
}

impl<C: FlowValue> FlowNetwork<C> {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        FlowNetwork { nodes, source, sink, arcs: Vec::new() }
    }

    /// Appends an arc and returns its index.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: C, cost: BigInt) -> usize {
        self.arcs.push(FlowArc { from, to, cap, cost });
        self.arcs.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.source >= self.nodes || self.sink >= self.nodes || self.source == self.sink {
            return Err(FlgError::Network("source/sink must be distinct existing nodes".into()));
        }
        for (i, a) in self.arcs.iter().enumerate() {
            if a.from >= self.nodes || a.to >= self.nodes {
                return Err(FlgError::Network(format!("arc {i} has an endpoint outside the network")));
            }
            if a.cap < C::zero() {
                return Err(FlgError::Network(format!("arc {i} has negative capacity")));
            }
            if a.from == self.sink || a.to == self.source {
                return Err(FlgError::Network(format!("arc {i} leaves the sink or enters the source")));
            }
        }
        Ok(())
    }

    /// Total capacity of arcs leaving `side` (a node membership vector).
    pub fn cut_capacity(&self, side: &[bool]) -> C {
        self.arcs.iter().filter(|a| side[a.from] && !side[a.to]).fold(C::zero(), |acc, a| acc + a.cap.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowResult<C> {
    pub flow: Vec<C>,
    pub value: C,
    /// Total cost; only `max_cost_flow` computes it (zero from `max_flow`).
    pub cost: BigInt,
    /// Nodes reachable from the source in the residual graph (a minimum cut).
    pub source_side: Vec<bool>,
}

/// Residual adjacency: for each node, (arc index, forward?) pairs.
fn adjacency<C>(net: &FlowNetwork<C>) -> Vec<Vec<(usize, bool)>> {
    let mut adj = vec![Vec::new(); net.nodes];
    for (i, a) in net.arcs.iter().enumerate() {
        adj[a.from].push((i, true));
        adj[a.to].push((i, false));
    }
    adj
}

fn residual<C: FlowValue>(net: &FlowNetwork<C>, flow: &[C], arc: usize, forward: bool) -> C {
    if forward {
        net.arcs[arc].cap.clone() - flow[arc].clone()
    } else {
        flow[arc].clone()
    }
}

fn reachable_from_source<C: FlowValue>(net: &FlowNetwork<C>, adj: &[Vec<(usize, bool)>], flow: &[C]) -> Vec<bool> {
    let mut seen = vec![false; net.nodes];
    let mut queue = VecDeque::from([net.source]);
    seen[net.source] = true;
    while let Some(u) = queue.pop_front() {
        for &(i, fwd) in &adj[u] {
            let v = if fwd { net.arcs[i].to } else { net.arcs[i].from };
            if !seen[v] && residual(net, flow, i, fwd) > C::zero() {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

fn net_outflow<C: FlowValue>(net: &FlowNetwork<C>, flow: &[C], node: usize) -> C {
    let mut out = C::zero();
    for (i, a) in net.arcs.iter().enumerate() {
        if a.from == node {
            out = out + flow[i].clone();
        }
        if a.to == node {
            out = out - flow[i].clone();
        }
    }
    out
}

/// Maximum s-t flow with a minimum cut attached.
pub fn max_flow<C: FlowValue>(net: &FlowNetwork<C>) -> Result<FlowResult<C>> {
    net.validate()?;
    let adj = adjacency(net);
    let mut flow = vec![C::zero(); net.arcs.len()];
    let mut value = C::zero();
    loop {
        // BFS for a shortest augmenting path.
        let mut parent: Vec<Option<(usize, bool)>> = vec![None; net.nodes];
        let mut seen = vec![false; net.nodes];
        seen[net.source] = true;
        let mut queue = VecDeque::from([net.source]);
        while let Some(u) = queue.pop_front() {
            if u == net.sink {
                break;
            }
            for &(i, fwd) in &adj[u] {
                let v = if fwd { net.arcs[i].to } else { net.arcs[i].from };
                if !seen[v] && residual(net, &flow, i, fwd) > C::zero() {
                    seen[v] = true;
                    parent[v] = Some((i, fwd));
                    queue.push_back(v);
                }
            }
        }
        if !seen[net.sink] {
            break;
        }
        let mut path = Vec::new();
        let mut v = net.sink;
        while v != net.source {
            let (i, fwd) = parent[v].expect("BFS tree reaches sink");
            path.push((i, fwd));
            v = if fwd { net.arcs[i].from } else { net.arcs[i].to };
        }
        let bottleneck = path.iter().map(|&(i, fwd)| residual(net, &flow, i, fwd)).min().expect("nonempty path");
        for &(i, fwd) in &path {
            flow[i] = if fwd { flow[i].clone() + bottleneck.clone() } else { flow[i].clone() - bottleneck.clone() };
        }
        value = value + bottleneck;
    }
    let source_side = reachable_from_source(net, &adj, &flow);
    Ok(FlowResult { flow, value, cost: BigInt::zero(), source_side })
}

/// Checks capacity bounds, conservation, and that `result.value` is the net
/// outflow of the source.
pub fn check_flow<C: FlowValue>(net: &FlowNetwork<C>, result: &FlowResult<C>) -> Result<()> {
    if result.flow.len() != net.arcs.len() {
        return Err(FlgError::Network("stale result: arc count differs".into()));
    }
    for (i, a) in net.arcs.iter().enumerate() {
        if result.flow[i] < C::zero() || result.flow[i] > a.cap {
            return Err(FlgError::Network(format!("stale result: arc {i} violates its capacity")));
        }
    }
    for node in 0..net.nodes {
        if node == net.source || node == net.sink {
            continue;
        }
        if !net_outflow(net, &result.flow, node).is_zero() {
            return Err(FlgError::Network(format!("stale result: conservation fails at node {node}")));
        }
    }
    if net_outflow(net, &result.flow, net.source) != result.value {
        return Err(FlgError::Network("stale result: value mismatch".into()));
    }
    Ok(())
}

/// The inclusion-maximal source side among all minimum cuts: every node that
/// cannot reach the sink in the residual graph.
pub fn max_source_side_min_cut<C: FlowValue>(net: &FlowNetwork<C>, result: &FlowResult<C>) -> Result<Vec<bool>> {
    check_flow(net, result)?;
    let adj = adjacency(net);
    // Reverse search: x reaches the sink if some residual arc x -> y has y reaching it.
    let mut reaches = vec![false; net.nodes];
    reaches[net.sink] = true;
    let mut queue = VecDeque::from([net.sink]);
    while let Some(y) = queue.pop_front() {
        for &(i, fwd) in &adj[y] {
            // Arc i touches y. If y is its head, the forward residual goes tail -> y.
            // If y is its tail, the backward residual goes head -> y.
            let (x, x_fwd) = if fwd { (net.arcs[i].to, false) } else { (net.arcs[i].from, true) };
            if !reaches[x] && residual(net, &result.flow, i, x_fwd) > C::zero() {
                reaches[x] = true;
                queue.push_back(x);
            }
        }
    }
    if reaches[net.source] {
        return Err(FlgError::Network("stale result: flow is not maximum".into()));
    }
    Ok(reaches.into_iter().map(|r| !r).collect())
}

/// Among maximum-value integral flows, one of maximum total cost.
pub fn max_cost_flow(net: &FlowNetwork<i64>) -> Result<FlowResult<i64>> {
    net.validate()?;
    let n = net.nodes;
    let adj = adjacency(net);
    let mut flow = vec![0i64; net.arcs.len()];
    // Work with negated costs and minimize.
    let arc_cost = |i: usize, fwd: bool| -> BigInt {
        if fwd {
            -net.arcs[i].cost.clone()
        } else {
            net.arcs[i].cost.clone()
        }
    };
    let head = |i: usize, fwd: bool| if fwd { net.arcs[i].to } else { net.arcs[i].from };
    let res = |flow: &[i64], i: usize, fwd: bool| {
        if fwd {
            net.arcs[i].cap - flow[i]
        } else {
            flow[i]
        }
    };

    // Initial potentials: label-correcting shortest paths from the source.
    let mut potential: Vec<Option<BigInt>> = vec![None; n];
    potential[net.source] = Some(BigInt::zero());
    for round in 0..n {
        let mut changed = false;
        for u in 0..n {
            let Some(du) = potential[u].clone() else { continue };
            for &(i, fwd) in &adj[u] {
                if res(&flow, i, fwd) <= 0 {
                    continue;
                }
                let v = head(i, fwd);
                let cand = &du + arc_cost(i, fwd);
                if potential[v].as_ref().map_or(true, |d| cand < *d) {
                    potential[v] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
        if round + 1 == n {
            return Err(FlgError::Network("positive-cost cycle in the initial network".into()));
        }
    }
    let mut pot: Vec<BigInt> = potential.iter().map(|p| p.clone().unwrap_or_default()).collect();
    let mut reachable: Vec<bool> = potential.iter().map(|p| p.is_some()).collect();

    let mut value = 0i64;
    loop {
        // Dijkstra on reduced costs c(u,v) + pot[u] - pot[v] >= 0.
        let mut dist: Vec<Option<BigInt>> = vec![None; n];
        let mut parent: Vec<Option<(usize, bool)>> = vec![None; n];
        let mut done = vec![false; n];
        dist[net.source] = Some(BigInt::zero());
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((BigInt::zero(), net.source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(i, fwd) in &adj[u] {
                if res(&flow, i, fwd) <= 0 {
                    continue;
                }
                let v = head(i, fwd);
                if !reachable[v] {
                    // Unreached by the initial search: no valid potential yet.
                    // It can only become reachable through a reverse arc, which
                    // would require flow into it, so it stays unreachable.
                    continue;
                }
                let reduced = arc_cost(i, fwd) + &pot[u] - &pot[v];
                debug_assert!(!reduced.is_negative(), "negative reduced cost");
                let cand = &d + reduced;
                if dist[v].as_ref().map_or(true, |dv| cand < *dv) {
                    dist[v] = Some(cand.clone());
                    parent[v] = Some((i, fwd));
                    heap.push(Reverse((cand, v)));
                }
            }
        }
        let Some(_) = dist[net.sink] else { break };
        let mut path = Vec::new();
        let mut v = net.sink;
        while v != net.source {
            let (i, fwd) = parent[v].expect("shortest-path tree reaches sink");
            path.push((i, fwd));
            v = if fwd { net.arcs[i].from } else { net.arcs[i].to };
        }
        let bottleneck = path.iter().map(|&(i, fwd)| res(&flow, i, fwd)).min().expect("nonempty path");
        for &(i, fwd) in &path {
            if fwd {
                flow[i] += bottleneck;
            } else {
                flow[i] -= bottleneck;
            }
        }
        value += bottleneck;
        for u in 0..n {
            if let Some(d) = &dist[u] {
                pot[u] = &pot[u] + d;
            } else {
                // Nodes not settled keep their potential; they are no longer
                // reachable and stay excluded from reduced-cost searches.
                reachable[u] = false;
            }
        }
    }
    let cost = net.arcs.iter().zip(&flow).map(|(a, &f)| &a.cost * BigInt::from(f)).sum();
    let source_side = reachable_from_source(net, &adj, &flow);
    Ok(FlowResult { flow, value, cost, source_side })
}

/// Minimum cut capacity by enumerating every source side (micro networks only).
pub fn min_cut_bruteforce<C: FlowValue>(net: &FlowNetwork<C>) -> Result<C> {
    net.validate()?;
    let inner: Vec<usize> = (0..net.nodes).filter(|&v| v != net.source && v != net.sink).collect();
    if inner.len() > 20 {
        return Err(FlgError::GuardExceeded { what: "cut enumeration nodes".into(), limit: 20, actual: inner.len() });
    }
    let mut best: Option<C> = None;
    for mask in 0u32..1 << inner.len() {
        let mut side = vec![false; net.nodes];
        side[net.source] = true;
        for (i, &v) in inner.iter().enumerate() {
            side[v] = mask >> i & 1 == 1;
        }
        let c = net.cut_capacity(&side);
        if best.as_ref().map_or(true, |b| c < *b) {
            best = Some(c);
        }
    }
    Ok(best.expect("at least one cut"))
}

/// Value and cost of a maximum-value, then maximum-cost flow, by enumerating
/// every integral arc assignment. `guard` bounds the number of assignments.
pub fn max_cost_flow_bruteforce(net: &FlowNetwork<i64>, guard: u64) -> Result<(i64, BigInt)> {
    net.validate()?;
    let count = net.arcs.iter().try_fold(1u64, |acc, a| acc.checked_mul(a.cap as u64 + 1));
    match count {
        Some(c) if c <= guard => {}
        _ => {
            return Err(FlgError::GuardExceeded {
                what: "flow assignments".into(),
                limit: guard as usize,
                actual: count.map_or(usize::MAX, |c| c as usize),
            })
        }
    }
    fn rec(net: &FlowNetwork<i64>, i: usize, bal: &mut [i64], cost: &mut BigInt, best: &mut Option<(i64, BigInt)>) {
        if i == net.arcs.len() {
            let ok = (0..net.nodes).all(|v| v == net.source || v == net.sink || bal[v] == 0);
            if ok {
                let cand = (bal[net.source], cost.clone());
                if best.as_ref().map_or(true, |b| cand > *b) {
                    *best = Some(cand);
                }
            }
            return;
        }
        let a = &net.arcs[i];
        for x in 0..=a.cap {
            bal[a.from] += x;
            bal[a.to] -= x;
            *cost += &a.cost * x;
            rec(net, i + 1, bal, cost, best);
            *cost -= &a.cost * x;
            bal[a.from] -= x;
            bal[a.to] += x;
        }
    }
    let mut best = None;
    rec(net, 0, &mut vec![0; net.nodes], &mut BigInt::zero(), &mut best);
    Ok(best.expect("the zero flow is feasible"))
}
