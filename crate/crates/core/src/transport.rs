//! Supply–demand feasibility on bipartite graphs via max-flow, returning
//! either a transport plan or a Hall-type violator.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Supplies below this are dropped before solving.
pub const DROP_SUPPLY: f64 = 1e-12;
/// Marginal and feasibility tolerance.
pub const PLAN_TOL: f64 = 1e-8;
const BALANCE_TOL: f64 = 1e-9;
const RESIDUAL_EPS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("supply total {supply} and demand total {demand} differ")]
    UnbalancedInstance { supply: f64, demand: f64 },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("left node {0} has no supply")]
    ZeroSupplyNode(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportInstance {
    pub left_supply: Vec<f64>,
    pub right_demand: Vec<f64>,
    /// Admissible `(left, right)` pairs.
    pub edges: Vec<(usize, usize)>,
}

impl TransportInstance {
    pub fn new(
        left_supply: Vec<f64>,
        right_demand: Vec<f64>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, TransportError> {
        let inst = Self { left_supply, right_demand, edges };
        inst.check()?;
        Ok(inst)
    }

    pub fn check(&self) -> Result<(), TransportError> {
        let bad = |v: &[f64]| v.iter().any(|x| !x.is_finite() || *x < 0.0);
        if bad(&self.left_supply) || bad(&self.right_demand) {
            return Err(TransportError::Invalid("supplies and demands must be finite and nonnegative".into()));
        }
        if let Some(e) = self.edges.iter().find(|(l, r)| *l >= self.left_supply.len() || *r >= self.right_demand.len())
        {
            return Err(TransportError::Invalid(format!("edge {e:?} out of range")));
        }
        let supply: f64 = self.left_supply.iter().sum();
        let demand: f64 = self.right_demand.iter().sum();
        if (supply - demand).abs() > BALANCE_TOL {
            return Err(TransportError::UnbalancedInstance { supply, demand });
        }
        Ok(())
    }

    /// Complete bipartite graph between the two sides.
    pub fn complete(left_supply: Vec<f64>, right_demand: Vec<f64>) -> Result<Self, TransportError> {
        let edges = (0..left_supply.len()).flat_map(|l| (0..right_demand.len()).map(move |r| (l, r))).collect();
        Self::new(left_supply, right_demand, edges)
    }
}

/// Edge-supported joint distribution with the instance's marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub left_count: usize,
    pub right_count: usize,
    /// Positive flows keyed by `(left, right)`.
    pub flow: BTreeMap<(usize, usize), f64>,
}

impl TransportPlan {
    pub fn left_marginals(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.left_count];
        for (&(l, _), &f) in &self.flow {
            m[l] += f;
        }
        m
    }

    pub fn right_marginals(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.right_count];
        for (&(_, r), &f) in &self.flow {
            m[r] += f;
        }
        m
    }
}

/// Right-node set whose demand exceeds the supply of its neighbourhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HallViolator {
    pub right_nodes: Vec<usize>,
    pub demand: f64,
    pub neighbourhood_supply: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransportOutcome {
    Feasible(TransportPlan),
    Infeasible(HallViolator),
}

struct FlowEdge {
    to: usize,
    cap: f64,
    rev: usize,
}

struct FlowNetwork {
    adj: Vec<Vec<FlowEdge>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        Self { adj: (0..nodes).map(|_| Vec::new()).collect() }
    }

    /// Returns (node, index) of the forward edge.
    fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> (usize, usize) {
        let fwd = self.adj[from].len();
        let back = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(FlowEdge { to, cap, rev: back });
        self.adj[to].push(FlowEdge { to: from, cap: 0.0, rev: fwd });
        (from, fwd)
    }

    /// Edmonds–Karp: shortest augmenting paths by BFS.
    fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
            let mut queue = VecDeque::from([source]);
            let mut visited = vec![false; self.adj.len()];
            visited[source] = true;
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for (ei, e) in self.adj[u].iter().enumerate() {
                    if !visited[e.to] && e.cap > RESIDUAL_EPS {
                        visited[e.to] = true;
                        prev[e.to] = Some((u, ei));
                        queue.push_back(e.to);
                    }
                }
            }
            if !visited[sink] {
                return total;
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = sink;
            while let Some((u, ei)) = prev[v] {
                bottleneck = bottleneck.min(self.adj[u][ei].cap);
                v = u;
            }
            let mut v = sink;
            while let Some((u, ei)) = prev[v] {
                self.adj[u][ei].cap -= bottleneck;
                let rev = self.adj[u][ei].rev;
                self.adj[v][rev].cap += bottleneck;
                v = u;
            }
            total += bottleneck;
        }
    }

    fn reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for e in &self.adj[u] {
                if !seen[e.to] && e.cap > RESIDUAL_EPS {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }
}

/// Decides the supply–demand problem by max-flow.
///
/// Source → left at supply capacity, left → right unbounded on edges,
/// right → sink at demand capacity. The source side of the final residual
/// cut yields the violator when the flow falls short.
pub fn feasible_transport(inst: &TransportInstance) -> Result<TransportOutcome, TransportError> {
    inst.check()?;
    let (nl, nr) = (inst.left_supply.len(), inst.right_demand.len());
    let source = 0;
    let sink = nl + nr + 1;
    let mut net = FlowNetwork::new(nl + nr + 2);
    for (l, &s) in inst.left_supply.iter().enumerate() {
        let cap = if s < DROP_SUPPLY { 0.0 } else { s };
        net.add_edge(source, 1 + l, cap);
    }
    let mut edge_handles = Vec::with_capacity(inst.edges.len());
    for &(l, r) in &inst.edges {
        edge_handles.push(((l, r), net.add_edge(1 + l, 1 + nl + r, f64::INFINITY)));
    }
    for (r, &d) in inst.right_demand.iter().enumerate() {
        net.add_edge(1 + nl + r, sink, d);
    }
    let flow = net.max_flow(source, sink);
    let demand: f64 = inst.right_demand.iter().sum();

    if flow >= demand - PLAN_TOL {
        let mut plan = BTreeMap::new();
        for ((l, r), (node, idx)) in edge_handles {
            let e = &net.adj[node][idx];
            // pushed flow sits on the reverse edge
            let pushed = net.adj[e.to][e.rev].cap;
            if pushed > 0.0 {
                *plan.entry((l, r)).or_insert(0.0) += pushed;
            }
        }
        return Ok(TransportOutcome::Feasible(TransportPlan { left_count: nl, right_count: nr, flow: plan }));
    }

    let seen = net.reachable(source);
    let right_nodes: Vec<usize> = (0..nr).filter(|&r| !seen[1 + nl + r]).collect();
    let mut in_t = vec![false; nr];
    for &r in &right_nodes {
        in_t[r] = true;
    }
    let mut neighbours = vec![false; nl];
    for &(l, r) in &inst.edges {
        if in_t[r] {
            neighbours[l] = true;
        }
    }
    let t_demand = right_nodes.iter().map(|&r| inst.right_demand[r]).sum();
    let n_supply = (0..nl).filter(|&l| neighbours[l]).map(|l| inst.left_supply[l]).sum();
    Ok(TransportOutcome::Infeasible(HallViolator { right_nodes, demand: t_demand, neighbourhood_supply: n_supply }))
}

/// Conditional distribution over right nodes for each left node with supply
/// above [`DROP_SUPPLY`].
pub fn conditional_columns(plan: &TransportPlan, supply: &[f64]) -> Result<BTreeMap<usize, Vec<f64>>, TransportError> {
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (&(l, r), &f) in &plan.flow {
        rows.entry(l).or_insert_with(|| vec![0.0; plan.right_count])[r] += f;
    }
    let mut out = BTreeMap::new();
    for (l, row) in rows {
        let s = supply.get(l).copied().unwrap_or(0.0);
        let mass: f64 = row.iter().sum();
        if s <= DROP_SUPPLY {
            if mass > DROP_SUPPLY {
                return Err(TransportError::ZeroSupplyNode(l));
            }
            continue;
        }
        out.insert(l, row.into_iter().map(|f| f / mass).collect());
    }
    Ok(out)
}

/// Conditional column of one left node.
pub fn conditional_column(plan: &TransportPlan, supply: &[f64], node: usize) -> Result<Vec<f64>, TransportError> {
    if supply.get(node).copied().unwrap_or(0.0) <= DROP_SUPPLY {
        return Err(TransportError::ZeroSupplyNode(node));
    }
    conditional_columns(plan, supply)?.remove(&node).ok_or(TransportError::ZeroSupplyNode(node))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_is_feasible() {
        let inst = TransportInstance::complete(vec![0.2, 0.8], vec![0.5, 0.3, 0.2]).unwrap();
        let TransportOutcome::Feasible(plan) = feasible_transport(&inst).unwrap() else {
            panic!("expected feasible");
        };
        for (a, b) in plan.left_marginals().iter().zip(&inst.left_supply) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in plan.right_marginals().iter().zip(&inst.right_demand) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_instance_reports_violator() {
        let inst = TransportInstance::new(vec![0.7, 0.3], vec![0.5, 0.5], vec![(0, 0), (1, 1)]).unwrap();
        let TransportOutcome::Infeasible(v) = feasible_transport(&inst).unwrap() else {
            panic!("expected violator");
        };
        assert_eq!(v.right_nodes, vec![1]);
        assert!(v.demand > v.neighbourhood_supply + PLAN_TOL);
        assert!((v.demand - 0.5).abs() < 1e-15 && (v.neighbourhood_supply - 0.3).abs() < 1e-15);
    }

    #[test]
    fn unbalanced_rejected() {
        assert!(matches!(
            TransportInstance::complete(vec![0.5], vec![0.6]),
            Err(TransportError::UnbalancedInstance { .. })
        ));
    }

    #[test]
    fn conditional_column_examples() {
        let inst = TransportInstance::complete(vec![1.0], vec![0.2, 0.3, 0.5]).unwrap();
        let TransportOutcome::Feasible(plan) = feasible_transport(&inst).unwrap() else { panic!() };
        let col = conditional_column(&plan, &inst.left_supply, 0).unwrap();
        for (a, b) in col.iter().zip(&inst.right_demand) {
            assert!((a - b).abs() < 1e-15);
        }

        let mut flow = BTreeMap::new();
        for l in 0..2 {
            for r in 0..2 {
                flow.insert((l, r), 0.25);
            }
        }
        let plan = TransportPlan { left_count: 2, right_count: 2, flow };
        let cols = conditional_columns(&plan, &[0.5, 0.5]).unwrap();
        assert!(cols.values().all(|c| c == &vec![0.5, 0.5]));
        assert!(matches!(conditional_columns(&plan, &[0.5, 0.0]), Err(TransportError::ZeroSupplyNode(1))));
        assert!(matches!(conditional_column(&plan, &[0.5, 0.0], 1), Err(TransportError::ZeroSupplyNode(1))));
    }

    #[test]
    fn tiny_supplies_are_dropped() {
        let inst = TransportInstance::new(vec![1.0 - 1e-13, 1e-13], vec![1.0], vec![(0, 0), (1, 0)]).unwrap();
        let TransportOutcome::Feasible(plan) = feasible_transport(&inst).unwrap() else { panic!() };
        assert!(!plan.flow.contains_key(&(1, 0)));
    }
}
