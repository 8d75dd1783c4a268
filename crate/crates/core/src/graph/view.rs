use serde::{Deserialize, Serialize};

use super::{classify, FactorGraph, FactorId, VarId};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which single-node-type picture of a factor graph a [`SimpleGraph`] shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViewMode {
    /// Nodes are variables, edges are scope-2 factors.
    Network,
    /// Nodes are factors, edges are degree-2 variables.
    TensorNetwork,
    /// Nodes are variables followed by factors; edges are incidences.
    Bipartite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Variable(VarId),
    Factor(FactorId),
}

/// Object of the factor graph an edge stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Carried {
    Factor(FactorId),
    Variable(VarId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SgEdge {
    pub a: usize,
    pub b: usize,
    pub carried: Carried,
}

impl SgEdge {
    pub fn other(&self, n: usize) -> usize {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }
}

/// Undirected multigraph with dangling edges; double edges are kept.
#[derive(Debug, Clone)]
pub struct SimpleGraph {
    mode: ViewMode,
    nodes: Vec<NodeRef>,
    names: Vec<String>,
    edges: Vec<SgEdge>,
    dangling: Vec<(usize, Carried)>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl SimpleGraph {
    fn assemble(
        mode: ViewMode,
        nodes: Vec<NodeRef>,
        names: Vec<String>,
        edges: Vec<SgEdge>,
        dangling: Vec<(usize, Carried)>,
    ) -> Self {
        let mut adj = vec![Vec::new(); nodes.len()];
        for (e, ed) in edges.iter().enumerate() {
            adj[ed.a].push((ed.b, e));
            adj[ed.b].push((ed.a, e));
        }
        SimpleGraph { mode, nodes, names, edges, dangling, adj }
    }

    /// Plain graph on `n` nodes named `0..n`; edge `k` carries factor `k`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let nodes = (0..n).map(NodeRef::Variable).collect();
        let names = (0..n).map(|k| k.to_string()).collect();
        let edges = edges
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| SgEdge { a, b, carried: Carried::Factor(k) })
            .collect();
        Self::assemble(ViewMode::Network, nodes, names, edges, Vec::new())
    }

    /// Same as [`SimpleGraph::from_edges`] with node names.
    pub fn from_named_edges(names: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let find = |s: &str| {
            names.iter().position(|n| *n == s).ok_or_else(|| Error::NodeNotFound(s.to_string()))
        };
        let mut idx = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            idx.push((find(a)?, find(b)?));
        }
        let mut g = Self::from_edges(names.len(), &idx);
        g.names = names.iter().map(|s| s.to_string()).collect();
        Ok(g)
    }

    pub fn mode(&self) -> ViewMode {
        self.mode
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, i: usize) -> NodeRef {
        self.nodes[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn node_by_name(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::NodeNotFound(name.to_string()))
    }

    pub fn edges(&self) -> &[SgEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &SgEdge {
        &self.edges[e]
    }

    pub fn dangling(&self) -> &[(usize, Carried)] {
        &self.dangling
    }

    /// `(neighbor, edge index)` pairs; a double edge appears twice.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Distinct neighbor nodes of `i`, sorted.
    pub fn neighbor_nodes(&self, i: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.adj[i].iter().map(|&(n, _)| n).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Host node that stands for factor `a`.
    pub fn factor_node(&self, a: FactorId) -> Option<usize> {
        self.nodes.iter().position(|n| *n == NodeRef::Factor(a))
    }

    /// Host node that stands for variable `v`.
    pub fn variable_node(&self, v: VarId) -> Option<usize> {
        self.nodes.iter().position(|n| *n == NodeRef::Variable(v))
    }

    /// Every edge of the subgraph induced by `nodes` (sorted node list).
    pub fn induced_edges(&self, nodes: &[usize]) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| nodes.binary_search(&e.a).is_ok() && nodes.binary_search(&e.b).is_ok())
            .map(|(k, _)| k)
            .collect()
    }

    /// Rebuilds the factor scopes a view was derived from, each sorted.
    pub fn scopes(&self) -> Vec<Vec<VarId>> {
        let mut nf = 0;
        let mut bump = |c: &Carried| {
            if let Carried::Factor(a) = c {
                nf = nf.max(a + 1);
            }
        };
        for e in &self.edges {
            bump(&e.carried);
        }
        for (_, c) in &self.dangling {
            bump(c);
        }
        for n in &self.nodes {
            if let NodeRef::Factor(a) = n {
                nf = nf.max(a + 1);
            }
        }
        let mut scopes: Vec<Vec<VarId>> = vec![Vec::new(); nf];
        let var_of = |n: usize| match self.nodes[n] {
            NodeRef::Variable(v) => v,
            NodeRef::Factor(_) => unreachable!(),
        };
        let fac_of = |n: usize| match self.nodes[n] {
            NodeRef::Factor(a) => a,
            NodeRef::Variable(_) => unreachable!(),
        };
        match self.mode {
            ViewMode::Network => {
                for e in &self.edges {
                    if let Carried::Factor(a) = e.carried {
                        scopes[a] = vec![var_of(e.a), var_of(e.b)];
                    }
                }
                for &(n, c) in &self.dangling {
                    if let Carried::Factor(a) = c {
                        scopes[a] = vec![var_of(n)];
                    }
                }
            }
            ViewMode::TensorNetwork => {
                for e in &self.edges {
                    if let Carried::Variable(v) = e.carried {
                        scopes[fac_of(e.a)].push(v);
                        scopes[fac_of(e.b)].push(v);
                    }
                }
                for &(n, c) in &self.dangling {
                    if let Carried::Variable(v) = c {
                        scopes[fac_of(n)].push(v);
                    }
                }
            }
            ViewMode::Bipartite => {
                for e in &self.edges {
                    if let Carried::Variable(v) = e.carried {
                        let f = if matches!(self.nodes[e.a], NodeRef::Factor(_)) { e.a } else { e.b };
                        scopes[fac_of(f)].push(v);
                    }
                }
            }
        }
        for s in &mut scopes {
            s.sort_unstable();
        }
        scopes
    }
}

/// Simple-graph picture of `fg` in the requested mode.
pub fn simplified_view<T: Scalar>(fg: &FactorGraph<T>, mode: ViewMode) -> Result<SimpleGraph> {
    let class = classify(fg);
    let mismatch = |wanted: &str| Error::ClassMismatch { found: class.to_string(), wanted: wanted.to_string() };
    match mode {
        ViewMode::Network => {
            if !class.is_network() {
                return Err(mismatch("network view"));
            }
            let nodes = (0..fg.num_variables()).map(NodeRef::Variable).collect();
            let names = fg.var_names().to_vec();
            let mut edges = Vec::new();
            let mut dangling = Vec::new();
            for (a, f) in fg.factors().iter().enumerate() {
                match f.scope.as_slice() {
                    [u] => dangling.push((*u, Carried::Factor(a))),
                    [u, w] => edges.push(SgEdge { a: *u, b: *w, carried: Carried::Factor(a) }),
                    _ => unreachable!(),
                }
            }
            Ok(SimpleGraph::assemble(mode, nodes, names, edges, dangling))
        }
        ViewMode::TensorNetwork => {
            if !class.is_tensor_network() {
                return Err(mismatch("tensor-network view"));
            }
            let nodes = (0..fg.num_factors()).map(NodeRef::Factor).collect();
            let names = fg.factors().iter().map(|f| f.name.clone()).collect();
            let mut edges = Vec::new();
            let mut dangling = Vec::new();
            for v in 0..fg.num_variables() {
                match fg.factors_of(v) {
                    [a] => dangling.push((*a, Carried::Variable(v))),
                    [a, b] => edges.push(SgEdge { a: *a, b: *b, carried: Carried::Variable(v) }),
                    _ => unreachable!(),
                }
            }
            Ok(SimpleGraph::assemble(mode, nodes, names, edges, dangling))
        }
        ViewMode::Bipartite => {
            let nv = fg.num_variables();
            let mut nodes: Vec<NodeRef> = (0..nv).map(NodeRef::Variable).collect();
            nodes.extend((0..fg.num_factors()).map(NodeRef::Factor));
            let mut names = fg.var_names().to_vec();
            names.extend(fg.factors().iter().map(|f| f.name.clone()));
            let mut edges = Vec::new();
            for (a, f) in fg.factors().iter().enumerate() {
                for &v in &f.scope {
                    edges.push(SgEdge { a: nv + a, b: v, carried: Carried::Variable(v) });
                }
            }
            Ok(SimpleGraph::assemble(mode, nodes, names, edges, Vec::new()))
        }
    }
}
