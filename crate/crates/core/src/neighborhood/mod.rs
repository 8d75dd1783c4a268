//! Neighborhood constructions on simple graphs.
//!
//! * KCN neighborhoods `N_i`: node `i`, its incident edges and nearest
//!   neighbors, plus every node and edge on a simple path of length at most
//!   `l0 - 2` that joins two distinct nearest neighbors without visiting `i`.
//! * Tensor neighborhoods `S_i`: the node set of the same path closure, with
//!   all induced edges; used when nodes carry tensors.
//! * WZPZ neighborhoods: recursive closure from the star of `i`, recording the
//!   pass at which each element entered.

mod paths;
mod wzpz;

pub use wzpz::{exactness_certificate, outer_distance, wzpz_neighborhood, Generations};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{SimpleGraph, ViewMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeighborhoodKind {
    Kcn,
    KcnDifference,
    Tensor,
    TensorDifference,
    TensorIntersection,
    Wzpz,
}

/// Subgraph of a host [`SimpleGraph`] attached to a center node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    pub center: usize,
    pub kind: NeighborhoodKind,
    pub l0: usize,
    /// Sorted node indices.
    pub nodes: Vec<usize>,
    /// Sorted edge indices.
    pub edges: Vec<usize>,
    pub generations: Option<Generations>,
}

impl Neighborhood {
    pub fn contains_node(&self, n: usize) -> bool {
        self.nodes.binary_search(&n).is_ok()
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn nodes_subset_of(&self, other: &Neighborhood) -> bool {
        self.nodes.iter().all(|&n| other.contains_node(n))
    }

    pub fn subgraph_of(&self, other: &Neighborhood) -> bool {
        self.nodes_subset_of(other) && self.edges.iter().all(|&e| other.contains_edge(e))
    }

    /// Nodes with at least one incident host edge outside the neighborhood.
    pub fn boundary(&self, sg: &SimpleGraph) -> Vec<usize> {
        self.nodes
            .iter()
            .copied()
            .filter(|&n| sg.neighbors(n).iter().any(|&(_, e)| !self.contains_edge(e)))
            .collect()
    }
}

fn check_node(sg: &SimpleGraph, i: usize) -> Result<()> {
    if i >= sg.num_nodes() {
        return Err(Error::NodeNotFound(i.to_string()));
    }
    Ok(())
}

fn check_l0(l0: usize) -> Result<()> {
    if l0 < 2 {
        return Err(Error::InvalidConfig(format!("l0 = {l0} must be at least 2")));
    }
    Ok(())
}

/// KCN neighborhood `N_i^{l0}` (nodes and path edges).
pub fn kcn_neighborhood(sg: &SimpleGraph, i: usize, l0: usize) -> Result<Neighborhood> {
    check_node(sg, i)?;
    check_l0(l0)?;
    let (nodes, edges) = paths::closure(sg, i, l0 - 2);
    Ok(Neighborhood { center: i, kind: NeighborhoodKind::Kcn, l0, nodes, edges, generations: None })
}

/// `N_{i\j}`: `i`, the edges of `N_i` outside `N_j`, and their endpoints.
pub fn kcn_difference(sg: &SimpleGraph, i: usize, j: usize, l0: usize) -> Result<Neighborhood> {
    let ni = kcn_neighborhood(sg, i, l0)?;
    check_node(sg, j)?;
    if !ni.contains_node(j) {
        return Err(Error::NotInNeighborhood(j, i));
    }
    let nj = kcn_neighborhood(sg, j, l0)?;
    Ok(kcn_difference_of(sg, &ni, &nj))
}

pub fn kcn_difference_of(sg: &SimpleGraph, ni: &Neighborhood, nj: &Neighborhood) -> Neighborhood {
    let edges: Vec<usize> = ni.edges.iter().copied().filter(|&e| !nj.contains_edge(e)).collect();
    let mut nodes = BTreeSet::from([ni.center]);
    for &e in &edges {
        nodes.insert(sg.edge(e).a);
        nodes.insert(sg.edge(e).b);
    }
    Neighborhood {
        center: ni.center,
        kind: NeighborhoodKind::KcnDifference,
        l0: ni.l0,
        nodes: nodes.into_iter().collect(),
        edges,
        generations: None,
    }
}

/// Path-length cutoff for tensor neighborhoods. `l0` counts tensors around a
/// loop, and in the bipartite picture every tensor step is two edges long.
pub fn tensor_cutoff(mode: ViewMode, l0: usize) -> usize {
    match mode {
        ViewMode::Bipartite => 2 * l0 - 2,
        ViewMode::Network | ViewMode::TensorNetwork => l0 - 2,
    }
}

/// Tensor neighborhood `S_i`: node set of the path closure plus induced edges.
pub fn tensor_neighborhood(sg: &SimpleGraph, i: usize, l0: usize) -> Result<Neighborhood> {
    check_node(sg, i)?;
    check_l0(l0)?;
    let (nodes, _) = paths::closure(sg, i, tensor_cutoff(sg.mode(), l0));
    let edges = sg.induced_edges(&nodes);
    Ok(Neighborhood { center: i, kind: NeighborhoodKind::Tensor, l0, nodes, edges, generations: None })
}

fn node_set(sg: &SimpleGraph, center: usize, kind: NeighborhoodKind, l0: usize, nodes: Vec<usize>) -> Neighborhood {
    let edges = sg.induced_edges(&nodes);
    Neighborhood { center, kind, l0, nodes, edges, generations: None }
}

/// `(S_i, S_{i\j}, S_{i∩j})` with the difference and intersection taken on node sets.
pub fn tensor_neighborhoods(
    sg: &SimpleGraph,
    i: usize,
    j: usize,
    l0: usize,
) -> Result<(Neighborhood, Neighborhood, Neighborhood)> {
    let si = tensor_neighborhood(sg, i, l0)?;
    let sj = tensor_neighborhood(sg, j, l0)?;
    let (d, x) = split_nodes(&si, &sj);
    let diff = node_set(sg, i, NeighborhoodKind::TensorDifference, l0, d);
    let inter = node_set(sg, i, NeighborhoodKind::TensorIntersection, l0, x);
    Ok((si, diff, inter))
}

/// Node-set difference and intersection of two sorted node lists.
pub fn split_nodes(si: &Neighborhood, sj: &Neighborhood) -> (Vec<usize>, Vec<usize>) {
    let (mut d, mut x) = (Vec::new(), Vec::new());
    for &n in &si.nodes {
        if sj.contains_node(n) {
            x.push(n);
        } else {
            d.push(n);
        }
    }
    (d, x)
}
