use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{check_node, Neighborhood, NeighborhoodKind};
use crate::error::{Error, Result};
use crate::graph::{longest_cycle_upto, CycleBound, SimpleGraph, ViewMode};

/// Bookkeeping of the recursive WZPZ closure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Generations {
    /// Pass index at which each node entered; the initial star is pass 0.
    pub nodes: BTreeMap<usize, usize>,
    pub edges: BTreeMap<usize, usize>,
    /// `passes[s]`: number of passes with path length `s` that added something.
    pub passes: Vec<usize>,
}

impl Generations {
    /// `t_l = 2 + sum_{s >= 2} q_s * s`, the bound relating WZPZ and KCN node sets.
    pub fn t_bound(&self) -> usize {
        2 + self.passes.iter().enumerate().skip(2).map(|(s, &q)| q * s).sum::<usize>()
    }

    /// Loop-length bound that also charges the length-1 passes, which add
    /// edges (not nodes) and can close short loops through the center.
    pub fn loop_bound(&self) -> usize {
        2 + self.passes.iter().enumerate().skip(1).map(|(s, &q)| q * s).sum::<usize>()
    }
}

/// WZPZ neighborhood `N^W_{l0}(i)`.
///
/// Starts from the star of `i`; then for `s = 1, ..., l0 - 1` repeats passes
/// that add every node and edge on paths of length at most `s` joining two
/// distinct boundary nodes through edges and interior nodes outside the
/// current set, until a pass adds nothing.
pub fn wzpz_neighborhood(sg: &SimpleGraph, i: usize, l0: usize) -> Result<Neighborhood> {
    check_node(sg, i)?;
    let mut nodes = BTreeSet::from([i]);
    let mut edges = BTreeSet::new();
    let mut gens = Generations { passes: vec![0; l0.max(1)], ..Default::default() };
    gens.nodes.insert(i, 0);
    for &(n, e) in sg.neighbors(i) {
        nodes.insert(n);
        edges.insert(e);
        gens.nodes.entry(n).or_insert(0);
        gens.edges.insert(e, 0);
    }
    let mut pass = 0;
    for s in 1..l0 {
        loop {
            let (new_nodes, new_edges) = outside_paths(sg, &nodes, &edges, s);
            if new_nodes.is_empty() && new_edges.is_empty() {
                break;
            }
            pass += 1;
            gens.passes[s] += 1;
            for n in new_nodes {
                nodes.insert(n);
                gens.nodes.insert(n, pass);
            }
            for e in new_edges {
                edges.insert(e);
                gens.edges.insert(e, pass);
            }
        }
    }
    Ok(Neighborhood {
        center: i,
        kind: NeighborhoodKind::Wzpz,
        l0,
        nodes: nodes.into_iter().collect(),
        edges: edges.into_iter().collect(),
        generations: Some(gens),
    })
}

fn is_boundary(sg: &SimpleGraph, edges: &BTreeSet<usize>, n: usize) -> bool {
    sg.neighbors(n).iter().any(|&(_, e)| !edges.contains(&e))
}

/// Elements on outside paths of length at most `s` between boundary nodes.
fn outside_paths(
    sg: &SimpleGraph,
    nodes: &BTreeSet<usize>,
    edges: &BTreeSet<usize>,
    s: usize,
) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let mut new_nodes = BTreeSet::new();
    let mut new_edges = BTreeSet::new();
    let mut on_path = vec![false; sg.num_nodes()];
    for &b in nodes.iter().filter(|&&b| is_boundary(sg, edges, b)) {
        let mut pn = Vec::new();
        let mut pe = Vec::new();
        on_path[b] = true;
        walk(sg, b, b, s, nodes, edges, &mut on_path, &mut pn, &mut pe, &mut new_nodes, &mut new_edges);
        on_path[b] = false;
    }
    (new_nodes, new_edges)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    sg: &SimpleGraph,
    start: usize,
    cur: usize,
    budget: usize,
    nodes: &BTreeSet<usize>,
    edges: &BTreeSet<usize>,
    on_path: &mut [bool],
    pn: &mut Vec<usize>,
    pe: &mut Vec<usize>,
    new_nodes: &mut BTreeSet<usize>,
    new_edges: &mut BTreeSet<usize>,
) {
    if budget == 0 {
        return;
    }
    for &(w, e) in sg.neighbors(cur) {
        if edges.contains(&e) || on_path[w] {
            continue;
        }
        if nodes.contains(&w) {
            if w != start {
                new_nodes.extend(pn.iter().copied());
                new_edges.extend(pe.iter().copied());
                new_edges.insert(e);
            }
            continue;
        }
        on_path[w] = true;
        pn.push(w);
        pe.push(e);
        walk(sg, start, w, budget - 1, nodes, edges, on_path, pn, pe, new_nodes, new_edges);
        pn.pop();
        pe.pop();
        on_path[w] = false;
    }
}

/// Length of the shortest path outside `n` joining two distinct boundary
/// nodes; `None` stands for infinity.
pub fn outer_distance(sg: &SimpleGraph, n: &Neighborhood) -> Option<usize> {
    let boundary = n.boundary(sg);
    let mut best: Option<usize> = None;
    for &b in &boundary {
        let mut dist = vec![usize::MAX; sg.num_nodes()];
        dist[b] = 0;
        let mut queue = VecDeque::from([b]);
        while let Some(u) = queue.pop_front() {
            if best.is_some_and(|d| dist[u] + 1 >= d) {
                break;
            }
            for &(w, e) in sg.neighbors(u) {
                if n.contains_edge(e) || w == b {
                    continue;
                }
                if n.contains_node(w) {
                    let d = dist[u] + 1;
                    best = Some(best.map_or(d, |x| x.min(d)));
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    best
}

/// Longest loop length the inference formulas tolerate, in host edges.
pub(crate) fn loop_limit(mode: ViewMode, l0: usize) -> usize {
    match mode {
        ViewMode::Bipartite => 2 * l0,
        ViewMode::Network | ViewMode::TensorNetwork => l0,
    }
}

/// True when every simple cycle of `sg` is at most `l0` long (counted in
/// factors for bipartite hosts), which makes the KCN-type formulas exact.
///
/// Exhaustive cycle search is used within its node budget. Larger graphs fall
/// back to the WZPZ test: a node is certified when some `N^W_l` around it has
/// no outside path between boundary nodes and a loop bound at most the limit.
pub fn exactness_certificate(sg: &SimpleGraph, l0: usize) -> bool {
    let limit = loop_limit(sg.mode(), l0);
    match longest_cycle_upto(sg, limit) {
        Ok(CycleBound::Exact(_)) => return true,
        Ok(CycleBound::ExceedsCap) => return false,
        Err(Error::EnumerationBudgetExceeded(_)) => {}
        Err(_) => return false,
    }
    (0..sg.num_nodes()).all(|i| node_certified(sg, i, limit))
}

fn node_certified(sg: &SimpleGraph, i: usize, limit: usize) -> bool {
    for l in 1..=limit + 1 {
        let n = wzpz_neighborhood(sg, i, l).expect("node exists");
        let g = n.generations.as_ref().expect("wzpz records generations");
        if g.loop_bound() > limit {
            return false;
        }
        if outer_distance(sg, &n).is_none() {
            return true;
        }
    }
    false
}
