use super::SimpleGraph;
use crate::error::{Error, Result};

/// Largest biconnected block (in nodes) on which cycles are enumerated
/// exhaustively.
pub const DEFAULT_CYCLE_BUDGET: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleBound {
    /// Longest simple cycle; 0 for a forest. A double edge is a 2-cycle.
    Exact(usize),
    ExceedsCap,
}

/// Longest simple cycle of `sg`, if it is at most `cap`.
pub fn longest_cycle_upto(sg: &SimpleGraph, cap: usize) -> Result<CycleBound> {
    longest_cycle_with_budget(sg, cap, DEFAULT_CYCLE_BUDGET)
}

/// Every simple cycle lies inside one biconnected block, so blocks are
/// searched one at a time. A block that is a bare cycle (as many edges as
/// nodes) is measured directly; other blocks are enumerated when they have at
/// most `budget` nodes.
pub fn longest_cycle_with_budget(sg: &SimpleGraph, cap: usize, budget: usize) -> Result<CycleBound> {
    let mut best = 0;
    for block in biconnected_blocks(sg) {
        let mut nodes: Vec<usize> = block.iter().flat_map(|&e| [sg.edge(e).a, sg.edge(e).b]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        if block.len() < 2 {
            continue;
        }
        if block.len() == nodes.len() {
            best = best.max(nodes.len());
            if best > cap {
                return Ok(CycleBound::ExceedsCap);
            }
            continue;
        }
        if nodes.len() > budget {
            return Err(Error::EnumerationBudgetExceeded(budget));
        }
        let local: Vec<(usize, usize)> = block
            .iter()
            .map(|&e| {
                let pos = |v: usize| nodes.binary_search(&v).expect("endpoint of block edge");
                (pos(sg.edge(e).a), pos(sg.edge(e).b))
            })
            .collect();
        match longest_in_block(&SimpleGraph::from_edges(nodes.len(), &local), cap) {
            CycleBound::Exact(l) => best = best.max(l),
            CycleBound::ExceedsCap => return Ok(CycleBound::ExceedsCap),
        }
    }
    Ok(CycleBound::Exact(best))
}

fn longest_in_block(sg: &SimpleGraph, cap: usize) -> CycleBound {
    let n = sg.num_nodes();
    let mut best = 0;
    let mut on_path = vec![false; n];
    for s in 0..n {
        on_path[s] = true;
        for &(u, e) in sg.neighbors(s) {
            if u > s {
                on_path[u] = true;
                let r = search(sg, s, u, e, 1, &mut on_path, &mut best, cap);
                on_path[u] = false;
                if r {
                    return CycleBound::ExceedsCap;
                }
            }
        }
        on_path[s] = false;
    }
    CycleBound::Exact(best)
}

/// Edge sets of the biconnected blocks (Tarjan, iterative). Parallel edges
/// stay in one block; bridges come out as one-edge blocks.
pub(crate) fn biconnected_blocks(sg: &SimpleGraph) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = sg.num_nodes();
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut time = 0;
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut blocks = Vec::new();
    for root in 0..n {
        if disc[root] != UNSEEN {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        // (node, edge used to enter it, next neighbor index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, UNSEEN, 0)];
        while let Some(&mut (v, via, ref mut next)) = stack.last_mut() {
            let nbrs = sg.neighbors(v);
            if *next < nbrs.len() {
                let (w, e) = nbrs[*next];
                *next += 1;
                if e == via {
                    continue;
                }
                if disc[w] == UNSEEN {
                    edge_stack.push(e);
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, e, 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push(e);
                    low[v] = low[v].min(disc[w]);
                }
                continue;
            }
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                low[p] = low[p].min(low[v]);
                if low[v] >= disc[p] {
                    let mut block = Vec::new();
                    while let Some(e) = edge_stack.pop() {
                        block.push(e);
                        if e == via {
                            break;
                        }
                    }
                    blocks.push(block);
                }
            }
        }
    }
    blocks
}

/// Depth-first extension of a path from `s`; returns true once a cycle longer
/// than `cap` is found. Only nodes above `s` are visited, so every cycle is
/// found from its smallest node.
#[allow(clippy::too_many_arguments)]
fn search(
    sg: &SimpleGraph,
    s: usize,
    cur: usize,
    first: usize,
    len: usize,
    on_path: &mut [bool],
    best: &mut usize,
    cap: usize,
) -> bool {
    for &(w, e) in sg.neighbors(cur) {
        if w == s {
            if len >= 2 || e != first {
                *best = (*best).max(len + 1);
                if *best > cap {
                    return true;
                }
            }
        } else if w > s && !on_path[w] {
            on_path[w] = true;
            let r = search(sg, s, w, first, len + 1, on_path, best, cap);
            on_path[w] = false;
            if r {
                return true;
            }
        }
    }
    false
}
