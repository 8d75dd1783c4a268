use std::collections::BTreeSet;

use crate::graph::SimpleGraph;

/// Star of `i` plus every node and edge on a simple path of length at most
/// `cutoff` joining two distinct neighbors of `i` without visiting `i`.
pub(crate) fn closure(sg: &SimpleGraph, i: usize, cutoff: usize) -> (Vec<usize>, Vec<usize>) {
    let mut nodes = BTreeSet::from([i]);
    let mut edges = BTreeSet::new();
    for &(n, e) in sg.neighbors(i) {
        nodes.insert(n);
        edges.insert(e);
    }
    if cutoff > 0 {
        let nbrs = sg.neighbor_nodes(i);
        let mut on_path = vec![false; sg.num_nodes()];
        on_path[i] = true;
        for &u in &nbrs {
            let mut path_nodes = vec![u];
            let mut path_edges = Vec::new();
            on_path[u] = true;
            extend(sg, u, &nbrs, cutoff, &mut on_path, &mut path_nodes, &mut path_edges, &mut nodes, &mut edges);
            on_path[u] = false;
        }
    }
    (nodes.into_iter().collect(), edges.into_iter().collect())
}

#[allow(clippy::too_many_arguments)]
fn extend(
    sg: &SimpleGraph,
    cur: usize,
    targets: &[usize],
    budget: usize,
    on_path: &mut [bool],
    path_nodes: &mut Vec<usize>,
    path_edges: &mut Vec<usize>,
    nodes: &mut BTreeSet<usize>,
    edges: &mut BTreeSet<usize>,
) {
    if budget == 0 {
        return;
    }
    for &(w, e) in sg.neighbors(cur) {
        if on_path[w] {
            continue;
        }
        path_nodes.push(w);
        path_edges.push(e);
        if targets.binary_search(&w).is_ok() {
            nodes.extend(path_nodes.iter().copied());
            edges.extend(path_edges.iter().copied());
        }
        on_path[w] = true;
        extend(sg, w, targets, budget - 1, on_path, path_nodes, path_edges, nodes, edges);
        on_path[w] = false;
        path_nodes.pop();
        path_edges.pop();
    }
}
