use super::{average, belief, expected_log, log_trace, shannon, to_f64, InferenceReport};
use crate::engine::NetworkState;
use crate::error::Result;
use crate::graph::FactorGraph;
use crate::neighborhood::Neighborhood;
use crate::scalar::Scalar;
use crate::tensor::{Axis, LabeledTensor};

/// Inference from network KCN messages.
///
/// The belief of region `N_i` is the product of the pairwise factors on its
/// edges, the unary factors of `i` and the messages `m_{k→i}`. Marginals and
/// unary energies come from the variable's own region; a pairwise factor's
/// energy averages the regions of its two endpoints. The partition function
/// divides the region traces by the traces of every intersection
/// `N_{i∩j}` (shared edges, the messages `m_{j→i}` and `m_{k→j}`) raised to
/// `2 / |V(N_{i∩j})|`, averaged over the two orientations of each pair.
pub fn network_inference<T: Scalar>(fg: &FactorGraph<T>, state: &NetworkState<T>) -> Result<InferenceReport> {
    let kcn = &state.kcn;
    let msgs = &state.messages;
    let nv = fg.num_variables();
    let ones: Vec<LabeledTensor<T>> =
        (0..nv).map(|v| LabeledTensor::ones(vec![Axis::new(v, fg.var_dim(v))])).collect::<Result<_>>()?;
    let region_ops = |i: usize| -> Vec<&LabeledTensor<T>> {
        let n = &kcn.neighborhoods[i];
        let mut ops: Vec<&LabeledTensor<T>> = vec![&ones[i]];
        ops.extend(kcn.unary[i].iter().map(|&a| &fg.factor(a).table));
        ops.extend(n.edges.iter().map(|&e| &fg.factor(kcn.edge_factor(e)).table));
        for &k in &n.nodes {
            if k != i {
                ops.push(msgs.message(k, i).expect("channel inside neighborhood"));
            }
        }
        ops
    };
    let mut log_z = 0.0;
    let mut marginals = Vec::with_capacity(nv);
    let mut region_entropy = 0.0;
    let mut entropy_ok = true;
    for i in 0..nv {
        let ops = region_ops(i);
        log_z += log_trace(&ops)?;
        marginals.push(to_f64(&belief(&ops, &[i])?));
        match belief(&ops, &kcn.neighborhoods[i].nodes) {
            Ok(p) => region_entropy += shannon(&p),
            Err(_) => entropy_ok = false,
        }
    }
    for (i, j, inter) in intersections(state) {
        // Both orientations, weighted by half, so that every message in the
        // intersection carries a total exponent of one.
        let pair_ops = |i: usize, j: usize| {
            let mut ops: Vec<&LabeledTensor<T>> = vec![&ones[i]];
            ops.extend(inter.edges.iter().map(|&e| &fg.factor(kcn.edge_factor(e)).table));
            ops.push(msgs.message(j, i).expect("symmetric neighborhoods"));
            ops.extend(
                inter.nodes.iter().filter(|&&k| k != j).map(|&k| msgs.message(k, j).expect("channel inside neighborhood")),
            );
            ops
        };
        let (a, b) = (pair_ops(i, j), pair_ops(j, i));
        let w = 1.0 / inter.nodes.len() as f64;
        log_z -= w * (log_trace(&a)? + log_trace(&b)?);
        match belief(&a, &inter.nodes).and_then(|p| average(&[p, belief(&b, &inter.nodes)?])) {
            Ok(p) => region_entropy -= 2.0 * w * shannon(&p),
            Err(_) => entropy_ok = false,
        }
    }
    let mut energy = 0.0;
    for f in fg.factors() {
        let ps: Vec<LabeledTensor<T>> =
            f.scope.iter().map(|&i| belief(&region_ops(i), &f.scope)).collect::<Result<_>>()?;
        energy -= expected_log(&average(&ps)?, &f.table)?;
    }
    let mut report = InferenceReport::new("kcn-network", log_z, energy, marginals, &state.diagnostics);
    if entropy_ok {
        report.entropy_regions = Some(region_entropy);
    }
    Ok(report)
}

/// Unordered pairs `i < j` with `j ∈ N_i`, and `N_{i∩j}`: the shared edges,
/// their endpoints, `i` and `j`.
fn intersections<T: Scalar>(state: &NetworkState<T>) -> Vec<(usize, usize, Neighborhood)> {
    let kcn = &state.kcn;
    let mut out = Vec::new();
    for (i, ni) in kcn.neighborhoods.iter().enumerate() {
        for &j in &ni.nodes {
            if j <= i {
                continue;
            }
            let nj = &kcn.neighborhoods[j];
            let edges: Vec<usize> = ni.edges.iter().copied().filter(|&e| nj.contains_edge(e)).collect();
            let mut nodes = vec![i, j];
            for &e in &edges {
                nodes.push(kcn.sg.edge(e).a);
                nodes.push(kcn.sg.edge(e).b);
            }
            nodes.sort_unstable();
            nodes.dedup();
            out.push((i, j, Neighborhood { center: i, nodes, edges, generations: None, ..ni.clone() }));
        }
    }
    out
}
