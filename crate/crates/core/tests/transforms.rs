//! Class-changing transforms checked against enumeration of the input and
//! variable elimination of the output.

use loopmp::graph::{build_factor_graph, classify, FactorDescriptor, GraphClass};
use loopmp::models::*;
use loopmp::transforms::*;
use loopmp::{Error, Graph};

#[path = "support/elimination.rs"]
mod elimination;

use elimination::elimination_oracle;

fn check_equivalent(input: &Graph, r: &TransformResult<f64>, what: &str) {
    let exact = brute_force(input).unwrap();
    let (log_z, _) = elimination_oracle(&r.output, None);
    assert!(
        (log_z - exact.log_z).abs() <= 1e-12 * exact.log_z.abs().max(1.0),
        "{what}: log Z {log_z} vs {}",
        exact.log_z
    );
    for v in 0..input.num_variables() {
        let w = r.embedding(v).unwrap_or_else(|| panic!("{what}: variable {v} not embedded"));
        assert_eq!(r.output.var_name(w), input.var_name(v));
        let (_, p) = elimination_oracle(&r.output, Some(w));
        for (a, b) in p.iter().zip(&exact.marginals[v]) {
            assert!((a - b).abs() <= 1e-12, "{what}: marginal of {v}: {p:?} vs {:?}", exact.marginals[v]);
        }
    }
}

fn fuzzed_gm(seed: u64) -> Graph {
    let nv = 3 + seed as usize % 8;
    gen_random_gm(nv, nv - 1 + seed as usize % 4, 3 + seed as usize % 3, seed).unwrap()
}

#[test]
fn partition_function_and_marginals_survive_every_transform() {
    for seed in 0..50 {
        let fg = fuzzed_gm(seed);
        check_equivalent(&fg, &to_tensor_network(&fg).unwrap(), "tn");
        check_equivalent(&fg, &to_three_leg_tn(&fg).unwrap(), "tn3");
        check_equivalent(&fg, &to_network(&fg).unwrap(), "network");
    }
}

#[test]
fn class_postconditions_hold_on_fuzzed_inputs() {
    for seed in 0..50 {
        let fg = fuzzed_gm(seed);
        let tn = to_tensor_network(&fg).unwrap().output;
        assert!(classify(&tn).is_tensor_network() && tn.max_degree() <= 2);
        let tn3 = to_three_leg_tn(&fg).unwrap().output;
        assert!(tn3.max_degree() <= 2 && tn3.max_scope() <= 3, "seed {seed}");
        let net = to_network(&fg).unwrap().output;
        assert!(classify(&net).is_network() && net.max_scope() <= 2 && net.max_degree() <= 3, "seed {seed}");
        // Scope and degree both at most two is only possible for chains.
        if classify(&fg) != GraphClass::Chain {
            assert!(tn3.max_scope() > 2 || tn3.max_degree() > 2 || classify(&tn3) == GraphClass::Chain);
        }
    }
}

fn graph(vars: &[&str], factors: Vec<(&str, Vec<&str>, Vec<f64>)>) -> Graph {
    let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let descs = factors.into_iter().map(|(n, s, v)| FactorDescriptor::new(n, &s, v)).collect();
    build_factor_graph(2, &vars, descs).unwrap()
}

fn ramp(n: usize) -> Vec<f64> {
    (0..n).map(|k| 1.0 + k as f64 * 0.25).collect()
}

#[test]
fn three_leg_factor_becomes_pairwise_with_a_four_state_composite() {
    let fg = graph(&["a", "b", "c"], vec![("f", vec!["a", "b", "c"], ramp(8))]);
    let r = to_network(&fg).unwrap();
    let out = &r.output;
    assert_eq!(out.num_variables(), 4);
    assert_eq!(out.num_factors(), 3);
    let y = 3;
    assert_eq!(out.var_dim(y), 4);
    assert_eq!(out.degree(y), 3);
    assert_eq!(r.variable_provenance[y], Provenance::Composite(vec![0, 1]));
    assert_eq!(r.auxiliary_variables.iter().copied().collect::<Vec<_>>(), vec![y]);
    assert_eq!(r.auxiliary_factors.len(), 2, "h1 and h2 are deltas, g is not");
    // g reads f through the composite: g(y = (a, b), c) = f(a, b, c).
    let g = out.factor(out.factor_index("f~g").unwrap());
    assert_eq!(g.scope, vec![y, 2]);
    assert_eq!(g.table.values(), fg.factor(0).table.values());
    check_equivalent(&fg, &r, "single factor");
}

#[test]
fn variable_in_three_factors_gets_a_three_copy_delta() {
    let fg = graph(
        &["x", "a", "b", "c"],
        vec![("f1", vec!["x", "a"], ramp(4)), ("f2", vec!["x", "b"], ramp(4)), ("f3", vec!["c", "x"], ramp(4))],
    );
    let r = to_tensor_network(&fg).unwrap();
    let out = &r.output;
    assert_eq!(out.num_variables(), 6);
    let delta = out.factor(out.factor_index("delta:x").unwrap());
    assert!(delta.delta);
    assert_eq!(delta.scope.len(), 3);
    assert_eq!(delta.table.values().iter().filter(|&&v| v == 1.0).count(), 2);
    assert_eq!(r.variable_provenance[4], Provenance::Copy(0));
    assert_eq!(r.variable_provenance[5], Provenance::Copy(0));
    assert_eq!(out.degree(0), 2);
    check_equivalent(&fg, &r, "delta");
}

#[test]
fn five_leg_tensor_becomes_a_chain_of_three() {
    let fg = graph(&["x1", "x2", "x3", "x4", "x5"], vec![("f", vec!["x1", "x2", "x3", "x4", "x5"], ramp(32))]);
    let r = to_three_leg_tn(&fg).unwrap();
    let out = &r.output;
    assert_eq!(out.num_factors(), 3);
    assert!(out.factors().iter().all(|f| f.scope.len() == 3));
    let dims: Vec<usize> = (5..out.num_variables()).map(|v| out.var_dim(v)).collect();
    assert_eq!(dims, vec![4, 8], "y1 = (x1, x2), y2 = (x1, x2, x3)");
    assert_eq!(r.variable_provenance[6], Provenance::Composite(vec![0, 1, 2]));
    assert_eq!(r.auxiliary_factors.len(), 2);
    assert!(out.max_degree() <= 2);
    check_equivalent(&fg, &r, "five legs");
}

#[test]
fn small_factors_are_copied_unchanged() {
    let fg = graph(&["a", "b", "c"], vec![("f", vec!["a", "b"], ramp(4)), ("g", vec!["b", "c"], ramp(4))]);
    for r in [to_tensor_network(&fg).unwrap(), to_three_leg_tn(&fg).unwrap(), to_network(&fg).unwrap()] {
        assert_eq!(r.output, fg);
        assert!(r.auxiliary_variables.is_empty() && r.auxiliary_factors.is_empty());
    }
    let star = graph(&["x", "a", "b", "c"], vec![
        ("f1", vec!["x", "a"], ramp(4)),
        ("f2", vec!["x", "b"], ramp(4)),
        ("f3", vec!["x", "c"], ramp(4)),
    ]);
    assert_eq!(to_network(&star).unwrap().output, star);
    let tn: Graph = gen_random_tn(5, 2, 3).unwrap();
    assert_eq!(to_tensor_network(&tn).unwrap().output, tn);
}

#[test]
fn composites_respect_the_budget() {
    let names: Vec<String> = (0..12).map(|k| format!("x{k}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let fg = graph(&refs, vec![("f", refs.clone(), ramp(1 << 12))]);
    assert!(matches!(to_three_leg_tn_with_budget(&fg, 1 << 8), Err(Error::AlphabetBlowupExceeded(512))));
    let r = to_three_leg_tn(&fg).unwrap();
    assert!(r.output.var_dims().iter().all(|&d| d <= 1 << 11));
}

#[test]
fn tensor_network_maps_to_a_network_of_composites() {
    let mut checked = 0;
    for seed in 0..40 {
        let tn: Graph = gen_random_tn(3 + seed as usize % 4, 1 + seed as usize % 3, seed).unwrap();
        // Composites hold whole tensors, so the oracle stays small only for
        // tensors of at most four legs.
        if classify(&tn) != GraphClass::TensorNetwork || tn.max_scope() > 4 {
            continue;
        }
        checked += 1;
        let r = tn_to_network(&tn).unwrap();
        let out = &r.output;
        assert!(classify(out).is_network());
        assert_eq!(out.num_variables(), tn.num_factors());
        for (a, f) in tn.factors().iter().enumerate() {
            assert_eq!(r.variable_provenance[a], Provenance::Composite(f.scope.clone()));
            assert_eq!(out.var_dim(a), f.table.len());
        }
        let bonds = (0..tn.num_variables()).filter(|&v| tn.degree(v) == 2).count();
        assert_eq!(r.auxiliary_factors.len(), bonds, "one recorded delta per bond");
        let exact = brute_force(&tn).unwrap();
        let (log_z, _) = elimination_oracle(out, None);
        assert!((log_z - exact.log_z).abs() <= 1e-12 * exact.log_z.abs().max(1.0));
        let out_marg: Vec<Vec<f64>> = (0..out.num_variables()).map(|w| elimination_oracle(out, Some(w)).1).collect();
        for (p, q) in r.input_marginals(&out_marg).unwrap().iter().zip(&exact.marginals) {
            for (a, b) in p.iter().zip(q) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
        let back = r.clone().then(network_to_tn(out).unwrap());
        assert!(classify(&back.output).is_tensor_network());
        let (log_z, _) = elimination_oracle(&back.output, None);
        assert!((log_z - exact.log_z).abs() <= 1e-12 * exact.log_z.abs().max(1.0));
    }
    assert!(checked >= 15, "only {checked} instances checked");
}

#[test]
fn three_leg_tensors_give_eight_state_message_variables() {
    // Two three-leg tensors joined by a double bond, each with one open leg.
    let fg = graph(&["p", "q", "r", "s"], vec![("A", vec!["p", "q", "r"], ramp(8)), ("B", vec!["q", "r", "s"], ramp(8))]);
    let r = tn_to_network(&fg).unwrap();
    assert_eq!(r.output.var_dims(), &[8, 8]);
    assert_eq!(r.output.num_factors(), 4);
    check_partition(&fg, &r.output);
}

fn check_partition(a: &Graph, b: &Graph) {
    let za = brute_force(a).unwrap().log_z;
    let zb = brute_force(b).unwrap().log_z;
    assert!((za - zb).abs() <= 1e-12 * za.abs().max(1.0), "{za} vs {zb}");
}

#[test]
fn networks_map_to_tensor_networks() {
    for seed in 0..20 {
        let net: Graph = gen_random_network(3 + seed as usize % 6, seed as usize % 4, seed).unwrap();
        let r = network_to_tn(&net).unwrap();
        assert!(r.output.max_degree() <= 2);
        check_equivalent(&net, &r, "network to tn");
    }
}

#[test]
fn chains_are_fixed_points_of_both_maps() {
    let fg = graph(&["a", "b", "c", "d"], vec![
        ("ab", vec!["a", "b"], ramp(4)),
        ("bc", vec!["b", "c"], ramp(4)),
        ("cd", vec!["c", "d"], ramp(4)),
        ("da", vec!["d", "a"], ramp(4)),
    ]);
    assert_eq!(classify(&fg), GraphClass::Chain);
    assert_eq!(tn_to_network(&fg).unwrap().output, fg);
    assert_eq!(network_to_tn(&fg).unwrap().output, fg);
}

#[test]
fn class_mismatch_is_reported() {
    let gm = graph(&["a", "b", "c", "d"], vec![
        ("f", vec!["a", "b", "c"], ramp(8)),
        ("g", vec!["a", "d"], ramp(4)),
        ("h", vec!["a", "b"], ramp(4)),
    ]);
    assert_eq!(classify(&gm), GraphClass::General);
    assert!(matches!(tn_to_network(&gm), Err(Error::ClassMismatch { .. })));
    assert!(matches!(network_to_tn(&gm), Err(Error::ClassMismatch { .. })));
    let tn = graph(&["a", "b", "c"], vec![("f", vec!["a", "b", "c"], ramp(8))]);
    assert!(matches!(network_to_tn(&tn), Err(Error::ClassMismatch { .. })));
}
