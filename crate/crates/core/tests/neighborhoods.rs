use loopmp::graph::{longest_cycle_upto, CycleBound, SimpleGraph};
use loopmp::neighborhood::{
    exactness_certificate, kcn_difference, kcn_neighborhood, outer_distance, tensor_neighborhoods,
    wzpz_neighborhood, Neighborhood,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn named(edges: &[(&str, &str)]) -> SimpleGraph {
    let mut names: Vec<&str> = Vec::new();
    for &(a, b) in edges {
        for n in [a, b] {
            if !names.contains(&n) {
                names.push(n);
            }
        }
    }
    SimpleGraph::from_named_edges(&names, edges).unwrap()
}

fn lattice(w: usize, h: usize) -> SimpleGraph {
    let mut edges = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if c + 1 < w {
                edges.push((r * w + c, r * w + c + 1));
            }
            if r + 1 < h {
                edges.push((r * w + c, (r + 1) * w + c));
            }
        }
    }
    SimpleGraph::from_edges(w * h, &edges)
}

fn names_of(sg: &SimpleGraph, n: &Neighborhood) -> Vec<String> {
    let mut v: Vec<String> = n.nodes.iter().map(|&i| sg.name(i).to_string()).collect();
    v.sort();
    v
}

fn edge_names(sg: &SimpleGraph, n: &Neighborhood) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = n
        .edges
        .iter()
        .map(|&e| {
            let (a, b) = (sg.name(sg.edge(e).a).to_string(), sg.name(sg.edge(e).b).to_string());
            if a < b { (a, b) } else { (b, a) }
        })
        .collect();
    v.sort();
    v
}

fn sorted(v: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> SimpleGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && !edges.contains(&(a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    SimpleGraph::from_edges(n, &edges)
}

/// Tree of cycles: every block is a cycle of length at most `max_len`.
fn cactus(rng: &mut ChaCha8Rng, blocks: usize, max_len: usize) -> SimpleGraph {
    let mut n = 1;
    let mut edges = Vec::new();
    for _ in 0..blocks {
        let anchor = rng.gen_range(0..n);
        let len = rng.gen_range(2..=max_len);
        if len == 2 {
            edges.push((anchor, n));
            n += 1;
            continue;
        }
        let mut prev = anchor;
        for _ in 0..len - 1 {
            edges.push((prev, n));
            prev = n;
            n += 1;
        }
        edges.push((prev, anchor));
    }
    SimpleGraph::from_edges(n, &edges)
}

#[test]
fn star_when_l0_is_two() {
    let sg = lattice(4, 4);
    let n = kcn_neighborhood(&sg, 5, 2).unwrap();
    assert_eq!(n.nodes, vec![1, 4, 5, 6, 9]);
    assert_eq!(n.edges.len(), 4);
}

#[test]
fn kcn_on_lattice_excludes_far_corner() {
    let sg = lattice(4, 4);
    let x0 = 2 * 4 + 2;
    let n = kcn_neighborhood(&sg, x0, 6).unwrap();
    assert_eq!(n.nodes.len(), 15);
    assert!(!n.contains_node(0));
    assert_eq!(n.edges.len(), sg.edges().len() - 2);
}

#[test]
fn kcn_monotone_and_difference_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let sg = random_graph(&mut rng, 10, 5);
        for i in 0..sg.num_nodes() {
            for l in 2..6 {
                let a = kcn_neighborhood(&sg, i, l).unwrap();
                let b = kcn_neighborhood(&sg, i, l + 1).unwrap();
                assert!(a.subgraph_of(&b));
            }
            let ni = kcn_neighborhood(&sg, i, 4).unwrap();
            for &j in &ni.nodes {
                if j == i {
                    continue;
                }
                let nj = kcn_neighborhood(&sg, j, 4).unwrap();
                let d = kcn_difference(&sg, i, j, 4).unwrap();
                let mut union: Vec<usize> =
                    d.edges.iter().copied().chain(ni.edges.iter().copied().filter(|&e| nj.contains_edge(e))).collect();
                union.sort();
                assert_eq!(union, ni.edges);
            }
        }
    }
}

#[test]
fn difference_requires_membership() {
    let sg = lattice(4, 4);
    assert!(kcn_difference(&sg, 0, 15, 3).is_err());
    assert!(kcn_neighborhood(&sg, 99, 3).is_err());
}

#[test]
fn tree_difference_is_branch() {
    let sg = SimpleGraph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]);
    let d = kcn_difference(&sg, 1, 3, 3).unwrap();
    assert_eq!(d.nodes, vec![0, 1, 2]);
}

#[test]
fn double_edges_do_not_change_node_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let sg = random_graph(&mut rng, 9, 4);
        let mut doubled: Vec<(usize, usize)> = sg.edges().iter().map(|e| (e.a, e.b)).collect();
        let k = rng.gen_range(0..doubled.len());
        doubled.push(doubled[k]);
        let dg = SimpleGraph::from_edges(sg.num_nodes(), &doubled);
        for i in 0..sg.num_nodes() {
            for l in 2..6 {
                assert_eq!(kcn_neighborhood(&sg, i, l).unwrap().nodes, kcn_neighborhood(&dg, i, l).unwrap().nodes);
            }
        }
    }
}

#[test]
fn lattice_tensor_blocks() {
    // 4x4 tensor lattice, i = (1,1), j = (1,2) (row-major over rows of 4).
    let sg = lattice(4, 4);
    let (si, diff, inter) = tensor_neighborhoods(&sg, 5, 6, 4).unwrap();
    assert_eq!(si.nodes, vec![0, 1, 2, 4, 5, 6, 8, 9, 10]);
    assert_eq!(diff.nodes, vec![0, 4, 8]);
    assert_eq!(inter.nodes, vec![1, 2, 5, 6, 9, 10]);
}

#[test]
fn wzpz_on_lattice() {
    let sg = lattice(4, 4);
    let star = vec![1, 4, 5, 6, 9];
    for l in 0..=2 {
        assert_eq!(wzpz_neighborhood(&sg, 5, l).unwrap().nodes, star);
    }
    let n3 = wzpz_neighborhood(&sg, 5, 3).unwrap();
    assert_eq!(n3.nodes, vec![0, 1, 2, 4, 5, 6, 8, 9, 10]);
    assert_eq!(n3.edges.len(), 12);
    for l in 4..7 {
        let n = wzpz_neighborhood(&sg, 5, l).unwrap();
        assert_eq!(n.nodes.len(), 16);
        assert_eq!(n.edges.len(), sg.edges().len());
        assert_eq!(outer_distance(&sg, &n), None);
    }
}

#[test]
fn wzpz_not_kcn_example() {
    let sg = named(&[
        ("TU1", "TU2"),
        ("TU3", "TU4"),
        ("TU1", "TM1"),
        ("TU3", "TM2"),
        ("TU2", "TM2"),
        ("TU4", "TM3"),
        ("TM1", "TD1"),
        ("TM2", "TD2"),
        ("TM2", "TD3"),
        ("TM3", "TD4"),
        ("TD1", "TD2"),
        ("TD4", "TD3"),
        ("TU4", "TD4"),
    ]);
    let i0 = sg.node_by_name("TM2").unwrap();
    let n = wzpz_neighborhood(&sg, i0, 4).unwrap();
    assert_eq!(names_of(&sg, &n), sorted(&["TU2", "TU3", "TU4", "TM2", "TM3", "TD2", "TD3", "TD4"]));
    let want: Vec<(&str, &str)> = vec![
        ("TU3", "TU4"),
        ("TU3", "TM2"),
        ("TU2", "TM2"),
        ("TU4", "TM3"),
        ("TM2", "TD2"),
        ("TM2", "TD3"),
        ("TM3", "TD4"),
        ("TD4", "TD3"),
        ("TU4", "TD4"),
    ];
    let mut want: Vec<(String, String)> = want
        .iter()
        .map(|&(a, b)| if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) })
        .collect();
    want.sort();
    assert_eq!(edge_names(&sg, &n), want);
    for l in 2..10 {
        let k = kcn_neighborhood(&sg, i0, l).unwrap();
        assert_ne!(k.subgraph_of(&n) && n.subgraph_of(&k), true, "l = {l}");
    }
}

fn bound_graph() -> SimpleGraph {
    named(&[
        ("TD0", "TD1"),
        ("TD1", "TD2"),
        ("TD2", "TD3"),
        ("TD3", "TD4"),
        ("TD4", "TD5"),
        ("TD5", "TD6"),
        ("TD0", "TM0"),
        ("TM0", "TM1"),
        ("TM1", "TM2"),
        ("TM2", "TM3"),
        ("TM3", "TM4"),
        ("TM4", "TD6"),
        ("TD3", "TM2"),
        ("TM0", "TU1"),
        ("TU1", "TU2"),
        ("TU2", "TU3"),
        ("TU3", "TU4"),
        ("TU4", "TM4"),
    ])
}

#[test]
fn wzpz_bound_is_attained() {
    let sg = bound_graph();
    let x0 = sg.node_by_name("TD3").unwrap();
    let n = wzpz_neighborhood(&sg, x0, 6).unwrap();
    let t = n.generations.as_ref().unwrap().t_bound();
    assert_eq!(t, 12);
    assert!(n.nodes_subset_of(&kcn_neighborhood(&sg, x0, 12).unwrap()));
    assert!(!n.nodes_subset_of(&kcn_neighborhood(&sg, x0, 11).unwrap()));
}

#[test]
fn wzpz_is_not_symmetric() {
    let sg = named(&[
        ("TD1", "TD2"),
        ("TD2", "TD3"),
        ("TD2", "TM2"),
        ("TD2", "TM3"),
        ("TM1", "TM2"),
        ("TM3", "TM4"),
        ("TD1", "TM1"),
        ("TD3", "TM4"),
        ("TM1", "TU1"),
        ("TM4", "TU3"),
        ("TU1", "TU2"),
        ("TU2", "TU3"),
    ]);
    let i = sg.node_by_name("TD2").unwrap();
    let j = sg.node_by_name("TU2").unwrap();
    let ni = wzpz_neighborhood(&sg, i, 5).unwrap();
    let nj = wzpz_neighborhood(&sg, j, 5).unwrap();
    assert_eq!(ni.nodes.len(), sg.num_nodes());
    assert!(ni.contains_node(j));
    assert_eq!(nj.nodes.len(), 3);
    assert!(!nj.contains_node(i));
    assert!(outer_distance(&sg, &nj).is_some());
}

#[test]
fn outer_distance_small_cases() {
    let tri = SimpleGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
    let whole = wzpz_neighborhood(&tri, 0, 3).unwrap();
    assert_eq!(outer_distance(&tri, &whole), None);
    let one_edge = Neighborhood {
        center: 0,
        kind: loopmp::neighborhood::NeighborhoodKind::Kcn,
        l0: 2,
        nodes: vec![0, 1],
        edges: vec![0],
        generations: None,
    };
    assert_eq!(outer_distance(&tri, &one_edge), Some(2));
}

#[test]
fn wzpz_contains_kcn() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let n = rng.gen_range(4..=12);
        let extra = rng.gen_range(0..6);
        let sg = random_graph(&mut rng, n, extra);
        for i in 0..n {
            for l in 2..=6 {
                let k = kcn_neighborhood(&sg, i, l).unwrap();
                let w = wzpz_neighborhood(&sg, i, l - 1).unwrap();
                assert!(k.subgraph_of(&w), "center {i}, l {l}");
            }
        }
    }
}

#[test]
fn wzpz_inside_kcn_when_loops_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..60 {
        let l0 = rng.gen_range(3..=6);
        let blocks = rng.gen_range(1..5);
        let sg = cactus(&mut rng, blocks, l0);
        assert!(matches!(longest_cycle_upto(&sg, l0), Ok(CycleBound::Exact(_))));
        assert!(exactness_certificate(&sg, l0));
        for i in 0..sg.num_nodes() {
            let k = kcn_neighborhood(&sg, i, l0).unwrap();
            for l in 0..8 {
                assert!(wzpz_neighborhood(&sg, i, l).unwrap().subgraph_of(&k));
            }
        }
    }
}

#[test]
fn wzpz_bound_holds_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..40 {
        let sg = random_graph(&mut rng, 10, 4);
        for i in 0..sg.num_nodes() {
            for l in 1..=6 {
                let w = wzpz_neighborhood(&sg, i, l).unwrap();
                let t = w.generations.as_ref().unwrap().t_bound().max(2);
                assert!(w.nodes_subset_of(&kcn_neighborhood(&sg, i, t).unwrap()));
            }
        }
    }
}

#[test]
fn certificates() {
    let tree = SimpleGraph::from_edges(4, &[(0, 1), (1, 2), (1, 3)]);
    assert!(exactness_certificate(&tree, 2));
    assert!(!exactness_certificate(&lattice(4, 4), 4));
    // Larger than the enumeration budget: the WZPZ fallback decides.
    let path: Vec<(usize, usize)> = (0..29).map(|k| (k, k + 1)).collect();
    assert!(exactness_certificate(&SimpleGraph::from_edges(30, &path), 3));
    let mut ring = path.clone();
    ring.push((29, 0));
    assert!(!exactness_certificate(&SimpleGraph::from_edges(30, &ring), 5));
    assert!(!exactness_certificate(&lattice(6, 6), 4));
}

/// Longest simple cycle by walking every simple path (independent of the
/// library's block decomposition).
fn longest_cycle_oracle(sg: &SimpleGraph) -> usize {
    fn walk(sg: &SimpleGraph, s: usize, v: usize, first: usize, len: usize, seen: &mut Vec<bool>, best: &mut usize) {
        for &(w, e) in sg.neighbors(v) {
            if w == s && (len >= 2 || e != first) {
                *best = (*best).max(len + 1);
            } else if !seen[w] {
                seen[w] = true;
                walk(sg, s, w, first, len + 1, seen, best);
                seen[w] = false;
            }
        }
    }
    let mut best = 0;
    for s in 0..sg.num_nodes() {
        for &(u, e) in sg.neighbors(s) {
            let mut seen = vec![false; sg.num_nodes()];
            seen[s] = true;
            seen[u] = true;
            walk(sg, s, u, e, 1, &mut seen, &mut best);
        }
    }
    best
}

#[test]
fn longest_cycle_matches_path_walk() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..150 {
        let n = rng.gen_range(2..10);
        let extra = rng.gen_range(0..6);
        let mut sg = random_graph(&mut rng, n, extra);
        if rng.gen_bool(0.2) {
            // Repeat an edge to create a 2-cycle.
            let e = sg.edge(0).clone();
            let mut edges: Vec<(usize, usize)> = sg.edges().iter().map(|e| (e.a, e.b)).collect();
            edges.push((e.a, e.b));
            sg = SimpleGraph::from_edges(sg.num_nodes(), &edges);
        }
        let want = longest_cycle_oracle(&sg);
        assert_eq!(longest_cycle_upto(&sg, 64).unwrap(), CycleBound::Exact(want));
        if want > 2 {
            assert_eq!(longest_cycle_upto(&sg, want - 1).unwrap(), CycleBound::ExceedsCap);
        }
    }
}

#[test]
fn large_cactus_graphs_are_certified_block_by_block() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..10 {
        let sg = cactus(&mut rng, 40, 6);
        assert!(sg.num_nodes() > 40);
        assert!(exactness_certificate(&sg, 6));
        let longest = longest_cycle_oracle(&sg);
        if longest > 3 {
            assert!(!exactness_certificate(&sg, longest - 1));
        }
    }
}
