//! Tree-equivalent grouping and region message passing.
//!
//! A decomposition grows a member list `A` from a seed node: first the
//! members of `N_{seed}` that still touch the rest of the graph, then,
//! repeatedly, such nodes of `N_{i\α(i)}` for the earliest member `i` that
//! has one, where `α(i)` is the member through which `i` entered. Each member
//! `i_m` owns the factors of `N_{i_m}` that no earlier member owns; leftover
//! factors form singleton regions. Regions sharing a variable are linked so
//! that, for every variable, the regions holding it form a tree; messages
//! between linked regions live on the shared variables.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::program::{ChannelSpec, Operand, Program};
use super::{Channel, ConvergenceConfig, Diagnostics, MessageSet};
use crate::error::{Error, Result};
use crate::graph::{simplified_view, Carried, FactorGraph, FactorId, NodeRef, SimpleGraph, VarId, ViewMode};
use crate::neighborhood::{kcn_difference_of, kcn_neighborhood, split_nodes, tensor_neighborhood, Neighborhood};
use crate::scalar::Scalar;
use crate::tensor::{Axis, LabeledTensor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    /// Host node whose neighborhood produced the region, if any.
    pub center: Option<usize>,
    /// Region of the center's ancestor.
    pub parent: Option<usize>,
    pub factors: Vec<FactorId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub seed: Option<usize>,
    /// Members `A` in insertion order.
    pub order: Vec<usize>,
    /// `α(i_m)` for every member (`None` for the seed).
    pub ancestor: Vec<Option<usize>>,
    pub regions: Vec<Region>,
    /// Region-graph edges `(r, s)` with `r < s` and their shared variables.
    pub links: Vec<(usize, usize, Vec<VarId>)>,
}

fn neighborhood(sg: &SimpleGraph, i: usize, l0: usize) -> Result<Neighborhood> {
    match sg.mode() {
        ViewMode::Network => kcn_neighborhood(sg, i, l0),
        ViewMode::TensorNetwork | ViewMode::Bipartite => tensor_neighborhood(sg, i, l0),
    }
}

fn difference(sg: &SimpleGraph, ni: &Neighborhood, nj: &Neighborhood) -> Neighborhood {
    match sg.mode() {
        ViewMode::Network => kcn_difference_of(sg, ni, nj),
        ViewMode::TensorNetwork | ViewMode::Bipartite => {
            let (d, _) = split_nodes(ni, nj);
            let edges = sg.induced_edges(&d);
            Neighborhood { nodes: d, edges, generations: None, ..ni.clone() }
        }
    }
}

/// Factors a neighborhood contains.
fn factors_in(sg: &SimpleGraph, n: &Neighborhood) -> Vec<FactorId> {
    let mut out = Vec::new();
    match sg.mode() {
        ViewMode::Network => {
            for &e in &n.edges {
                if let Carried::Factor(a) = sg.edge(e).carried {
                    out.push(a);
                }
            }
            for &(h, c) in sg.dangling() {
                if let Carried::Factor(a) = c {
                    if n.contains_node(h) {
                        out.push(a);
                    }
                }
            }
        }
        ViewMode::TensorNetwork | ViewMode::Bipartite => {
            for &h in &n.nodes {
                if let NodeRef::Factor(a) = sg.node(h) {
                    out.push(a);
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Nodes of `n` outside `a` with a host edge that `n` does not contain.
fn candidates(sg: &SimpleGraph, n: &Neighborhood, a: &[bool]) -> Vec<usize> {
    n.nodes
        .iter()
        .copied()
        .filter(|&v| !a[v] && sg.neighbors(v).iter().any(|&(_, e)| !n.contains_edge(e)))
        .collect()
}

/// Builds the member list from `seed` and carves the graph into regions.
/// Random choices come from a ChaCha stream seeded with `rng_seed`.
pub fn build_tree_decomposition<T: Scalar>(
    fg: &FactorGraph<T>,
    mode: ViewMode,
    seed: usize,
    l0: usize,
    rng_seed: u64,
) -> Result<TreeDecomposition> {
    let sg = simplified_view(fg, mode)?;
    if seed >= sg.num_nodes() {
        return Err(Error::NodeNotFound(seed.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let hoods = (0..sg.num_nodes()).map(|i| neighborhood(&sg, i, l0)).collect::<Result<Vec<_>>>()?;
    let mut in_a = vec![false; sg.num_nodes()];
    let mut order = vec![seed];
    let mut ancestor = vec![None];
    in_a[seed] = true;
    // The seed's own region is N_seed; everyone else's is N_{i\α(i)}.
    let mut own: Vec<Neighborhood> = vec![hoods[seed].clone()];
    loop {
        let mut added = false;
        for m in 0..order.len() {
            let cand = candidates(&sg, &own[m], &in_a);
            if let Some(&v) = cand.choose(&mut rng) {
                let i = order[m];
                in_a[v] = true;
                order.push(v);
                ancestor.push(Some(i));
                own.push(difference(&sg, &hoods[v], &hoods[i]));
                added = true;
                break;
            }
        }
        if !added {
            break;
        }
    }
    let mut owner = vec![None; fg.num_factors()];
    let mut regions: Vec<Region> = Vec::new();
    let mut region_of_member = vec![None; order.len()];
    for (m, &i) in order.iter().enumerate() {
        let mine: Vec<FactorId> = factors_in(&sg, &hoods[i]).into_iter().filter(|&a| owner[a].is_none()).collect();
        if mine.is_empty() {
            continue;
        }
        let r = regions.len();
        for &a in &mine {
            owner[a] = Some(r);
        }
        // Nearest ancestor that owns a region.
        let mut parent = None;
        let mut anc = ancestor[m];
        while let Some(a) = anc {
            let pm = order.iter().position(|&x| x == a).expect("ancestor is a member");
            if let Some(pr) = region_of_member[pm] {
                parent = Some(pr);
                break;
            }
            anc = ancestor[pm];
        }
        region_of_member[m] = Some(r);
        regions.push(Region { center: Some(i), parent, factors: mine });
    }
    for a in 0..fg.num_factors() {
        if owner[a].is_none() {
            owner[a] = Some(regions.len());
            regions.push(Region { center: None, parent: None, factors: vec![a] });
        }
    }
    let links = link_regions(fg, &regions);
    Ok(TreeDecomposition { seed: Some(seed), order, ancestor, regions, links })
}

impl TreeDecomposition {
    /// Decomposition with explicitly chosen regions (each a list of factors).
    /// Every factor must appear in exactly one block.
    pub fn from_blocks<T: Scalar>(fg: &FactorGraph<T>, blocks: Vec<Vec<FactorId>>) -> Result<Self> {
        let mut seen = vec![false; fg.num_factors()];
        for b in &blocks {
            for &a in b {
                if a >= fg.num_factors() || seen[a] {
                    return Err(Error::InvalidConfig(format!("factor {a} missing or repeated in blocks")));
                }
                seen[a] = true;
            }
        }
        if let Some(a) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidConfig(format!("factor {a} is in no block")));
        }
        let regions: Vec<Region> = blocks
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|mut b| {
                b.sort_unstable();
                Region { center: None, parent: None, factors: b }
            })
            .collect();
        let links = link_regions(fg, &regions);
        Ok(TreeDecomposition { seed: None, order: Vec::new(), ancestor: Vec::new(), regions, links })
    }

    /// Whether the region graph is a tree (or forest over components).
    pub fn is_tree(&self) -> bool {
        let mut uf: Vec<usize> = (0..self.regions.len()).collect();
        for &(r, s, _) in &self.links {
            let (a, b) = (find(&mut uf, r), find(&mut uf, s));
            if a == b {
                return false;
            }
            uf[a] = b;
        }
        true
    }

    /// Region holding factor `a`.
    pub fn region_of_factor(&self, a: FactorId) -> Option<usize> {
        self.regions.iter().position(|r| r.factors.contains(&a))
    }

    /// Neighbors of region `r` in the region graph.
    pub fn neighbors(&self, r: usize) -> Vec<usize> {
        self.links
            .iter()
            .filter_map(|&(a, b, _)| if a == r { Some(b) } else if b == r { Some(a) } else { None })
            .collect()
    }

    pub fn separator(&self, r: usize, s: usize) -> Option<&[VarId]> {
        let (a, b) = (r.min(s), r.max(s));
        self.links.iter().find(|l| l.0 == a && l.1 == b).map(|l| l.2.as_slice())
    }
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

/// For each variable, joins the regions holding it by a spanning tree,
/// preferring edges toward the nearest region ancestor that also holds it.
fn link_regions<T: Scalar>(fg: &FactorGraph<T>, regions: &[Region]) -> Vec<(usize, usize, Vec<VarId>)> {
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); fg.num_variables()];
    for (r, reg) in regions.iter().enumerate() {
        for &a in &reg.factors {
            for &v in &fg.factor(a).scope {
                if holders[v].last() != Some(&r) && !holders[v].contains(&r) {
                    holders[v].push(r);
                }
            }
        }
    }
    let mut seps: BTreeMap<(usize, usize), Vec<VarId>> = BTreeMap::new();
    for (v, hs) in holders.iter().enumerate() {
        if hs.len() < 2 {
            continue;
        }
        let mut uf: Vec<usize> = (0..regions.len()).collect();
        let link = |uf: &mut Vec<usize>, r: usize, s: usize, seps: &mut BTreeMap<(usize, usize), Vec<VarId>>| {
            let (a, b) = (find(uf, r), find(uf, s));
            if a != b {
                uf[a] = b;
                seps.entry((r.min(s), r.max(s))).or_default().push(v);
            }
        };
        for &r in hs {
            let mut p = regions[r].parent;
            while let Some(q) = p {
                if hs.contains(&q) {
                    link(&mut uf, r, q, &mut seps);
                    break;
                }
                p = regions[q].parent;
            }
        }
        for w in 1..hs.len() {
            link(&mut uf, hs[0], hs[w], &mut seps);
        }
    }
    seps.into_iter().map(|((r, s), vs)| (r, s, vs)).collect()
}

#[derive(Debug, Clone)]
pub struct TreeState<T> {
    pub decomposition: TreeDecomposition,
    pub messages: MessageSet<T>,
    pub diagnostics: Diagnostics,
}

pub(crate) fn tree_program<T: Scalar>(fg: &FactorGraph<T>, dec: &TreeDecomposition) -> Result<Program<T>> {
    let fixed: Vec<LabeledTensor<T>> = fg.factors().iter().map(|f| f.table.clone()).collect();
    let mut channels = Vec::new();
    for &(r, s, _) in &dec.links {
        channels.push(Channel::standard(r, s));
        channels.push(Channel::standard(s, r));
    }
    let index: std::collections::HashMap<Channel, usize> = channels.iter().enumerate().map(|(k, c)| (*c, k)).collect();
    let mut specs = Vec::with_capacity(channels.len());
    for c in &channels {
        let (r, s) = (c.sender, c.receiver);
        let mut ops: Vec<Operand> = dec.regions[r].factors.iter().map(|&a| Operand::Fixed(a)).collect();
        for t in dec.neighbors(r) {
            if t != s {
                ops.push(Operand::Message(index[&Channel::standard(t, r)]));
            }
        }
        let axes = dec.separator(r, s).expect("linked").iter().map(|&v| Axis::new(v, fg.var_dim(v))).collect();
        specs.push(ChannelSpec { channel: *c, axes, operands: ops });
    }
    Program::new(fixed, specs)
}

/// Region message passing over a decomposition. Channel ids are region indices.
pub fn run_tree_equivalent<T: Scalar>(
    fg: &FactorGraph<T>,
    decomposition: &TreeDecomposition,
    cfg: &ConvergenceConfig,
) -> Result<TreeState<T>> {
    let (messages, diagnostics) = tree_program(fg, decomposition)?.run(cfg)?;
    Ok(TreeState { decomposition: decomposition.clone(), messages, diagnostics })
}
