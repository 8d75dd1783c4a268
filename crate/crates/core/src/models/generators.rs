use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_factor_graph, FactorDescriptor, FactorGraph, FactorId};
use crate::scalar::Scalar;

/// Description of a generated instance, stored as graph-file metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: String,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub values: String,
}

/// Accumulates named variables and factors before validation.
#[derive(Debug, Default)]
pub(crate) struct Builder<T> {
    pub vars: Vec<String>,
    pub factors: Vec<FactorDescriptor<T>>,
}

impl<T: Scalar> Builder<T> {
    pub fn var(&mut self, name: String) -> String {
        self.vars.push(name.clone());
        name
    }

    pub fn factor(&mut self, name: String, scope: &[String], values: Vec<T>) {
        let scope: Vec<&str> = scope.iter().map(|s| s.as_str()).collect();
        self.factors.push(FactorDescriptor::new(name, &scope, values));
    }

    pub fn build(self, alphabet: usize) -> Result<FactorGraph<T>> {
        build_factor_graph(alphabet, &self.vars, self.factors)
    }
}

/// Uniform draw on the open interval `(0, 1)`.
pub(crate) fn open_unit(rng: &mut impl Rng) -> f64 {
    loop {
        let x: f64 = rng.gen();
        if x > 0.0 {
            return x;
        }
    }
}

fn random_table<T: Scalar>(rng: &mut impl Rng, len: usize) -> Vec<T> {
    (0..len).map(|_| T::of(open_unit(rng))).collect()
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which simple-graph picture a triangle chain is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainKind {
    /// Tensors on nodes (shared nodes 4-leg, apexes 2-leg), variables on edges.
    TensorNetwork,
    /// Binary variables on nodes, pairwise factors on edges.
    Network,
}

/// Layout of an `n`-triangle chain: triangle `k` has spine nodes `s_k`,
/// `s_{k+1}` and apex `a_k`. In the periodic chain `s_n = s_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleChain {
    pub n: usize,
    pub periodic: bool,
    pub spine: Vec<String>,
    pub apex: Vec<String>,
    /// Edges in chain order as `(u, w)` node names.
    pub edges: Vec<(String, String)>,
}

impl TriangleChain {
    pub fn new(n: usize, periodic: bool) -> Result<Self> {
        if n < 1 || (periodic && n < 2) {
            return Err(Error::InvalidSize(format!("{n}-triangle chain (periodic = {periodic})")));
        }
        let ns = if periodic { n } else { n + 1 };
        let spine: Vec<String> = (0..ns).map(|k| format!("s{k}")).collect();
        let apex: Vec<String> = (0..n).map(|k| format!("a{k}")).collect();
        let mut edges = Vec::new();
        for k in 0..n {
            let (s0, s1) = (&spine[k], &spine[(k + 1) % ns]);
            edges.push((s0.clone(), s1.clone()));
            edges.push((s0.clone(), apex[k].clone()));
            edges.push((apex[k].clone(), s1.clone()));
        }
        Ok(TriangleChain { n, periodic, spine, apex, edges })
    }

    /// Node names in chain order (`s_0, a_0, s_1, a_1, ...`).
    pub fn nodes(&self) -> Vec<String> {
        let mut out = Vec::new();
        for k in 0..self.spine.len() {
            out.push(self.spine[k].clone());
            if k < self.apex.len() {
                out.push(self.apex[k].clone());
            }
        }
        out
    }

    /// Tensor-network instance; `value(name, scope_len)` fills each tensor.
    pub fn tensor_network<T: Scalar>(&self, mut value: impl FnMut(&str, usize) -> Vec<T>) -> Result<FactorGraph<T>> {
        let mut b = Builder::default();
        let edge_var = |u: &str, w: &str| format!("x_{u}_{w}");
        for (u, w) in &self.edges {
            b.var(edge_var(u, w));
        }
        for node in self.nodes() {
            let scope: Vec<String> = self
                .edges
                .iter()
                .filter(|(u, w)| *u == node || *w == node)
                .map(|(u, w)| edge_var(u, w))
                .collect();
            let vals = value(&node, scope.len());
            b.factor(node.to_uppercase(), &scope, vals);
        }
        b.build(2)
    }

    /// Network instance; `value(u, w)` fills the pairwise factor of edge `(u, w)`.
    pub fn network<T: Scalar>(&self, mut value: impl FnMut(&str, &str) -> Vec<T>) -> Result<FactorGraph<T>> {
        let mut b = Builder::default();
        for node in self.nodes() {
            b.var(node);
        }
        for (u, w) in &self.edges {
            let vals = value(u, w);
            b.factor(format!("f_{u}_{w}"), &[u.clone(), w.clone()], vals);
        }
        b.build(2)
    }
}

/// Which tensor anchors each region of a translation-symmetric chain
/// decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainSeed {
    /// Regions `{S_k, A_k}`: a shared 4-leg tensor and the apex after it.
    FourLeg,
    /// Regions `{A_k, S_{k+1}}`: an apex and the shared tensor after it.
    TwoLeg,
}

impl TriangleChain {
    /// Region blocks for the tensor-network instance of this chain, one per
    /// triangle, each a translate of the seed's block. Every region graph
    /// link then carries the two legs leaving a triangle, so the only loop
    /// the regions do not contain is the one running around the chain.
    pub fn region_blocks<T: Scalar>(&self, fg: &FactorGraph<T>, seed: ChainSeed) -> Result<Vec<Vec<FactorId>>> {
        let id = |name: &str| {
            let upper = name.to_uppercase();
            fg.factor_index(&upper).ok_or(Error::NodeNotFound(upper))
        };
        let ns = self.spine.len();
        let mut blocks: Vec<Vec<FactorId>> = (0..self.n)
            .map(|k| match seed {
                ChainSeed::FourLeg => Ok(vec![id(&self.spine[k])?, id(&self.apex[k])?]),
                ChainSeed::TwoLeg => Ok(vec![id(&self.apex[k])?, id(&self.spine[(k + 1) % ns])?]),
            })
            .collect::<Result<_>>()?;
        if !self.periodic {
            // The open chain has one spine tensor more than it has triangles.
            let extra = match seed {
                ChainSeed::FourLeg => id(&self.spine[ns - 1])?,
                ChainSeed::TwoLeg => id(&self.spine[0])?,
            };
            blocks.push(vec![extra]);
        }
        Ok(blocks)
    }
}

/// `n`-triangle chain with i.i.d. uniform `(0, 1)` entries.
pub fn gen_triangle_chain<T: Scalar>(n: usize, periodic: bool, kind: ChainKind, seed: u64) -> Result<FactorGraph<T>> {
    let chain = TriangleChain::new(n, periodic)?;
    let mut rng = rng_for(seed);
    match kind {
        ChainKind::TensorNetwork => chain.tensor_network(|_, r| random_table(&mut rng, 1 << r)),
        ChainKind::Network => chain.network(|_, _| random_table(&mut rng, 4)),
    }
}

/// Periodic triangle chain with entries `exp(-x_1 ... x_r / t_emp)`.
pub fn gen_ising_triangle_chain<T: Scalar>(n: usize, t_emp: f64) -> Result<FactorGraph<T>> {
    if !(t_emp > 0.0) || !t_emp.is_finite() {
        return Err(Error::InvalidTemperature(t_emp));
    }
    let chain = TriangleChain::new(n, true)?;
    chain.tensor_network(|_, r| {
        let len = 1usize << r;
        // Only the all-ones assignment (the last entry) has a nonzero product.
        (0..len).map(|k| if k == len - 1 { T::of((-1.0 / t_emp).exp()) } else { T::one() }).collect()
    })
}

/// Same Boltzmann weights on a chain that may be open.
pub fn gen_ising_chain<T: Scalar>(n: usize, periodic: bool, t_emp: f64) -> Result<FactorGraph<T>> {
    if !(t_emp > 0.0) || !t_emp.is_finite() {
        return Err(Error::InvalidTemperature(t_emp));
    }
    let chain = TriangleChain::new(n, periodic)?;
    chain.tensor_network(|_, r| {
        let len = 1usize << r;
        (0..len).map(|k| if k == len - 1 { T::of((-1.0 / t_emp).exp()) } else { T::one() }).collect()
    })
}

/// `w × h` open square lattice: tensor `T_r_c` on every site, one binary
/// variable per bond.
pub fn gen_square_lattice_tn<T: Scalar>(w: usize, h: usize, seed: u64) -> Result<FactorGraph<T>> {
    if w * h < 2 {
        return Err(Error::InvalidSize(format!("{w}x{h} lattice")));
    }
    let mut rng = rng_for(seed);
    let mut b = Builder::default();
    let hb = |r: usize, c: usize| format!("h_{r}_{c}");
    let vb = |r: usize, c: usize| format!("v_{r}_{c}");
    for r in 0..h {
        for c in 0..w {
            if c + 1 < w {
                b.var(hb(r, c));
            }
            if r + 1 < h {
                b.var(vb(r, c));
            }
        }
    }
    for r in 0..h {
        for c in 0..w {
            let mut scope = Vec::new();
            if c > 0 {
                scope.push(hb(r, c - 1));
            }
            if c + 1 < w {
                scope.push(hb(r, c));
            }
            if r > 0 {
                scope.push(vb(r - 1, c));
            }
            if r + 1 < h {
                scope.push(vb(r, c));
            }
            let vals = random_table(&mut rng, 1 << scope.len());
            b.factor(format!("T_{r}_{c}"), &scope, vals);
        }
    }
    b.build(2)
}

/// Random tree network on `num_vars` binary variables, with one unary factor
/// on every other variable.
pub fn gen_random_tree<T: Scalar>(num_vars: usize, seed: u64) -> Result<FactorGraph<T>> {
    if num_vars < 1 {
        return Err(Error::InvalidSize("empty tree".into()));
    }
    let mut rng = rng_for(seed);
    let mut b = Builder::default();
    for v in 0..num_vars {
        b.var(format!("x{v}"));
    }
    for v in 0..num_vars {
        if v % 2 == 0 || num_vars == 1 {
            let vals = random_table(&mut rng, 2);
            b.factor(format!("u{v}"), &[format!("x{v}")], vals);
        }
        if v > 0 {
            let p = rng.gen_range(0..v);
            let vals = random_table(&mut rng, 4);
            b.factor(format!("f{p}_{v}"), &[format!("x{p}"), format!("x{v}")], vals);
        }
    }
    b.build(2)
}

/// Connected random model: factor `k < num_vars - 1` joins variable `k + 1`
/// to an earlier one; the rest get random scopes of size `1..=max_scope`.
pub fn gen_random_gm<T: Scalar>(num_vars: usize, num_factors: usize, max_scope: usize, seed: u64) -> Result<FactorGraph<T>> {
    if num_vars < 1 || max_scope < 1 || (num_vars > 1 && (num_factors + 1 < num_vars || max_scope < 2)) || num_factors < 1 {
        return Err(Error::InvalidSize(format!("{num_vars} variables, {num_factors} factors, scope {max_scope}")));
    }
    let mut rng = rng_for(seed);
    let mut b = Builder::default();
    for v in 0..num_vars {
        b.var(format!("x{v}"));
    }
    for k in 0..num_factors {
        let size = rng.gen_range(1..=max_scope.min(num_vars));
        let mut scope: Vec<usize> = Vec::new();
        if k + 1 < num_vars {
            scope.push(k + 1);
            scope.push(rng.gen_range(0..=k));
        }
        while scope.len() < size {
            let v = rng.gen_range(0..num_vars);
            if !scope.contains(&v) {
                scope.push(v);
            }
        }
        let names: Vec<String> = scope.iter().map(|v| format!("x{v}")).collect();
        let vals = random_table(&mut rng, 1 << scope.len());
        b.factor(format!("f{k}"), &names, vals);
    }
    b.build(2)
}

/// Random tensor network: a random spanning tree over `num_tensors` nodes
/// plus `extra_bonds` random bonds (double bonds allowed) and, on each
/// tensor with probability one half, one open leg.
pub fn gen_random_tn<T: Scalar>(num_tensors: usize, extra_bonds: usize, seed: u64) -> Result<FactorGraph<T>> {
    if num_tensors < 1 {
        return Err(Error::InvalidSize("empty tensor network".into()));
    }
    let mut rng = rng_for(seed);
    let mut bonds: Vec<(usize, usize)> = (1..num_tensors).map(|t| (rng.gen_range(0..t), t)).collect();
    if num_tensors > 1 {
        for _ in 0..extra_bonds {
            let a = rng.gen_range(0..num_tensors);
            let c = rng.gen_range(0..num_tensors);
            if a != c {
                bonds.push((a.min(c), a.max(c)));
            }
        }
    }
    tn_from_bonds(&bonds, num_tensors, &mut rng, true)
}

pub(crate) fn tn_from_bonds<T: Scalar>(
    bonds: &[(usize, usize)],
    num_tensors: usize,
    rng: &mut ChaCha8Rng,
    open_legs: bool,
) -> Result<FactorGraph<T>> {
    let mut b = Builder::default();
    let mut legs: Vec<Vec<String>> = vec![Vec::new(); num_tensors];
    for (k, &(u, w)) in bonds.iter().enumerate() {
        let name = b.var(format!("b{k}"));
        legs[u].push(name.clone());
        legs[w].push(name);
    }
    for (t, l) in legs.iter_mut().enumerate() {
        if l.is_empty() || (open_legs && rng.gen_bool(0.5)) {
            l.push(b.var(format!("o{t}")));
        }
    }
    for (t, l) in legs.iter().enumerate() {
        let vals = random_table(rng, 1 << l.len());
        b.factor(format!("T{t}"), l, vals);
    }
    b.build(2)
}

/// Random network: spanning tree, `extra_edges` random edges and unary
/// factors on roughly half of the variables.
pub fn gen_random_network<T: Scalar>(num_vars: usize, extra_edges: usize, seed: u64) -> Result<FactorGraph<T>> {
    if num_vars < 2 {
        return Err(Error::InvalidSize("network needs two variables".into()));
    }
    let mut rng = rng_for(seed);
    let mut edges: Vec<(usize, usize)> = (1..num_vars).map(|v| (rng.gen_range(0..v), v)).collect();
    for _ in 0..extra_edges {
        let a = rng.gen_range(0..num_vars);
        let c = rng.gen_range(0..num_vars);
        if a != c {
            edges.push((a.min(c), a.max(c)));
        }
    }
    network_from_edges(&edges, num_vars, &mut rng)
}

pub(crate) fn network_from_edges<T: Scalar>(
    edges: &[(usize, usize)],
    num_vars: usize,
    rng: &mut ChaCha8Rng,
) -> Result<FactorGraph<T>> {
    let mut b = Builder::default();
    for v in 0..num_vars {
        b.var(format!("x{v}"));
    }
    for v in 0..num_vars {
        if rng.gen_bool(0.5) {
            let vals = random_table(rng, 2);
            b.factor(format!("u{v}"), &[format!("x{v}")], vals);
        }
    }
    for (k, &(u, w)) in edges.iter().enumerate() {
        let vals = random_table(rng, 4);
        b.factor(format!("f{k}"), &[format!("x{u}"), format!("x{w}")], vals);
    }
    b.build(2)
}

/// Random cactus: blocks hung on random earlier nodes, each a single edge or
/// a cycle of length `3..=max_cycle`, so every simple cycle is at most
/// `max_cycle` long. Returned as node count and edge list.
pub fn random_cactus(blocks: usize, max_cycle: usize, seed: u64) -> (usize, Vec<(usize, usize)>) {
    let mut rng = rng_for(seed);
    let mut n = 1;
    let mut edges = Vec::new();
    for _ in 0..blocks {
        let anchor = rng.gen_range(0..n);
        let len = if max_cycle >= 3 { rng.gen_range(2..=max_cycle) } else { 2 };
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
    (n, edges)
}

/// Network whose simple graph is a random cactus (loops at most `max_cycle`).
pub fn gen_bounded_loop_network<T: Scalar>(blocks: usize, max_cycle: usize, seed: u64) -> Result<FactorGraph<T>> {
    let (n, edges) = random_cactus(blocks.max(1), max_cycle, seed);
    network_from_edges(&edges, n, &mut rng_for(seed ^ 0x9e37_79b9))
}

/// Tensor network whose simple graph is a random cactus.
pub fn gen_bounded_loop_tn<T: Scalar>(blocks: usize, max_cycle: usize, seed: u64) -> Result<FactorGraph<T>> {
    let (n, edges) = random_cactus(blocks.max(1), max_cycle, seed);
    tn_from_bonds(&edges, n, &mut rng_for(seed ^ 0x9e37_79b9), true)
}
