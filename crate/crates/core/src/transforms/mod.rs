//! Maps between graph classes that keep the distribution of the original
//! variables.
//!
//! Every map returns a [`TransformResult`] that records, for each output
//! variable, which input variables it stands for. Copies carry the value of a
//! single input variable; composites carry the row-major joint value of a
//! list of input variables. Factors added only to tie copies and composites
//! together are 0/1 tables flagged with [`Factor::delta`](crate::graph::Factor).
//!
//! * [`to_tensor_network`] splits variables of degree above two into copies
//!   joined by a delta tensor.
//! * [`to_three_leg_tn`] then replaces each tensor with more than three legs
//!   by a chain of three-leg tensors threaded through growing composites.
//! * [`to_network`] finally turns each three-leg tensor `f(x1, x2, x3)` into
//!   `g(x3, y)`, `h1(x1, y)` and `h2(x2, y)` with `y = (x1, x2)`.
//! * [`tn_to_network`] gives each tensor a composite variable holding all of
//!   its legs, and [`network_to_tn`] is delta insertion on a network.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{classify, FactorDescriptor, FactorGraph, FactorId, VarId};
use crate::scalar::Scalar;
use crate::tensor::{Axis, LabeledTensor};

/// Largest dimension a composite variable may have by default.
pub const DEFAULT_COMPOSITE_BUDGET: u128 = 1 << 16;

/// Largest dense table the network map writes for a consistency factor.
const PAIR_TABLE_BUDGET: u128 = 1 << 26;

/// What an output variable stands for, in terms of the input variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    /// The input variable itself.
    Original(VarId),
    /// A copy forced equal to the input variable.
    Copy(VarId),
    /// The row-major joint value of the listed input variables.
    Composite(Vec<VarId>),
}

impl Provenance {
    /// Input variables whose values this variable determines.
    pub fn components(&self) -> &[VarId] {
        match self {
            Provenance::Original(v) | Provenance::Copy(v) => std::slice::from_ref(v),
            Provenance::Composite(parts) => parts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformResult<T> {
    pub output: FactorGraph<T>,
    /// Output variables that are copies or composites.
    pub auxiliary_variables: BTreeSet<VarId>,
    /// Output factors flagged as structural delta tables.
    pub auxiliary_factors: BTreeSet<FactorId>,
    /// Indexed by output variable.
    pub variable_provenance: Vec<Provenance>,
    /// Dimensions of the input variables.
    pub input_dims: Vec<usize>,
}

impl<T: Scalar> TransformResult<T> {
    /// The input unchanged.
    pub fn identity(fg: &FactorGraph<T>) -> Self {
        finish(fg.clone(), (0..fg.num_variables()).map(Provenance::Original).collect(), fg.var_dims().to_vec())
    }

    /// Applies `next`, which was computed on `self.output`, and rewrites its
    /// provenance in terms of this result's input.
    pub fn then(self, next: TransformResult<T>) -> Self {
        let prov = next
            .variable_provenance
            .iter()
            .map(|p| match p {
                Provenance::Original(u) => self.variable_provenance[*u].clone(),
                Provenance::Copy(u) => match &self.variable_provenance[*u] {
                    Provenance::Original(v) | Provenance::Copy(v) => Provenance::Copy(*v),
                    Provenance::Composite(parts) => Provenance::Composite(parts.clone()),
                },
                Provenance::Composite(parts) => Provenance::Composite(
                    parts.iter().flat_map(|&u| self.variable_provenance[u].components().to_vec()).collect(),
                ),
            })
            .collect();
        finish(next.output, prov, self.input_dims)
    }

    /// Output variable that is the input variable `v` itself, if any.
    pub fn embedding(&self, v: VarId) -> Option<VarId> {
        self.variable_provenance.iter().position(|p| *p == Provenance::Original(v))
    }

    /// Marginals of the input variables read off marginals of the output
    /// variables. Each input variable is read from its own output variable
    /// when it has one, else from the first composite holding it.
    pub fn input_marginals(&self, output_marginals: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        (0..self.input_dims.len())
            .map(|v| {
                let holder = self.embedding(v).or_else(|| {
                    self.variable_provenance.iter().position(|p| p.components().contains(&v))
                });
                let w = holder.ok_or_else(|| Error::InconsistentSpec(format!("input variable {v} was dropped")))?;
                let parts = self.variable_provenance[w].components();
                let dims: Vec<usize> = parts.iter().map(|&u| self.input_dims[u]).collect();
                let pos = parts.iter().position(|&u| u == v).expect("holder contains v");
                let stride: usize = dims[pos + 1..].iter().product();
                let mut out = vec![0.0; self.input_dims[v]];
                for (y, p) in output_marginals[w].iter().enumerate() {
                    out[(y / stride) % dims[pos]] += p;
                }
                Ok(out)
            })
            .collect()
    }
}

fn finish<T: Scalar>(output: FactorGraph<T>, prov: Vec<Provenance>, input_dims: Vec<usize>) -> TransformResult<T> {
    let auxiliary_variables =
        prov.iter().enumerate().filter(|(_, p)| !matches!(p, Provenance::Original(_))).map(|(v, _)| v).collect();
    let auxiliary_factors = output.factors().iter().enumerate().filter(|(_, f)| f.delta).map(|(a, _)| a).collect();
    TransformResult { output, auxiliary_variables, auxiliary_factors, variable_provenance: prov, input_dims }
}

/// Output under construction for a single step.
struct Draft<T> {
    names: Vec<String>,
    dims: Vec<usize>,
    prov: Vec<Provenance>,
    taken: HashSet<String>,
    factors: Vec<FactorDescriptor<T>>,
    budget: u128,
}

impl<T: Scalar> Draft<T> {
    fn new(fg: &FactorGraph<T>, budget: u128) -> Self {
        Draft {
            names: Vec::new(),
            dims: Vec::new(),
            prov: Vec::new(),
            taken: fg.var_names().iter().cloned().collect(),
            factors: Vec::new(),
            budget,
        }
    }

    fn keep_all(fg: &FactorGraph<T>, budget: u128) -> Self {
        let mut d = Self::new(fg, budget);
        d.names = fg.var_names().to_vec();
        d.dims = fg.var_dims().to_vec();
        d.prov = (0..fg.num_variables()).map(Provenance::Original).collect();
        d
    }

    fn fresh(&mut self, base: String, dim: usize, prov: Provenance) -> VarId {
        let mut name = base;
        while !self.taken.insert(name.clone()) {
            name.push('\'');
        }
        self.names.push(name);
        self.dims.push(dim);
        self.prov.push(prov);
        self.names.len() - 1
    }

    /// New variable holding the joint value of `parts`, which are variables
    /// of this draft.
    fn composite(&mut self, base: String, parts: &[VarId]) -> Result<VarId> {
        let dim: u128 = parts.iter().map(|&u| self.dims[u] as u128).product();
        if dim > self.budget {
            return Err(Error::AlphabetBlowupExceeded(dim));
        }
        let flat = parts.iter().flat_map(|&u| self.prov[u].components().to_vec()).collect();
        Ok(self.fresh(base, dim as usize, Provenance::Composite(flat)))
    }

    fn factor(&mut self, name: String, scope: &[VarId], values: Vec<T>, delta: bool) {
        let scope = scope.iter().map(|&v| self.names[v].clone()).collect();
        self.factors.push(FactorDescriptor { name, scope, values, delta });
    }

    /// 0/1 table over `scope` that is one where `keep` holds.
    fn indicator(&self, scope: &[VarId], keep: impl Fn(&[usize]) -> bool) -> Result<Vec<T>> {
        let axes = scope.iter().enumerate().map(|(k, &v)| Axis::new(k, self.dims[v])).collect();
        let t = LabeledTensor::from_fn(axes, |idx| if keep(idx) { T::one() } else { T::zero() })?;
        Ok(t.into_values())
    }

    fn build(self, fg: &FactorGraph<T>) -> Result<TransformResult<T>> {
        let output = FactorGraph::with_dims(fg.alphabet_size(), &self.names, &self.dims, self.factors)?;
        Ok(finish(output, self.prov, fg.var_dims().to_vec()))
    }
}

/// Equivalent tensor network: every variable shared by more than two factors
/// is split into copies, one per factor, tied together by a delta tensor.
/// The variable itself stays with its first factor.
pub fn to_tensor_network<T: Scalar>(fg: &FactorGraph<T>) -> Result<TransformResult<T>> {
    if classify(fg).is_tensor_network() {
        return Ok(TransformResult::identity(fg));
    }
    let mut d = Draft::keep_all(fg, DEFAULT_COMPOSITE_BUDGET);
    // Which variable each factor sees in place of each of its legs.
    let mut seen: Vec<Vec<VarId>> = fg.factors().iter().map(|f| f.scope.clone()).collect();
    let mut deltas = Vec::new();
    for v in 0..fg.num_variables() {
        let users = fg.factors_of(v);
        if users.len() <= 2 {
            continue;
        }
        let mut legs = vec![v];
        for (k, &a) in users.iter().enumerate().skip(1) {
            let c = d.fresh(format!("{}#{}", fg.var_name(v), k + 1), fg.var_dim(v), Provenance::Copy(v));
            let pos = fg.factor(a).scope.iter().position(|&u| u == v).expect("factor uses v");
            seen[a][pos] = c;
            legs.push(c);
        }
        deltas.push((v, legs));
    }
    for (a, f) in fg.factors().iter().enumerate() {
        d.factor(f.name.clone(), &seen[a], f.table.values().to_vec(), f.delta);
    }
    for (v, legs) in deltas {
        let values = d.indicator(&legs, |idx| idx.windows(2).all(|w| w[0] == w[1]))?;
        d.factor(format!("delta:{}", fg.var_name(v)), &legs, values, true);
    }
    d.build(fg)
}

/// Equivalent tensor network whose tensors have at most three legs, with the
/// default composite budget.
pub fn to_three_leg_tn<T: Scalar>(fg: &FactorGraph<T>) -> Result<TransformResult<T>> {
    to_three_leg_tn_with_budget(fg, DEFAULT_COMPOSITE_BUDGET)
}

/// Delta insertion followed by the composite chain. A tensor `f(x1..xn)`
/// with `n > 3` becomes `n - 2` tensors: a delta `(x1, x2, y1)`, deltas
/// `(x_{k+1}, y_{k-1}, y_k)` for `k = 2..n-3`, and `f` itself read as a
/// function of `(y_{n-3}, x_{n-1}, x_n)`, where `y_k = (x1..x_{k+1})`.
pub fn to_three_leg_tn_with_budget<T: Scalar>(fg: &FactorGraph<T>, budget: u128) -> Result<TransformResult<T>> {
    let tn = to_tensor_network(fg)?;
    let chained = chain_step(&tn.output, budget)?;
    Ok(tn.then(chained))
}

fn chain_step<T: Scalar>(fg: &FactorGraph<T>, budget: u128) -> Result<TransformResult<T>> {
    if fg.max_scope() <= 3 {
        return Ok(TransformResult::identity(fg));
    }
    let mut d = Draft::keep_all(fg, budget);
    for f in fg.factors() {
        let x = &f.scope;
        let n = x.len();
        if n <= 3 {
            d.factor(f.name.clone(), x, f.table.values().to_vec(), f.delta);
            continue;
        }
        let mut prev = d.composite(format!("{}~y1", f.name), &x[..2])?;
        let values = d.indicator(&[x[0], x[1], prev], |i| i[2] == i[0] * d.dims[x[1]] + i[1])?;
        d.factor(format!("{}~d1", f.name), &[x[0], x[1], prev], values, true);
        for k in 2..=n - 3 {
            let y = d.composite(format!("{}~y{k}", f.name), &x[..k + 1])?;
            let dk = d.dims[x[k]];
            let values = d.indicator(&[x[k], prev, y], |i| i[2] == i[1] * dk + i[0])?;
            d.factor(format!("{}~d{k}", f.name), &[x[k], prev, y], values, true);
            prev = y;
        }
        // Row-major order makes the table of f over (x1..xn) the same vector
        // as the table over (y_{n-3}, x_{n-1}, x_n).
        d.factor(f.name.clone(), &[prev, x[n - 2], x[n - 1]], f.table.values().to_vec(), f.delta);
    }
    d.build(fg)
}

/// Equivalent network with the default composite budget.
pub fn to_network<T: Scalar>(fg: &FactorGraph<T>) -> Result<TransformResult<T>> {
    to_network_with_budget(fg, DEFAULT_COMPOSITE_BUDGET)
}

/// Equivalent network whose variables are shared by at most three factors.
/// After [`to_three_leg_tn_with_budget`], each three-leg tensor
/// `f(x1, x2, x3)` is replaced by `g(x3, y)`, `h1(x1, y)` and `h2(x2, y)`
/// with `y = (x1, x2)`, `g` reading `f` through `y` and `h1`, `h2` the
/// coordinate deltas. The two legs of smallest dimension go into `y`.
pub fn to_network_with_budget<T: Scalar>(fg: &FactorGraph<T>, budget: u128) -> Result<TransformResult<T>> {
    if classify(fg).is_network() {
        return Ok(TransformResult::identity(fg));
    }
    let tn3 = to_three_leg_tn_with_budget(fg, budget)?;
    let pairwise = pairwise_step(&tn3.output, budget)?;
    Ok(tn3.then(pairwise))
}

fn pairwise_step<T: Scalar>(fg: &FactorGraph<T>, budget: u128) -> Result<TransformResult<T>> {
    let mut d = Draft::keep_all(fg, budget);
    for f in fg.factors() {
        if f.scope.len() <= 2 {
            d.factor(f.name.clone(), &f.scope, f.table.values().to_vec(), f.delta);
            continue;
        }
        let s = &f.scope;
        let keep = (0..3).max_by_key(|&p| (d.dims[s[p]], p)).expect("three legs");
        let (p1, p2) = match keep {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (u, w, c) = (s[p1], s[p2], s[keep]);
        let y = d.composite(format!("{}~y", f.name), &[u, w])?;
        let dw = d.dims[w];
        let axes = vec![Axis::new(0, d.dims[y]), Axis::new(1, d.dims[c])];
        let g = LabeledTensor::from_fn(axes, |i| {
            let mut idx = [0usize; 3];
            idx[p1] = i[0] / dw;
            idx[p2] = i[0] % dw;
            idx[keep] = i[1];
            f.table.get(&idx)
        })?;
        d.factor(format!("{}~g", f.name), &[y, c], g.into_values(), f.delta);
        let h1 = d.indicator(&[u, y], |i| i[0] == i[1] / dw)?;
        d.factor(format!("{}~h1", f.name), &[u, y], h1, true);
        let h2 = d.indicator(&[w, y], |i| i[0] == i[1] % dw)?;
        d.factor(format!("{}~h2", f.name), &[w, y], h2, true);
    }
    d.build(fg)
}

/// Network associated with a tensor network, with the default budget.
pub fn tn_to_network<T: Scalar>(tn: &FactorGraph<T>) -> Result<TransformResult<T>> {
    tn_to_network_with_budget(tn, DEFAULT_COMPOSITE_BUDGET)
}

/// Each tensor `T_a` becomes a composite variable `z_a` over all its legs
/// with the unary factor `T_a(z_a)`, and each bond shared by `a` and `b`
/// becomes a pairwise delta that matches the bond coordinate of `z_a` and
/// `z_b`. Chains are returned unchanged.
pub fn tn_to_network_with_budget<T: Scalar>(tn: &FactorGraph<T>, budget: u128) -> Result<TransformResult<T>> {
    let class = classify(tn);
    if !class.is_tensor_network() {
        return Err(Error::ClassMismatch { found: class.to_string(), wanted: "tensor network input".into() });
    }
    if class.is_network() {
        return Ok(TransformResult::identity(tn));
    }
    let mut d = Draft::new(tn, budget);
    let z: Vec<VarId> = tn
        .factors()
        .iter()
        .map(|f| {
            let dim: u128 = f.scope.iter().map(|&v| tn.var_dim(v) as u128).product();
            if dim > budget {
                return Err(Error::AlphabetBlowupExceeded(dim));
            }
            Ok(d.fresh(format!("z:{}", f.name), dim as usize, Provenance::Composite(f.scope.clone())))
        })
        .collect::<Result<_>>()?;
    for (a, f) in tn.factors().iter().enumerate() {
        d.factor(f.name.clone(), &[z[a]], f.table.values().to_vec(), f.delta);
    }
    for v in 0..tn.num_variables() {
        let &[a, b] = tn.factors_of(v) else { continue };
        let (fa, fb) = (tn.factor(a), tn.factor(b));
        let size = d.dims[z[a]] as u128 * d.dims[z[b]] as u128;
        if size > PAIR_TABLE_BUDGET {
            return Err(Error::MemoryBudgetExceeded(size));
        }
        let coord = |f: &crate::graph::Factor<T>, y: usize| {
            let pos = f.scope.iter().position(|&u| u == v).expect("bond leg");
            let stride: usize = f.scope[pos + 1..].iter().map(|&u| tn.var_dim(u)).product();
            (y / stride) % tn.var_dim(v)
        };
        let values = d.indicator(&[z[a], z[b]], |i| coord(fa, i[0]) == coord(fb, i[1]))?;
        d.factor(format!("bond:{}", tn.var_name(v)), &[z[a], z[b]], values, true);
    }
    d.build(tn)
}

/// Tensor network associated with a network: delta insertion on every
/// variable shared by more than two factors.
pub fn network_to_tn<T: Scalar>(net: &FactorGraph<T>) -> Result<TransformResult<T>> {
    let class = classify(net);
    if !class.is_network() {
        return Err(Error::ClassMismatch { found: class.to_string(), wanted: "network input".into() });
    }
    to_tensor_network(net)
}
