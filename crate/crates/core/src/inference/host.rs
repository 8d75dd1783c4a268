use std::collections::HashMap;

use super::{average, belief, expected_log, labels_of, log_trace, to_f64, CountingDecomposition, InferenceReport};
use crate::engine::{HostKcn, HostState, MessageSet};
use crate::error::{Error, Result};
use crate::graph::{Carried, FactorGraph, NodeRef, ViewMode};
use crate::scalar::Scalar;
use crate::tensor::{Label, LabeledTensor};

/// Which node set supplies the tensors of a pair term in the bipartite
/// partition function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntersectionReading {
    /// Tensors of `S_{i∩j}` (the reading under which the estimate is exact).
    #[default]
    Intersection,
    /// Tensors of `S_{i\j}`, the literal wording of one formulation.
    Difference,
}

/// Per-node quantities shared by the estimators.
struct Regions<'a, T> {
    kcn: &'a HostKcn,
    msgs: &'a MessageSet<T>,
    tensors: Vec<LabeledTensor<T>>,
}

impl<'a, T: Scalar> Regions<'a, T> {
    fn new(fg: &FactorGraph<T>, kcn: &'a HostKcn, msgs: &'a MessageSet<T>) -> Self {
        let tensors = (0..kcn.num_nodes()).map(|h| kcn.node_tensor(fg, h)).collect();
        Regions { kcn, msgs, tensors }
    }

    fn ops(&self, h: usize) -> Vec<&LabeledTensor<T>> {
        self.kcn.region_operands(&self.tensors, self.msgs, h)
    }

    /// Region belief at `h` marginalized to `keep`.
    fn belief(&self, h: usize, keep: &[Label]) -> Result<LabeledTensor<T>> {
        belief(&self.ops(h), keep)
    }

    /// Closed network of the pair `(i, j)`: tensors of `S_{i∩j}` (or of
    /// `S_{i\j}`), `m_{j→i}` and `m_{k→j}` for `k ∈ S_{i∩j} \ {j}`.
    fn pair_ops(&self, i: usize, j: usize, reading: IntersectionReading) -> Vec<&LabeledTensor<T>> {
        let (diff, inter) = self.kcn.split(i, j);
        let mut ops: Vec<&LabeledTensor<T>> = Vec::new();
        let tensor_nodes = match reading {
            IntersectionReading::Intersection => &inter,
            IntersectionReading::Difference => &diff,
        };
        ops.extend(tensor_nodes.iter().map(|&k| &self.tensors[k]));
        let msgs = self.msgs;
        let incoming = std::iter::once(msgs.message(j, i).expect("symmetric neighborhoods"))
            .chain(inter.iter().filter(|&&k| k != j).map(|&k| msgs.message(k, j).expect("channel inside region")));
        ops.extend(incoming.filter(|m| m.rank() > 0));
        ops
    }

    /// Unordered pairs `i < j` with `j ∈ S_i`.
    fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, s) in self.kcn.regions.iter().enumerate() {
            out.extend(s.nodes.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Host nodes whose tensor carries label `v`.
    fn carriers(&self, v: Label) -> Vec<usize> {
        (0..self.tensors.len()).filter(|&h| self.tensors[h].has(v)).collect()
    }

    /// Variables the tensors of `nodes` depend on.
    fn labels_of_nodes(&self, nodes: &[usize]) -> Vec<Label> {
        let ops: Vec<&LabeledTensor<T>> = nodes.iter().map(|&k| &self.tensors[k]).collect();
        labels_of(&ops)
    }
}

/// Marginal of every variable: the average of the region estimates of every
/// host node whose tensor carries it.
fn marginals<T: Scalar>(r: &Regions<T>, nv: usize) -> Result<Vec<Vec<f64>>> {
    (0..nv)
        .map(|v| {
            let ps: Vec<LabeledTensor<T>> = r.carriers(v).iter().map(|&h| r.belief(h, &[v])).collect::<Result<_>>()?;
            Ok(to_f64(&average(&ps)?))
        })
        .collect()
}

/// `U = -Σ_a E[log f_a]` with the expectation of factor node `a` averaged
/// over its own region and, in the bipartite host, the regions of its
/// variables.
fn energy<T: Scalar>(fg: &FactorGraph<T>, r: &Regions<T>) -> Result<f64> {
    let mut u = 0.0;
    for h in 0..r.kcn.num_nodes() {
        let NodeRef::Factor(a) = r.kcn.sg.node(h) else { continue };
        let f = &fg.factor(a).table;
        let scope: Vec<Label> = f.labels().collect();
        let mut hosts = vec![h];
        if r.kcn.sg.mode() == ViewMode::Bipartite {
            hosts.extend(scope.iter().map(|&v| r.kcn.sg.variable_node(v).expect("variable node")));
        }
        let ps: Vec<LabeledTensor<T>> = hosts.iter().map(|&k| r.belief(k, &scope)).collect::<Result<_>>()?;
        u -= expected_log(&average(&ps)?, f)?;
    }
    Ok(u)
}

/// `Π_i Tr(S_i Π m_{k→i}) / Π_{(i,j)} Tr(pair)^{2/|S_{i∩j}|}` in log form.
///
/// Each pair trace is the geometric mean of its two orientations `(i, j)`
/// and `(j, i)`. The orientations agree at a bounded fixed point; averaging
/// them gives every message inside an intersection class a total exponent of
/// one in the denominator, so rescaling any single message cancels exactly.
fn partition<T: Scalar>(r: &Regions<T>, reading: IntersectionReading) -> Result<f64> {
    let mut log_z = 0.0;
    for h in 0..r.kcn.num_nodes() {
        log_z += log_trace(&r.ops(h))?;
    }
    for (i, j) in r.pairs() {
        let (_, inter) = r.kcn.split(i, j);
        let both = log_trace(&r.pair_ops(i, j, reading))? + log_trace(&r.pair_ops(j, i, reading))?;
        log_z -= both / inter.len() as f64;
    }
    Ok(log_z)
}

/// `Σ_i H(p_{N_i}) - Σ_{(i,j)} (2/|S_{i∩j}|) H(p_{N_{i∩j}})`, with the
/// distributions over every variable their tensors touch.
fn region_decomposition<T: Scalar>(r: &Regions<T>) -> Result<CountingDecomposition<T>> {
    let mut terms = Vec::new();
    for h in 0..r.kcn.num_nodes() {
        let keep = r.labels_of_nodes(&r.kcn.regions[h].nodes);
        terms.push((1.0, r.belief(h, &keep)?));
    }
    for (i, j) in r.pairs() {
        let (_, inter) = r.kcn.split(i, j);
        let keep = r.labels_of_nodes(&inter);
        let p = average(&[
            belief(&r.pair_ops(i, j, IntersectionReading::Intersection), &keep)?,
            belief(&r.pair_ops(j, i, IntersectionReading::Intersection), &keep)?,
        ])?;
        terms.push((-2.0 / inter.len() as f64, p));
    }
    Ok(CountingDecomposition { terms })
}

fn report<T: Scalar>(
    fg: &FactorGraph<T>,
    state: &HostState<T>,
    method: &str,
    reading: IntersectionReading,
) -> Result<InferenceReport> {
    let r = Regions::new(fg, &state.kcn, &state.messages);
    let log_z = partition(&r, reading)?;
    let u = energy(fg, &r)?;
    let m = marginals(&r, fg.num_variables())?;
    let mut rep = InferenceReport::new(method, log_z, u, m, &state.diagnostics);
    rep.entropy_regions = region_decomposition(&r).ok().map(|d| d.entropy());
    Ok(rep)
}

/// Tensor-network inference: averaged marginals, per-tensor energies from
/// each tensor's own region, and the intersection-corrected partition function.
pub fn tn_inference<T: Scalar>(fg: &FactorGraph<T>, state: &HostState<T>) -> Result<InferenceReport> {
    if state.kcn.sg.mode() != ViewMode::TensorNetwork {
        return Err(Error::InvalidConfig("tn_inference needs a tensor-network host".into()));
    }
    report(fg, state, "kcn-tn", IntersectionReading::Intersection)
}

/// Inference on the bipartite host of an arbitrary model.
pub fn gm_inference<T: Scalar>(fg: &FactorGraph<T>, state: &HostState<T>) -> Result<InferenceReport> {
    gm_inference_with(fg, state, IntersectionReading::Intersection)
}

pub fn gm_inference_with<T: Scalar>(
    fg: &FactorGraph<T>,
    state: &HostState<T>,
    reading: IntersectionReading,
) -> Result<InferenceReport> {
    if state.kcn.sg.mode() != ViewMode::Bipartite {
        return Err(Error::InvalidConfig("gm_inference needs a bipartite host".into()));
    }
    report(fg, state, "kcn-gm", reading)
}

/// Counting weights of the overlap-corrected entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct UnboundedWeights {
    /// `(i, j, 1 / C(|S_{i∩j}|, 2))` for every unordered pair.
    pub pairs: Vec<(usize, usize, f64)>,
    /// `w_i = 1 - Σ` of the pair weights whose intersection holds `i`.
    pub nodes: Vec<f64>,
    /// `(edge, c_e)`; `c_e = A_e - 1` where `A_e` sums the pair weights whose
    /// intersection holds both endpoints.
    pub edges: Vec<(usize, f64)>,
}

impl UnboundedWeights {
    pub fn new(kcn: &HostKcn) -> Self {
        let mut pairs = Vec::new();
        let mut nodes = vec![1.0; kcn.num_nodes()];
        let mut both: HashMap<usize, f64> = HashMap::new();
        for (i, s) in kcn.regions.iter().enumerate() {
            for &j in s.nodes.iter().filter(|&&j| j > i) {
                let (_, inter) = kcn.split(i, j);
                let n = inter.len() as f64;
                let w = 2.0 / (n * (n - 1.0));
                pairs.push((i, j, w));
                for &k in &inter {
                    nodes[k] -= w;
                }
                for e in kcn.sg.induced_edges(&inter) {
                    *both.entry(e).or_insert(0.0) += w;
                }
            }
        }
        let edges = (0..kcn.sg.edges().len()).map(|e| (e, both.get(&e).copied().unwrap_or(0.0) - 1.0)).collect();
        UnboundedWeights { pairs, nodes, edges }
    }
}

/// Overlap-corrected estimate for loops longer than the neighborhoods:
/// `S = Σ_{(i,j)} H(p_{N_{i∩j}}) / C(|S_{i∩j}|, 2) + Σ_i w_i H(p_{T_i}) + Σ_e c_e H(p_e)`
/// and `log Z = S - U`. Pair distributions average the marginals of the two
/// region beliefs; `p_{T_i}` comes from `i`'s own region and `p_e` is the
/// averaged edge marginal.
pub fn tn_inference_unbounded<T: Scalar>(fg: &FactorGraph<T>, state: &HostState<T>) -> Result<InferenceReport> {
    let (mut rep, _) = tn_unbounded_parts(fg, state)?;
    rep.method = "kcn-tn-unbounded".into();
    Ok(rep)
}

/// Report plus the decomposition behind its entropy.
pub(crate) fn tn_unbounded_parts<T: Scalar>(
    fg: &FactorGraph<T>,
    state: &HostState<T>,
) -> Result<(InferenceReport, CountingDecomposition<T>)> {
    let kcn = &state.kcn;
    if kcn.sg.mode() == ViewMode::Network {
        return Err(Error::InvalidConfig("needs a tensor host".into()));
    }
    let r = Regions::new(fg, kcn, &state.messages);
    let weights = UnboundedWeights::new(kcn);
    let mut terms = Vec::new();
    for &(i, j, w) in &weights.pairs {
        let (_, inter) = kcn.split(i, j);
        let keep = r.labels_of_nodes(&inter);
        let p = average(&[r.belief(i, &keep)?, r.belief(j, &keep)?])?;
        terms.push((w, p));
    }
    for (h, &w) in weights.nodes.iter().enumerate() {
        let keep: Vec<Label> = r.tensors[h].labels().collect();
        if w != 0.0 && !keep.is_empty() {
            terms.push((w, r.belief(h, &keep)?));
        }
    }
    for &(e, c) in &weights.edges {
        if c == 0.0 {
            continue;
        }
        let Carried::Variable(v) = kcn.sg.edge(e).carried else { continue };
        let ps: Vec<LabeledTensor<T>> = r.carriers(v).iter().map(|&h| r.belief(h, &[v])).collect::<Result<_>>()?;
        terms.push((c, average(&ps)?));
    }
    let decomposition = CountingDecomposition { terms };
    let s = decomposition.entropy();
    let u = energy(fg, &r)?;
    let m = marginals(&r, fg.num_variables())?;
    let mut rep = InferenceReport::new("kcn-tn-unbounded", s - u, u, m, &state.diagnostics);
    rep.entropy = s;
    rep.entropy_regions = Some(s);
    Ok((rep, decomposition))
}

impl<T: Scalar> HostState<T> {
    /// `Σ_k c_k log q_k(x)` of the overlap-corrected decomposition; equals
    /// `log p(x)` when the loops are bounded.
    pub fn unbounded_log_density(&self, fg: &FactorGraph<T>, assignment: &[usize]) -> Result<f64> {
        let (_, d) = tn_unbounded_parts(fg, self)?;
        Ok(d.log_density(assignment))
    }

    /// Region decomposition `Σ H(p_{N_i}) - Σ (2/|S_{i∩j}|) H(p_{N_{i∩j}})`.
    pub fn region_entropy(&self, fg: &FactorGraph<T>) -> Result<f64> {
        let r = Regions::new(fg, &self.kcn, &self.messages);
        Ok(region_decomposition(&r)?.entropy())
    }

    /// The two single-tensor estimates of each variable marginal, for
    /// checking that they agree.
    pub fn marginal_estimates(&self, fg: &FactorGraph<T>, v: usize) -> Result<Vec<Vec<f64>>> {
        let r = Regions::new(fg, &self.kcn, &self.messages);
        r.carriers(v).iter().map(|&h| Ok(to_f64(&r.belief(h, &[v])?))).collect()
    }
}
