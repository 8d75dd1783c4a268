//! KCN message passing where the nodes of the host graph carry tensors.
//!
//! Two host pictures share this engine: the tensor-network view (nodes are
//! factors, edges are variables) and the bipartite view of an arbitrary
//! graphical model (variable nodes carry an all-ones vector, factor nodes
//! their table). A leg is labelled by the variable it stands for.
//!
//! For `j ∈ S_i` the message `m_{i→j}` lives on the legs joining `i` to
//! `S_{i\j}` and contracts the tensors of `S_{i\j}` with the messages that
//! the nodes of `S_{i\j}` send to `i`. When some loop is longer than the
//! neighborhoods can see, the legs between `S_{i\j}` and `S_{i∩j}` other
//! than those of `i` stay open; the intersection message `m_{i∩j→i}` closes
//! them.

use std::collections::HashMap;

use super::program::{dedup_axes, ChannelSpec, Operand, Program};
use super::{Channel, ConvergenceConfig, Diagnostics, MessageSet};
use crate::error::{Error, Result};
use crate::graph::{simplified_view, Carried, FactorGraph, NodeRef, SimpleGraph, ViewMode};
use crate::neighborhood::{exactness_certificate, split_nodes, tensor_neighborhood, Neighborhood};
use crate::scalar::Scalar;
use crate::tensor::{Axis, LabeledTensor};

/// Host graph, tensor neighborhoods and channel layout.
#[derive(Debug, Clone)]
pub struct HostKcn {
    pub sg: SimpleGraph,
    pub l0: usize,
    /// Certified loop-bounded: no intersection channels are needed.
    pub bounded: bool,
    /// `S_i` for every host node.
    pub regions: Vec<Neighborhood>,
    dims: Vec<usize>,
}

impl HostKcn {
    /// `mode` must be [`ViewMode::TensorNetwork`] or [`ViewMode::Bipartite`].
    pub fn new<T: Scalar>(fg: &FactorGraph<T>, mode: ViewMode, l0: usize) -> Result<Self> {
        if mode == ViewMode::Network {
            return Err(Error::InvalidConfig("tensor KCN needs a tensor-network or bipartite host".into()));
        }
        let sg = simplified_view(fg, mode)?;
        let bounded = exactness_certificate(&sg, l0);
        Self::with_bound(fg, sg, l0, bounded)
    }

    /// Same as [`HostKcn::new`] with the bounded/unbounded dispatch forced.
    pub fn with_bound<T: Scalar>(fg: &FactorGraph<T>, sg: SimpleGraph, l0: usize, bounded: bool) -> Result<Self> {
        let regions = (0..sg.num_nodes()).map(|i| tensor_neighborhood(&sg, i, l0)).collect::<Result<Vec<_>>>()?;
        Ok(HostKcn { sg, l0, bounded, regions, dims: fg.var_dims().to_vec() })
    }

    pub fn num_nodes(&self) -> usize {
        self.sg.num_nodes()
    }

    fn label(&self, e: usize) -> Axis {
        match self.sg.edge(e).carried {
            Carried::Variable(v) => Axis::new(v, self.dims[v]),
            Carried::Factor(_) => unreachable!("tensor hosts carry variables on edges"),
        }
    }

    /// Tensor sitting on host node `h`.
    pub fn node_tensor<T: Scalar>(&self, fg: &FactorGraph<T>, h: usize) -> LabeledTensor<T> {
        match self.sg.node(h) {
            NodeRef::Factor(a) => fg.factor(a).table.clone(),
            NodeRef::Variable(v) => LabeledTensor::ones(vec![Axis::new(v, self.dims[v])]).expect("small vector"),
        }
    }

    /// `(S_{i\j}, S_{i∩j})` as sorted node lists.
    pub fn split(&self, i: usize, j: usize) -> (Vec<usize>, Vec<usize>) {
        split_nodes(&self.regions[i], &self.regions[j])
    }

    /// Axes of `m_{i→j}`: labels of the legs from `i` to nodes outside `S_j`.
    pub fn message_axes(&self, i: usize, j: usize) -> Vec<Axis> {
        let sj = &self.regions[j];
        dedup_axes(self.sg.neighbors(i).iter().filter(|(w, _)| !sj.contains_node(*w)).map(|&(_, e)| self.label(e)))
    }

    /// `X_{i∩j→i}`: labels of the legs between `S_{i\j}` and `S_{i∩j} \ {i}`.
    pub fn missing_legs(&self, i: usize, j: usize) -> Vec<Axis> {
        let (si, sj) = (&self.regions[i], &self.regions[j]);
        let mut out = Vec::new();
        for &k in &si.nodes {
            if k == i || !sj.contains_node(k) {
                continue;
            }
            for &(w, e) in self.sg.neighbors(k) {
                if si.contains_node(w) && !sj.contains_node(w) {
                    out.push(self.label(e));
                }
            }
        }
        dedup_axes(out)
    }

    /// Ordered channels: every standard `i→j` for `j ∈ S_i \ {i}`, then the
    /// intersection channels with open legs (unbounded dispatch only).
    pub fn channels(&self) -> Vec<Channel> {
        let mut out = Vec::new();
        for (i, s) in self.regions.iter().enumerate() {
            out.extend(s.nodes.iter().filter(|&&j| j != i).map(|&j| Channel::standard(i, j)));
        }
        if !self.bounded {
            for (i, s) in self.regions.iter().enumerate() {
                for &j in &s.nodes {
                    if j != i && !self.missing_legs(i, j).is_empty() {
                        out.push(Channel::intersection(i, j));
                    }
                }
            }
        }
        out
    }

    pub(crate) fn program<T: Scalar>(&self, fg: &FactorGraph<T>) -> Result<Program<T>> {
        let fixed: Vec<LabeledTensor<T>> = (0..self.num_nodes()).map(|h| self.node_tensor(fg, h)).collect();
        let channels = self.channels();
        let index: HashMap<Channel, usize> = channels.iter().enumerate().map(|(k, c)| (*c, k)).collect();
        let msg = |k: usize, i: usize| -> Result<Operand> {
            index.get(&Channel::standard(k, i)).map(|&m| Operand::Message(m)).ok_or(Error::NotInNeighborhood(i, k))
        };
        let mut specs = Vec::with_capacity(channels.len());
        for c in &channels {
            let (i, j) = (c.sender, c.receiver);
            let (diff, inter) = self.split(i, j);
            let mut ops = Vec::new();
            let axes = match c.kind {
                super::ChannelKind::Standard => {
                    for &k in &diff {
                        ops.push(Operand::Fixed(k));
                        ops.push(msg(k, i)?);
                    }
                    if let Some(&m) = index.get(&Channel::intersection(i, j)) {
                        ops.push(Operand::Message(m));
                    }
                    self.message_axes(i, j)
                }
                super::ChannelKind::Intersection => {
                    for &k in &inter {
                        ops.push(Operand::Fixed(k));
                        if k != i {
                            ops.push(msg(k, i)?);
                        }
                    }
                    ops.push(Operand::Message(index[&Channel::standard(i, j)]));
                    self.missing_legs(i, j)
                }
            };
            specs.push(ChannelSpec { channel: *c, axes, operands: ops });
        }
        Program::new(fixed, specs)
    }

    /// Region belief at host node `h`: the tensors of `S_h` and the messages
    /// `m_{k→h}` from the other members.
    pub fn region_operands<'a, T: Scalar>(
        &self,
        tensors: &'a [LabeledTensor<T>],
        msgs: &'a MessageSet<T>,
        h: usize,
    ) -> Vec<&'a LabeledTensor<T>> {
        let mut ops: Vec<&LabeledTensor<T>> = Vec::new();
        for &k in &self.regions[h].nodes {
            ops.push(&tensors[k]);
            if k != h {
                let m = msgs.message(k, h).expect("standard channel inside a region");
                if m.rank() > 0 {
                    ops.push(m);
                }
            }
        }
        ops
    }
}

#[derive(Debug, Clone)]
pub struct HostState<T> {
    pub kcn: HostKcn,
    pub messages: MessageSet<T>,
    pub diagnostics: Diagnostics,
}

fn run_host<T: Scalar>(fg: &FactorGraph<T>, kcn: HostKcn, cfg: &ConvergenceConfig) -> Result<HostState<T>> {
    let (messages, diagnostics) = kcn.program(fg)?.run(cfg)?;
    Ok(HostState { kcn, messages, diagnostics })
}

/// Tensor-network KCN. Intersection messages are added when the loops are
/// not certified to be bounded by `l0`.
pub fn run_tn_kcn<T: Scalar>(fg: &FactorGraph<T>, l0: usize, cfg: &ConvergenceConfig) -> Result<HostState<T>> {
    run_host(fg, HostKcn::new(fg, ViewMode::TensorNetwork, l0)?, cfg)
}

/// KCN for arbitrary graphical models on the variable/factor bipartite graph.
pub fn run_gm_kcn<T: Scalar>(fg: &FactorGraph<T>, l0: usize, cfg: &ConvergenceConfig) -> Result<HostState<T>> {
    run_host(fg, HostKcn::new(fg, ViewMode::Bipartite, l0)?, cfg)
}

impl<T: Scalar> HostState<T> {
    /// Runs a prepared host layout (for forced dispatch or reuse).
    pub fn run(fg: &FactorGraph<T>, kcn: HostKcn, cfg: &ConvergenceConfig) -> Result<Self> {
        run_host(fg, kcn, cfg)
    }
}
