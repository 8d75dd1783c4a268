//! KCN message passing on networks (pairwise models).
//!
//! The message `m_{i→j}(x_i)` summarizes the part of `N_i` that `N_j` does
//! not cover: the pairwise factors on the edges of `N_{i\j}`, the unary
//! factor of `i`, and the messages `m_{k→i}` from the other nodes of
//! `N_{i\j}`. Unary factors of other nodes arrive inside their messages.

use super::program::{ChannelSpec, Operand, Program};
use super::{Channel, ConvergenceConfig, Diagnostics, MessageSet};
use crate::error::{Error, Result};
use crate::graph::{simplified_view, Carried, FactorGraph, FactorId, SimpleGraph, ViewMode};
use crate::neighborhood::{kcn_neighborhood, Neighborhood};
use crate::scalar::Scalar;
use crate::tensor::{Axis, LabeledTensor};

/// Network view with its KCN neighborhoods.
#[derive(Debug, Clone)]
pub struct NetworkKcn {
    pub sg: SimpleGraph,
    pub l0: usize,
    pub neighborhoods: Vec<Neighborhood>,
    /// Unary factors attached to each node.
    pub unary: Vec<Vec<FactorId>>,
}

impl NetworkKcn {
    pub fn new<T: Scalar>(fg: &FactorGraph<T>, l0: usize) -> Result<Self> {
        let sg = simplified_view(fg, ViewMode::Network)?;
        let neighborhoods = (0..sg.num_nodes()).map(|i| kcn_neighborhood(&sg, i, l0)).collect::<Result<Vec<_>>>()?;
        let mut unary = vec![Vec::new(); sg.num_nodes()];
        for &(n, c) in sg.dangling() {
            if let Carried::Factor(a) = c {
                unary[n].push(a);
            }
        }
        Ok(NetworkKcn { sg, l0, neighborhoods, unary })
    }

    pub fn edge_factor(&self, e: usize) -> FactorId {
        match self.sg.edge(e).carried {
            Carried::Factor(a) => a,
            Carried::Variable(_) => unreachable!("network edges carry factors"),
        }
    }

    /// `N_{i\j}` for `j ∈ N_i`.
    pub fn difference(&self, i: usize, j: usize) -> Neighborhood {
        crate::neighborhood::kcn_difference_of(&self.sg, &self.neighborhoods[i], &self.neighborhoods[j])
    }

    /// Ordered channel list `i→j`, `j ∈ N_i \ {i}`.
    pub fn channels(&self) -> Vec<Channel> {
        let mut out = Vec::new();
        for (i, n) in self.neighborhoods.iter().enumerate() {
            for &j in &n.nodes {
                if j != i {
                    out.push(Channel::standard(i, j));
                }
            }
        }
        out
    }

    pub(crate) fn program<T: Scalar>(&self, fg: &FactorGraph<T>) -> Result<Program<T>> {
        let nf = fg.num_factors();
        let mut fixed: Vec<LabeledTensor<T>> = fg.factors().iter().map(|f| f.table.clone()).collect();
        for v in 0..fg.num_variables() {
            fixed.push(LabeledTensor::ones(vec![Axis::new(v, fg.var_dim(v))])?);
        }
        let channels = self.channels();
        let index: std::collections::HashMap<Channel, usize> =
            channels.iter().enumerate().map(|(k, c)| (*c, k)).collect();
        let mut specs = Vec::with_capacity(channels.len());
        for c in &channels {
            let (i, j) = (c.sender, c.receiver);
            let d = self.difference(i, j);
            let mut ops = vec![Operand::Fixed(nf + i)];
            ops.extend(self.unary[i].iter().map(|&a| Operand::Fixed(a)));
            ops.extend(d.edges.iter().map(|&e| Operand::Fixed(self.edge_factor(e))));
            for &k in &d.nodes {
                if k != i {
                    let m = index.get(&Channel::standard(k, i)).ok_or(Error::NotInNeighborhood(i, k))?;
                    ops.push(Operand::Message(*m));
                }
            }
            specs.push(ChannelSpec { channel: *c, axes: vec![Axis::new(i, fg.var_dim(i))], operands: ops });
        }
        Program::new(fixed, specs)
    }
}

#[derive(Debug, Clone)]
pub struct NetworkState<T> {
    pub kcn: NetworkKcn,
    pub messages: MessageSet<T>,
    pub diagnostics: Diagnostics,
}

/// KCN message passing with parameter `l0` on a network.
pub fn run_kcn_network<T: Scalar>(fg: &FactorGraph<T>, l0: usize, cfg: &ConvergenceConfig) -> Result<NetworkState<T>> {
    let kcn = NetworkKcn::new(fg, l0)?;
    let (messages, diagnostics) = kcn.program(fg)?.run(cfg)?;
    Ok(NetworkState { kcn, messages, diagnostics })
}
