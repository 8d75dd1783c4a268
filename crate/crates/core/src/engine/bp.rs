//! Flooding sum-product on the factor graph.

use super::program::{ChannelSpec, Operand, Program};
use super::{Channel, ConvergenceConfig, Diagnostics, MessageSet};
use crate::error::Result;
use crate::graph::FactorGraph;
use crate::scalar::Scalar;
use crate::tensor::{Axis, LabeledTensor};

/// Converged vanilla BP messages. Node ids: variable `v` is `v`, factor `a`
/// is `num_variables + a`.
#[derive(Debug, Clone)]
pub struct BpState<T> {
    pub messages: MessageSet<T>,
    pub diagnostics: Diagnostics,
}

impl<T: Scalar> BpState<T> {
    /// `n_{v→a}`.
    pub fn to_factor(&self, fg: &FactorGraph<T>, v: usize, a: usize) -> &LabeledTensor<T> {
        self.messages.message(v, fg.num_variables() + a).expect("variable-to-factor channel")
    }

    /// `m_{a→v}`.
    pub fn to_variable(&self, fg: &FactorGraph<T>, a: usize, v: usize) -> &LabeledTensor<T> {
        self.messages.message(fg.num_variables() + a, v).expect("factor-to-variable channel")
    }
}

pub(crate) fn bp_program<T: Scalar>(fg: &FactorGraph<T>) -> Result<Program<T>> {
    let nv = fg.num_variables();
    let nf = fg.num_factors();
    let mut fixed: Vec<LabeledTensor<T>> = fg.factors().iter().map(|f| f.table.clone()).collect();
    for v in 0..nv {
        fixed.push(LabeledTensor::ones(vec![Axis::new(v, fg.var_dim(v))])?);
    }
    // Channel numbering: for each factor and each scope slot, v→a then a→v.
    let mut slot = vec![Vec::new(); nf];
    let mut n = 0;
    for (a, f) in fg.factors().iter().enumerate() {
        for _ in &f.scope {
            slot[a].push(n);
            n += 2;
        }
    }
    let pos = |a: usize, v: usize| fg.factor(a).scope.iter().position(|&u| u == v).expect("v in scope");
    let mut specs = Vec::with_capacity(n);
    for (a, f) in fg.factors().iter().enumerate() {
        for (k, &v) in f.scope.iter().enumerate() {
            let axes = vec![Axis::new(v, fg.var_dim(v))];
            let mut ops = vec![Operand::Fixed(nf + v)];
            for &b in fg.factors_of(v) {
                if b != a {
                    ops.push(Operand::Message(slot[b][pos(b, v)] + 1));
                }
            }
            specs.push(ChannelSpec { channel: Channel::standard(v, nv + a), axes: axes.clone(), operands: ops });
            let mut ops = vec![Operand::Fixed(a)];
            for (kk, _) in f.scope.iter().enumerate() {
                if kk != k {
                    ops.push(Operand::Message(slot[a][kk]));
                }
            }
            specs.push(ChannelSpec { channel: Channel::standard(nv + a, v), axes, operands: ops });
        }
    }
    Program::new(fixed, specs)
}

/// Standard sum-product with uniform initialization and synchronous updates.
pub fn run_vanilla_bp<T: Scalar>(fg: &FactorGraph<T>, cfg: &ConvergenceConfig) -> Result<BpState<T>> {
    let program = bp_program(fg)?;
    let (messages, diagnostics) = program.run(cfg)?;
    Ok(BpState { messages, diagnostics })
}
