//! Compiled synchronous message-passing programs.

use rayon::prelude::*;

use super::{Channel, ConvergenceConfig, Diagnostics, MessageSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{Axis, ContractionPlan, Label, LabeledTensor, DEFAULT_MEMORY_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Operand {
    Fixed(usize),
    Message(usize),
}

/// One channel: its message axes and the operands of its update.
#[derive(Debug, Clone)]
pub(crate) struct ChannelSpec {
    pub channel: Channel,
    pub axes: Vec<Axis>,
    pub operands: Vec<Operand>,
}

#[derive(Debug, Clone)]
pub(crate) struct Program<T> {
    pub fixed: Vec<LabeledTensor<T>>,
    pub specs: Vec<ChannelSpec>,
    plans: Vec<Option<(ContractionPlan, Vec<Operand>)>>,
}

/// Removes duplicate labels, keeping first occurrences.
pub(crate) fn dedup_axes(axes: impl IntoIterator<Item = Axis>) -> Vec<Axis> {
    let mut out: Vec<Axis> = Vec::new();
    for a in axes {
        if !out.iter().any(|b| b.var == a.var) {
            out.push(a);
        }
    }
    out
}

impl<T: Scalar> Program<T> {
    pub fn new(fixed: Vec<LabeledTensor<T>>, specs: Vec<ChannelSpec>) -> Result<Self> {
        let mut plans = Vec::with_capacity(specs.len());
        for spec in &specs {
            if spec.axes.is_empty() {
                plans.push(None);
                continue;
            }
            // Constant (axis-free) messages are the scalar 1 and drop out.
            let ops: Vec<Operand> = spec
                .operands
                .iter()
                .copied()
                .filter(|op| match op {
                    Operand::Message(k) => !specs[*k].axes.is_empty(),
                    Operand::Fixed(_) => true,
                })
                .collect();
            let shapes: Vec<Vec<Axis>> = ops
                .iter()
                .map(|op| match op {
                    Operand::Fixed(k) => fixed[*k].axes().to_vec(),
                    Operand::Message(k) => specs[*k].axes.clone(),
                })
                .collect();
            let keep: Vec<Label> = spec.axes.iter().map(|a| a.var).collect();
            let plan = ContractionPlan::new(&shapes, &keep, DEFAULT_MEMORY_BUDGET)?;
            plans.push(Some((plan, ops)));
        }
        Ok(Program { fixed, specs, plans })
    }

    pub fn channels(&self) -> Vec<Channel> {
        self.specs.iter().map(|s| s.channel).collect()
    }

    pub fn uniform_messages(&self) -> Result<Vec<LabeledTensor<T>>> {
        self.specs
            .iter()
            .map(|s| if s.axes.is_empty() { Ok(LabeledTensor::scalar(T::one())) } else { LabeledTensor::uniform(s.axes.clone()) })
            .collect()
    }

    /// Unnormalized update of channel `c` from the current messages.
    pub fn raw_update(&self, c: usize, msgs: &[LabeledTensor<T>]) -> Option<Vec<T>> {
        let (plan, ops) = self.plans[c].as_ref()?;
        let inputs: Vec<&[T]> = ops
            .iter()
            .map(|op| match op {
                Operand::Fixed(k) => self.fixed[*k].values(),
                Operand::Message(k) => msgs[*k].values(),
            })
            .collect();
        Some(plan.execute(&inputs))
    }

    fn update(&self, c: usize, msgs: &[LabeledTensor<T>], damping: T) -> Result<LabeledTensor<T>> {
        let Some(raw) = self.raw_update(c, msgs) else {
            return Ok(msgs[c].clone());
        };
        let total = raw.iter().copied().sum::<T>();
        if !(total > T::zero()) || !total.is_finite() {
            return Err(Error::ZeroTensor);
        }
        let inv = T::one() / total;
        let mut values: Vec<T> = raw.into_iter().map(|v| v * inv).collect();
        if damping > T::zero() {
            let old = msgs[c].values();
            let old_total = old.iter().copied().sum::<T>();
            for (v, &o) in values.iter_mut().zip(old) {
                *v = (T::one() - damping) * *v + damping * o / old_total;
            }
            let s = values.iter().copied().sum::<T>();
            for v in &mut values {
                *v = *v / s;
            }
        }
        LabeledTensor::new(self.specs[c].axes.clone(), values)
    }

    /// Flooding sweeps from uniform messages until the residual drops below
    /// the tolerance or the iteration cap is hit.
    pub fn run(&self, cfg: &ConvergenceConfig) -> Result<(MessageSet<T>, Diagnostics)> {
        self.run_from(self.uniform_messages()?, cfg)
    }

    pub fn run_from(
        &self,
        mut msgs: Vec<LabeledTensor<T>>,
        cfg: &ConvergenceConfig,
    ) -> Result<(MessageSet<T>, Diagnostics)> {
        cfg.validate()?;
        let damping = T::of(cfg.damping);
        let mut diag = Diagnostics::default();
        let active: Vec<usize> = (0..self.specs.len()).filter(|&c| self.plans[c].is_some()).collect();
        if active.is_empty() {
            diag.converged = true;
            return Ok((MessageSet::new(self.channels(), msgs, 0), diag));
        }
        for t in 1..=cfg.max_iterations {
            let updated: Vec<LabeledTensor<T>> = if active.len() > 32 {
                active.par_iter().map(|&c| self.update(c, &msgs, damping)).collect::<Result<_>>()?
            } else {
                active.iter().map(|&c| self.update(c, &msgs, damping)).collect::<Result<_>>()?
            };
            let mut residual = 0.0f64;
            for (&c, new) in active.iter().zip(updated) {
                for (a, b) in new.values().iter().zip(msgs[c].values()) {
                    residual = residual.max((*a - *b).abs().f64());
                }
                msgs[c] = new;
            }
            diag.iterations = t;
            diag.residual = residual;
            diag.residual_trace.push(residual);
            if residual <= cfg.tolerance {
                diag.converged = true;
                break;
            }
        }
        Ok((MessageSet::new(self.channels(), msgs, diag.iterations), diag))
    }
}
