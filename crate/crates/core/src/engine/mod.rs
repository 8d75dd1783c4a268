//! Message-passing engines.
//!
//! Every engine compiles its update equations into a [`program::Program`]:
//! a list of channels, each with a precompiled contraction over fixed tables
//! and incoming messages. Sweeps are synchronous (flooding), so the result of
//! a sweep does not depend on the order in which channels are evaluated.

mod bp;
mod host;
mod network;
pub(crate) mod program;
mod tree;

pub use bp::{run_vanilla_bp, BpState};
pub use host::{run_gm_kcn, run_tn_kcn, HostKcn, HostState};
pub use network::{run_kcn_network, NetworkKcn, NetworkState};
pub use tree::{build_tree_decomposition, run_tree_equivalent, Region, TreeDecomposition, TreeState};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::LabeledTensor;

/// Stopping rule shared by all engines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    /// Largest entrywise change between sweeps that counts as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight of the previous message in the damped update, in `[0, 1)`.
    pub damping: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { tolerance: 1e-10, max_iterations: 1000, damping: 0.0 }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance {} must be positive", self.tolerance)));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidConfig(format!("damping {} must lie in [0, 1)", self.damping)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    Standard,
    /// `m_{i∩j→i}`, stored under `sender = i`, `receiver = j`.
    Intersection,
}

/// Directed message slot between two nodes (or regions) of a host graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel {
    pub sender: usize,
    pub receiver: usize,
    pub kind: ChannelKind,
}

impl Channel {
    pub fn standard(sender: usize, receiver: usize) -> Self {
        Channel { sender, receiver, kind: ChannelKind::Standard }
    }

    pub fn intersection(i: usize, j: usize) -> Self {
        Channel { sender: i, receiver: j, kind: ChannelKind::Intersection }
    }
}

/// Run statistics attached to every converged (or abandoned) message set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub residual_trace: Vec<f64>,
}

/// Messages of one engine run. Channels with no axes hold the scalar 1.
#[derive(Debug, Clone)]
pub struct MessageSet<T> {
    channels: Vec<Channel>,
    index: HashMap<Channel, usize>,
    messages: Vec<LabeledTensor<T>>,
    pub iterations: usize,
}

impl<T: Scalar> MessageSet<T> {
    pub(crate) fn new(channels: Vec<Channel>, messages: Vec<LabeledTensor<T>>, iterations: usize) -> Self {
        let index = channels.iter().enumerate().map(|(k, c)| (*c, k)).collect();
        MessageSet { channels, index, messages, iterations }
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn get(&self, c: &Channel) -> Option<&LabeledTensor<T>> {
        self.index.get(c).map(|&k| &self.messages[k])
    }

    /// Standard message `sender → receiver`.
    pub fn message(&self, sender: usize, receiver: usize) -> Option<&LabeledTensor<T>> {
        self.get(&Channel::standard(sender, receiver))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Channel, &LabeledTensor<T>)> {
        self.channels.iter().zip(&self.messages)
    }

    /// Multiplies one message by `c`; inference results must not change.
    pub fn rescale(&mut self, channel: &Channel, c: T) -> Result<()> {
        let k = *self.index.get(channel).ok_or_else(|| Error::InvalidConfig(format!("no channel {channel:?}")))?;
        self.messages[k].scale(c);
        Ok(())
    }

    /// Largest entrywise difference to another message set over the same channels.
    pub fn max_abs_diff(&self, other: &MessageSet<T>) -> Result<T> {
        let mut worst = T::zero();
        for (c, m) in self.iter() {
            let o = other.get(c).ok_or_else(|| Error::InvalidConfig(format!("no channel {c:?}")))?;
            worst = worst.max(m.max_abs_diff(o)?);
        }
        Ok(worst)
    }
}
