//! Estimators that turn converged messages into marginals, internal energy,
//! partition function and entropy.
//!
//! The graphical model is read as a Boltzmann distribution
//! `p(x) = Π_a f_a(x_a) / Z` with energy `E(x) = -Σ_a log f_a(x_a)`, so that
//! `S = log Z + U`.

mod bp;
mod decode;
mod host;
mod network;
mod tree;

pub use bp::bp_inference;
pub use decode::{decode_marginals, QubitDecision};
pub use host::{gm_inference, gm_inference_with, tn_inference, tn_inference_unbounded, IntersectionReading, UnboundedWeights};
pub use network::network_inference;
pub use tree::{blockbp_partition, tree_inference};

use serde::{Deserialize, Serialize};

use crate::engine::Diagnostics;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{contract, full_trace, Label, LabeledTensor};

/// Everything an engine run estimates, in `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub method: String,
    pub log_z: f64,
    pub internal_energy: f64,
    pub entropy: f64,
    /// Entropy from the region decomposition, when it was computed.
    pub entropy_regions: Option<f64>,
    pub marginals: Vec<Vec<f64>>,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl InferenceReport {
    pub(crate) fn new(
        method: &str,
        log_z: f64,
        internal_energy: f64,
        marginals: Vec<Vec<f64>>,
        diagnostics: &Diagnostics,
    ) -> Self {
        InferenceReport {
            method: method.to_string(),
            log_z,
            internal_energy,
            entropy: log_z + internal_energy,
            entropy_regions: None,
            marginals,
            converged: diagnostics.converged,
            iterations: diagnostics.iterations,
            residual: diagnostics.residual,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `Z` itself; overflows to infinity for very large models.
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }
}

/// Weighted sum of distributions standing in for `log p(x)`:
/// `log p(x) ≈ Σ_k c_k log q_k(x)`.
#[derive(Debug, Clone)]
pub struct CountingDecomposition<T> {
    pub terms: Vec<(f64, LabeledTensor<T>)>,
}

impl<T: Scalar> CountingDecomposition<T> {
    /// `-Σ_k c_k Σ q_k log q_k`.
    pub fn entropy(&self) -> f64 {
        self.terms.iter().map(|(c, q)| c * shannon(q)).sum()
    }

    /// `Σ_k c_k log q_k(x)` at a full assignment indexed by variable id.
    pub fn log_density(&self, assignment: &[usize]) -> f64 {
        self.terms.iter().map(|(c, q)| c * q.eval(assignment).f64().ln()).sum()
    }
}

/// Shannon entropy of a normalized table.
pub(crate) fn shannon<T: Scalar>(p: &LabeledTensor<T>) -> f64 {
    -p.values().iter().map(|v| v.f64()).filter(|&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

/// All labels carried by `ops`, in first-seen order.
pub(crate) fn labels_of<T: Scalar>(ops: &[&LabeledTensor<T>]) -> Vec<Label> {
    let mut out: Vec<Label> = Vec::new();
    for t in ops {
        for l in t.labels() {
            if !out.contains(&l) {
                out.push(l);
            }
        }
    }
    out
}

/// Normalized contraction keeping `keep`.
pub(crate) fn belief<T: Scalar>(ops: &[&LabeledTensor<T>], keep: &[Label]) -> Result<LabeledTensor<T>> {
    let raw = contract(ops, keep)?;
    Ok(raw.normalize()?.0)
}

/// `ln Tr(ops)`.
pub(crate) fn log_trace<T: Scalar>(ops: &[&LabeledTensor<T>]) -> Result<f64> {
    let z = full_trace(ops)?;
    if z.is_zero() {
        return Err(Error::ZeroTensor);
    }
    Ok(z.ln().f64())
}

/// `Σ_x p(x) log t(x)` for a distribution `p` over exactly the axes of `t`,
/// skipping entries where `t` vanishes.
pub(crate) fn expected_log<T: Scalar>(p: &LabeledTensor<T>, t: &LabeledTensor<T>) -> Result<f64> {
    let order: Vec<Label> = t.labels().collect();
    let p = p.permuted(&order)?;
    Ok(p.values()
        .iter()
        .zip(t.values())
        .filter(|(_, &tv)| tv > T::zero())
        .map(|(&pv, &tv)| pv.f64() * tv.f64().ln())
        .sum())
}

/// Entrywise average of equally shaped distributions.
pub(crate) fn average<T: Scalar>(ps: &[LabeledTensor<T>]) -> Result<LabeledTensor<T>> {
    let first = ps.first().ok_or(Error::EmptyGraph)?;
    let order: Vec<Label> = first.labels().collect();
    let mut acc = vec![0.0f64; first.len()];
    for p in ps {
        let p = p.permuted(&order)?;
        for (a, v) in acc.iter_mut().zip(p.values()) {
            *a += v.f64();
        }
    }
    let n = ps.len() as f64;
    LabeledTensor::new(first.axes().to_vec(), acc.into_iter().map(|a| T::of(a / n)).collect())
}

pub(crate) fn to_f64<T: Scalar>(p: &LabeledTensor<T>) -> Vec<f64> {
    p.values().iter().map(|v| v.f64()).collect()
}
