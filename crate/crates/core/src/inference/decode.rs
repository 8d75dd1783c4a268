use serde::{Deserialize, Serialize};

use crate::engine::{run_tn_kcn, ConvergenceConfig};
use crate::error::{Error, Result};
use crate::models::SurfaceCodeInstance;
use crate::scalar::Scalar;

/// Posterior of one qubit's error bit given the syndrome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitDecision {
    pub qubit: usize,
    /// `[P(no flip), P(flip)]`.
    pub marginal: [f64; 2],
    /// Whether the flip is the more likely outcome.
    pub flip: bool,
}

/// Runs tensor-network KCN on the extended network and reads off each qubit
/// marginal. A syndrome no error pattern can produce leaves every region with
/// zero weight and is reported as [`Error::InconsistentSyndrome`].
pub fn decode_marginals<T: Scalar>(
    instance: &SurfaceCodeInstance<T>,
    l0: usize,
    cfg: &ConvergenceConfig,
) -> Result<Vec<QubitDecision>> {
    let fg = &instance.graph;
    let inconsistent = |e: Error| if e == Error::ZeroTensor { Error::InconsistentSyndrome } else { e };
    let state = run_tn_kcn(fg, l0, cfg).map_err(inconsistent)?;
    instance
        .qubit_vars
        .iter()
        .enumerate()
        .map(|(q, &v)| {
            let ests = state.marginal_estimates(fg, v).map_err(inconsistent)?;
            let n = ests.len() as f64;
            let p1 = ests.iter().map(|p| p[1]).sum::<f64>() / n;
            Ok(QubitDecision { qubit: q, marginal: [1.0 - p1, p1], flip: p1 > 0.5 })
        })
        .collect()
}
