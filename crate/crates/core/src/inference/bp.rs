use super::{belief, expected_log, log_trace, to_f64, InferenceReport};
use crate::engine::BpState;
use crate::error::Result;
use crate::graph::FactorGraph;
use crate::scalar::Scalar;
use crate::tensor::{Axis, LabeledTensor};

/// Beliefs and the Bethe free energy of a vanilla BP fixed point:
/// `log Z = Σ_a log Σ f_a Π n_{i→a} + Σ_i log Σ Π m_{a→i} - Σ_{(i,a)} log Σ n_{i→a} m_{a→i}`,
/// which is unchanged by rescaling any message.
pub fn bp_inference<T: Scalar>(fg: &FactorGraph<T>, state: &BpState<T>) -> Result<InferenceReport> {
    let mut log_z = 0.0;
    let mut energy = 0.0;
    for (a, f) in fg.factors().iter().enumerate() {
        let mut ops = vec![&f.table];
        ops.extend(f.scope.iter().map(|&v| state.to_factor(fg, v, a)));
        log_z += log_trace(&ops)?;
        let b = belief(&ops, &f.scope)?;
        energy -= expected_log(&b, &f.table)?;
        for &v in &f.scope {
            log_z -= log_trace(&[state.to_factor(fg, v, a), state.to_variable(fg, a, v)])?;
        }
    }
    let mut marginals = Vec::with_capacity(fg.num_variables());
    for v in 0..fg.num_variables() {
        let ones = LabeledTensor::ones(vec![Axis::new(v, fg.var_dim(v))])?;
        let mut ops = vec![&ones];
        ops.extend(fg.factors_of(v).iter().map(|&a| state.to_variable(fg, a, v)));
        log_z += log_trace(&ops)?;
        marginals.push(to_f64(&belief(&ops, &[v])?));
    }
    Ok(InferenceReport::new("bp", log_z, energy, marginals, &state.diagnostics))
}
