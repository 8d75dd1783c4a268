use super::{belief, expected_log, log_trace, to_f64, InferenceReport};
use crate::engine::{Channel, TreeState};
use crate::error::{Error, Result};
use crate::graph::FactorGraph;
use crate::scalar::Scalar;
use crate::tensor::{full_trace, LabeledTensor, LogScaled};

fn region_ops<'a, T: Scalar>(fg: &'a FactorGraph<T>, state: &'a TreeState<T>, r: usize) -> Vec<&'a LabeledTensor<T>> {
    let dec = &state.decomposition;
    let mut ops: Vec<&LabeledTensor<T>> = dec.regions[r].factors.iter().map(|&a| &fg.factor(a).table).collect();
    for t in dec.neighbors(r) {
        ops.push(state.messages.message(t, r).expect("region channel"));
    }
    ops
}

/// Marginals from the first region holding each variable, energies from the
/// region holding each factor, and
/// `log Z = Σ_r log Tr(R_r Π m_{t→r}) - Σ_{(r,s)} log Tr(m_{r→s} m_{s→r})`,
/// which equals the product of region traces after rescaling every message
/// pair to unit overlap.
pub fn tree_inference<T: Scalar>(fg: &FactorGraph<T>, state: &TreeState<T>) -> Result<InferenceReport> {
    let dec = &state.decomposition;
    let mut log_z = 0.0;
    for r in 0..dec.regions.len() {
        log_z += log_trace(&region_ops(fg, state, r))?;
    }
    for &(r, s, _) in &dec.links {
        let a = state.messages.message(r, s).expect("region channel");
        let b = state.messages.message(s, r).expect("region channel");
        log_z -= log_trace(&[a, b])?;
    }
    let mut first_region = vec![None; fg.num_variables()];
    for (r, reg) in dec.regions.iter().enumerate() {
        for &a in &reg.factors {
            for &v in &fg.factor(a).scope {
                first_region[v].get_or_insert(r);
            }
        }
    }
    let marginals = first_region
        .iter()
        .enumerate()
        .map(|(v, r)| Ok(to_f64(&belief(&region_ops(fg, state, r.expect("variable has a factor")), &[v])?)))
        .collect::<Result<Vec<_>>>()?;
    let mut energy = 0.0;
    for (r, reg) in dec.regions.iter().enumerate() {
        let ops = region_ops(fg, state, r);
        for &a in &reg.factors {
            let f = fg.factor(a);
            energy -= expected_log(&belief(&ops, &f.scope)?, &f.table)?;
        }
    }
    Ok(InferenceReport::new("tree-equivalent", log_z, energy, marginals, &state.diagnostics))
}

/// Block partition function `Π_r Tr(R_r Π m̂_{t→r})` with each message pair
/// rescaled so that `Tr(m̂_{r→s} m̂_{s→r}) = 1`. The rescaling is carried out
/// on copies of the messages, split evenly between the two directions.
pub fn blockbp_partition<T: Scalar>(fg: &FactorGraph<T>, state: &TreeState<T>) -> Result<LogScaled<T>> {
    let dec = &state.decomposition;
    let mut scaled = state.messages.clone();
    for &(r, s, _) in &dec.links {
        let overlap = full_trace(&[
            state.messages.message(r, s).expect("region channel"),
            state.messages.message(s, r).expect("region channel"),
        ])?;
        if overlap.is_zero() || !overlap.ln().is_finite() {
            return Err(Error::RescaleImpossible(r, s));
        }
        let c = (-overlap.ln() * T::of(0.5)).exp();
        scaled.rescale(&Channel::standard(r, s), c)?;
        scaled.rescale(&Channel::standard(s, r), c)?;
    }
    let view = TreeState { decomposition: dec.clone(), messages: scaled, diagnostics: state.diagnostics.clone() };
    let mut z = LogScaled::one();
    for r in 0..dec.regions.len() {
        z = z * full_trace(&region_ops(fg, &view, r))?;
    }
    Ok(z)
}
