use serde::{Deserialize, Serialize};

use super::generators::Builder;
use crate::error::{Error, Result};
use crate::graph::{FactorGraph, VarId};
use crate::scalar::Scalar;

/// Excerpt of a stabilizer code: which qubits each check touches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeExcerpt {
    pub num_qubits: usize,
    pub stabilizers: Vec<Vec<usize>>,
}

impl CodeExcerpt {
    /// Two plaquettes sharing one qubit: `{0,1,2,3}` and `{3,4,5,6}`.
    pub fn two_plaquettes() -> Self {
        CodeExcerpt { num_qubits: 7, stabilizers: vec![vec![0, 1, 2, 3], vec![3, 4, 5, 6]] }
    }
}

/// Extended tensor network of a syndrome-decoding problem.
#[derive(Debug, Clone)]
pub struct SurfaceCodeInstance<T> {
    pub graph: FactorGraph<T>,
    /// A variable carrying each qubit's error bit.
    pub qubit_vars: Vec<VarId>,
}

/// One indicator tensor per check (1 where the parity of its legs equals
/// the observed syndrome bit) and one diagonal prior tensor per qubit whose
/// legs all copy that qubit's error bit.
///
/// `priors[q]` is the probability that qubit `q` is flipped.
pub fn gen_surface_code_extended<T: Scalar>(
    excerpt: &CodeExcerpt,
    syndrome: &[u8],
    priors: &[f64],
) -> Result<SurfaceCodeInstance<T>> {
    if syndrome.len() != excerpt.stabilizers.len() || priors.len() != excerpt.num_qubits {
        return Err(Error::InconsistentSpec(format!(
            "{} checks vs {} syndrome bits, {} qubits vs {} priors",
            excerpt.stabilizers.len(),
            syndrome.len(),
            excerpt.num_qubits,
            priors.len()
        )));
    }
    if syndrome.iter().any(|&s| s > 1) || priors.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InconsistentSpec("syndrome bits must be 0/1 and priors in [0, 1]".into()));
    }
    let mut b: Builder<T> = Builder::default();
    let mut legs: Vec<Vec<String>> = vec![Vec::new(); excerpt.num_qubits];
    let mut checks = Vec::new();
    for (s, scope) in excerpt.stabilizers.iter().enumerate() {
        let mut names = Vec::new();
        for &q in scope {
            if q >= excerpt.num_qubits || legs[q].iter().any(|l| l.starts_with(&format!("e{s}_"))) {
                return Err(Error::InconsistentSpec(format!("check {s} has a bad qubit {q}")));
            }
            let name = b.var(format!("e{s}_q{q}"));
            legs[q].push(name.clone());
            names.push(name);
        }
        checks.push(names);
    }
    for (q, l) in legs.iter_mut().enumerate() {
        if l.is_empty() {
            l.push(b.var(format!("e_q{q}")));
        }
    }
    for (s, names) in checks.iter().enumerate() {
        let r = names.len();
        let vals = (0..1usize << r)
            .map(|k| if (k.count_ones() as u8 & 1) == syndrome[s] { T::one() } else { T::zero() })
            .collect();
        b.factor(format!("C{s}"), names, vals);
    }
    for (q, l) in legs.iter().enumerate() {
        let r = l.len();
        let all = (1usize << r) - 1;
        let vals = (0..1usize << r)
            .map(|k| {
                if k == 0 {
                    T::of(1.0 - priors[q])
                } else if k == all {
                    T::of(priors[q])
                } else {
                    T::zero()
                }
            })
            .collect();
        b.factor(format!("P{q}"), l, vals);
    }
    let graph = b.build(2)?;
    let qubit_vars = legs.iter().map(|l| graph.var_index(&l[0]).expect("declared")).collect();
    Ok(SurfaceCodeInstance { graph, qubit_vars })
}
