use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FactorGraph;
use crate::scalar::Scalar;
use crate::tensor::{contract, LabeledTensor};

/// Largest number of assignments [`brute_force`] enumerates by default.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 24;

/// Exact quantities from full enumeration, always in `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForce {
    pub log_z: f64,
    pub marginals: Vec<Vec<f64>>,
    pub internal_energy: f64,
    pub entropy: f64,
}

/// Kahan-Babuska-Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

pub fn brute_force<T: Scalar>(fg: &FactorGraph<T>) -> Result<BruteForce> {
    brute_force_with_budget(fg, DEFAULT_ENUMERATION_BUDGET)
}

/// Enumerates every assignment: `Z`, single-variable marginals, the internal
/// energy `U = -E[log p~]` and the entropy `S`.
pub fn brute_force_with_budget<T: Scalar>(fg: &FactorGraph<T>, budget: u128) -> Result<BruteForce> {
    let dims = fg.var_dims();
    let total: u128 = dims.iter().map(|&d| d as u128).product();
    if total > budget {
        return Err(Error::BudgetExceeded(total));
    }
    let nv = dims.len();
    let tables: Vec<(Vec<usize>, Vec<f64>, Vec<usize>)> = fg
        .factors()
        .iter()
        .map(|f| (f.scope.clone(), f.table.values().iter().map(|v| v.f64()).collect(), f.table.strides()))
        .collect();
    let mut z = Neumaier::default();
    let mut energy = Neumaier::default();
    let mut marg: Vec<Vec<Neumaier>> = dims.iter().map(|&d| vec![Neumaier::default(); d]).collect();
    let mut x = vec![0usize; nv];
    for _ in 0..total {
        let mut w = 1.0;
        let mut logw = 0.0;
        for (scope, vals, strides) in &tables {
            let idx: usize = scope.iter().zip(strides).map(|(&v, &s)| x[v] * s).sum();
            w *= vals[idx];
            logw += if vals[idx] > 0.0 { vals[idx].ln() } else { 0.0 };
        }
        if w > 0.0 {
            z.add(w);
            energy.add(-w * logw);
            for v in 0..nv {
                marg[v][x[v]].add(w);
            }
        }
        for v in (0..nv).rev() {
            x[v] += 1;
            if x[v] < dims[v] {
                break;
            }
            x[v] = 0;
        }
    }
    let zv = z.value();
    if !(zv > 0.0) {
        return Err(Error::ZeroTensor);
    }
    let marginals = marg.iter().map(|m| m.iter().map(|s| s.value() / zv).collect()).collect();
    let internal_energy = energy.value() / zv;
    let log_z = zv.ln();
    Ok(BruteForce { log_z, marginals, internal_energy, entropy: log_z + internal_energy })
}

/// Exact `log Z` by contracting factors one by one in index order, with the
/// running tensor rescaled to unit maximum after every step. Polynomial for
/// chain-like graphs whose factors are listed along the chain.
pub fn sequential_log_z<T: Scalar>(fg: &FactorGraph<T>) -> Result<f64> {
    let mut remaining: Vec<usize> = vec![0; fg.num_variables()];
    for f in fg.factors() {
        for &v in &f.scope {
            remaining[v] += 1;
        }
    }
    let mut acc: LabeledTensor<T> = LabeledTensor::scalar(T::one());
    let mut log = 0.0f64;
    for f in fg.factors() {
        for &v in &f.scope {
            remaining[v] -= 1;
        }
        let keep: Vec<usize> = acc
            .labels()
            .chain(f.scope.iter().copied())
            .filter(|&v| remaining[v] > 0)
            .fold(Vec::new(), |mut k, v| {
                if !k.contains(&v) {
                    k.push(v);
                }
                k
            });
        acc = contract(&[&acc, &f.table], &keep)?;
        let m = acc.values().iter().copied().fold(T::zero(), T::max);
        if !(m > T::zero()) {
            return Err(Error::ZeroTensor);
        }
        acc.scale(T::one() / m);
        log += m.f64().ln();
    }
    Ok(log + acc.sum().f64().ln())
}
