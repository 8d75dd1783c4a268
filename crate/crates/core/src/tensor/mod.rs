//! Dense labeled tensors.
//!
//! A [`LabeledTensor`] is a row-major array whose axes carry variable labels.
//! Products of tensors identify axes by label, so a label shared by several
//! tensors behaves like a hyperedge: it is summed once, after every tensor
//! carrying it has been multiplied in.

mod contract;
mod logscale;

pub use contract::{contract, contract_with_budget, full_trace, ContractionPlan, DEFAULT_MEMORY_BUDGET};
pub use logscale::LogScaled;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Identifier carried by a tensor axis (a variable index).
pub type Label = usize;

/// One tensor axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Axis {
    pub var: Label,
    pub dim: usize,
}

impl Axis {
    pub fn new(var: Label, dim: usize) -> Self {
        Axis { var, dim }
    }
}

/// Dense tensor with labeled axes, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTensor<T> {
    axes: Vec<Axis>,
    values: Vec<T>,
}

pub(crate) fn axes_len(axes: &[Axis]) -> u128 {
    axes.iter().map(|a| a.dim as u128).product()
}

fn check_axes(axes: &[Axis]) -> Result<()> {
    for (k, a) in axes.iter().enumerate() {
        if a.dim == 0 {
            return Err(Error::ShapeMismatch(format!("axis {} has dimension 0", a.var)));
        }
        if axes[..k].iter().any(|b| b.var == a.var) {
            return Err(Error::RepeatedVariable(a.var.to_string()));
        }
    }
    Ok(())
}

impl<T: Scalar> LabeledTensor<T> {
    pub fn new(axes: Vec<Axis>, values: Vec<T>) -> Result<Self> {
        check_axes(&axes)?;
        let n = axes_len(&axes);
        if n != values.len() as u128 {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} entries",
                values.len(),
                n
            )));
        }
        Ok(LabeledTensor { axes, values })
    }

    pub fn scalar(v: T) -> Self {
        LabeledTensor { axes: Vec::new(), values: vec![v] }
    }

    pub fn filled(axes: Vec<Axis>, v: T) -> Result<Self> {
        check_axes(&axes)?;
        let n = axes_len(&axes) as usize;
        Ok(LabeledTensor { axes, values: vec![v; n] })
    }

    pub fn ones(axes: Vec<Axis>) -> Result<Self> {
        Self::filled(axes, T::one())
    }

    /// Unit-sum constant tensor.
    pub fn uniform(axes: Vec<Axis>) -> Result<Self> {
        let n = axes_len(&axes);
        Self::filled(axes, T::one() / T::of(n as f64))
    }

    /// Tensor that is one when every index is equal and zero otherwise.
    pub fn delta(axes: Vec<Axis>) -> Result<Self> {
        if let Some(first) = axes.first() {
            if axes.iter().any(|a| a.dim != first.dim) {
                return Err(Error::ShapeMismatch("delta axes must share a dimension".into()));
            }
        }
        Self::from_fn(axes, |idx| {
            if idx.windows(2).all(|w| w[0] == w[1]) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn from_fn(axes: Vec<Axis>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        check_axes(&axes)?;
        let n = axes_len(&axes) as usize;
        let mut values = Vec::with_capacity(n);
        let mut idx = vec![0usize; axes.len()];
        for _ in 0..n {
            values.push(f(&idx));
            for k in (0..axes.len()).rev() {
                idx[k] += 1;
                if idx[k] < axes[k].dim {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(LabeledTensor { axes, values })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.axes.iter().map(|a| a.var)
    }

    pub fn has(&self, label: Label) -> bool {
        self.axes.iter().any(|a| a.var == label)
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.axes.len()];
        for k in (0..self.axes.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].dim;
        }
        s
    }

    /// Entry at a multi-index given in this tensor's axis order.
    pub fn get(&self, idx: &[usize]) -> T {
        let mut off = 0;
        for (a, &i) in self.axes.iter().zip(idx) {
            off = off * a.dim + i;
        }
        self.values[off]
    }

    /// Entry selected by a global assignment indexed by label.
    pub fn eval(&self, assignment: &[usize]) -> T {
        let mut off = 0;
        for a in &self.axes {
            off = off * a.dim + assignment[a.var];
        }
        self.values[off]
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn scale(&mut self, c: T) {
        for v in &mut self.values {
            *v = *v * c;
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        LabeledTensor { axes: self.axes.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// L1 normalization; returns the unit-sum tensor and the stripped constant.
    pub fn normalize(&self) -> Result<(Self, LogScaled<T>)> {
        let s = self.sum();
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::ZeroTensor);
        }
        let inv = T::one() / s;
        Ok((self.map(|v| v * inv), LogScaled::from_value(s)))
    }

    /// Same tensor with axes reordered to `order`.
    pub fn permuted(&self, order: &[Label]) -> Result<Self> {
        if order.len() != self.axes.len() {
            return Err(Error::ShapeMismatch("permutation length".into()));
        }
        contract(&[self], order)
    }

    /// Largest entrywise difference after aligning axes by label.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        let order: Vec<Label> = self.labels().collect();
        let o = other.permuted(&order)?;
        if o.axes != self.axes {
            return Err(Error::ShapeMismatch("axes differ".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&o.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max))
    }

    /// Sum over every axis except `keep`.
    pub fn marginal(&self, keep: &[Label]) -> Result<Self> {
        contract(&[self], keep)
    }
}
