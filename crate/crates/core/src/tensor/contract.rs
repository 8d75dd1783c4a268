use super::{axes_len, Axis, Label, LabeledTensor, LogScaled};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest intermediate tensor (in entries) a contraction may allocate.
pub const DEFAULT_MEMORY_BUDGET: u128 = 1 << 26;

/// Iteration spaces up to this size get a precomputed index table.
const TABLE_LIMIT: u128 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Input(usize),
    Temp(usize),
}

#[derive(Debug, Clone)]
enum Kernel {
    Table(Vec<[u32; 3]>),
    Stream { dims: Vec<usize>, sa: Vec<usize>, sb: Vec<usize>, so: Vec<usize> },
}

#[derive(Debug, Clone)]
struct Step {
    lhs: Slot,
    rhs: Option<Slot>,
    out_len: usize,
    kernel: Kernel,
}

/// Pairwise contraction schedule for a fixed list of input shapes.
///
/// Built once and executed many times; message-passing engines compile one
/// plan per channel update.
#[derive(Debug, Clone)]
pub struct ContractionPlan {
    inputs: Vec<Vec<Axis>>,
    steps: Vec<Step>,
    out_axes: Vec<Axis>,
    result: Option<Slot>,
}

fn strides_of(axes: &[Axis]) -> Vec<(Label, usize)> {
    let mut s = 1usize;
    let mut out = vec![(0, 0); axes.len()];
    for k in (0..axes.len()).rev() {
        out[k] = (axes[k].var, s);
        s *= axes[k].dim;
    }
    out
}

fn stride_in(strides: &[(Label, usize)], l: Label) -> usize {
    strides.iter().find(|(v, _)| *v == l).map(|(_, s)| *s).unwrap_or(0)
}

/// Calls `f(ia, ib, io)` for every point of the iteration space.
fn odometer(dims: &[usize], sa: &[usize], sb: &[usize], so: &[usize], mut f: impl FnMut(usize, usize, usize)) {
    let n = dims.len();
    let mut idx = vec![0usize; n];
    let (mut ia, mut ib, mut io) = (0usize, 0usize, 0usize);
    loop {
        f(ia, ib, io);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            ia += sa[k];
            ib += sb[k];
            io += so[k];
            if idx[k] < dims[k] {
                break;
            }
            ia -= sa[k] * dims[k];
            ib -= sb[k] * dims[k];
            io -= so[k] * dims[k];
            idx[k] = 0;
        }
    }
}

fn make_kernel(lhs: &[Axis], rhs: &[Axis], out: &[Axis]) -> Kernel {
    let mut space: Vec<Axis> = out.to_vec();
    for a in lhs.iter().chain(rhs) {
        if !space.iter().any(|b| b.var == a.var) {
            space.push(*a);
        }
    }
    let (pa, pb, po) = (strides_of(lhs), strides_of(rhs), strides_of(out));
    let dims: Vec<usize> = space.iter().map(|a| a.dim).collect();
    let sa: Vec<usize> = space.iter().map(|a| stride_in(&pa, a.var)).collect();
    let sb: Vec<usize> = space.iter().map(|a| stride_in(&pb, a.var)).collect();
    let so: Vec<usize> = space.iter().map(|a| stride_in(&po, a.var)).collect();
    if axes_len(&space) <= TABLE_LIMIT {
        let mut table = Vec::with_capacity(axes_len(&space) as usize);
        odometer(&dims, &sa, &sb, &so, |a, b, o| table.push([a as u32, b as u32, o as u32]));
        Kernel::Table(table)
    } else {
        Kernel::Stream { dims, sa, sb, so }
    }
}

impl ContractionPlan {
    /// Greedy schedule: repeatedly contract the pair whose result is smallest.
    pub fn new(inputs: &[Vec<Axis>], keep: &[Label], budget: u128) -> Result<Self> {
        let mut dims: Vec<(Label, usize)> = Vec::new();
        for shape in inputs {
            for a in shape {
                match dims.iter().find(|(l, _)| *l == a.var) {
                    Some(&(_, d)) if d != a.dim => return Err(Error::DimensionMismatch(a.var)),
                    Some(_) => {}
                    None => dims.push((a.var, a.dim)),
                }
            }
        }
        let mut out_axes = Vec::with_capacity(keep.len());
        for &l in keep {
            match dims.iter().find(|(v, _)| *v == l) {
                Some(&(_, d)) => out_axes.push(Axis::new(l, d)),
                None => return Err(Error::UnknownAxis(l)),
            }
        }
        let mut alive: Vec<(Slot, Vec<Axis>)> =
            inputs.iter().enumerate().map(|(k, s)| (Slot::Input(k), s.clone())).collect();
        let mut steps = Vec::new();
        let needed = |l: Label, alive: &[(Slot, Vec<Axis>)], skip: &[usize]| -> bool {
            keep.contains(&l)
                || alive
                    .iter()
                    .enumerate()
                    .any(|(k, (_, ax))| !skip.contains(&k) && ax.iter().any(|a| a.var == l))
        };
        while alive.len() > 1 {
            let mut best: Option<(u128, bool, usize, usize, Vec<Axis>)> = None;
            for p in 0..alive.len() {
                for q in p + 1..alive.len() {
                    let shared = alive[p].1.iter().any(|a| alive[q].1.iter().any(|b| b.var == a.var));
                    let mut res: Vec<Axis> = Vec::new();
                    for a in alive[p].1.iter().chain(&alive[q].1) {
                        if !res.iter().any(|b| b.var == a.var) && needed(a.var, &alive, &[p, q]) {
                            res.push(*a);
                        }
                    }
                    let size = axes_len(&res);
                    let better = match &best {
                        None => true,
                        Some((bs, bsh, _, _, _)) => size < *bs || (size == *bs && shared && !*bsh),
                    };
                    if better {
                        best = Some((size, shared, p, q, res));
                    }
                }
            }
            let (size, _, p, q, res) = best.expect("at least one pair");
            if size > budget {
                return Err(Error::MemoryBudgetExceeded(size));
            }
            let kernel = make_kernel(&alive[p].1, &alive[q].1, &res);
            let t = steps.len();
            steps.push(Step { lhs: alive[p].0, rhs: Some(alive[q].0), out_len: size as usize, kernel });
            alive.remove(q);
            alive[p] = (Slot::Temp(t), res);
        }
        let result = match alive.pop() {
            None => None,
            Some((slot, ax)) => {
                if ax == out_axes {
                    Some(slot)
                } else {
                    let kernel = make_kernel(&ax, &[], &out_axes);
                    let t = steps.len();
                    steps.push(Step {
                        lhs: slot,
                        rhs: None,
                        out_len: axes_len(&out_axes) as usize,
                        kernel,
                    });
                    Some(Slot::Temp(t))
                }
            }
        };
        if result.is_none() && !keep.is_empty() {
            return Err(Error::UnknownAxis(keep[0]));
        }
        Ok(ContractionPlan { inputs: inputs.to_vec(), steps, out_axes, result })
    }

    pub fn out_axes(&self) -> &[Axis] {
        &self.out_axes
    }

    pub fn input_axes(&self) -> &[Vec<Axis>] {
        &self.inputs
    }

    /// Runs the plan; input `k` must be laid out as `input_axes()[k]`.
    pub fn execute<T: Scalar>(&self, inputs: &[&[T]]) -> Vec<T> {
        self.run(inputs, false).0
    }

    /// Runs the plan, renormalizing every intermediate by its largest entry.
    /// Returns the scaled result and the natural log of the stripped factor.
    pub fn execute_scaled<T: Scalar>(&self, inputs: &[&[T]]) -> (Vec<T>, T) {
        self.run(inputs, true)
    }

    fn run<T: Scalar>(&self, inputs: &[&[T]], rescale: bool) -> (Vec<T>, T) {
        debug_assert_eq!(inputs.len(), self.inputs.len());
        let mut temps: Vec<Vec<T>> = Vec::with_capacity(self.steps.len());
        let mut log = T::zero();
        for step in &self.steps {
            let mut out = vec![T::zero(); step.out_len];
            {
                let get = |s: Slot| -> &[T] {
                    match s {
                        Slot::Input(k) => inputs[k],
                        Slot::Temp(k) => &temps[k],
                    }
                };
                let a = get(step.lhs);
                match (step.rhs, &step.kernel) {
                    (Some(r), Kernel::Table(tab)) => {
                        let b = get(r);
                        for &[ia, ib, io] in tab {
                            out[io as usize] = out[io as usize] + a[ia as usize] * b[ib as usize];
                        }
                    }
                    (None, Kernel::Table(tab)) => {
                        for &[ia, _, io] in tab {
                            out[io as usize] = out[io as usize] + a[ia as usize];
                        }
                    }
                    (rhs, Kernel::Stream { dims, sa, sb, so }) => {
                        let b = rhs.map(get);
                        odometer(dims, sa, sb, so, |ia, ib, io| {
                            let v = match b {
                                Some(b) => a[ia] * b[ib],
                                None => a[ia],
                            };
                            out[io] = out[io] + v;
                        });
                    }
                }
            }
            if rescale {
                let m = out.iter().copied().fold(T::zero(), T::max);
                if m > T::zero() {
                    let inv = T::one() / m;
                    for v in &mut out {
                        *v = *v * inv;
                    }
                    log = log + m.ln();
                }
            }
            temps.push(out);
        }
        let res = match self.result {
            None => vec![T::one()],
            Some(Slot::Input(k)) => inputs[k].to_vec(),
            Some(Slot::Temp(k)) => std::mem::take(&mut temps[k]),
        };
        (res, log)
    }
}

/// Contracts `tensors`, keeping the axes in `keep` (in that order).
pub fn contract<T: Scalar>(tensors: &[&LabeledTensor<T>], keep: &[Label]) -> Result<LabeledTensor<T>> {
    contract_with_budget(tensors, keep, DEFAULT_MEMORY_BUDGET)
}

pub fn contract_with_budget<T: Scalar>(
    tensors: &[&LabeledTensor<T>],
    keep: &[Label],
    budget: u128,
) -> Result<LabeledTensor<T>> {
    let shapes: Vec<Vec<Axis>> = tensors.iter().map(|t| t.axes().to_vec()).collect();
    let plan = ContractionPlan::new(&shapes, keep, budget)?;
    let data: Vec<&[T]> = tensors.iter().map(|t| t.values()).collect();
    let values = plan.execute(&data);
    LabeledTensor::new(plan.out_axes().to_vec(), values)
}

/// Full contraction in log-scaled form, immune to overflow and underflow.
pub fn full_trace<T: Scalar>(tensors: &[&LabeledTensor<T>]) -> Result<LogScaled<T>> {
    let shapes: Vec<Vec<Axis>> = tensors.iter().map(|t| t.axes().to_vec()).collect();
    let plan = ContractionPlan::new(&shapes, &[], DEFAULT_MEMORY_BUDGET)?;
    let data: Vec<&[T]> = tensors.iter().map(|t| t.values()).collect();
    let (v, log) = plan.execute_scaled(&data);
    let z = LogScaled::from_value(v[0]);
    Ok(z * LogScaled::from_log(log))
}
