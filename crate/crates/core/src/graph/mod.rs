//! Factor-graph data model, class detection and simplified views.

mod components;
mod cycles;
mod io;
mod view;

pub use components::connected_components;
pub use cycles::{longest_cycle_upto, longest_cycle_with_budget, CycleBound, DEFAULT_CYCLE_BUDGET};
pub use io::{GraphFile, GraphFileFactor};
pub use view::{simplified_view, Carried, NodeRef, SgEdge, SimpleGraph, ViewMode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{Axis, LabeledTensor};

pub type VarId = usize;
pub type FactorId = usize;

/// Structural class of a factor graph, from most to least specific.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphClass {
    Chain,
    Network,
    TensorNetwork,
    General,
}

impl std::fmt::Display for GraphClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GraphClass::Chain => "chain",
            GraphClass::Network => "network",
            GraphClass::TensorNetwork => "tensor-network",
            GraphClass::General => "general",
        };
        f.write_str(s)
    }
}

/// A factor before validation: names refer to declared variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorDescriptor<T> {
    pub name: String,
    pub scope: Vec<String>,
    pub values: Vec<T>,
    pub delta: bool,
}

impl<T> FactorDescriptor<T> {
    pub fn new(name: impl Into<String>, scope: &[&str], values: Vec<T>) -> Self {
        FactorDescriptor {
            name: name.into(),
            scope: scope.iter().map(|s| s.to_string()).collect(),
            values,
            delta: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor<T> {
    pub name: String,
    pub scope: Vec<VarId>,
    pub table: LabeledTensor<T>,
    /// Structural copy tensor introduced by a transform.
    pub delta: bool,
}

/// Validated factor graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph<T> {
    alphabet_size: usize,
    var_names: Vec<String>,
    var_dims: Vec<usize>,
    factors: Vec<Factor<T>>,
    var_factors: Vec<Vec<FactorId>>,
}

/// Builds a graph whose variables all take values in `0..alphabet_size`.
pub fn build_factor_graph<T: Scalar>(
    alphabet_size: usize,
    variables: &[String],
    factors: Vec<FactorDescriptor<T>>,
) -> Result<FactorGraph<T>> {
    FactorGraph::with_dims(alphabet_size, variables, &vec![alphabet_size; variables.len()], factors)
}

impl<T: Scalar> FactorGraph<T> {
    /// Like [`build_factor_graph`] but with a dimension per variable, which
    /// transforms need for composite variables.
    pub fn with_dims(
        alphabet_size: usize,
        variables: &[String],
        dims: &[usize],
        descriptors: Vec<FactorDescriptor<T>>,
    ) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::InvalidSize(format!("alphabet size {alphabet_size} < 2")));
        }
        if variables.is_empty() {
            return Err(Error::EmptyGraph);
        }
        if dims.len() != variables.len() || dims.iter().any(|&d| d < 1) {
            return Err(Error::ShapeMismatch("variable dimensions".into()));
        }
        let mut index = std::collections::HashMap::new();
        for (k, v) in variables.iter().enumerate() {
            if index.insert(v.as_str(), k).is_some() {
                return Err(Error::InconsistentSpec(format!("variable {v} declared twice")));
            }
        }
        let mut factors = Vec::with_capacity(descriptors.len());
        let mut var_factors = vec![Vec::new(); variables.len()];
        for (fid, d) in descriptors.into_iter().enumerate() {
            if d.scope.is_empty() {
                return Err(Error::ShapeMismatch(format!("factor {} has an empty scope", d.name)));
            }
            let mut scope = Vec::with_capacity(d.scope.len());
            for name in &d.scope {
                let v = *index.get(name.as_str()).ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                if scope.contains(&v) {
                    return Err(Error::RepeatedVariable(name.clone()));
                }
                scope.push(v);
            }
            if d.values.iter().any(|x| !(x.is_finite() && *x >= T::zero())) {
                return Err(Error::NegativeEntry(d.name.clone()));
            }
            let axes: Vec<Axis> = scope.iter().map(|&v| Axis::new(v, dims[v])).collect();
            let table = LabeledTensor::new(axes, d.values)
                .map_err(|e| Error::ShapeMismatch(format!("factor {}: {e}", d.name)))?;
            for &v in &scope {
                var_factors[v].push(fid);
            }
            factors.push(Factor { name: d.name, scope, table, delta: d.delta });
        }
        if let Some(v) = var_factors.iter().position(|f| f.is_empty()) {
            return Err(Error::IsolatedVariable(variables[v].clone()));
        }
        Ok(FactorGraph {
            alphabet_size,
            var_names: variables.to_vec(),
            var_dims: dims.to_vec(),
            factors,
            var_factors,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn num_variables(&self) -> usize {
        self.var_names.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v]
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn var_dim(&self, v: VarId) -> usize {
        self.var_dims[v]
    }

    pub fn var_dims(&self) -> &[usize] {
        &self.var_dims
    }

    pub fn var_index(&self, name: &str) -> Option<VarId> {
        self.var_names.iter().position(|n| n == name)
    }

    pub fn factor_index(&self, name: &str) -> Option<FactorId> {
        self.factors.iter().position(|f| f.name == name)
    }

    pub fn factors(&self) -> &[Factor<T>] {
        &self.factors
    }

    pub fn factor(&self, a: FactorId) -> &Factor<T> {
        &self.factors[a]
    }

    /// Factors depending on `v`, in factor order (the set ∂v).
    pub fn factors_of(&self, v: VarId) -> &[FactorId] {
        &self.var_factors[v]
    }

    pub fn degree(&self, v: VarId) -> usize {
        self.var_factors[v].len()
    }

    pub fn max_scope(&self) -> usize {
        self.factors.iter().map(|f| f.scope.len()).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.var_factors.iter().map(|f| f.len()).max().unwrap_or(0)
    }

    pub fn tables(&self) -> Vec<&LabeledTensor<T>> {
        self.factors.iter().map(|f| &f.table).collect()
    }

    /// Descriptors that rebuild this graph.
    pub fn descriptors(&self) -> Vec<FactorDescriptor<T>> {
        self.factors
            .iter()
            .map(|f| FactorDescriptor {
                name: f.name.clone(),
                scope: f.scope.iter().map(|&v| self.var_names[v].clone()).collect(),
                values: f.table.values().to_vec(),
                delta: f.delta,
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        connected_components(self).len() == 1
    }

    /// Same structure with every table mapped through `f`.
    pub fn map_tables(&self, f: impl Fn(FactorId, &LabeledTensor<T>) -> LabeledTensor<T>) -> Self {
        let mut g = self.clone();
        for (a, fac) in g.factors.iter_mut().enumerate() {
            fac.table = f(a, &self.factors[a].table);
        }
        g
    }

    /// Converts every table to another scalar type.
    pub fn cast<U: Scalar>(&self) -> FactorGraph<U> {
        let descs = self
            .descriptors()
            .into_iter()
            .map(|d| FactorDescriptor {
                name: d.name,
                scope: d.scope,
                values: d.values.iter().map(|v| U::of(v.f64())).collect(),
                delta: d.delta,
            })
            .collect();
        FactorGraph::with_dims(self.alphabet_size, &self.var_names, &self.var_dims, descs)
            .expect("casting preserves validity")
    }
}

/// Most specific class of `fg`.
pub fn classify<T: Scalar>(fg: &FactorGraph<T>) -> GraphClass {
    let net = fg.max_scope() <= 2;
    let tn = fg.max_degree() <= 2;
    match (net, tn) {
        (true, true) => GraphClass::Chain,
        (true, false) => GraphClass::Network,
        (false, true) => GraphClass::TensorNetwork,
        (false, false) => GraphClass::General,
    }
}

impl GraphClass {
    pub fn is_network(self) -> bool {
        matches!(self, GraphClass::Chain | GraphClass::Network)
    }

    pub fn is_tensor_network(self) -> bool {
        matches!(self, GraphClass::Chain | GraphClass::TensorNetwork)
    }
}
