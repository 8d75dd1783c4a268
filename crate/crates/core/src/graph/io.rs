//! JSON graph files.
//!
//! ```json
//! {"alphabet_size": 2, "variables": ["a", "b"],
//!  "factors": [{"id": "f", "scope": ["a", "b"], "values": [1, 2, 3, 4]}]}
//! ```
//! Values are row-major over the scope. `variable_dims` (one entry per
//! variable) is only written when some variable is a composite with a
//! dimension other than `alphabet_size`.

use serde::{Deserialize, Serialize};

use super::{FactorDescriptor, FactorGraph};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFileFactor {
    pub id: String,
    pub scope: Vec<String>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub delta: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub alphabet_size: usize,
    pub variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable_dims: Option<Vec<usize>>,
    pub factors: Vec<GraphFileFactor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl<T: Scalar> FactorGraph<T> {
    pub fn to_file(&self, metadata: Option<serde_json::Value>) -> GraphFile {
        let dims = self.var_dims();
        GraphFile {
            alphabet_size: self.alphabet_size(),
            variables: self.var_names().to_vec(),
            variable_dims: dims.iter().any(|&d| d != self.alphabet_size()).then(|| dims.to_vec()),
            factors: self
                .descriptors()
                .into_iter()
                .map(|d| GraphFileFactor {
                    id: d.name,
                    scope: d.scope,
                    values: d.values.iter().map(|v| v.f64()).collect(),
                    delta: d.delta,
                })
                .collect(),
            metadata,
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        let dims = match &file.variable_dims {
            Some(d) => d.clone(),
            None => vec![file.alphabet_size; file.variables.len()],
        };
        let descs = file
            .factors
            .iter()
            .map(|f| FactorDescriptor {
                name: f.id.clone(),
                scope: f.scope.clone(),
                values: f.values.iter().map(|&v| T::of(v)).collect(),
                delta: f.delta,
            })
            .collect();
        FactorGraph::with_dims(file.alphabet_size, &file.variables, &dims, descs)
    }

    pub fn to_json(&self, metadata: Option<serde_json::Value>) -> String {
        serde_json::to_string_pretty(&self.to_file(metadata)).expect("graph files serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(&file)
    }
}
