//! Message passing for loopy graphical models.
//!
//! The crate covers factor graphs over a finite alphabet, their network and
//! tensor-network pictures, neighborhood constructions, several
//! belief-propagation engines (vanilla, KCN-style neighborhood messages on
//! networks, tensor networks and general models, and region-tree messages),
//! the inference formulas that turn converged messages into marginals,
//! partition functions, energies and entropies, class-changing transforms,
//! instance generators and a brute-force oracle.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod engine;
pub mod error;
pub mod graph;
pub mod inference;
pub mod models;
pub mod neighborhood;
pub mod scalar;
pub mod tensor;
pub mod transforms;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tensor = tensor::LabeledTensor<f64>;
pub type Tensor32 = tensor::LabeledTensor<f32>;
pub type Graph = graph::FactorGraph<f64>;
pub type Graph32 = graph::FactorGraph<f32>;
