//! Pairwise fair representations.
//!
//! Learns a low-dimensional linear (or kernelized) projection that preserves
//! local neighborhoods of the input data while pulling together individuals
//! linked in an elicited fairness graph. The learned representation feeds an
//! out-of-the-box classifier, which is then scored for utility, individual
//! fairness and group fairness.
//!
//! The numeric core (`linalg`, `graph`, `model`, `downstream`) is generic over
//! the scalar type via [`Scalar`]; concrete `f64` aliases live at the crate
//! root. Data ingestion and the synthetic generator work in `f64`.

pub mod data;
pub mod downstream;
mod error;
pub mod graph;
pub mod linalg;
pub mod model;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dense symmetric matrix over `f64`.
pub type SymmetricMatrix = linalg::SymmetricMatrix<f64>;
/// Smallest-eigenpair bundle over `f64`.
pub type EigenPairs = linalg::EigenPairs<f64>;
/// Similarity graph over `f64` weights.
pub type SimilarityGraph = graph::SimilarityGraph<f64>;
/// Graph Laplacian over `f64`.
pub type LaplacianMatrix = graph::LaplacianMatrix<f64>;
/// Linear projection model over `f64`.
pub type PfrModel = model::PfrModel<f64>;
/// Kernelized projection model over `f64`.
pub type KernelPfrModel = model::KernelPfrModel<f64>;
/// Logistic classifier over `f64`.
pub type LogisticModel = downstream::LogisticModel<f64>;

/// Single-precision aliases for callers that trade accuracy for memory.
pub mod f32_types {
    pub type SymmetricMatrix = crate::linalg::SymmetricMatrix<f32>;
    pub type EigenPairs = crate::linalg::EigenPairs<f32>;
    pub type SimilarityGraph = crate::graph::SimilarityGraph<f32>;
    pub type LaplacianMatrix = crate::graph::LaplacianMatrix<f32>;
    pub type PfrModel = crate::model::PfrModel<f32>;
    pub type KernelPfrModel = crate::model::KernelPfrModel<f32>;
    pub type LogisticModel = crate::downstream::LogisticModel<f32>;
}
