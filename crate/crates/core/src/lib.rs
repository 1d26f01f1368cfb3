//! Graph-based semi-supervised learning with the regularized Laplacian
//! kernel `(I + beta L)^{-1}`, plus heat-kernel and PageRank-based
//! comparators, proximity measures derived from the kernel and the
//! experiment harness used to compare them.

// `!(x > 0.0)` is used on purpose so NaN is rejected; index loops mirror the maths.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classify;
pub mod datasets;
pub mod error;
pub mod experiments;
pub mod forest;
pub mod generators;
pub mod graph;
pub mod kernels;
pub mod proximity;
pub mod ridge;
pub mod solvers;
pub mod verify;
pub mod walk;

pub use classify::{ClassificationMatrix, GroundTruth, LabelMatrix, Seeds};
pub use error::{Error, Result};
pub use graph::{Graph, SparseSymMatrix, TransitionMatrix};
pub use kernels::{HeatKind, KernelKind, KernelSpec, PreparedKernel, WeightChoice};
pub use solvers::{SolveReport, SolverKind, SolverSpec};
