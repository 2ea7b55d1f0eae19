//! Sufficient dimension reduction through inverse conditional mean and
//! variance independence matrices, with the simulation and evaluation
//! machinery used to compare them against classical baselines.

pub mod error;
pub mod estimators;
pub mod evaluate;
pub mod kernels;
pub mod linalg;
pub mod simgen;

pub use error::{Result, SdrError};
pub use estimators::{candidate_matrix, estimate_subspace, DataSet, Method, MethodSpec};
pub use kernels::{KernelFamily, KernelSpec};
pub use linalg::{subspace_distance, trace_correlation, SubspaceEstimate, SymmetricMatrix};
