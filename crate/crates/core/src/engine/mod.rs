//! The Hamiltonian-times-vector engine: tensor-product basis, task
//! decomposition, matrix-free product and the stored-matrix alternative.

mod basis;
mod matvec;
mod plan;
mod stored;

pub use basis::{build_basis, cache_bytes, Basis, BasisOptions, BasisTimings, DEFAULT_MEMORY_BUDGET};
pub use matvec::{matvec, matvec_timed, LoopTimers, MatrixFree};
pub use plan::{plan_decomposition, DecompositionPlan, Task, TaskKind};
pub use stored::{build_stored_matrix, stored_matrix_bytes, stored_matvec, StoredMatrix};
