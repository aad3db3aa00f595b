//! Selected configuration interaction ground states over a tensor-product
//! determinant basis, using a matrix-free Davidson eigensolver.
//!
//! The pipeline: [`integrals`] reads an FCIDUMP, [`engine`] builds the
//! alpha × beta basis with its excitation tables and diagonal, and
//! [`davidson`] finds the lowest eigenpair through repeated matrix-free
//! products. [`oracle`] holds the brute-force references the fast paths are
//! tested against, and [`harness`] drives everything from the command line.

pub mod connectivity;
pub mod davidson;
pub mod determinant;
pub mod engine;
mod error;
pub mod harness;
pub mod integrals;
pub mod oracle;
pub mod slater_condon;

pub use error::{Error, Result};
