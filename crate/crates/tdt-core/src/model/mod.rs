//! Core model: versioned library instances, release chains, dependency
//! snapshots, d-matrices and time dependency trees.

mod chain;
mod dmatrix;
mod error;
pub mod export;
mod ids;
mod snapshot;
mod tdt;
mod version;

pub use chain::{build_cchains, CChain};
pub use dmatrix::{contract_row, DCell, DMatrix};
pub use error::ModelError;
pub use ids::{LibraryId, LibraryInstance};
pub use snapshot::DependencySnapshot;
pub use tdt::{build_tdt, TimeDependencyTree};
pub use version::{QualifierRule, Version};
