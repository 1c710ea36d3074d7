//! Functional calculus for pairs of non-commuting Hermitian matrices.

pub mod bench;
pub mod besov;
pub mod doi;
pub mod ensemble;
pub mod error;
pub mod functions;
pub mod linalg;
pub mod oracle;
pub mod schur;
pub mod sincrep;
pub mod toi;

pub use error::{Error, Result};
