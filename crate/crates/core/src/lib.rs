//! Standard quantum detailed balance for finite-dimensional Lindblad
//! generators: superoperators, special representations, the symmetric-unitary
//! characterization, zero-EPR representations and entropy production.

pub mod detailed_balance;
pub mod entropy;
pub mod error;
pub mod involution;
pub mod lindblad;
pub mod representations;
pub mod linalg;

pub use error::{Error, Result};
