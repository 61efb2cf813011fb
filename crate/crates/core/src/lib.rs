//! Design and verification of compressive covariance samplers.

pub mod admissibility;
pub mod bounds;
pub mod construct;
pub mod error;
pub mod htbasis;
pub mod linalg;
pub mod randsamp;
pub mod scheme;
pub mod search;
pub mod sets;
pub mod table;

pub use error::{Error, Result};
