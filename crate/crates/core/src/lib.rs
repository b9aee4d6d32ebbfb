//! Constrained polynomial zonotopes and sufficient inclusion tests.

pub mod document;
pub mod encode;
mod error;
pub mod fixtures;
pub mod linalg;
pub mod oracle;
pub mod sampling;
pub mod set;
pub mod solve;

pub use error::CpzError;
pub use set::{ConPolyZonotope, Evaluation, LambdaPoint, SetKind, Violation};
