use thiserror::Error;

use crate::set::{SetKind, Violation};

#[derive(Debug, Error)]
pub enum CpzError {
    #[error("invalid set: {}", join(.0))]
    InvalidSet(Vec<Violation>),

    #[error("lambda has length {found}, set has {expected} factors")]
    LambdaLength { expected: usize, found: usize },

    #[error("map matrix has {found} columns, set has dimension {expected}")]
    MapDimension { expected: usize, found: usize },

    #[error("scaling has {found} entries, expected {expected}")]
    ScaleLength { expected: usize, found: usize },

    #[error("ambient dimension mismatch: inner set has d = {inner}, outer set has d = {outer}")]
    DimensionMismatch { inner: usize, outer: usize },

    #[error(
        "{matrix} of the outer set has rank {rank}, full column rank {required} is required; \
         {hint}"
    )]
    RankDeficient { matrix: &'static str, rank: usize, required: usize, hint: &'static str },

    #[error("{side} set is a {kind}, the linear test needs a constrained zonotope or zonotope")]
    NotLinear { side: &'static str, kind: SetKind },

    #[error("certificate shape mismatch: {0}")]
    CertificateShape(String),

    #[error("malformed feasibility system: {0}")]
    MalformedSystem(String),

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
