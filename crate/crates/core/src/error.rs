use num_bigint::BigInt;
use thiserror::Error;

use crate::lattice::{ModelId, SurfaceKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("class lives on model {found}, expected model {expected}")]
    MismatchedModel { expected: ModelId, found: ModelId },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown curve `{0}`")]
    UnknownCurve(String),

    #[error("expected {expected} multiplicities, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("map `{0}` is not a double cover")]
    NotACover(String),

    #[error("map `{0}` is not a blow-up")]
    NotABlowUp(String),

    #[error("class is not a pullback minus a non-negative exceptional combination: {0}")]
    NotAStrictTransformShape(String),

    /// The witness pairs non-negatively with the target. This proves nothing
    /// either way; in particular it is not evidence of effectivity.
    #[error("pairing {pairing} with witness `{witness}` is non-negative, no certificate")]
    NotCertified { witness: String, pairing: BigInt },

    #[error("non-effectivity by negative pairing needs an abelian surface, `{model}` is {kind}")]
    WrongSurfaceKind { model: String, kind: SurfaceKind },

    #[error("enumeration grid has {points} points, cap is {cap}")]
    BoundTooLarge { points: BigInt, cap: u64 },

    #[error("registry has {size} curves, order enumeration supports at most {max}")]
    RegistryTooLarge { size: usize, max: usize },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("type error at byte {offset}: {message}")]
    Type { offset: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
