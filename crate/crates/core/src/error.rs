use thiserror::Error;

use crate::inequality::RankClass;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid Schmidt ratio {0}: must be finite and non-negative")]
    InvalidRatio(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rank class {class:?} completion is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    InfeasibleCompletion { class: RankClass, min_eig: f64 },

    #[error("rank class {0:?} needs {1} projective settings for Alice's third measurement")]
    MissingSetting(RankClass, usize),

    #[error("parameter vector has length {got}, layout {class:?} expects {expected}")]
    LayoutMismatch {
        class: RankClass,
        expected: usize,
        got: usize,
    },

    #[error("efficiency {0} outside [0, 1]")]
    EfficiencyOutOfRange(f64),

    #[error("joint-term denominator {0:.3e} is not positive; scenario does not violate")]
    NonPositiveDenominator(f64),

    #[error("no threshold efficiency in (0, 1]: value at full efficiency is {0:.9}")]
    NoThreshold(f64),

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("missing optimization record: {0}")]
    MissingRecord(String),

    #[error("empty grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
