use num_complex::Complex64;
use thiserror::Error;

use crate::model::ComplexEnergy;
use crate::transfer::MatrixEntry;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `M22` vanishes at the requested energy; transmission diverges there.
    #[error("spectral singularity hit at E = {energy}")]
    SpectralSingularityHit { energy: ComplexEnergy },

    #[error("pole proximity at E = {energy}: {entry} = {value}")]
    PoleProximity {
        energy: ComplexEnergy,
        entry: MatrixEntry,
        value: Complex64,
    },

    #[error("non-convergence: {0}")]
    NonConvergence(String),

    #[error("zero {energy} of {entry} left the search window at lambdaL = {lambda_l}")]
    EscapingZero {
        energy: ComplexEnergy,
        entry: MatrixEntry,
        lambda_l: f64,
    },

    #[error("no threshold crossing up to lambdaL = {max_lambda_l}: {detail}")]
    ThresholdNotFound { max_lambda_l: f64, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
