use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// `α±/(2T)` is not representable even after exponent shifting.
    #[error("thermal exponent overflow (alpha/2T = {exponent:e})")]
    Overflow { exponent: f64 },
    #[error("closed forms are only valid at the degeneracy point ng1 = ng2 = 1/2 (got ng1 = {ng1}, ng2 = {ng2})")]
    NotDegeneracyPoint { ng1: f64, ng2: f64 },
    #[error("operator is not unitary (max |U U† - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("not a valid density matrix: {0}")]
    InvalidState(String),
    #[error("unknown figure preset '{0}' (expected fig1, fig2, fig3 or fig4)")]
    UnknownPreset(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
