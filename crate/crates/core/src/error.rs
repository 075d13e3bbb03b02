use thiserror::Error;

/// Errors produced by the witness library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("invalid party selection: {0}")]
    InvalidParties(String),

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    /// A reshaped Schmidt operator came out non-Hermitian, which happens when
    /// degenerate coefficients were not resolved.
    #[error("Schmidt operator {index} is not Hermitian (residual {residual:.3e})")]
    NonHermitianSchmidtOperator { index: usize, residual: f64 },

    #[error("operator family is not orthonormal (Gram residual {0:.3e})")]
    NotOrthonormal(f64),

    #[error("coefficients are not sorted in decreasing order")]
    UnsortedCoefficients,

    #[error("closed form available only for k in {{2, 3, 4}}, got k = {0}; use lambda_k_bruteforce")]
    UnsupportedSchmidtNumber(usize),

    /// Tr(W sigma) < 0: the noise state is itself detected by the witness.
    #[error("witness detects the noise state (Tr(W sigma) = {0:.3e})")]
    NoiseDetected(f64),

    /// Tr(W rho) = Tr(W sigma): visibility gradient undefined.
    #[error("visibility denominator vanishes")]
    DegenerateVisibility,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown state name: {0}")]
    UnknownState(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error comes from bad input (names, files, parameters)
    /// rather than from a numerical routine.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch(_)
                | Error::NotHermitian { .. }
                | Error::InvalidParties(_)
                | Error::NotAState(_)
                | Error::NotNormalized { .. }
                | Error::UnsupportedSchmidtNumber(_)
                | Error::InvalidParameter(_)
                | Error::UnknownState(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}
