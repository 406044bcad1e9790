use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: missing or unknown unit tag in `{record}`")]
    Unit { line: usize, record: String },

    #[error("invalid species data: {0}")]
    Validation(String),

    #[error("unknown level `{0}`")]
    UnknownLevel(String),

    #[error("invalid hyperfine state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a half-integer: {0}")]
    NotHalfInteger(f64),

    /// A detuning denominator fell inside the configured resonance floor.
    #[error("drive is within {floor:.3e} rad/s of resonance ({context}: detuning {detuning:.3e} rad/s)")]
    Resonance {
        context: String,
        detuning: f64,
        floor: f64,
    },

    #[error("geometry has zero sensitivity to the field amplitude")]
    ZeroSensitivity,

    #[error("measured shift {measured:.4e} has the opposite sign to the predicted {predicted:.4e}")]
    SignMismatch { measured: f64, predicted: f64 },

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("parameters are not identifiable: {0}")]
    Unidentifiable(String),

    #[error("Raman coupling vanishes between {0}")]
    NoCoupling(String),

    #[error("no Raman-connectable pair in `{0}`")]
    NoConnectablePair(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the physics of the request (resonances,
    /// zero couplings) rather than malformed input.
    pub fn is_physics(&self) -> bool {
        matches!(
            self,
            Error::Resonance { .. }
                | Error::ZeroSensitivity
                | Error::SignMismatch { .. }
                | Error::NonConvergence { .. }
                | Error::Unidentifiable(_)
                | Error::NoCoupling(_)
                | Error::NoConnectablePair(_)
        )
    }
}
