use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("classical code is not self-orthogonal: {0}")]
    NotSelfOrthogonal(String),

    #[error("code is not a CSS code")]
    NotCss,

    #[error("code is not {t}-error-correcting: {detail}")]
    NotCorrectable { t: usize, detail: String },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("circuit needs {qubits} qubits, the statevector engine supports at most {max}")]
    WidthOverflow { qubits: usize, max: usize },

    #[error("gate {0} is not supported by the Pauli-frame engine")]
    NonClifford(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ancilla preparation rejected {0} times in a row")]
    RetriesExhausted(usize),

    #[error("unknown name {0:?}")]
    UnknownName(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
