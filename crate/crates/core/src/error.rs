use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range 1..={n}")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid Pauli string: {0}")]
    InvalidPauli(String),

    #[error("Pauli string with imaginary phase is not an observable")]
    NotObservable,

    #[error("{n} qubits exceeds the dense limit of {limit}")]
    TooManyQubits { n: usize, limit: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("post-selection has zero probability")]
    EmptyPostSelection,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("data format error at line {line}: {message}")]
    Format { line: u64, message: String },

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    #[error("unknown setting {0}")]
    UnknownSetting(String),

    #[error("no GHZ paradox on support {support:?}")]
    NoParadox { support: Vec<usize> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit status: 2 usage, 3 data format, 4 analysis failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Config(_)
            | Error::InvalidGraph(_)
            | Error::InvalidPauli(_)
            | Error::InvalidParameter(_)
            | Error::QubitOutOfRange { .. }
            | Error::TooManyQubits { .. }
            | Error::Io(_) => 2,
            Error::Format { .. }
            | Error::Json(_)
            | Error::Csv(_)
            | Error::MalformedCertificate(_)
            | Error::UnknownSetting(_)
            | Error::LengthMismatch { .. } => 3,
            Error::NoParadox { .. }
            | Error::DegenerateData(_)
            | Error::EmptyPostSelection
            | Error::InvalidState(_)
            | Error::NotObservable => 4,
        }
    }
}
