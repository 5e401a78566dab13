use thiserror::Error;

/// Crate-wide error type. Each stage has its own variants; the CLI maps the
/// variant name to a machine-parsable reason.
#[derive(Debug, Error)]
pub enum Error {
    #[error("MissingColumn: {0}")]
    MissingColumn(String),
    #[error("TypeMismatch: line {line}, column {column}: {value:?}")]
    TypeMismatch {
        line: usize,
        column: String,
        value: String,
    },
    #[error("EmptyFile: {0}")]
    EmptyFile(String),
    #[error("AllMissingColumn: {0}")]
    AllMissingColumn(String),
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("ClassTooSmall: class {class} has {count} rows")]
    ClassTooSmall { class: usize, count: usize },
    #[error("UnfittedEncoder")]
    UnfittedEncoder,
    #[error("WidthMismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("ProviderUnavailable: {0}")]
    ProviderUnavailable(String),
    #[error("EmptyIndex")]
    EmptyIndex,
    #[error("TooFewMinoritySamples: class {class} has {count} rows, need more than {k}")]
    TooFewMinoritySamples { class: usize, count: usize, k: usize },
    #[error("Diverged: {0}")]
    Diverged(String),
    #[error("NoSignal: {0}")]
    NoSignal(String),
    #[error("UnknownVariant: {0}")]
    UnknownVariant(String),
    #[error("LengthMismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("DegenerateLabels: {0}")]
    DegenerateLabels(String),
    #[error("NoDiscordantPairs")]
    NoDiscordantPairs,
    #[error("InvalidReps")]
    InvalidReps,
    #[error("EmptyBackground")]
    EmptyBackground,
    #[error("UnknownTag: {0}")]
    UnknownTag(String),
    #[error("IllegalTransition: {0}")]
    IllegalTransition(String),
    #[error("ModelMissing: {0}")]
    ModelMissing(String),
    #[error("CohortMissing: {0}")]
    CohortMissing(String),
    #[error("BadBundle: {0}")]
    BadBundle(String),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("Csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable variant name, used as the leading token of CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingColumn(_) => "MissingColumn",
            Error::TypeMismatch { .. } => "TypeMismatch",
            Error::EmptyFile(_) => "EmptyFile",
            Error::AllMissingColumn(_) => "AllMissingColumn",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::ClassTooSmall { .. } => "ClassTooSmall",
            Error::UnfittedEncoder => "UnfittedEncoder",
            Error::WidthMismatch { .. } => "WidthMismatch",
            Error::ProviderUnavailable(_) => "ProviderUnavailable",
            Error::EmptyIndex => "EmptyIndex",
            Error::TooFewMinoritySamples { .. } => "TooFewMinoritySamples",
            Error::Diverged(_) => "Diverged",
            Error::NoSignal(_) => "NoSignal",
            Error::UnknownVariant(_) => "UnknownVariant",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::DegenerateLabels(_) => "DegenerateLabels",
            Error::NoDiscordantPairs => "NoDiscordantPairs",
            Error::InvalidReps => "InvalidReps",
            Error::EmptyBackground => "EmptyBackground",
            Error::UnknownTag(_) => "UnknownTag",
            Error::IllegalTransition(_) => "IllegalTransition",
            Error::ModelMissing(_) => "ModelMissing",
            Error::CohortMissing(_) => "CohortMissing",
            Error::BadBundle(_) => "BadBundle",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
