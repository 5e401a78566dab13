use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] triad_core::Error),
    #[error("NotFound: {0}")]
    NotFound(String),
    #[error("StaleRevision: alert {id} is at revision {current}, request was for {requested}")]
    StaleRevision { id: String, current: u64, requested: u64 },
    #[error("InvalidBody: {0}")]
    InvalidBody(String),
    #[error("InvalidConfig: {0}")]
    Config(String),
    #[error("Unauthorized")]
    Unauthorized,
    #[error("CorruptLog: line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::Core(e) => e.kind(),
            ServiceError::NotFound(_) => "NotFound",
            ServiceError::StaleRevision { .. } => "StaleRevision",
            ServiceError::InvalidBody(_) => "InvalidBody",
            ServiceError::Config(_) => "InvalidConfig",
            ServiceError::Unauthorized => "Unauthorized",
            ServiceError::CorruptLog { .. } => "CorruptLog",
        }
    }

    /// 0 ok, 1 runtime error, 2 missing artifact, 3 invalid configuration.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "ModelMissing" | "CohortMissing" => 2,
            "InvalidConfig" | "UnknownVariant" => 3,
            _ => 1,
        }
    }

    /// Single-line `Kind: message` form.
    pub fn line(&self) -> String {
        self.to_string().replace(['\n', '\r'], " ")
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Core(e.into())
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        ServiceError::Core(e.into())
    }
}

pub type Result<T> = std::result::Result<T, ServiceError>;
