use thiserror::Error;

/// Every failure the protocol library can report.
///
/// Protocol-level variants carry no payload so that an abort reveals nothing
/// beyond which check failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed encoding: {0}")]
    Decode(&'static str),
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("length mismatch: expected {expected} bytes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid group element")]
    InvalidPoint,
    #[error("malformed identity: {0}")]
    IdError(&'static str),
    #[error("plaintext must be non-empty")]
    EmptyPlaintext,
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("identity already registered")]
    AlreadyRegistered,
    #[error("timestamp outside the freshness window")]
    StaleTimestamp,
    #[error("replayed login request")]
    ReplayDetected,
    #[error("MAC verification failed")]
    BadMac,
    #[error("decrypted identities do not match")]
    IdMismatch,
    #[error("sensor is not registered")]
    UnknownSensor,
    #[error("authenticator mismatch")]
    BadAuthenticator,
    #[error("gateway refused the password update")]
    UpdateRefused,
    #[error("session is not in a state that accepts this input")]
    InvalidState,
    #[error("instance has not accepted")]
    NotAccepted,
    #[error("unknown entity")]
    UnknownEntity,
    #[error("candidate space does not contain the secret")]
    NotFound,
}

impl Error {
    /// Stable short name used in transcripts and CLI verdicts.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Decode(_) => "DecodeError",
            Error::UnknownType(_) => "UnknownType",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::InvalidPoint => "InvalidPoint",
            Error::IdError(_) => "IdError",
            Error::EmptyPlaintext => "EmptyPlaintext",
            Error::Params(_) => "ParamsError",
            Error::AlreadyRegistered => "AlreadyRegistered",
            Error::StaleTimestamp => "StaleTimestamp",
            Error::ReplayDetected => "ReplayDetected",
            Error::BadMac => "BadMac",
            Error::IdMismatch => "IdMismatch",
            Error::UnknownSensor => "UnknownSensor",
            Error::BadAuthenticator => "BadAuthenticator",
            Error::UpdateRefused => "UpdateRefused",
            Error::InvalidState => "InvalidState",
            Error::NotAccepted => "NotAccepted",
            Error::UnknownEntity => "UnknownEntity",
            Error::NotFound => "NotFound",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
